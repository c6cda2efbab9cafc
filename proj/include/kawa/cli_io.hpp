#pragma once

// Experiment orchestration behind the kawactl command-line tool: run
// configuration, report assembly and the on-disk artifacts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kawa/core_model.hpp"
#include "kawa/observation.hpp"
#include "kawa/solver.hpp"

namespace kawa {

enum class Command { Solve, ControlLinear, ControlNonlinear, MinimalTime, ScalingCheck, Diagnostics, Sweep };

std::string to_string(Command c);
/// Throws ConfigError for unknown names.
Command command_from_string(const std::string& s);

struct RunConfig {
    Command command = Command::Solve;
    std::filesystem::path problem_path;
    std::filesystem::path output_dir;
    double tol = 1e-9;
    int max_iter = 200;
    std::uint64_t seed = 1;
    /// Problem keys ("alpha", "grid.h", ...) or run options ("C_T", "delta", ...).
    std::map<std::string, std::string> overrides;

    /// Throws ConfigError unless tol > 0 and max_iter >= 1.
    void validate() const;
    nlohmann::json to_json() const;
};

struct RunReport {
    nlohmann::json config;      ///< resolved configuration, including the problem after overrides
    nlohmann::json validation;  ///< problem checks
    nlohmann::json results;     ///< per-module results
    nlohmann::json timing;      ///< wall-clock seconds; excluded from determinism comparisons
    nlohmann::json versions;
    int exit_code = 0;
    std::string error_category;
    std::string error_message;

    nlohmann::json to_json() const;
    static RunReport from_json(const nlohmann::json& j);
    /// report.json content without the timing section.
    nlohmann::json deterministic_json() const;
};

/// Runs one command and writes report.json plus the CSV / binary artifacts
/// into output_dir. Errors are captured in the report (exit_code, category);
/// the report is written in every case.
RunReport run(const RunConfig& config);

/// Sweep manifest: a JSON array of {"command", "problem", optional "tol",
/// "max_iter", "seed", "set": {key: value}}; problem paths are relative to
/// the manifest. Runs execute in parallel into output_dir/run_<i>; a summary is
/// written to output_dir/sweep.json. Returns the largest member exit code.
int run_sweep(const std::filesystem::path& manifest, const std::filesystem::path& output_dir);

// ---------------------------------------------------------------------------
// Artifacts.

/// CSV `t,x,u`, row-major in time, every time_stride-th level and
/// space_stride-th node (the last level and node are always included).
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path, std::size_t time_stride = 1,
                          std::size_t space_stride = 1);
void write_control_csv(const TimeSignal& f0, const std::filesystem::path& path);
void write_observation_csv(const ObservationTrace& trace, const std::filesystem::path& path);

/// Binary snapshot: "KAWA1", uint64 rows, uint64 cols, then doubles dt, dx,
/// x_left and the values row-major, all little-endian.
void write_snapshot(const Trajectory& traj, const std::filesystem::path& path);

struct Snapshot {
    Field values;
    double dt = 0.0;
    double dx = 0.0;
    double x_left = 0.0;
};
/// Throws ParseError on a bad header or truncated file.
Snapshot read_snapshot(const std::filesystem::path& path);

/// Stable report text: sorted keys, two-space indent, trailing newline.
std::string dump_report(const nlohmann::json& j);

}  // namespace kawa
