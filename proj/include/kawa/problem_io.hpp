#pragma once

// JSON (de)serialization of problem descriptions. The schema is strict:
// unknown or missing keys are parse errors.
//
// {
//   "alpha": 1, "beta": 1, "nonlinearity_power": 1,
//   "domain": {"kind": "right_half_line", "R": 40, "left_cutoff": 0},
//   "grid": {"h": 0.02, "tau": 0.0005, "T": 1},
//   "u0": {"preset": "zero"}, "mu": ..., "nu": ...,
//   "g": {"preset": "exp_decay", "scale": 1, "rate": 1},
//   "omega": {"preset": "cubic_exp"},
//   "phi": {"samples": [...]},
//   "p": 2, "g0": 0.375
// }
//
// Preset parameters sit next to the preset name; "p" may be the string "inf".

#include <filesystem>
#include <string>

#include <json.hpp>

#include "kawa/core_model.hpp"

namespace kawa {

nlohmann::json problem_to_json(const ProblemSpec& spec);
/// Throws ParseError on schema violations.
ProblemSpec problem_from_json(const nlohmann::json& j);

/// Throws ParseError (with byte position) on malformed JSON.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin = "input");

/// Canonical text form: two-space indent, sorted keys, trailing newline.
std::string dump_problem(const ProblemSpec& spec);

ProblemSpec read_problem_spec(const std::filesystem::path& path);
/// Parses and materializes; validation is left to the caller.
Problem load_problem(const std::filesystem::path& path);
void save_problem(const ProblemSpec& spec, const std::filesystem::path& path);

/// The canonical experiment: alpha = beta = 1, omega = x^3 e^{-x},
/// g = e^{-x}, phi = 0.01 t e^{-t}, T = 1, R = 40.
ProblemSpec canonical_problem_spec();

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kawa
