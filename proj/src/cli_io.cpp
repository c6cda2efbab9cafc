#include "kawa/cli_io.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "kawa/bourgain.hpp"
#include "kawa/control.hpp"
#include "kawa/error.hpp"
#include "kawa/kernels.hpp"
#include "kawa/problem_io.hpp"
#include "kawa/scaling.hpp"

namespace kawa {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

constexpr const char* kVersion = "0.1.0";

const std::set<std::string>& run_option_keys() {
    static const std::set<std::string> keys = {
        "C_T",           "gamma",          "nu_scaling_exponent", "phi_scaling_exponent", "delta",
        "forcing_amplitude", "linear",     "ensemble_size",       "certify",              "certification_steps",
        "probe_ensemble", "probe_n_time",  "probe_n_space",       "csv_time_stride",      "csv_space_stride",
        "snapshot",      "inner_tol"};
    return keys;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("override " + key + ": '" + value + "' is not a number");
    }
    if (used != value.size() || !std::isfinite(v)) {
        throw ConfigError("override " + key + ": '" + value + "' is not a finite number");
    }
    return v;
}

/// Run-level options after overrides.
class Options {
public:
    explicit Options(const std::map<std::string, std::string>& overrides) {
        for (const auto& [k, v] : overrides) {
            if (run_option_keys().count(k)) values_[k] = parse_double(k, v);
        }
    }
    double get(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<double> optional(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return values_.at(key);
    }

private:
    std::map<std::string, double> values_;
};

json override_value(const std::string& key, const std::string& value) {
    if (key == "nonlinearity_power") return static_cast<int>(parse_double(key, value));
    if (key == "p" && value == "inf") return "inf";
    if (key == "domain.kind" || key.ends_with(".preset")) return value;
    return parse_double(key, value);
}

/// Applies problem overrides ("alpha", "grid.h", "phi.scale", ...) to the problem JSON.
void apply_problem_overrides(json& problem, const std::map<std::string, std::string>& overrides) {
    for (const auto& [key, value] : overrides) {
        if (run_option_keys().count(key)) continue;
        const auto dot = key.find('.');
        if (dot == std::string::npos) {
            if (!problem.contains(key) || problem[key].is_object()) {
                throw ConfigError("unknown override key '" + key + "'");
            }
            problem[key] = override_value(key, value);
        } else {
            const std::string head = key.substr(0, dot);
            const std::string tail = key.substr(dot + 1);
            if (!problem.contains(head) || !problem[head].is_object()) {
                throw ConfigError("unknown override key '" + key + "'");
            }
            problem[head][tail] = override_value(key, value);
        }
    }
}

json number_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

json vector_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number_json(x));
    return a;
}

json bound_json(const BoundCheck& b) {
    return {{"name", b.name},           {"verdict", to_string(b.verdict)}, {"lhs", number_json(b.lhs)},
            {"rhs", number_json(b.rhs)}, {"constant", number_json(b.constant)}, {"detail", b.detail}};
}

json validation_json(const ValidationReport& r) {
    json checks = json::array();
    for (const Check& c : r.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"measured", number_json(c.measured)},
                          {"threshold", number_json(c.threshold)},
                          {"hypothesis", c.hypothesis},
                          {"detail", c.detail}});
    }
    return {{"passed", r.passed()}, {"checks", checks}, {"truncation_tolerance", kDecayTolerance}};
}

json constants_json(const ContractionConstants& c) {
    return {{"c0", number_json(c.c0)},
            {"gamma_star", number_json(c.gamma_star)},
            {"kappa_measured", number_json(c.kappa_measured)},
            {"g0", c.g0},
            {"g_sup_l2", number_json(c.g_sup_l2)},
            {"weight_combination", number_json(c.weight_combination)}};
}

json control_json(const ControlResult& r) {
    json j = constants_json(r.constants);
    j["residual"] = number_json(r.residual);
    j["scale"] = number_json(r.scale);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["f0_max"] = number_json(r.f0.max_abs());
    j["update_norms"] = vector_json(r.update_norms);
    j["contraction_ratios"] = vector_json(r.contraction_ratios);
    return j;
}

double max_residual(const TimeSignal& q, const TimeSignal& phi) {
    double r = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) r = std::max(r, std::abs(q.samples[n] - phi.samples[n]));
    return r;
}

struct Artifacts {
    std::size_t time_stride = 1;
    std::size_t space_stride = 1;
    bool snapshot = true;
};

Artifacts artifact_options(const Options& opt, const SpaceTimeGrid& grid) {
    Artifacts a;
    a.time_stride = static_cast<std::size_t>(opt.get("csv_time_stride", std::max<double>(1.0, std::ceil(grid.n_time / 100.0))));
    a.space_stride = static_cast<std::size_t>(opt.get("csv_space_stride", std::max<double>(1.0, std::ceil(grid.n_space / 400.0))));
    a.time_stride = std::max<std::size_t>(a.time_stride, 1);
    a.space_stride = std::max<std::size_t>(a.space_stride, 1);
    a.snapshot = opt.get("snapshot", 1.0) != 0.0;
    return a;
}

void write_trajectory_artifacts(const Trajectory& traj, const fs::path& dir, const Artifacts& a) {
    write_trajectory_csv(traj, dir / "trajectory.csv", a.time_stride, a.space_stride);
    if (a.snapshot) write_snapshot(traj, dir / "trajectory.kawa1");
}

// ---------------------------------------------------------------------------
// Command pipelines.

json run_solve(const Problem& pb, const Options& opt, const fs::path& dir) {
    TimeSignal f0 = TimeSignal::zeros(pb.grid);
    const double amplitude = opt.get("forcing_amplitude", 0.0);
    for (double& v : f0.samples) v = amplitude;
    const Forcing forcing = Forcing::from_pair(f0, pb.g);
    const bool linear = opt.get("linear", 0.0) != 0.0;
    const Trajectory traj = linear ? solve_linear(pb, forcing) : solve_nonlinear(pb, forcing);
    const ObservationTrace trace = observation_derivative(traj, forcing, traj.mu, traj.nu, pb.omega);

    double identity = 0.0;
    for (std::size_t n = 1; n + 1 < trace.q.size(); ++n) {
        identity = std::max(identity, std::abs(trace.q_prime_formula.samples[n] - trace.q_prime_numeric.samples[n]));
    }
    json j;
    j["nonlinear"] = !linear;
    j["forcing_amplitude"] = amplitude;
    j["sup_l2"] = number_json(traj.sup_l2());
    j["max_abs"] = number_json(traj.values.max_abs());
    j["q_final"] = number_json(trace.q.samples.back());
    j["qprime_identity_error"] = number_json(identity);
    j["qprime_bound"] = bound_json(qprime_norm_bound(traj, forcing, traj.mu, traj.nu, pb.omega, pb.p));
    j["wellposedness_ratio"] = number_json(wellposedness_ratio_single(pb, pb.u0, pb.mu, pb.nu, forcing));
    const bool homogeneous = std::all_of(pb.u0.begin(), pb.u0.end(), [](double v) { return v == 0.0; }) &&
                             pb.mu.max_abs() == 0.0 && pb.nu.max_abs() == 0.0;
    if (homogeneous && linear) {
        j["energy_residual"] = number_json(energy_residual(traj, forcing));
    }
    write_trajectory_artifacts(traj, dir, artifact_options(opt, pb.grid));
    write_observation_csv(trace, dir / "observation.csv");
    return j;
}

json run_control_linear(const Problem& pb, const RunConfig& cfg, const Options& opt, const fs::path& dir) {
    PicardOptions po;
    po.tol = cfg.tol;
    po.max_iter = cfg.max_iter;
    po.gamma = opt.optional("gamma");
    const ControlResult r = control_linear(pb, nullptr, po);
    const Trajectory closed = solve_linear(pb, Forcing::from_pair(r.f0, pb.g));
    const Forcing forcing = Forcing::from_pair(r.f0, pb.g);
    const ObservationTrace trace = observation_derivative(closed, forcing, closed.mu, closed.nu, pb.omega);

    json j = control_json(r);
    j["closed_loop_residual"] = number_json(max_residual(trace.q, pb.phi));
    j["refined_bound"] = bound_json(refined_bound_check(r, pb));
    write_control_csv(r.f0, dir / "control.csv");
    write_observation_csv(trace, dir / "observation.csv");
    write_trajectory_artifacts(r.trajectory, dir, artifact_options(opt, pb.grid));
    return j;
}

NonlinearOptions nonlinear_options(const RunConfig& cfg, const Options& opt) {
    NonlinearOptions no;
    no.tol = cfg.tol;
    no.max_iter = cfg.max_iter;
    no.inner_tol = opt.get("inner_tol", std::min(cfg.tol, 1e-11));
    no.solution_constant = opt.optional("C_T");
    no.ensemble_size = static_cast<int>(opt.get("ensemble_size", 8));
    no.seed = cfg.seed;
    return no;
}

json run_control_nonlinear(const Problem& pb, const RunConfig& cfg, const Options& opt, const fs::path& dir) {
    const ControlResult r = control_nonlinear(pb, nonlinear_options(cfg, opt));
    const Forcing forcing = Forcing::from_pair(r.f0, pb.g);
    const ObservationTrace trace = observation_derivative(r.trajectory, forcing, r.trajectory.mu, r.trajectory.nu,
                                                          pb.omega);
    json j = control_json(r);
    j["theta_residual"] = j["residual"];
    j["residual"] = number_json(r.closed_loop_residual);
    j["closed_loop_residual"] = number_json(r.closed_loop_residual);
    j["outer_iterations"] = r.outer_iterations;
    j["outer_differences"] = vector_json(r.outer_differences);
    j["outer_ratios"] = vector_json(r.outer_ratios);
    j["smallness"] = {{"verdict", to_string(r.smallness)},
                      {"c1", number_json(r.smallness_c1)},
                      {"threshold", number_json(r.smallness_threshold)},
                      {"ball_radius", number_json(r.ball_radius)},
                      {"C_T", number_json(r.solution_constant)}};
    j["warnings"] = r.warnings;
    write_control_csv(r.f0, dir / "control.csv");
    write_observation_csv(trace, dir / "observation.csv");
    write_trajectory_artifacts(r.trajectory, dir, artifact_options(opt, pb.grid));
    return j;
}

json run_minimal_time(const Problem& pb, const RunConfig& cfg, const Options& opt) {
    MinimalTimeOptions mo;
    mo.solution_constant = opt.optional("C_T");
    mo.certify = opt.get("certify", 1.0) != 0.0;
    mo.certification_steps = static_cast<std::size_t>(opt.get("certification_steps", 400));
    mo.control = nonlinear_options(cfg, opt);
    const MinimalTimeReport m = minimal_time(pb, mo);
    return {{"c0", number_json(m.c0)},
            {"c1", number_json(m.c1)},
            {"C_T", number_json(m.solution_constant)},
            {"delta0", number_json(m.delta0)},
            {"delta_contraction", number_json(m.delta_contraction)},
            {"delta_smallness", number_json(m.delta_smallness)},
            {"smallness_binding", m.smallness_binding},
            {"T0", number_json(m.T0)},
            {"certification_attempted", m.certification_attempted},
            {"certified", m.certified},
            {"certification_residual", number_json(m.certification_residual)},
            {"certification_note", m.certification_note}};
}

json run_scaling_check(const Problem& pb, const RunConfig& cfg, const Options& opt, const fs::path& dir) {
    ScalingExponents ex;
    ex.nu = opt.get("nu_scaling_exponent", ex.nu);
    ex.phi = opt.get("phi_scaling_exponent", ex.phi);
    std::vector<double> deltas = {1.0, 0.7, 0.5};
    if (opt.has("delta")) deltas = {opt.get("delta", 1.0)};

    PicardOptions po;
    po.tol = cfg.tol;
    po.max_iter = cfg.max_iter;
    const ControlResult control = control_linear(pb, nullptr, po);
    write_control_csv(control.f0, dir / "control.csv");

    json runs = json::array();
    bool all_equivalent = true;
    for (double d : deltas) {
        const ScalingResidual sr = scaling_residual(pb, d, control.f0, ex);
        const ObservationEquivalence eq =
            observation_equivalence(pb, control.f0, control.trajectory, d, std::max(cfg.tol, 1e-9), ex);
        all_equivalent = all_equivalent && eq.equivalent;
        runs.push_back({{"delta", d},
                        {"pde_residual", number_json(sr.pde_residual)},
                        {"base_residual", number_json(sr.base_residual)},
                        {"interpolation_error", number_json(sr.interpolation_error)},
                        {"observation_base_residual", number_json(eq.base_residual)},
                        {"observation_scaled_residual", number_json(eq.scaled_residual)},
                        {"observation_equivalent", eq.equivalent}});
    }
    return {{"nu_exponent", ex.nu}, {"phi_exponent", ex.phi}, {"runs", runs}, {"all_equivalent", all_equivalent}};
}

json run_diagnostics(const Problem& pb, const RunConfig& cfg, const Options& opt) {
    json j;
    j["constants"] = constants_json(compute_constants(pb));
    const G1Trace g1 = g1_trace(pb.g, pb.omega, pb.grid, pb.g0);
    j["g1_min_abs"] = number_json(g1.min_abs);
    j["g1_clamped"] = g1.clamped;

    const RatioStatistics ws = wellposedness_ratio(pb, static_cast<int>(opt.get("ensemble_size", 8)), cfg.seed);
    j["wellposedness_ratio"] = {{"max", number_json(ws.max)},
                                {"median", number_json(ws.median)},
                                {"min", number_json(ws.min)},
                                {"mean", number_json(ws.mean)},
                                {"values", vector_json(ws.values)}};

    ProbeOptions po;
    po.ensemble_size = static_cast<int>(opt.get("probe_ensemble", 20));
    po.n_time = static_cast<std::size_t>(opt.get("probe_n_time", 64));
    po.n_space = static_cast<std::size_t>(opt.get("probe_n_space", 128));
    po.seed = cfg.seed;
    const ProbeReport pr = bilinear_probe(po);
    j["bilinear_probe"] = {{"s", po.s},
                           {"b", po.b},
                           {"alpha", po.alpha},
                           {"ensemble_size", po.ensemble_size},
                           {"n_time", po.n_time},
                           {"n_space", po.n_space},
                           {"seed", po.seed},
                           {"max", number_json(pr.max)},
                           {"median", number_json(pr.median)},
                           {"min", number_json(pr.min)},
                           {"empirical_only", pr.empirical_only}};

    TimeSignal ones = TimeSignal::zeros(pb.grid);
    for (double& v : ones.samples) v = 1.0;
    const Trajectory traj = solve_linear(pb, Forcing::from_pair(ones, pb.g));
    const ZTraceReport z = z_trace_diagnostics(SpaceTimeField::from(traj), 0.0);
    j["z_trace"] = {{"s", z.s}, {"trace0", number_json(z.trace0)}, {"trace1", number_json(z.trace1)},
                    {"note", "maximum over grid columns, forcing g"}};
    return j;
}

json versions_json() {
    lapack_int major = 0, minor = 0, patch = 0;
    LAPACKE_ilaver(&major, &minor, &patch);
    std::ostringstream lapack;
    lapack << major << "." << minor << "." << patch;
    return {{"kawa", kVersion},
            {"fftw", std::string(fftw_version)},
            {"lapack", lapack.str()},
            {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                         "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"openmp_threads", kernels::max_threads()}};
}

std::string category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Parse: return "parse";
        case ErrorCategory::Validation: return "validation";
        case ErrorCategory::Hypothesis: return "hypothesis";
        case ErrorCategory::NonConvergence: return "non_convergence";
        case ErrorCategory::Internal: return "internal";
    }
    return "internal";
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::ControlLinear: return "control-linear";
        case Command::ControlNonlinear: return "control-nonlinear";
        case Command::MinimalTime: return "minimal-time";
        case Command::ScalingCheck: return "scaling-check";
        case Command::Diagnostics: return "diagnostics";
        case Command::Sweep: return "sweep";
    }
    return "solve";
}

Command command_from_string(const std::string& s) {
    for (Command c : {Command::Solve, Command::ControlLinear, Command::ControlNonlinear, Command::MinimalTime,
                      Command::ScalingCheck, Command::Diagnostics, Command::Sweep}) {
        if (to_string(c) == s) return c;
    }
    throw ConfigError("unknown command '" + s + "'");
}

void RunConfig::validate() const {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("tol must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
}

json RunConfig::to_json() const {
    return {{"command", to_string(command)},
            {"problem_path", problem_path.string()},
            {"output_dir", output_dir.string()},
            {"tol", tol},
            {"max_iter", max_iter},
            {"seed", seed},
            {"overrides", overrides}};
}

json RunReport::to_json() const {
    json j = deterministic_json();
    j["timing"] = timing;
    return j;
}

json RunReport::deterministic_json() const {
    return {{"config", config},
            {"validation", validation},
            {"results", results},
            {"versions", versions},
            {"status", {{"exit_code", exit_code}, {"category", error_category}, {"message", error_message}}}};
}

RunReport RunReport::from_json(const json& j) {
    RunReport r;
    r.config = j.at("config");
    r.validation = j.at("validation");
    r.results = j.at("results");
    r.versions = j.at("versions");
    r.timing = j.contains("timing") ? j.at("timing") : json::object();
    const json& st = j.at("status");
    r.exit_code = st.at("exit_code").get<int>();
    r.error_category = st.at("category").get<std::string>();
    r.error_message = st.at("message").get<std::string>();
    return r;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

RunReport run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.config = cfg.to_json();
    rep.validation = json::object();
    rep.results = json::object();
    rep.versions = versions_json();
    try {
        cfg.validate();
        fs::create_directories(cfg.output_dir);
        json problem = parse_json_text(read_text_file(cfg.problem_path), cfg.problem_path.string());
        apply_problem_overrides(problem, cfg.overrides);
        const ProblemSpec spec = problem_from_json(problem);
        rep.config["problem"] = problem_to_json(spec);
        const Options opt(cfg.overrides);
        const Problem pb = build_problem(spec);
        const ValidationReport vr = validate_problem(pb);
        rep.validation = validation_json(vr);
        require_valid(vr);

        json result;
        switch (cfg.command) {
            case Command::Solve: result = run_solve(pb, opt, cfg.output_dir); break;
            case Command::ControlLinear: result = run_control_linear(pb, cfg, opt, cfg.output_dir); break;
            case Command::ControlNonlinear: result = run_control_nonlinear(pb, cfg, opt, cfg.output_dir); break;
            case Command::MinimalTime: result = run_minimal_time(pb, cfg, opt); break;
            case Command::ScalingCheck: result = run_scaling_check(pb, cfg, opt, cfg.output_dir); break;
            case Command::Diagnostics: result = run_diagnostics(pb, cfg, opt); break;
            case Command::Sweep: throw ConfigError("sweep is run through run_sweep");
        }
        const std::string key = cfg.command == Command::MinimalTime ? "minimal_time" : to_string(cfg.command);
        rep.results[key] = result;
        if (result.contains("residual")) rep.results["residual"] = result["residual"];
    } catch (const Error& e) {
        rep.exit_code = e.exit_code();
        rep.error_category = category_name(e.category());
        rep.error_message = e.what();
    } catch (const std::exception& e) {
        rep.exit_code = static_cast<int>(ErrorCategory::Internal);
        rep.error_category = "internal";
        rep.error_message = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.timing = {{"total_seconds", seconds}};
    try {
        fs::create_directories(cfg.output_dir);
        write_text_file(cfg.output_dir / "report.json", dump_report(rep.to_json()));
    } catch (const std::exception& e) {
        if (rep.exit_code == 0) {
            rep.exit_code = static_cast<int>(ErrorCategory::Internal);
            rep.error_category = "internal";
            rep.error_message = e.what();
        }
    }
    return rep;
}

int run_sweep(const fs::path& manifest, const fs::path& output_dir) {
    const json j = parse_json_text(read_text_file(manifest), manifest.string());
    if (!j.is_array()) throw ParseError("sweep manifest must be a JSON array");
    std::vector<RunConfig> configs;
    const fs::path base = manifest.has_parent_path() ? manifest.parent_path() : fs::path(".");
    try {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const json& e = j[i];
            const std::string where = "sweep[" + std::to_string(i) + "]";
            if (!e.is_object()) throw ParseError(where + ": expected an object");
            for (const auto& [k, v] : e.items()) {
                static const std::set<std::string> allowed = {"command", "problem", "tol", "max_iter", "seed", "set"};
                if (!allowed.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
            }
            if (!e.contains("command") || !e.contains("problem")) {
                throw ParseError(where + ": needs command and problem");
            }
            RunConfig c;
            c.command = command_from_string(e["command"].get<std::string>());
            if (c.command == Command::Sweep) throw ConfigError(where + ": nested sweeps are not supported");
            fs::path p = e["problem"].get<std::string>();
            c.problem_path = p.is_absolute() ? p : base / p;
            c.output_dir = output_dir / ("run_" + std::to_string(i));
            if (e.contains("tol")) c.tol = e["tol"].get<double>();
            if (e.contains("max_iter")) c.max_iter = e["max_iter"].get<int>();
            if (e.contains("seed")) c.seed = e["seed"].get<std::uint64_t>();
            if (e.contains("set")) {
                for (const auto& [k, v] : e["set"].items()) {
                    c.overrides[k] = v.is_string() ? v.get<std::string>() : v.dump();
                }
            }
            configs.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("sweep manifest: ") + e.what());
    }
    std::vector<int> codes(configs.size(), 0);
    const auto n = static_cast<long long>(configs.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) codes[static_cast<std::size_t>(i)] = run(configs[static_cast<std::size_t>(i)]).exit_code;

    json summary = json::array();
    int worst = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        summary.push_back({{"index", i},
                           {"command", to_string(configs[i].command)},
                           {"output_dir", configs[i].output_dir.string()},
                           {"exit_code", codes[i]}});
        worst = std::max(worst, codes[i]);
    }
    write_text_file(output_dir / "sweep.json", dump_report(summary));
    return worst;
}

// ---------------------------------------------------------------------------
// Artifacts.

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Internal, "cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

std::vector<std::size_t> strided(std::size_t count, std::size_t stride) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < count; i += stride) idx.push_back(i);
    if (idx.empty() || idx.back() != count - 1) idx.push_back(count - 1);
    return idx;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const fs::path& path, std::size_t time_stride,
                          std::size_t space_stride) {
    if (time_stride == 0 || space_stride == 0) throw DomainError("strides must be positive");
    auto out = open_out(path);
    out << "t,x,u\n";
    const auto rows = strided(traj.values.rows(), time_stride);
    const auto cols = strided(traj.values.cols(), space_stride);
    for (std::size_t n : rows) {
        for (std::size_t j : cols) out << traj.grid.t(n) << ',' << traj.grid.x(j) << ',' << traj.values(n, j) << '\n';
    }
}

void write_control_csv(const TimeSignal& f0, const fs::path& path) {
    auto out = open_out(path);
    out << "t,f0\n";
    for (std::size_t n = 0; n < f0.size(); ++n) out << f0.dt * static_cast<double>(n) << ',' << f0.samples[n] << '\n';
}

void write_observation_csv(const ObservationTrace& trace, const fs::path& path) {
    auto out = open_out(path);
    out << "t,q,qprime_formula,qprime_numeric\n";
    for (std::size_t n = 0; n < trace.q.size(); ++n) {
        out << trace.q.dt * static_cast<double>(n) << ',' << trace.q.samples[n] << ','
            << trace.q_prime_formula.samples[n] << ',' << trace.q_prime_numeric.samples[n] << '\n';
    }
}

void write_snapshot(const Trajectory& traj, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Internal, "cannot write " + path.string());
    out.write("KAWA1", 5);
    const std::uint64_t dims[2] = {traj.values.rows(), traj.values.cols()};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    const double meta[3] = {traj.grid.tau, traj.grid.h, traj.grid.x_left};
    out.write(reinterpret_cast<const char*>(meta), sizeof meta);
    out.write(reinterpret_cast<const char*>(traj.values.data().data()),
              static_cast<std::streamsize>(traj.values.rows() * traj.values.cols() * sizeof(double)));
    if (!out) throw Error(ErrorCategory::Internal, "write failed for " + path.string());
}

Snapshot read_snapshot(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "KAWA1", 5) != 0) throw ParseError(path.string() + ": not a KAWA1 snapshot");
    std::uint64_t dims[2];
    double meta[3];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    in.read(reinterpret_cast<char*>(meta), sizeof meta);
    if (!in) throw ParseError(path.string() + ": truncated header");
    if (dims[0] == 0 || dims[1] == 0 || dims[0] > (1ULL << 32) || dims[1] > (1ULL << 32)) {
        throw ParseError(path.string() + ": implausible dimensions");
    }
    Snapshot s;
    s.dt = meta[0];
    s.dx = meta[1];
    s.x_left = meta[2];
    s.values = Field(dims[0], dims[1]);
    in.read(reinterpret_cast<char*>(s.values.data().data()), static_cast<std::streamsize>(dims[0] * dims[1] * sizeof(double)));
    if (!in) throw ParseError(path.string() + ": truncated data");
    return s;
}

}  // namespace kawa
