#include "kawa/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kawa/error.hpp"

namespace kawa {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!required.count(key) && !optional.count(key)) throw ParseError(where + ": unknown key '" + key + "'");
    }
    for (const auto& key : required) {
        if (!j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(where + ": non-finite number");
    return v;
}

std::vector<double> number_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json data_to_json(const DataSpec& d) {
    json j = json::object();
    if (d.is_preset()) {
        j["preset"] = d.preset;
        for (const auto& [k, v] : d.params) j[k] = v;
    } else if (!d.samples2d.empty()) {
        json rows = json::array();
        for (std::size_t n = 0; n < d.samples2d.rows(); ++n) {
            const auto r = d.samples2d.row(n);
            rows.push_back(std::vector<double>(r.begin(), r.end()));
        }
        j["samples"] = std::move(rows);
    } else {
        j["samples"] = d.samples;
    }
    return j;
}

DataSpec data_from_json(const json& j, const std::string& where, bool two_dimensional) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    DataSpec d;
    if (j.contains("samples")) {
        require_keys(j, where, {"samples"});
        const json& s = j["samples"];
        if (two_dimensional) {
            if (!s.is_array() || s.empty()) throw ParseError(where + ".samples: expected a non-empty 2-D array");
            const auto first = number_array(s[0], where + ".samples[0]");
            d.samples2d = Field(s.size(), first.size());
            for (std::size_t n = 0; n < s.size(); ++n) {
                const auto row = number_array(s[n], where + ".samples[" + std::to_string(n) + "]");
                if (row.size() != first.size()) throw ParseError(where + ".samples: ragged rows");
                std::copy(row.begin(), row.end(), d.samples2d.row(n).begin());
            }
        } else {
            d.samples = number_array(s, where + ".samples");
        }
        return d;
    }
    if (!j.contains("preset")) throw ParseError(where + ": needs 'preset' or 'samples'");
    if (!j["preset"].is_string()) throw ParseError(where + ".preset: expected a string");
    d.preset = j["preset"].get<std::string>();
    if (d.preset.empty()) throw ParseError(where + ".preset: empty name");
    for (const auto& [key, value] : j.items()) {
        if (key == "preset") continue;
        d.params[key] = number(value, where + "." + key);
    }
    return d;
}

}  // namespace

json problem_to_json(const ProblemSpec& s) {
    json j;
    j["alpha"] = s.coefficients.alpha;
    j["beta"] = s.coefficients.beta;
    j["nonlinearity_power"] = s.coefficients.nonlinearity_power;
    j["domain"] = {{"kind", to_string(s.domain.kind)},
                   {"R", s.domain.truncation_radius},
                   {"left_cutoff", s.domain.left_cutoff}};
    j["grid"] = {{"h", s.h}, {"tau", s.tau}, {"T", s.T}};
    j["u0"] = data_to_json(s.u0);
    j["mu"] = data_to_json(s.mu);
    j["nu"] = data_to_json(s.nu);
    j["g"] = data_to_json(s.g);
    j["omega"] = data_to_json(s.omega);
    j["phi"] = data_to_json(s.phi);
    if (std::isinf(s.p)) {
        j["p"] = "inf";
    } else {
        j["p"] = s.p;
    }
    j["g0"] = s.g0;
    return j;
}

ProblemSpec problem_from_json(const json& j) {
    require_keys(j, "problem",
                 {"alpha", "beta", "nonlinearity_power", "domain", "grid", "u0", "mu", "nu", "g", "omega", "phi", "p",
                  "g0"});
    ProblemSpec s;
    s.coefficients.alpha = number(j["alpha"], "alpha");
    s.coefficients.beta = number(j["beta"], "beta");
    const json& np = j["nonlinearity_power"];
    if (!np.is_number_integer()) throw ParseError("nonlinearity_power: expected an integer");
    s.coefficients.nonlinearity_power = np.get<int>();

    const json& dom = j["domain"];
    require_keys(dom, "domain", {"kind", "R", "left_cutoff"});
    if (!dom["kind"].is_string()) throw ParseError("domain.kind: expected a string");
    try {
        s.domain.kind = domain_kind_from_string(dom["kind"].get<std::string>());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("domain.kind: ") + e.what());
    }
    s.domain.truncation_radius = number(dom["R"], "domain.R");
    s.domain.left_cutoff = number(dom["left_cutoff"], "domain.left_cutoff");

    const json& grid = j["grid"];
    require_keys(grid, "grid", {"h", "tau", "T"});
    s.h = number(grid["h"], "grid.h");
    s.tau = number(grid["tau"], "grid.tau");
    s.T = number(grid["T"], "grid.T");

    s.u0 = data_from_json(j["u0"], "u0", false);
    s.mu = data_from_json(j["mu"], "mu", false);
    s.nu = data_from_json(j["nu"], "nu", false);
    s.g = data_from_json(j["g"], "g", true);
    s.omega = data_from_json(j["omega"], "omega", false);
    s.phi = data_from_json(j["phi"], "phi", false);
    if (!s.omega.is_preset()) throw ParseError("omega: must be a preset");

    const json& p = j["p"];
    if (p.is_string()) {
        if (p.get<std::string>() != "inf") throw ParseError("p: expected a number or \"inf\"");
        s.p = kInfinity;
    } else {
        s.p = number(p, "p");
    }
    s.g0 = number(j["g0"], "g0");
    return s;
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << origin << ": malformed JSON at byte " << e.byte << ": " << e.what();
        throw ParseError(os.str());
    }
}

std::string dump_problem(const ProblemSpec& spec) { return problem_to_json(spec).dump(2) + "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Internal, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCategory::Internal, "write failed for " + path.string());
}

ProblemSpec read_problem_spec(const std::filesystem::path& path) {
    return problem_from_json(parse_json_text(read_text_file(path), path.string()));
}

Problem load_problem(const std::filesystem::path& path) { return build_problem(read_problem_spec(path)); }

void save_problem(const ProblemSpec& spec, const std::filesystem::path& path) {
    write_text_file(path, dump_problem(spec));
}

ProblemSpec canonical_problem_spec() {
    ProblemSpec s;
    s.coefficients = {1.0, 1.0, 1};
    s.domain = {DomainKind::RightHalfLine, 40.0, 0.0};
    s.h = 0.02;
    s.tau = 5e-4;
    s.T = 1.0;
    s.g = DataSpec::named("exp_decay", {{"scale", 1.0}, {"rate", 1.0}});
    s.omega = DataSpec::named("cubic_exp");
    s.phi = DataSpec::named("t_exp", {{"scale", 0.01}, {"rate", 1.0}});
    s.p = 2.0;
    s.g0 = 0.375;
    return s;
}

}  // namespace kawa
