#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kawa/cli_io.hpp"
#include "kawa/error.hpp"
#include "kawa/problem_io.hpp"

using namespace kawa;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = KAWA_SOURCE_DIR;

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("kawa_test_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

RunReport run_on(const fs::path& problem, Command cmd, const fs::path& out,
                 std::map<std::string, std::string> overrides = {}, int max_iter = 200) {
    RunConfig c;
    c.command = cmd;
    c.problem_path = problem;
    c.output_dir = out;
    c.max_iter = max_iter;
    c.overrides = std::move(overrides);
    return run(c);
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    write_text_file(p, text);
    return p;
}

}  // namespace

TEST_CASE("command names round-trip") {
    for (Command c : {Command::Solve, Command::ControlLinear, Command::ControlNonlinear, Command::MinimalTime,
                      Command::ScalingCheck, Command::Diagnostics, Command::Sweep}) {
        CHECK(command_from_string(to_string(c)) == c);
    }
    CHECK_THROWS_AS(command_from_string("fly"), ConfigError);
}

TEST_CASE("run configuration invariants") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.tol = 1e-9;
    c.max_iter = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("fixtures round-trip byte for byte") {
    for (const char* name : {"canonical.json", "zero.json", "realline.json", "sampled.json"}) {
        const fs::path p = kRoot / "tests" / "fixtures" / name;
        CHECK(dump_problem(read_problem_spec(p)) == read_text_file(p));
    }
    CHECK(read_text_file(kRoot / "problems" / "canonical.json") == dump_problem(canonical_problem_spec()));
    CHECK(read_problem_spec(kRoot / "tests" / "fixtures" / "realline.json").p == kInfinity);
}

TEST_CASE("strict schema") {
    nlohmann::json j = problem_to_json(canonical_problem_spec());
    j["gO"] = 0.3;
    CHECK_THROWS_AS(problem_from_json(j), ParseError);
    j = problem_to_json(canonical_problem_spec());
    j["alpha"] = "NaN";
    CHECK_THROWS_AS(problem_from_json(j), ParseError);
    j = problem_to_json(canonical_problem_spec());
    j.erase("g0");
    CHECK_THROWS_AS(problem_from_json(j), ParseError);
    j = problem_to_json(canonical_problem_spec());
    j["nonlinearity_power"] = 1.5;
    CHECK_THROWS_AS(problem_from_json(j), ParseError);
    j = problem_to_json(canonical_problem_spec());
    j["omega"] = {{"samples", {1, 2, 3}}};
    CHECK_THROWS_AS(problem_from_json(j), ParseError);
    CHECK_THROWS_AS(parse_json_text("{\"alpha\": nan}"), ParseError);
}

TEST_CASE("solve on zero data") {
    TempDir tmp("solve_zero");
    const RunReport r = run_on(kRoot / "problems" / "zero.json", Command::Solve, tmp.path(), {{"linear", "1"}});
    REQUIRE(r.exit_code == 0);
    const auto& res = r.results["solve"];
    CHECK(res["sup_l2"].get<double>() == 0.0);
    CHECK(res["max_abs"].get<double>() == 0.0);
    CHECK(res["energy_residual"].get<double>() == 0.0);
    CHECK(r.config["problem"]["alpha"].get<double>() == 1.0);
    for (const char* f : {"report.json", "trajectory.csv", "observation.csv", "trajectory.kawa1"}) {
        CHECK(fs::exists(tmp.path() / f));
    }
}

TEST_CASE("malformed JSON is a parse error with a position") {
    TempDir tmp("malformed");
    const fs::path p = write_file(tmp.path(), "bad.json", "{\"alpha\": 1,,}");
    const RunReport r = run_on(p, Command::Solve, tmp.path() / "out");
    CHECK(r.exit_code == 2);
    CHECK(r.error_category == "parse");
    CHECK(r.error_message.find("byte") != std::string::npos);
    CHECK(fs::exists(tmp.path() / "out" / "report.json"));
}

TEST_CASE("error categories map to exit codes") {
    TempDir tmp("errors");
    const fs::path canonical = kRoot / "problems" / "canonical.json";
    const std::map<std::string, std::string> coarse = {{"grid.h", "0.05"}, {"grid.tau", "0.002"}};

    auto with = [&](std::map<std::string, std::string> extra) {
        extra.insert(coarse.begin(), coarse.end());
        return extra;
    };
    CHECK(run_on(canonical, Command::Solve, tmp.path() / "a", with({{"no_such_key", "1"}})).exit_code == 2);
    CHECK(run_on(canonical, Command::Solve, tmp.path() / "b", with({{"alpha", "abc"}})).exit_code == 2);
    CHECK(run_on(canonical, Command::Solve, tmp.path() / "c", with({{"phi.offset", "1"}})).exit_code == 3);
    CHECK(run_on(canonical, Command::Solve, tmp.path() / "d", with({{"g0", "10"}})).exit_code == 4);
    const RunReport nc = run_on(canonical, Command::ControlLinear, tmp.path() / "e", coarse, 1);
    CHECK(nc.exit_code == 5);
    CHECK(nc.error_category == "non_convergence");
    CHECK(run_on(tmp.path() / "missing.json", Command::Solve, tmp.path() / "f").exit_code == 2);
}

TEST_CASE("control-nonlinear report residual is within tolerance") {
    TempDir tmp("nonlinear");
    const RunReport r = run_on(kRoot / "problems" / "canonical.json", Command::ControlNonlinear, tmp.path(),
                               {{"grid.h", "0.05"}, {"grid.tau", "0.002"}, {"C_T", "1"}});
    REQUIRE(r.exit_code == 0);
    CHECK(r.results["residual"].get<double>() <= 1e-9);
    CHECK(r.results["control-nonlinear"]["smallness"]["verdict"] == "pass");
    CHECK(fs::exists(tmp.path() / "control.csv"));
}

TEST_CASE("reports reload without loss") {
    TempDir tmp("reload");
    const RunReport r = run_on(kRoot / "problems" / "canonical.json", Command::MinimalTime, tmp.path(),
                               {{"C_T", "1"}, {"certify", "0"}});
    REQUIRE(r.exit_code == 0);
    const std::string text = read_text_file(tmp.path() / "report.json");
    const RunReport back = RunReport::from_json(parse_json_text(text));
    CHECK(dump_report(back.to_json()) == text);
    CHECK(back.results["minimal_time"]["delta0"].get<double>() > 0.0);
}

TEST_CASE("identical configurations give identical reports") {
    TempDir tmp("determinism");
    const std::map<std::string, std::string> o = {{"ensemble_size", "3"}, {"probe_ensemble", "4"},
                                                   {"grid.h", "0.1"},      {"grid.tau", "0.005"}};
    const RunReport a = run_on(kRoot / "problems" / "canonical.json", Command::Diagnostics, tmp.path(), o);
    const RunReport b = run_on(kRoot / "problems" / "canonical.json", Command::Diagnostics, tmp.path(), o);
    REQUIRE(a.exit_code == 0);
    CHECK(dump_report(a.deterministic_json()) == dump_report(b.deterministic_json()));
}

TEST_CASE("snapshot round-trip") {
    TempDir tmp("snapshot");
    Trajectory t;
    t.grid = SpaceTimeGrid::make({DomainKind::RealLine, 2.0, 1.0}, 0.25, 0.25, 0.5);
    t.values = Field(t.grid.time_levels(), t.grid.space_nodes());
    for (std::size_t i = 0; i < t.values.data().size(); ++i) t.values.data()[i] = 0.1 * static_cast<double>(i) - 1.0;
    write_snapshot(t, tmp.path() / "s.kawa1");
    const Snapshot s = read_snapshot(tmp.path() / "s.kawa1");
    CHECK(s.values == t.values);
    CHECK(s.dt == 0.25);
    CHECK(s.dx == 0.25);
    CHECK(s.x_left == -1.0);
    write_file(tmp.path(), "bad.kawa1", "KAWA2xxxxxxxxxxxxxxxxx");
    CHECK_THROWS_AS(read_snapshot(tmp.path() / "bad.kawa1"), ParseError);
    const std::string full = read_text_file(tmp.path() / "s.kawa1");
    write_file(tmp.path(), "short.kawa1", full.substr(0, full.size() - 3));
    CHECK_THROWS_AS(read_snapshot(tmp.path() / "short.kawa1"), ParseError);
}

TEST_CASE("CSV layouts") {
    TempDir tmp("csv");
    Trajectory t;
    t.grid = SpaceTimeGrid::make({DomainKind::RightHalfLine, 2.0, 0.0}, 0.25, 0.25, 0.5);
    t.values = Field(t.grid.time_levels(), t.grid.space_nodes(), 1.5);
    write_trajectory_csv(t, tmp.path() / "u.csv", 2, 3);
    std::ifstream in(tmp.path() / "u.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,u");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    // Levels {0, 2} and nodes {0, 3, 6, 8}.
    CHECK(rows == 8);
}

TEST_CASE("sweep runs every member into its own directory") {
    TempDir tmp("sweep");
    const std::string manifest = "[{\"command\": \"solve\", \"problem\": \"" +
                                 (kRoot / "problems" / "zero.json").string() +
                                 "\", \"set\": {\"grid.h\": 0.1, \"grid.tau\": 0.01}},"
                                 " {\"command\": \"minimal-time\", \"problem\": \"" +
                                 (kRoot / "problems" / "canonical.json").string() +
                                 "\", \"set\": {\"C_T\": 1, \"certify\": 0}}]";
    const fs::path m = write_file(tmp.path(), "sweep.json", manifest);
    CHECK(run_sweep(m, tmp.path() / "out") == 0);
    CHECK(fs::exists(tmp.path() / "out" / "run_0" / "report.json"));
    CHECK(fs::exists(tmp.path() / "out" / "run_1" / "report.json"));
    CHECK(fs::exists(tmp.path() / "out" / "sweep.json"));
    write_file(tmp.path(), "bad.json", "[{\"command\": \"solve\", \"problem\": 3}]");
    CHECK_THROWS_AS(run_sweep(tmp.path() / "bad.json", tmp.path() / "out2"), ParseError);
}
