// kawactl: command-line driver for the Kawahara control toolkit.
//
//   kawactl <command> --problem <path> --out <dir> [--tol X] [--max-iter N]
//           [--seed S] [--set key=value ...]
//
// For `sweep`, --problem names the sweep manifest.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kawa/cli_io.hpp"
#include "kawa/error.hpp"

namespace {

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& items) {
    std::map<std::string, std::string> out;
    for (const std::string& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw kawa::ConfigError("--set expects key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-difference control experiments for the Kawahara equation"};
    app.require_subcommand(1);

    std::string problem;
    std::string out;
    double tol = 1e-9;
    int max_iter = 200;
    std::uint64_t seed = 1;
    std::vector<std::string> sets;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"solve", "integrate the equation under a constant-amplitude control"},
        {"control-linear", "compute the control of the linear problem"},
        {"control-nonlinear", "compute the control of the full equation"},
        {"minimal-time", "minimal control time from the scaling argument"},
        {"scaling-check", "check the scaling symmetry and the observation equivalence"},
        {"diagnostics", "constants, well-posedness ratios and the bilinear probe"},
        {"sweep", "run a manifest of configurations in parallel"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--problem", problem, name == "sweep" ? "sweep manifest" : "problem JSON file")->required();
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--tol", tol, "iteration tolerance");
        sub->add_option("--max-iter", max_iter, "iteration cap");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--set", sets, "override key=value (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(kawa::ErrorCategory::Parse);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "sweep") {
            const int rc = kawa::run_sweep(problem, out);
            std::cout << "sweep finished, worst exit code " << rc << "\n";
            return rc;
        }
        kawa::RunConfig cfg;
        cfg.command = kawa::command_from_string(command);
        cfg.problem_path = problem;
        cfg.output_dir = out;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.seed = seed;
        cfg.overrides = parse_overrides(sets);

        const kawa::RunReport rep = kawa::run(cfg);
        if (rep.exit_code != 0) {
            std::cerr << "kawactl: " << rep.error_category << ": " << rep.error_message << "\n";
        } else {
            std::cout << "report written to " << (cfg.output_dir / "report.json").string() << "\n";
        }
        return rep.exit_code;
    } catch (const kawa::Error& e) {
        std::cerr << "kawactl: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "kawactl: internal: " << e.what() << "\n";
        return static_cast<int>(kawa::ErrorCategory::Internal);
    }
}
