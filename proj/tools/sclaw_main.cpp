// Command-line front end: run scenarios, list the catalog, validate scenario
// files, and re-print reports from finished runs.
//
// Exit codes: 0 = success (run: all invariants passed), 1 = invariant or
// numerical failure, 2 = usage/configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sclaw/runner.hpp"
#include "sclaw/scenario.hpp"
#include "sclaw/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

int do_run(const std::string& target, std::optional<std::uint64_t> seed,
           std::optional<int> paths, std::optional<int> cells,
           std::string out_dir, bool debug_dumps, bool quiet) {
    sclaw::ScenarioSpec spec;
    if (sclaw::is_preset(target)) {
        spec = sclaw::preset(target);
    } else {
        sclaw::ParseResult r = sclaw::load_scenario(target);
        if (!r.spec) {
            std::cerr << "error: cannot run '" << target << "':\n";
            for (const auto& e : r.errors)
                std::cerr << "  " << target << ":" << e.line << ": " << e.message
                          << "\n";
            return kExitUsage;
        }
        spec = *r.spec;
    }

    if (seed) spec.base_seed = *seed;
    if (paths) spec.n_paths = *paths;
    if (cells) spec.n_cells = *cells;
    if (debug_dumps) spec.flow_dumps = true;

    // Overrides can invalidate the spec; report that as a usage problem.
    if (auto issues = sclaw::validate_spec(spec); !issues.empty()) {
        std::cerr << "error: scenario '" << spec.name
                  << "' is invalid with the given overrides:\n";
        for (const auto& e : issues) std::cerr << "  " << e.message << "\n";
        return kExitUsage;
    }

    if (out_dir.empty()) out_dir = "runs/" + spec.name;

    sclaw::RunOptions opt;
    opt.out_dir = out_dir;
    opt.quiet = quiet;
    try {
        sclaw::RunReport rep = sclaw::run_scenario(spec, opt);
        if (!quiet)
            std::cout << "report written to " << out_dir << "/report.txt\n";
        return rep.all_passed() ? kExitOk : kExitFailed;
    } catch (const std::exception& ex) {
        std::cerr << "error: run failed: " << ex.what() << "\n";
        return kExitFailed;
    }
}

int do_list(const std::string& scenario_dir) {
    const auto catalog = sclaw::list_scenarios(scenario_dir);
    for (const auto& e : catalog) {
        std::cout << (e.builtin ? "[preset] " : "[file]   ") << e.name;
        if (!e.file.empty()) std::cout << "  (" << e.file << ")";
        std::cout << "\n";
        if (!e.description.empty()) std::cout << "         " << e.description << "\n";
        if (!e.warning.empty()) std::cout << "         warning: " << e.warning << "\n";
    }
    return kExitOk;
}

int do_validate(const std::string& file) {
    sclaw::ParseResult r = sclaw::load_scenario(file);
    if (r.spec) {
        std::cout << file << ": OK (scenario '" << r.spec->name << "')\n";
        return kExitOk;
    }
    std::cout << file << ": " << r.errors.size() << " problem(s)\n";
    for (const auto& e : r.errors)
        std::cout << "  " << file << ":" << e.line << ": " << e.message << "\n";
    return kExitUsage;
}

int do_report(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const fs::path report = fs::path(run_dir) / "report.txt";
    std::ifstream in(report);
    if (!in) {
        std::cerr << "error: no report at " << report.string()
                  << " (is this a finished run directory?)\n";
        return kExitUsage;
    }
    bool failed = false;
    std::string line;
    while (std::getline(in, line)) {
        std::cout << line << "\n";
        if (line.rfind("  FAIL", 0) == 0) failed = true;
    }
    return failed ? kExitFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic transport laboratory for 2x2 hyperbolic systems"};
    app.set_version_flag("--version", std::string(sclaw::kVersion));
    app.require_subcommand(1);

    // run
    std::string run_target, run_out_dir;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_paths, run_cells;
    bool run_dumps = false, run_quiet = false;
    CLI::App* run = app.add_subcommand("run", "execute a preset or scenario file");
    run->add_option("target", run_target, "preset name or path to a .scn file")
        ->required();
    run->add_option("--seed", run_seed, "override paths.base_seed");
    run->add_option("--paths", run_paths, "override paths.count");
    run->add_option("--cells", run_cells, "override grid.n_cells");
    run->add_option("--out-dir", run_out_dir, "output directory (default runs/<name>)");
    run->add_flag("--debug-dumps", run_dumps, "also write flow_debug.csv");
    run->add_flag("--quiet", run_quiet, "suppress progress and check lines");

    // list
    std::string list_dir = "scenarios";
    CLI::App* list = app.add_subcommand("list", "list presets and scenario files");
    list->add_option("--scenario-dir", list_dir, "directory scanned for *.scn files");

    // validate
    std::string validate_file;
    CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("file", validate_file, "path to a .scn file")->required();

    // report
    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "re-print a finished run's report");
    report->add_option("run_dir", report_dir, "output directory of a finished run")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed())
        return do_run(run_target, run_seed, run_paths, run_cells, run_out_dir,
                      run_dumps, run_quiet);
    if (list->parsed()) return do_list(list_dir);
    if (validate->parsed()) return do_validate(validate_file);
    if (report->parsed()) return do_report(report_dir);
    return kExitUsage;
}
