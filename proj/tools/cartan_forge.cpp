// cartan-forge: batch runner for the experiments in the cartanforge library.
#include "runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace cforge::cli;
    CLI::App app{"cartan-forge: moving frame and compensated compactness experiments"};
    app.require_subcommand(1);

    Overrides ov;
    std::string out;
    std::uint64_t seed = 0;
    int grid = 0;
    double tol = 0.0;
    bool as_json = false;

    std::string config;
    auto* run = app.add_subcommand("run", "run one experiment config (JSON)");
    run->add_option("config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory");
    run->add_option("--seed", seed, "seed for sampled directions");
    run->add_option("--grid", grid, "grid points per axis")->check(CLI::Range(5, 4096));
    run->add_option("--tol", tol, "tolerance override")->check(CLI::PositiveNumber);
    run->add_flag("--json", as_json, "print the summary JSON on stdout");

    auto* list = app.add_subcommand("list-fixtures", "print the fixture registry");
    list->add_flag("--json", as_json, "print as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*list) {
        print_fixtures(std::cout, as_json);
        return 0;
    }

    if (run->count("--out")) ov.out = out;
    if (run->count("--seed")) ov.seed = seed;
    if (run->count("--grid")) ov.grid = grid;
    if (run->count("--tol")) ov.tol = tol;
    const RunResult r = run_config(config, ov, std::cerr);
    if (as_json) {
        std::cout << summary_text(r.summary);
    } else {
        for (const auto& c : r.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (" << c.relation << " " << c.tol << ")\n";
        std::cout << (r.exit_code == 0 ? "pass" : r.exit_code == 1 ? "fail" : "error") << "\n";
    }
    return r.exit_code;
}
