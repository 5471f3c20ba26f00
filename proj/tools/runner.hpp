#pragma once

#include "cforge/io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cforge::cli {

using json = nlohmann::json;

// Command line values that win over the config file.
struct Overrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::optional<double> tol;
};

// Every knob an experiment reads, with its default. The resolved copy is
// echoed into the summary so a report can be rerun from itself.
struct Settings {
    std::string kind;
    std::string fixture;
    int grid = 0;          // 0: the kind's default
    std::uint64_t seed = 1;
    std::optional<double> tol;
    std::string out = "cartan-forge-out";
    int eps_lo = 0;        // 0: the fixture's default schedule
    int eps_hi = 0;
    double min_rate = 0.9;
    json params = json::object();
    std::filesystem::path base_dir;  // relative paths in params resolve here

    json to_json() const;
};

Settings parse_settings(const json& cfg, const Overrides& ov, const std::filesystem::path& base_dir = {});

struct Check {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    std::string relation;  // "<", "<=", ">=", "in", "=="
    bool pass = false;
};

struct RunResult {
    int exit_code = 0;
    json summary;
    std::vector<Check> checks;
};

std::vector<std::string> experiment_kinds();

// Runs one experiment, writes summary.json and the tables into s.out.
// Library errors propagate; run_config maps them to exit codes.
RunResult run_settings(const Settings& s);

// 0 pass, 1 fail, 2 usage or config error, 3 numerical failure. Errors are
// reported on `err` and in the summary when the output directory is known.
RunResult run_config(const std::filesystem::path& config, const Overrides& ov, std::ostream& err);

struct FixtureEntry {
    std::string name;
    std::string kinds;
    std::string description;
};
const std::vector<FixtureEntry>& fixture_registry();
void print_fixtures(std::ostream& os, bool as_json);

// Deterministic text form of a summary (two space indent, trailing newline).
std::string summary_text(const json& summary);

} // namespace cforge::cli
