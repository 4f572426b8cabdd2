#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fockmet/common.hpp"

namespace fockmet::cli {

enum class ScenarioKind {
    fisher_scan,
    mle_sim,
    loss_sim,
    gaussian_compare,
    multiparam,
    fluctuation,
    moments,
};

ScenarioKind scenario_kind_from_string(const std::string& s);
std::string to_string(ScenarioKind kind);

// One run description. Fields cover every kind; validation per kind happens
// in run().
struct Scenario {
    std::string name;
    ScenarioKind kind = ScenarioKind::fisher_scan;
    std::vector<int> m_values{0};
    std::vector<double> n_c_values{0.0};
    std::vector<double> n_s_values{0.0};
    std::vector<double> eta_values{1.0};
    std::vector<int> copies_values{500};
    int trials = 1000;
    uint64_t seed = 42;
    std::optional<double> prior_lo;
    std::optional<double> prior_hi;
    std::vector<double> sigma_values{};
    std::optional<int> cutoff_override;
};

// Tabular result: metadata lines become "# " comments, cells are printed
// with 9 significant digits, so a rerun of the same scenario is
// byte-identical.
struct ResultTable {
    std::vector<std::string> metadata;
    std::vector<std::string> columns;
    using Cell = std::variant<double, long, std::string>;
    std::vector<std::vector<Cell>> rows;

    void write_csv(std::ostream& out) const;
};

// Parses "key = value" lines ('#' starts a comment). Unknown keys and
// malformed values throw ValidationError naming the key; kind is required.
Scenario parse_config(std::istream& in);
Scenario parse_config_file(const std::string& path);

// Named preset grids (fig1a .. fig7b, flucC).
std::vector<std::string> preset_names();
Scenario preset(const std::string& name);

// Executes the scenario.
ResultTable run(const Scenario& scenario);

// CLI entry point: <tool> run {--preset NAME | --config FILE} --out FILE
// [--seed N] [--trials N]. Returns the process exit code (0 success,
// 2 validation error, 3 numerical non-convergence).
int main_entry(int argc, char** argv);

}  // namespace fockmet::cli
