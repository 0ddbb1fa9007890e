#pragma once

#include "morrow/benchmodels.hpp"
#include "morrow/core.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace morrow::cli {

// Malformed or inconsistent configuration. line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
          line(line)
    {
    }
    int line;
};

struct PodConfig {
    double nu = 0.9999;
    int p = 0;  // explicit dimension when > 0
    int stride = 1;
    std::string snapshots;  // read snapshots from this file instead of the FOM run
};

struct GnatConfig {
    double nu_r = 1.0;
    int samples = 0;  // 0 samples every row (Z = I)
};

struct RomConfig {
    std::string kind = "lspg";            // galerkin | lspg | gnat
    std::string weighting = "identity";   // identity | scaled | collocation
    double gamma = 1.0;
    std::vector<int> rows;                // collocation rows
    std::string rk_mode = "automatic";    // automatic | stagewise | coupled
    GnatConfig gnat;
};

struct BoundsConfig {
    std::optional<double> kappa;  // sampled estimate when absent
    double eps = 0.5;
    double omega = 0.5;
    int kappa_samples = 20;
    std::vector<std::string> modes{"aposteriori", "apriori", "simplified"};
    bool auxiliary = true;
};

struct SpectralConfig {
    int modes = 0;  // all POD modes when 0
};

struct ExperimentConfig {
    BenchmarkSpec model;
    std::string scheme = "bdf2";
    double dt = 1e-3;          // ROM step
    double reference_dt = 0.0; // FOM step; dt when 0
    double T = 0.1;
    std::vector<std::string> stages{"fom", "snapshots", "pod", "rom"};
    PodConfig pod;
    RomConfig rom;
    SolverOptions solver;
    BoundsConfig bounds;
    std::vector<double> sweep_dt;
    int parallel = 1;
    SpectralConfig spectral;
    int probe = -1;  // state component of the output series; middle of the state when < 0
    std::string out = "morrow_out";
    bool plots = false;
    std::uint64_t seed = 0;

    double fom_dt() const { return reference_dt > 0.0 ? reference_dt : dt; }
    int probe_index() const { return probe >= 0 ? probe : model.n / 2; }
    bool has_stage(const std::string& s) const;
    void validate() const;
};

// Parses YAML text; errors carry the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical stage order.
const std::vector<std::string>& stage_order();

std::vector<double> parse_number_list(const std::string& text);

} // namespace morrow::cli
