#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmin::cli {

/// Invalid configuration (unreadable file, malformed JSON, unknown keys, bad ranges,
/// unparseable expressions). Maps to exit code 1; no output files are written.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Task configuration, normally loaded from a JSON document. See the README for the
/// per-task keys and defaults.
struct RunConfig {
    std::string task;

    std::array<double, 2> domain1{0.0, 0.0};
    std::array<double, 2> domain2{0.0, 0.0};
    bool has_domain = false;
    bool has_domain2 = false;

    int n = 0;                    // 1D interval count (0 = task default)
    int m1 = 0, m2 = 0;           // 2D interval counts
    std::vector<int> grid_sizes;  // verify / variation sweeps

    std::string b_text = "y";
    std::vector<std::string> boundary;
    std::string initial;          // flow initial curve, expression in x
    std::string test_function = "cos(x)";

    double epsilon = 0.01;        // stability regularization
    int m = 2000;                 // stability interior node count

    double t_end = 0.1;           // flow horizon
    double dt = 0.0;              // flow step (0 = 0.4 h^2)
    int samples = 11;             // flow trajectory samples

    int num_pairs = 50;           // variation battery size

    double tol_residual = 1e-10;
    int max_iter = 50;
    double riccati_step = 0.0;    // 0 = automatic step refinement

    std::string output_dir = "out";
    std::uint64_t seed = 1;
    bool quiet = false;
};

/// Parses and validates a JSON config file. Throws ConfigError.
RunConfig load_config(const std::string& path);

/// Runs the configured task and writes result.json plus the per-task CSVs into
/// output_dir. Returns the process exit code: 0 success, 2 solver non-convergence,
/// 3 numerical failure. Throws ConfigError before any output is written when the
/// configuration is invalid. Identical configs byte-reproduce all outputs.
int run(const RunConfig& config);

}  // namespace bmin::cli
