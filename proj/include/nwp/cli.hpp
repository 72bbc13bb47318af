#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nwp/data.hpp"
#include "nwp/temporal.hpp"

namespace nwp {

struct CompareConfig {
    std::string mode = "splits";  // splits: Fig.4 protocol; epochs: per-method simulations
    int splits = 3;
    double train_fraction = 0.7;
    std::string baseline_method = "none";
};

// The run config file: SimulationConfig fields at top level plus optional
// "synthetic" and "compare" sections.
struct RunConfig {
    SimulationConfig sim;
    SyntheticSpec synthetic;
    CompareConfig compare;
};

RunConfig load_run_config(const std::filesystem::path& path);

struct SimulateArgs {
    std::string config_path;
    std::string data_path;  // exclusive with synthetic
    bool synthetic = false;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string method = "nwp";
};

struct CompareArgs {
    std::string config_path;
    std::string data_path;
    bool synthetic = false;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> methods;  // >= 2 of nwp / ceo / none
};

struct PrepareArgs {
    std::string dataset;  // adult | compas | synthetic
    std::string input_path;
    std::string schema_path;  // optional override of the built-in schema
    std::string out_dir;
    std::size_t n = 100;
    std::string balance;  // balance column; must be the schema's group column
    int max_age = 35;
    int max_priors = 3;
    double income_lo = 100.0;
    double income_hi = 1000.0;
    double noise_sd = 25.0;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& args);
int cmd_compare(const CompareArgs& args);
int cmd_prepare(const PrepareArgs& args);

// Full argv entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace nwp
