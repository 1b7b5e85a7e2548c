#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "minmax/drivers.hpp"

namespace minmax {

/// Invalid configuration text. line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Lists over which bench takes the Cartesian product. An empty list means
/// the axis is not swept and the base value is used.
struct SweepAxes {
    std::vector<double> b;
    std::vector<std::size_t> d; // sets d_x = d_y
    std::vector<std::size_t> dx;
    std::vector<std::size_t> dy;
    std::vector<std::size_t> n_omega;
    std::vector<int> c_max;
    std::vector<double> tau_threshold;
    std::vector<double> p_plus;
    std::vector<double> p_minus;
};

struct ExperimentConfig {
    ProblemSpec problem;
    std::vector<Algorithm> algorithms{Algorithm::WraCma};
    AlgorithmConfig params; // the algorithm field is ignored
    RunOptions run;
    int n_trials = 20;
    std::uint64_t master_seed = 1;
    SweepAxes sweep;
    std::string out_dir = "out";
    std::string format = "csv"; // csv | json
};

/// Parses the JSON config (comments allowed). Missing keys keep their
/// defaults; unknown keys, wrong types and invalid values throw ConfigError
/// naming the key and its line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Full config with every field written; parse_config(serialize_config(c))
/// reproduces c.
std::string serialize_config(const ExperimentConfig& config);

/// One point of the sweep product for one algorithm.
struct ConfigPoint {
    ProblemSpec problem;
    AlgorithmConfig algo;
    std::string key; // stable file-name-safe identifier
};

std::vector<ConfigPoint> expand_sweep(const ExperimentConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

} // namespace minmax
