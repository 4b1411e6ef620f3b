#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace privdet {

// Inputs shared by every experiment; unset optionals fall back to
// per-experiment defaults (or values from the scenario config).
struct ExperimentOptions {
  std::string experiment;
  std::string out_path = "out.csv";
  std::string config_path;              // empty: built-in grid benchmark
  std::string data_path;                // generator table override
  std::uint64_t seed = 1;
  int trials = 10000;
  std::optional<int> horizon;
  std::optional<double> p_false_alarm;
  int mechanism_set = 0;                // built-in sharing configuration
};

// Known experiment names, in help order.
const std::vector<std::string>& experiment_names();

// Runs one experiment, writing its CSV artifact; throws on bad input
// (std::invalid_argument) or numerical failure (NumericalError & friends).
void run_experiment(const ExperimentOptions& options);

// Deterministic Monte Carlo rejection count over `trials` independent
// batches (parallelized over hardware threads, reduced in trial order).
int count_rejections(const std::function<bool(std::uint64_t)>& trial,
                     int trials, std::uint64_t seed);

}  // namespace privdet
