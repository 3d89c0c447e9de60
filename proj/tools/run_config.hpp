#pragma once

// Run configuration for the wsrctrl tool. One JSON file per run:
//
//   system  distribution of (A, B)
//   cost    Q, R
//   weight  weight family, theta, alpha, beta, sigma
//   solver  method, tolerances, iteration caps, bank size, seed
//   task    subcommand-specific settings (x0, horizon, trials, rho, grid, ...)
//   output  output directory
//
// Matrices are arrays of rows; a bare number where a square matrix is
// expected means that multiple of the identity. See configs/README.md for the
// full schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wsrctrl/ensemble.hpp"
#include "wsrctrl/matops.hpp"
#include "wsrctrl/weights.hpp"
#include "wsrctrl/wsr.hpp"

namespace wsrctrl::app {

struct TaskConfig {
  Vec x0;
  int horizon = 300;
  int trials = 1;
  std::vector<double> rho{10.0, 100.0};
  std::vector<double> theta_grid;
  int repetitions = 20;
  int trajectories = 0;
  std::uint64_t seed = 0;  // simulation seed; defaults to solver.seed
  std::optional<Mat> gain;
  std::optional<std::filesystem::path> solution;
};

struct RunConfig {
  DistributionSpec system_spec;
  ParameterDistribution system;
  SymMat Q;
  SymMat R;
  WeightSpec weight;
  SolverOptions solver;
  Index bank_size = 10000;
  std::uint64_t seed = 0;
  bool trace = false;
  TaskConfig task;
  std::filesystem::path output = "out";

  // Canonical dump of the science fields (everything but `output`) after
  // overrides, and its FNV-1a digest.
  std::string canonical;
  std::string fingerprint;
};

struct Overrides {
  std::optional<std::filesystem::path> output;
  std::optional<std::uint64_t> seed;
};

// Throws ConfigError naming the offending field path, or the line and
// column for syntax errors. Relative paths are left relative to the working
// directory.
RunConfig parse_run_config(const nlohmann::json& doc, const Overrides& overrides = {});
RunConfig parse_run_config_text(const std::string& text, const Overrides& overrides = {});
// Throws IoError if the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

std::string fnv1a_hex(const std::string& text);

}  // namespace wsrctrl::app
