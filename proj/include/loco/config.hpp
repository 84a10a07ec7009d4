#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loco/sampler.hpp"
#include "loco/schedule.hpp"

namespace loco {

/// Command-line / config-file error: reported with exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fully resolved run configuration. Flags override config-file values,
/// which override the defaults below; every value is validated against the
/// preconditions of the module it feeds before dispatch.
struct RunConfig {
  ScheduleKind schedule = ScheduleKind::kCosine;
  int dim = 32;
  std::vector<int> ranks = {2, 2};
  std::string model_file;  // when set, overrides dim/ranks
  std::uint64_t seed = 0;
  std::vector<double> t_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                0.6, 0.7, 0.8, 0.9, 0.95};
  std::vector<double> lambda_grid = {1, 2, 5, 10, 20, 40};
  double eta = 0.99;
  int r = 5;
  int r_null = 5;
  int pick = 1;
  int steps = 100;
  double t = 0.6;
  double t_mid = 0.6;
  double lambda = 5.0;
  std::vector<int> mask;  // empty = whole-vector mask
  int n_samples = 15;
  GridKind grid = GridKind::kUniform;
  std::string out_dir = ".";
  std::string out = "direction.txt";
  int threads = 1;  // from LOCO_THREADS; 0 = auto
};

/// Parses "--key value" flags (plus an optional "key = value" file with '#'
/// comments; unknown keys are rejected by name). Does not read argv[0] or
/// the command word.
RunConfig parse_config(const std::vector<std::string>& args,
                       const std::optional<std::string>& config_file);

/// Runs one of: rank-curve, linearity-curve, symmetry-curve, subspace-curve,
/// epsrank-curve, theorem1, edit, roundtrip, gpm-check. Writes outputs into
/// config.out_dir and prints a one-line summary per file. Returns 0 on
/// success, 1 on a hard invariant failure.
int dispatch(const std::string& command, const RunConfig& config);

/// Full entry point: command word + flags -> exit status
/// (0 success, 1 invariant failure, 2 usage or I/O error).
int run_cli(int argc, char** argv);

}  // namespace loco
