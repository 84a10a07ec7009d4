#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace loco {

/// Deterministic random source. Every piece of randomness in the project
/// flows through one of these, seeded explicitly, so a run is reproducible
/// from its seed alone. The uniform and normal transforms are spelled out
/// (instead of using std::*_distribution) because their output must not
/// depend on the standard-library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Box-Muller transform (pairs cached).
  double normal();

  /// Uniform integer in {0, ..., n-1}, n >= 1. Rejection sampled.
  int uniform_int(int n);

  Eigen::VectorXd normal_vector(int n);
  Eigen::MatrixXd normal_matrix(int rows, int cols);

  /// Uniform on the unit sphere in R^n.
  Eigen::VectorXd unit_vector(int n);

 private:
  std::mt19937_64 gen_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Stable per-task seed derivation (splitmix64 mix of base and task index).
/// Parallel execution order never changes which stream a task sees.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t task_index);

}  // namespace loco
