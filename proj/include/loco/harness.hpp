#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "loco/molrg.hpp"
#include "loco/schedule.hpp"

namespace loco {

/// A rectangular numeric table plus the metadata needed to re-run it
/// bit-identically. Serialized as CSV: a "# meta key=value ..." line, a
/// header line, then comma-separated rows at 17 significant digits with LF
/// line endings.
struct CurveTable {
  std::string name;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::filesystem::path& file) const;
};

struct HarnessConfig {
  std::vector<double> t_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                0.6, 0.7, 0.8, 0.9, 0.95};
  std::vector<double> lambda_grid = {1, 2, 5, 10, 20, 40};
  double eta = 0.99;
  int n_samples = 15;
  std::uint64_t seed = 0;
  int threads = 1;  // 0 = hardware concurrency
  std::string model_label;
};

/// Numerical rank of the analytic Jacobian across the t grid: mean/min/max
/// eta-rank over n_samples noised draws per t, the rank ratio against d, and
/// the raw (energy-free) rank. Dense path up to kDenseDimCap, matrix-free
/// estimate beyond.
CurveTable rank_ratio_curve(const SubspaceModel& model,
                            const NoiseSchedule& schedule,
                            const HarnessConfig& config);

/// Norm ratio and cosine similarity between f(x_t + lambda dx) and its
/// first-order model across the lambda grid at a fixed t, with dx uniform on
/// the unit sphere.
CurveTable linearity_curve(const SubspaceModel& model,
                           const NoiseSchedule& schedule, double t,
                           const HarnessConfig& config);

/// Mean relative asymmetry ||J - J^T||_F / ||J||_F per t, for the analytic
/// and the finite-difference backends side by side.
CurveTable symmetry_curve(const SubspaceModel& model,
                          const NoiseSchedule& schedule,
                          const HarnessConfig& config);

/// Distance ||(I - U1 U1^T) M||_F of the stacked basis from the top singular
/// block, per t, next to its perturbation bound
/// snr * C3 C4 / min_k w_k with the constants instantiated from the realized
/// draw norms. Bound violations are findings (status column), not failures.
CurveTable subspace_convergence_curve(const SubspaceModel& model,
                                      const NoiseSchedule& schedule,
                                      const HarnessConfig& config);

/// Eta-ranks of the posterior-mean Jacobian and of the noise-prediction
/// Jacobian (I - sqrt(a) J)/sqrt(1-a) per t, with the complementarity check
/// rank_eps >= d - rank_pm.
CurveTable epsilon_rank_relation(const SubspaceModel& model,
                                 const NoiseSchedule& schedule,
                                 const HarnessConfig& config);

/// One row per claimed Jacobian property (rank bound, local linearity,
/// symmetry + subspace convergence): pass flag and worst-case margin,
/// aggregated from the curves above.
CurveTable theorem1_report(const SubspaceModel& model,
                           const NoiseSchedule& schedule,
                           const HarnessConfig& config);

}  // namespace loco
