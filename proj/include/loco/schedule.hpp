#pragma once

#include <string_view>

namespace loco {

enum class ScheduleKind {
  kCosine,       // alpha(t) = cos^2(pi t / 2)
  kLinearAlpha,  // alpha(t) = 1 - t
};

/// Noise schedule t -> alpha_t on [0, 1] with alpha(0) = 1 and alpha(1) = 0,
/// strictly decreasing in between. Pure function of t; no state.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(ScheduleKind kind = ScheduleKind::kCosine)
      : kind_(kind) {}

  /// alpha_t. Throws std::domain_error for t outside [0, 1].
  /// The endpoints are returned exactly (1 at t=0, 0 at t=1).
  double alpha(double t) const;

  /// alpha_t / (1 - alpha_t). Defined for t in (0, 1]; tends to 0 as t -> 1.
  /// Throws std::domain_error at t = 0 where the denominator vanishes.
  double snr_ratio(double t) const;

  ScheduleKind kind() const { return kind_; }

 private:
  ScheduleKind kind_;
};

/// Accepts "cosine" and "linear"; throws std::invalid_argument otherwise.
ScheduleKind schedule_kind_from_string(std::string_view name);
const char* to_string(ScheduleKind kind);

}  // namespace loco
