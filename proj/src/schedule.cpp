#include "loco/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace loco {

double NoiseSchedule::alpha(double t) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("alpha: t outside [0, 1]: " + std::to_string(t));
  // Endpoints pinned exactly; cos(pi/2) is only zero to rounding.
  if (t == 0.0) return 1.0;
  if (t == 1.0) return 0.0;
  switch (kind_) {
    case ScheduleKind::kCosine: {
      const double c = std::cos(0.5 * M_PI * t);
      return c * c;
    }
    case ScheduleKind::kLinearAlpha:
      return 1.0 - t;
  }
  throw std::logic_error("alpha: unreachable");
}

double NoiseSchedule::snr_ratio(double t) const {
  if (t == 0.0)
    throw std::domain_error("snr_ratio: singular at t = 0 (alpha = 1)");
  const double a = alpha(t);
  return a / (1.0 - a);
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "cosine") return ScheduleKind::kCosine;
  if (name == "linear") return ScheduleKind::kLinearAlpha;
  throw std::invalid_argument("unknown schedule kind: " + std::string(name));
}

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kCosine:
      return "cosine";
    case ScheduleKind::kLinearAlpha:
      return "linear";
  }
  return "?";
}

}  // namespace loco
