#include "tutorweb/pacing.hpp"

#include <cmath>
#include <stdexcept>

namespace tutorweb {

void TimeoutPolicy::validate() const {
  if (!(t_min > 0.0)) throw std::invalid_argument("timeout.t_min must be > 0");
  if (!(t_max >= t_min)) throw std::invalid_argument("timeout.t_max must be >= timeout.t_min");
  if (!(g_min >= 0.0 && g_min <= 10.0)) throw std::invalid_argument("timeout.g_min must lie in [0, 10]");
  if (!(width > 0.0)) throw std::invalid_argument("timeout.width must be > 0");
}

TimeoutPolicy TimeoutPolicy::disabled() {
  TimeoutPolicy p;
  p.enabled = false;
  return p;
}

std::optional<double> timeout_seconds(double grade, const TimeoutPolicy& p) {
  if (!p.enabled) return std::nullopt;
  const double d = grade - p.g_min;
  const double dip = std::exp(-(d * d) / (2.0 * p.width * p.width));
  const double t = p.t_max - (p.t_max - p.t_min) * dip;
  // Rounding can push t a hair outside [t_min, t_max].
  return std::fmin(p.t_max, std::fmax(p.t_min, t));
}

}  // namespace tutorweb
