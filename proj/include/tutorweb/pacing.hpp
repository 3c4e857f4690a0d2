#pragma once

#include <optional>

namespace tutorweb {

/// Parameters of the inverse-dome answer time limit: long at both ends of the
/// grade range, shortest (t_min) at grade g_min.
struct TimeoutPolicy {
  bool enabled = true;
  double t_min = 15.0;   // seconds
  double t_max = 180.0;  // seconds
  double g_min = 6.0;    // grade at which the limit bottoms out
  double width = 2.0;    // grade units

  void validate() const;
  static TimeoutPolicy disabled();

  bool operator==(const TimeoutPolicy&) const = default;
};

/// Seconds allowed for the next question at grade g, or nullopt when there is
/// no limit. t_max - (t_max - t_min) * exp(-(g - g_min)^2 / (2 width^2)).
std::optional<double> timeout_seconds(double grade, const TimeoutPolicy& policy);

}  // namespace tutorweb
