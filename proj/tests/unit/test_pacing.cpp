#include "tutorweb/pacing.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>

using namespace tutorweb;

TEST_CASE("closed form values") {
  const TimeoutPolicy p;
  CHECK(*timeout_seconds(6.0, p) == 15.0);
  // 180 - 165 exp(-4.5), evaluated independently.
  CHECK(*timeout_seconds(0.0, p) == doctest::Approx(178.16701557119).epsilon(1e-12));
  CHECK(*timeout_seconds(8.0, p) == doctest::Approx(79.92244114741548).epsilon(1e-12));
  CHECK(*timeout_seconds(10.0, p) == doctest::Approx(157.6696782659589).epsilon(1e-12));
}

TEST_CASE("disabled means no limit") {
  const auto p = TimeoutPolicy::disabled();
  for (double g = 0; g <= 10; g += 0.5) CHECK_FALSE(timeout_seconds(g, p).has_value());
}

TEST_CASE("constant limit") {
  TimeoutPolicy p;
  p.t_min = 60;
  p.t_max = 60;
  for (double g = 0; g <= 10; g += 0.25) CHECK(*timeout_seconds(g, p) == 60.0);
}

TEST_CASE("wide dome flattens to a constant") {
  TimeoutPolicy p;
  p.width = 1e6;
  // The dip spreads over every grade, so the limit settles at t_min.
  for (double g = 0; g <= 10; g += 0.5) CHECK(std::abs(*timeout_seconds(g, p) - p.t_min) <= 1e-8);
}

TEST_CASE("shape: bounds, symmetry, unique minimum") {
  const TimeoutPolicy p;
  double prev = *timeout_seconds(0.0, p);
  for (int i = 1; i <= 1000; ++i) {
    const double g = i * 0.01;
    const double t = *timeout_seconds(g, p);
    CHECK(t >= p.t_min);
    CHECK(t <= p.t_max);
    if (g <= p.g_min) CHECK(t <= prev);
    if (g > p.g_min) CHECK(t >= prev);
    if (g != p.g_min) CHECK(t > p.t_min);
    prev = t;
  }
  for (double d = 0.0; d <= 6.0; d += 0.125) {
    CHECK(std::abs(*timeout_seconds(p.g_min + d, p) - *timeout_seconds(p.g_min - d, p)) < 1e-9);
  }
}

TEST_CASE("grade 6 is shorter than grade 0") {
  const TimeoutPolicy p;
  CHECK(*timeout_seconds(6.0, p) < *timeout_seconds(0.0, p));
}

TEST_CASE("policy validation") {
  TimeoutPolicy p;
  CHECK_NOTHROW(p.validate());
  p.t_min = 200;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.width = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.t_min = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
