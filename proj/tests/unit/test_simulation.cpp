#include "tutorweb/simulation.hpp"

#include "doctest.h"

#include <cmath>

using namespace tutorweb;
using namespace tutorweb::analytics;

namespace {

SessionConfig config(GradePolicy g, TimeoutPolicy t) {
  SessionConfig c;
  c.grade_policy = g;
  c.timeout_policy = t;
  return c;
}

}  // namespace

TEST_CASE("sessions are bitwise reproducible") {
  SimPersona p;
  p.theta0 = 0.3;
  p.learn_rate = 0.01;
  const auto d = LectureSpec{}.difficulties();
  const auto a = simulate_session(p, d, SessionConfig{}, 300, 77);
  const auto b = simulate_session(p, d, SessionConfig{}, 300, 77);
  CHECK(a.history == b.history);
  CHECK(a.grades == b.grades);
  CHECK(a.final_theta == b.final_theta);
  const auto c = simulate_session(p, d, SessionConfig{}, 300, 78);
  CHECK_FALSE(c.history == a.history);
}

TEST_CASE("a certain solver ends at ten") {
  SimPersona p;
  p.theta0 = 1e6;
  const auto r =
      simulate_session(p, LectureSpec{}.difficulties(), config({}, TimeoutPolicy::disabled()), 100, 1);
  CHECK(r.final_grade.value == 10.0);
  CHECK(r.history.size() == 100);
}

TEST_CASE("theta moves towards one and stays bounded") {
  SimPersona p;
  p.theta0 = 0.0;
  p.learn_rate = 0.05;
  const auto r = simulate_session(p, LectureSpec{}.difficulties(), SessionConfig{}, 200, 3);
  CHECK(r.final_theta == doctest::Approx(1.0 - std::pow(0.95, 200)).epsilon(1e-12));
  p.theta0 = 0.99;
  CHECK(simulate_session(p, LectureSpec{}.difficulties(), SessionConfig{}, 200, 3).final_theta <= 1.0);
}

TEST_CASE("timed-out answers are incorrect at the limit") {
  SimPersona slow;
  slow.theta0 = 0.5;
  slow.time_scale = 2000.0;
  const auto r = simulate_session(slow, LectureSpec{}.difficulties(), SessionConfig{}, 200, 4);
  std::size_t timed_out = 0;
  for (const auto& o : r.history.outcomes()) {
    if (!o.timed_out) continue;
    ++timed_out;
    CHECK_FALSE(o.correct);
    CHECK(o.time_taken <= 180.0);
  }
  CHECK(timed_out > 0);
}

TEST_CASE("the timeout lowers a slow solver's grade") {
  // Median time at accuracy a is 400 (1 - a) s, so about half the answers
  // at the dome floor run over the limit.
  SimPersona slow;
  slow.theta0 = 0.6;
  slow.time_scale = 400.0;
  const auto d = LectureSpec{}.difficulties();
  double with = 0;
  double without = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    with += simulate_session(slow, d, config({}, TimeoutPolicy{}), 200, seed).final_grade.value;
    without += simulate_session(slow, d, config({}, TimeoutPolicy::disabled()), 200, seed).final_grade.value;
  }
  CHECK(with < without);
}

TEST_CASE("guessers answer fast and near chance") {
  SimPersona g;
  g.guesser = true;
  const auto r =
      simulate_session(g, LectureSpec{}.difficulties(), config({}, TimeoutPolicy::disabled()), 4000, 5);
  std::size_t correct = 0;
  for (const auto& o : r.history.outcomes()) {
    correct += o.correct ? 1 : 0;
    CHECK(o.time_taken >= 1.0);
    CHECK(o.time_taken <= 6.0);
  }
  CHECK(std::abs(static_cast<double>(correct) / 4000.0 - 0.25) < 0.03);
}

TEST_CASE("max running grade from an offset") {
  SessionResult r;
  r.grades = {10.0, 5.0, 7.0, 2.0};
  CHECK(r.max_grade_from(1) == 10.0);
  CHECK(r.max_grade_from(2) == 7.0);
  CHECK(r.max_grade_from(4) == 2.0);
}

TEST_CASE("identical personas give chance-level AUC") {
  PopulationSpec pop;
  pop.students = 400;
  pop.guesser_fraction = 0.0;
  pop.theta0_mean = 0.6;
  pop.theta0_sd = 1e-9;  // the mastery label becomes a coin flip
  pop.learn_rate_min = 0.0;
  pop.learn_rate_max = 0.0;
  ComparisonOptions opts;
  opts.reps = 4;
  opts.n_answers = 100;
  opts.seed = 3;
  const auto cmp = compare_schemes(pop, LectureSpec{}, opts);
  for (const auto& s : cmp.schemes) {
    CHECK(std::abs(s.mean_auc - 0.5) < 0.06);
  }
}

TEST_CASE("thread count does not change results") {
  PopulationSpec pop;
  pop.students = 60;
  ComparisonOptions opts;
  opts.reps = 2;
  opts.n_answers = 80;
  opts.seed = 9;
  const auto a = compare_schemes(pop, LectureSpec{}, opts);
  opts.threads = 3;
  const auto b = compare_schemes(pop, LectureSpec{}, opts);
  REQUIRE(a.schemes.size() == b.schemes.size());
  for (std::size_t i = 0; i < a.schemes.size(); ++i) {
    CHECK(a.schemes[i].auc_per_rep == b.schemes[i].auc_per_rep);
    CHECK(a.schemes[i].mean_grade == b.schemes[i].mean_grade);
  }
  for (std::size_t i = 0; i < a.students.size(); ++i) CHECK(a.students[i].final_grades == b.students[i].final_grades);
}

TEST_CASE("population composition") {
  PopulationSpec pop;
  pop.students = 10;
  pop.guesser_fraction = 0.4;
  std::size_t guessers = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto p = draw_persona(pop, 1, 0, i);
    guessers += p.guesser ? 1 : 0;
    CHECK(p.learn_rate >= 0.0);
    CHECK(p.learn_rate <= 0.008);
    CHECK(draw_persona(pop, 1, 0, i).theta0 == p.theta0);
  }
  CHECK(guessers == 4);
}

TEST_CASE("default schemes") {
  const auto s = default_schemes();
  REQUIRE(s.size() == 3);
  CHECK(s[0].name == "taper+timeout");
  CHECK(s[0].timeout_policy.enabled);
  CHECK(s[1].name == "taper");
  CHECK_FALSE(s[1].timeout_policy.enabled);
  CHECK(s[2].name == "fixed-8");
  CHECK(window_size(200, s[2].grade_policy) == 8);
}
