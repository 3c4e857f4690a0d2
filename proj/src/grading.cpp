#include "tutorweb/grading.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tutorweb {

namespace {

// Shared by compute_grade and GradeTracker so the two agree exactly.
// `earlier_correct` counts correct answers among the w-1 older in-window
// answers; the most recent answer carries last_answer_weight.
double windowed_value(std::size_t w, std::uint32_t earlier_correct, bool last_correct,
                      const GradePolicy& p) {
  if (w == 0) return 0.0;
  const double num = static_cast<double>(earlier_correct) + (last_correct ? p.last_answer_weight : 0.0);
  const double den = static_cast<double>(w - 1) + p.last_answer_weight;
  return p.scale * (num / den);
}

}  // namespace

AnswerHistory::AnswerHistory(std::vector<AnswerOutcome> outcomes) {
  outcomes_.reserve(outcomes.size());
  for (const auto& o : outcomes) append(o);
}

void AnswerHistory::append(const AnswerOutcome& outcome) {
  if (outcome.timed_out && outcome.correct) {
    throw std::invalid_argument("a timed-out answer cannot be correct");
  }
  if (!(outcome.time_taken >= 0.0)) throw std::invalid_argument("time taken must be >= 0");
  outcomes_.push_back(outcome);
}

void GradePolicy::validate() const {
  if (base_window == 0) throw std::invalid_argument("grade.base_window must be >= 1");
  if (base_window > max_window) throw std::invalid_argument("grade.base_window exceeds grade.max_window");
  if (growth_threshold < base_window) {
    throw std::invalid_argument("grade.growth_threshold must be >= grade.base_window");
  }
  if (!(growth_divisor > 0.0)) throw std::invalid_argument("grade.growth_divisor must be > 0");
  if (!(scale > 0.0)) throw std::invalid_argument("grade.scale must be > 0");
  if (!(last_answer_weight >= 1.0)) throw std::invalid_argument("grade.last_answer_weight must be >= 1");
}

GradePolicy GradePolicy::fixed_window(std::size_t window) {
  GradePolicy p;
  p.base_window = window;
  p.growth_threshold = window;
  p.growth_divisor = 1.0;
  p.max_window = window;
  return p;
}

std::size_t window_size(std::size_t n, const GradePolicy& p) {
  if (n < p.base_window) return n;
  if (n <= p.growth_threshold) return p.base_window;
  const auto grown = static_cast<std::size_t>(std::floor(static_cast<double>(n) / p.growth_divisor));
  return std::min(std::max(p.base_window, grown), p.max_window);
}

Grade compute_grade(std::span<const AnswerOutcome> outcomes, const GradePolicy& p) {
  const std::size_t n = outcomes.size();
  const std::size_t w = window_size(n, p);
  if (w == 0) return {};
  std::uint32_t earlier = 0;
  for (std::size_t i = n - w; i + 1 < n; ++i) earlier += outcomes[i].correct ? 1 : 0;
  return {windowed_value(w, earlier, outcomes[n - 1].correct, p)};
}

Grade compute_grade(const AnswerHistory& h, const GradePolicy& p) {
  return compute_grade(h.outcomes(), p);
}

Grade compute_grade_legacy(const AnswerHistory& h) {
  return compute_grade(h, GradePolicy::fixed_window(8));
}

GradeTracker::GradeTracker(GradePolicy policy) : policy_(policy) { policy_.validate(); }

void GradeTracker::push(const AnswerOutcome& outcome) {
  correct_prefix_.push_back(correct_prefix_.back() + (outcome.correct ? 1 : 0));
  last_correct_ = outcome.correct;
  const std::size_t n = answered();
  const std::size_t w = window_size(n, policy_);
  // Correct answers among positions [n-w, n-1).
  const std::uint32_t earlier = correct_prefix_[n - 1] - correct_prefix_[n - w];
  grade_ = {windowed_value(w, earlier, last_correct_, policy_)};
}

}  // namespace tutorweb
