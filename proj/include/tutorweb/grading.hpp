#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tutorweb {

struct AnswerOutcome {
  bool correct = false;
  bool timed_out = false;
  double time_taken = 0.0;  // seconds

  bool operator==(const AnswerOutcome&) const = default;
};

/// Append-only per-student, per-lecture answer log, oldest first.
class AnswerHistory {
 public:
  AnswerHistory() = default;
  explicit AnswerHistory(std::vector<AnswerOutcome> outcomes);

  /// Throws std::invalid_argument on a timed-out answer marked correct or a
  /// negative time.
  void append(const AnswerOutcome& outcome);

  std::size_t size() const noexcept { return outcomes_.size(); }
  bool empty() const noexcept { return outcomes_.empty(); }
  std::span<const AnswerOutcome> outcomes() const noexcept { return outcomes_; }
  const AnswerOutcome& operator[](std::size_t i) const { return outcomes_[i]; }

  bool operator==(const AnswerHistory&) const = default;

 private:
  std::vector<AnswerOutcome> outcomes_;
};

struct GradePolicy {
  std::size_t base_window = 8;
  std::size_t growth_threshold = 16;
  double growth_divisor = 2.0;
  std::size_t max_window = 30;
  double scale = 10.0;
  double last_answer_weight = 1.0;

  /// Throws std::invalid_argument when the bundle is inconsistent.
  void validate() const;

  /// The pre-taper scheme: always the most recent `window` answers.
  static GradePolicy fixed_window(std::size_t window = 8);

  bool operator==(const GradePolicy&) const = default;
};

struct Grade {
  double value = 0.0;

  auto operator<=>(const Grade&) const = default;
};

/// Number of most recent answers that enter the grade after n answers.
std::size_t window_size(std::size_t n, const GradePolicy& policy);

Grade compute_grade(std::span<const AnswerOutcome> outcomes, const GradePolicy& policy);
Grade compute_grade(const AnswerHistory& history, const GradePolicy& policy);

/// Mean of the last min(n, 8) answers on a 0-10 scale.
Grade compute_grade_legacy(const AnswerHistory& history);

/// Incremental grade: O(1) per answer via a prefix count of correct answers.
/// Must agree bit-for-bit with compute_grade on the same history.
class GradeTracker {
 public:
  explicit GradeTracker(GradePolicy policy = {});

  void push(const AnswerOutcome& outcome);
  Grade grade() const noexcept { return grade_; }
  std::size_t answered() const noexcept { return correct_prefix_.size() - 1; }
  const GradePolicy& policy() const noexcept { return policy_; }

 private:
  GradePolicy policy_;
  std::vector<std::uint32_t> correct_prefix_{0};
  bool last_correct_ = false;
  Grade grade_{};
};

}  // namespace tutorweb
