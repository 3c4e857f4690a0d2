#pragma once

#include "tutorweb/content.hpp"
#include "tutorweb/grading.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tutorweb {

inline constexpr std::size_t kDefaultAllocationSize = 100;

/// Opaque per-student question reference: 16 CSPRNG bytes rendered as 26
/// lower-case base32 characters.
class AllocationToken {
 public:
  static constexpr std::size_t kBytes = 16;
  static constexpr std::size_t kLength = 26;

  static AllocationToken generate();
  /// Accepts only well-formed token text.
  static std::optional<AllocationToken> parse(std::string_view text);

  const std::string& str() const noexcept { return value_; }
  auto operator<=>(const AllocationToken&) const = default;

 private:
  explicit AllocationToken(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

struct AllocatedQuestion {
  AllocationToken token;
  std::string student_id;
  std::string lecture_id;
  std::string question_id;
};

struct DifficultyStats {
  std::uint64_t attempts = 0;
  std::uint64_t incorrect = 0;

  void record(bool correct) noexcept {
    ++attempts;
    if (!correct) ++incorrect;
  }
};

/// Laplace-smoothed proportion incorrect, strictly inside (0, 1).
double difficulty(const DifficultyStats& stats) noexcept;

struct StudentLectureState {
  std::string student_id;
  std::string lecture_id;
  std::vector<AllocatedQuestion> allocation;
  AnswerHistory history;
  Grade grade;
  std::optional<std::string> last_answered;

  /// Appends to the history and keeps grade == compute_grade(history).
  void record_answer(const std::string& question_id, const AnswerOutcome& outcome,
                     const GradePolicy& policy);
};

class EmptyLecture : public std::runtime_error {
 public:
  EmptyLecture() : std::runtime_error("lecture has no questions") {}
};

class EmptyAllocation : public std::runtime_error {
 public:
  EmptyAllocation() : std::runtime_error("allocation is empty") {}
};

/// Tops the state's allocation up to min(max_count, |lecture|) with a uniform
/// random sample of not-yet-allocated questions, minting a fresh token for
/// each. Existing entries are kept, so repeated calls are idempotent.
/// Returns the entries added by this call.
std::vector<AllocatedQuestion> allocate(StudentLectureState& state, const Lecture& lecture,
                                        std::size_t max_count, std::uint64_t rng_seed);

/// Draws a difficulty rank in [0, m): discrete Gaussian centred on
/// (grade / 10) * (m - 1) with sd max(1, 0.15 m). `excluded` is skipped when
/// m >= 2.
std::size_t sample_rank(std::size_t m, double grade, std::optional<std::size_t> excluded,
                        std::mt19937_64& rng);

using DifficultyLookup = std::function<double(const std::string& question_id)>;

/// Orders question ids by ascending difficulty, ties by id.
std::vector<std::size_t> difficulty_order(const std::vector<std::string>& question_ids,
                                          const DifficultyLookup& lookup);

const AllocatedQuestion& select_next(const StudentLectureState& state, const DifficultyLookup& lookup,
                                     std::uint64_t rng_seed);
const AllocatedQuestion& select_next(const StudentLectureState& state,
                                     const std::unordered_map<std::string, DifficultyStats>& stats,
                                     std::uint64_t rng_seed);

}  // namespace tutorweb
