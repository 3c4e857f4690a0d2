#include "tutorweb/allocation.hpp"

#include "tutorweb/crypto.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace tutorweb {

AllocationToken AllocationToken::generate() {
  std::array<std::uint8_t, kBytes> bytes{};
  secure_random_bytes(bytes);
  return AllocationToken(base32_lower(bytes));
}

std::optional<AllocationToken> AllocationToken::parse(std::string_view text) {
  if (text.size() != kLength) return std::nullopt;
  for (char c : text) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '2' && c <= '7');
    if (!ok) return std::nullopt;
  }
  return AllocationToken(std::string(text));
}

double difficulty(const DifficultyStats& s) noexcept {
  return (static_cast<double>(s.incorrect) + 1.0) / (static_cast<double>(s.attempts) + 2.0);
}

void StudentLectureState::record_answer(const std::string& question_id, const AnswerOutcome& outcome,
                                        const GradePolicy& policy) {
  history.append(outcome);
  grade = compute_grade(history, policy);
  last_answered = question_id;
}

std::vector<AllocatedQuestion> allocate(StudentLectureState& state, const Lecture& lecture,
                                        std::size_t max_count, std::uint64_t rng_seed) {
  if (lecture.question_ids.empty()) throw EmptyLecture();
  const std::size_t target = std::min(max_count, lecture.question_ids.size());
  if (state.allocation.size() >= target) return {};

  std::unordered_set<std::string> taken;
  for (const auto& a : state.allocation) taken.insert(a.question_id);
  std::vector<std::string> candidates;
  for (const auto& id : lecture.question_ids) {
    if (!taken.contains(id)) candidates.push_back(id);
  }

  std::vector<std::string> picked;
  std::mt19937_64 rng(rng_seed);
  std::sample(candidates.begin(), candidates.end(), std::back_inserter(picked),
              target - state.allocation.size(), rng);
  // std::sample keeps input order; shuffle so the allocation order leaks nothing.
  std::shuffle(picked.begin(), picked.end(), rng);

  std::vector<AllocatedQuestion> added;
  added.reserve(picked.size());
  for (auto& qid : picked) {
    added.push_back({AllocationToken::generate(), state.student_id, lecture.id, std::move(qid)});
  }
  state.allocation.insert(state.allocation.end(), added.begin(), added.end());
  return added;
}

std::size_t sample_rank(std::size_t m, double grade, std::optional<std::size_t> excluded,
                        std::mt19937_64& rng) {
  if (m == 0) throw EmptyAllocation();
  if (m == 1) return 0;
  const double target = std::clamp(grade / 10.0, 0.0, 1.0) * static_cast<double>(m - 1);
  const double sd = std::max(1.0, 0.15 * static_cast<double>(m));
  std::vector<double> weights(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = static_cast<double>(i) - target;
    weights[i] = std::exp(-(d * d) / (2.0 * sd * sd));
  }
  if (excluded && *excluded < m) weights[*excluded] = 0.0;
  // Far-off targets can underflow every weight; fall back to uniform.
  if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) {
    for (std::size_t i = 0; i < m; ++i) weights[i] = (excluded && *excluded == i) ? 0.0 : 1.0;
  }
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

std::vector<std::size_t> difficulty_order(const std::vector<std::string>& ids, const DifficultyLookup& lookup) {
  std::vector<double> diff(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) diff[i] = lookup(ids[i]);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (diff[a] != diff[b]) return diff[a] < diff[b];
    return ids[a] < ids[b];
  });
  return order;
}

const AllocatedQuestion& select_next(const StudentLectureState& state, const DifficultyLookup& lookup,
                                     std::uint64_t rng_seed) {
  const auto& alloc = state.allocation;
  if (alloc.empty()) throw EmptyAllocation();

  std::vector<std::string> ids;
  ids.reserve(alloc.size());
  for (const auto& a : alloc) ids.push_back(a.question_id);
  const auto order = difficulty_order(ids, lookup);

  std::optional<std::size_t> excluded;
  if (state.last_answered) {
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (ids[order[r]] == *state.last_answered) {
        excluded = r;
        break;
      }
    }
  }
  std::mt19937_64 rng(rng_seed);
  return alloc[order[sample_rank(alloc.size(), state.grade.value, excluded, rng)]];
}

const AllocatedQuestion& select_next(const StudentLectureState& state,
                                     const std::unordered_map<std::string, DifficultyStats>& stats,
                                     std::uint64_t rng_seed) {
  return select_next(
      state,
      [&](const std::string& id) {
        const auto it = stats.find(id);
        return difficulty(it == stats.end() ? DifficultyStats{} : it->second);
      },
      rng_seed);
}

}  // namespace tutorweb
