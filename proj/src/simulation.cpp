#include "tutorweb/simulation.hpp"

#include "tutorweb/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace tutorweb::analytics {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(tag)};
  std::mt19937_64 rng(seq);
  return rng();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

double SimPersona::accuracy(double theta, double d) const noexcept {
  return 1.0 / (1.0 + std::exp(-discrimination * (theta - d)));
}

double SessionResult::max_grade_from(std::size_t first) const {
  if (first == 0) first = 1;
  if (first > grades.size()) return 0.0;
  return *std::max_element(grades.begin() + static_cast<std::ptrdiff_t>(first - 1), grades.end());
}

SessionResult simulate_session(const SimPersona& persona, const std::vector<double>& difficulties,
                               const SessionConfig& config, std::size_t n_answers, std::uint64_t seed) {
  if (n_answers == 0) throw std::invalid_argument("n_answers must be >= 1");
  if (difficulties.empty()) throw EmptyLecture();
  if (config.choices < 2) throw std::invalid_argument("need at least 2 choices");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Allocation: uniform subset, then ordered easy -> hard (ties by index).
  std::vector<std::size_t> all(difficulties.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> allocated;
  std::sample(all.begin(), all.end(), std::back_inserter(allocated),
              std::min(config.allocation_size, difficulties.size()), rng);
  std::stable_sort(allocated.begin(), allocated.end(),
                   [&](std::size_t a, std::size_t b) { return difficulties[a] < difficulties[b]; });
  const std::size_t m = allocated.size();

  GradeTracker tracker(config.grade_policy);
  SessionResult out;
  out.grades.reserve(n_answers);
  double theta = persona.theta0;
  std::optional<std::size_t> last_rank;
  const double guess_p = 1.0 / static_cast<double>(config.choices);

  for (std::size_t t = 0; t < n_answers; ++t) {
    const double grade = tracker.grade().value;
    const auto limit = timeout_seconds(grade, config.timeout_policy);
    const std::size_t rank = sample_rank(m, grade, last_rank, rng);
    const double d = difficulties[allocated[rank]];

    AnswerOutcome outcome;
    const double u = unit(rng);
    const double z = gauss(rng);
    if (persona.guesser) {
      outcome.correct = u < guess_p;
      outcome.time_taken = persona.guess_time_min + (persona.guess_time_max - persona.guess_time_min) * unit(rng);
    } else {
      const double a = persona.accuracy(theta, d);
      outcome.correct = u < a;
      outcome.time_taken = persona.time_scale * (1.0 - a) * std::exp(persona.time_sigma * z);
    }
    if (limit && outcome.time_taken > *limit) {
      outcome.timed_out = true;
      outcome.correct = false;
      outcome.time_taken = *limit;
    }

    out.history.append(outcome);
    tracker.push(outcome);
    out.grades.push_back(tracker.grade().value);
    if (theta < 1.0) theta = std::min(1.0, theta + persona.learn_rate * (1.0 - theta));
    last_rank = rank;
  }
  out.final_grade = tracker.grade();
  out.final_theta = theta;
  return out;
}

std::vector<Scheme> default_schemes() {
  return {
      {"taper+timeout", GradePolicy{}, TimeoutPolicy{}},
      {"taper", GradePolicy{}, TimeoutPolicy::disabled()},
      {"fixed-8", GradePolicy::fixed_window(8), TimeoutPolicy::disabled()},
  };
}

std::vector<double> LectureSpec::difficulties() const {
  std::vector<double> d(questions);
  for (std::size_t i = 0; i < questions; ++i) {
    const double frac = questions == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(questions - 1);
    d[i] = difficulty_min + frac * (difficulty_max - difficulty_min);
  }
  return d;
}

const SchemeSummary& SchemeComparison::scheme(const std::string& name) const {
  for (const auto& s : schemes) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("unknown scheme " + name);
}

double SchemeComparison::paired_difference_se(const std::string& a, const std::string& b) const {
  const auto& sa = scheme(a);
  const auto& sb = scheme(b);
  std::vector<double> diff(sa.auc_per_rep.size());
  for (std::size_t r = 0; r < diff.size(); ++r) diff[r] = sa.auc_per_rep[r] - sb.auc_per_rep[r];
  return standard_error(diff);
}

SimPersona draw_persona(const PopulationSpec& pop, std::uint64_t seed, std::size_t rep, std::size_t student) {
  std::mt19937_64 rng(derive_seed(seed, rep, student, 0x9e15));
  std::normal_distribution<double> theta(pop.theta0_mean, pop.theta0_sd);
  std::uniform_real_distribution<double> learn(pop.learn_rate_min, pop.learn_rate_max);
  SimPersona p = pop.base;
  const auto n_guessers =
      static_cast<std::size_t>(std::llround(pop.guesser_fraction * static_cast<double>(pop.students)));
  p.guesser = student < n_guessers;
  p.theta0 = theta(rng);
  p.learn_rate = pop.learn_rate_max > pop.learn_rate_min ? learn(rng) : pop.learn_rate_min;
  return p;
}

SchemeComparison compare_schemes(const PopulationSpec& pop, const LectureSpec& lecture,
                                 const ComparisonOptions& opts) {
  if (pop.students < 2) throw DegenerateInput("population needs at least 2 students");
  if (opts.reps == 0) throw std::invalid_argument("reps must be >= 1");
  if (opts.schemes.empty()) throw std::invalid_argument("no schemes to compare");
  if (!(pop.guesser_fraction >= 0.0 && pop.guesser_fraction <= 1.0)) {
    throw std::invalid_argument("guesser fraction must lie in [0, 1]");
  }
  const auto difficulties = lecture.difficulties();

  SchemeComparison out;
  out.reps = opts.reps;
  out.students.resize(opts.reps * pop.students);

  auto run_one = [&](std::size_t slot) {
    const std::size_t rep = slot / pop.students;
    const std::size_t i = slot % pop.students;
    SimulatedStudent& s = out.students[slot];
    s.rep = rep;
    s.index = i;
    s.persona = draw_persona(pop, opts.seed, rep, i);
    const std::uint64_t session_seed = derive_seed(opts.seed, rep, i, 0x5e55);
    for (const auto& scheme : opts.schemes) {
      SessionConfig cfg{scheme.grade_policy, scheme.timeout_policy, lecture.choices};
      const auto r = simulate_session(s.persona, difficulties, cfg, opts.n_answers, session_seed);
      s.final_grades.push_back(r.final_grade.value);
      s.final_theta = r.final_theta;
    }
    s.mastered = s.final_theta >= pop.mastery_threshold;
  };

  const std::size_t total = out.students.size();
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.threads, total));
  if (n_threads == 1) {
    for (std::size_t k = 0; k < total; ++k) run_one(k);
  } else {
    // Slots are independent and each owns its RNG stream, so the split does
    // not affect results.
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t k = t; k < total; k += n_threads) run_one(k);
      });
    }
  }

  for (std::size_t si = 0; si < opts.schemes.size(); ++si) {
    SchemeSummary summary;
    summary.name = opts.schemes[si].name;
    double grade_sum = 0.0;
    for (std::size_t rep = 0; rep < opts.reps; ++rep) {
      std::vector<ScoredLabel> scored;
      scored.reserve(pop.students);
      for (std::size_t i = 0; i < pop.students; ++i) {
        const auto& s = out.students[rep * pop.students + i];
        scored.push_back({s.final_grades[si], s.mastered});
        grade_sum += s.final_grades[si];
      }
      summary.auc_per_rep.push_back(auc(scored));
    }
    summary.mean_auc = mean(summary.auc_per_rep);
    summary.standard_error = standard_error(summary.auc_per_rep);
    summary.mean_grade = grade_sum / static_cast<double>(total);
    out.schemes.push_back(std::move(summary));
  }
  return out;
}

}  // namespace tutorweb::analytics
