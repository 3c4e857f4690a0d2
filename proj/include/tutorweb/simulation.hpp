#pragma once

#include "tutorweb/analytics.hpp"
#include "tutorweb/grading.hpp"
#include "tutorweb/pacing.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tutorweb::analytics {

/// Simulated student. Non-guessers answer correctly with probability
/// 1 / (1 + exp(-discrimination (theta - d))) and take a lognormal time whose
/// median is time_scale times the student's chance of failing the question.
/// Guessers pick uniformly among the choices and answer within
/// [guess_time_min, guess_time_max] seconds. After every answer theta moves
/// towards 1 by learn_rate of the remaining gap.
struct SimPersona {
  double theta0 = 0.0;
  double learn_rate = 0.0;
  bool guesser = false;
  double discrimination = 1.7;
  double time_scale = 40.0;
  double time_sigma = 0.5;
  double guess_time_min = 1.0;
  double guess_time_max = 6.0;

  double accuracy(double theta, double question_difficulty) const noexcept;
};

struct SessionResult {
  AnswerHistory history;
  std::vector<double> grades;  // grade after each answer
  Grade final_grade;
  double final_theta = 0.0;

  /// Highest running grade from answer `first` (1-based count) onwards.
  double max_grade_from(std::size_t first = 1) const;
};

struct SessionConfig {
  GradePolicy grade_policy;
  TimeoutPolicy timeout_policy;
  std::size_t choices = 4;
  std::size_t allocation_size = 100;
};

/// Bitwise reproducible for a fixed seed. `difficulties` are the lecture's
/// question difficulties on the theta scale.
SessionResult simulate_session(const SimPersona& persona, const std::vector<double>& difficulties,
                               const SessionConfig& config, std::size_t n_answers, std::uint64_t seed);

struct Scheme {
  std::string name;
  GradePolicy grade_policy;
  TimeoutPolicy timeout_policy;
};

/// taper+timeout, taper, fixed-8.
std::vector<Scheme> default_schemes();

struct PopulationSpec {
  std::size_t students = 500;
  double guesser_fraction = 0.4;
  double theta0_mean = 0.2;
  double theta0_sd = 0.4;
  double learn_rate_min = 0.0;
  double learn_rate_max = 0.008;
  double mastery_threshold = 0.6;
  SimPersona base;  // template for the remaining persona parameters
};

struct LectureSpec {
  std::size_t questions = 200;
  double difficulty_min = -0.8;
  double difficulty_max = 1.6;
  std::size_t choices = 4;

  /// Evenly spaced difficulties.
  std::vector<double> difficulties() const;
};

struct SimulatedStudent {
  std::size_t rep = 0;
  std::size_t index = 0;
  SimPersona persona;
  double final_theta = 0.0;
  bool mastered = false;
  std::vector<double> final_grades;  // one per scheme
};

struct SchemeSummary {
  std::string name;
  std::vector<double> auc_per_rep;
  double mean_auc = 0.0;
  double standard_error = 0.0;  // across reps
  double mean_grade = 0.0;
};

struct SchemeComparison {
  std::vector<SchemeSummary> schemes;
  std::vector<SimulatedStudent> students;
  std::size_t reps = 0;

  const SchemeSummary& scheme(const std::string& name) const;
  /// Standard error of the across-rep paired difference of AUCs.
  double paired_difference_se(const std::string& a, const std::string& b) const;
};

struct ComparisonOptions {
  std::size_t n_answers = 200;
  std::size_t reps = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::vector<Scheme> schemes = default_schemes();
};

/// Simulates the population once per rep and scores every scheme on the same
/// students (same session seed). Labels are final theta >= mastery_threshold.
/// Propagates DegenerateInput when a rep has a single label class.
SchemeComparison compare_schemes(const PopulationSpec& population, const LectureSpec& lecture,
                                 const ComparisonOptions& options);

/// Deterministic per-(rep, student) persona drawn from the population.
SimPersona draw_persona(const PopulationSpec& population, std::uint64_t seed, std::size_t rep,
                        std::size_t student);

}  // namespace tutorweb::analytics
