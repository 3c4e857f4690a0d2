#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tutorweb::analytics {

class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// P(pass | g) = 1 / (1 + exp(-(beta0 + beta1 g)))
struct LogisticFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  bool converged = false;
  std::size_t iterations = 0;

  double probability(double grade) const noexcept;
  /// Grade where the fitted curve crosses 0.5; NaN when beta1 == 0.
  double midpoint() const noexcept;
};

class CompleteSeparation : public std::runtime_error {
 public:
  explicit CompleteSeparation(LogisticFit last_iterate);
  /// Iterate at which the coefficient norm passed the divergence bound. Its
  /// midpoint still locates the separating grade.
  const LogisticFit& last_iterate() const noexcept { return last_; }

 private:
  LogisticFit last_;
};

struct FitOptions {
  double step_tolerance = 1e-8;
  std::size_t max_iterations = 100;
  double divergence_norm = 50.0;
};

struct GradeOutcome {
  double grade = 0.0;
  bool passed = false;
};

/// Maximum-likelihood logistic fit by Newton/IRLS, starting from zero.
/// Throws DegenerateInput (fewer than 2 points, a single class, or no spread
/// in grades) or CompleteSeparation.
LogisticFit fit_pass_probability(const std::vector<GradeOutcome>& points, const FitOptions& opts = {});

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

/// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie).
double auc(const std::vector<ScoredLabel>& scores);

struct PassRateBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::size_t passed = 0;

  double rate() const noexcept { return count == 0 ? 0.0 : static_cast<double>(passed) / count; }
};

/// Unit-width bins over [0, 10]; grade 10 falls in the last bin.
std::vector<PassRateBin> bin_pass_rates(const std::vector<GradeOutcome>& points, double bin_width = 1.0,
                                        double max_grade = 10.0);

}  // namespace tutorweb::analytics
