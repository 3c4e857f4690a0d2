#include "tutorweb/analytics.hpp"

#include "tutorweb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tutorweb::analytics {

double LogisticFit::probability(double grade) const noexcept {
  return 1.0 / (1.0 + std::exp(-(beta0 + beta1 * grade)));
}

double LogisticFit::midpoint() const noexcept {
  if (beta1 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -beta0 / beta1;
}

CompleteSeparation::CompleteSeparation(LogisticFit last_iterate)
    : std::runtime_error("complete separation: logistic coefficients diverge"), last_(last_iterate) {}

LogisticFit fit_pass_probability(const std::vector<GradeOutcome>& points, const FitOptions& opts) {
  if (points.size() < 2) throw DegenerateInput("need at least 2 points");
  std::vector<double> x(points.size());
  std::vector<double> y(points.size());
  std::size_t n_pass = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    x[i] = points[i].grade;
    y[i] = points[i].passed ? 1.0 : 0.0;
    n_pass += points[i].passed ? 1 : 0;
  }
  if (n_pass == 0 || n_pass == points.size()) throw DegenerateInput("only one outcome class present");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) throw DegenerateInput("all grades identical");

  LogisticFit fit;
  for (fit.iterations = 1; fit.iterations <= opts.max_iterations; ++fit.iterations) {
    const auto m = kernels::logistic_moments(x, y, fit.beta0, fit.beta1);
    const double det = m.info00 * m.info11 - m.info01 * m.info01;
    if (!(det > 0.0) || !std::isfinite(det)) {
      // Fitted probabilities saturated at 0/1: the data separate.
      throw CompleteSeparation(fit);
    }
    const double step0 = (m.info11 * m.score0 - m.info01 * m.score1) / det;
    const double step1 = (m.info00 * m.score1 - m.info01 * m.score0) / det;
    fit.beta0 += step0;
    fit.beta1 += step1;
    if (std::hypot(fit.beta0, fit.beta1) > opts.divergence_norm) throw CompleteSeparation(fit);
    if (std::hypot(step0, step1) < opts.step_tolerance) {
      fit.converged = true;
      return fit;
    }
  }
  fit.iterations = opts.max_iterations;
  return fit;
}

double auc(const std::vector<ScoredLabel>& scores) {
  std::size_t n_pos = 0;
  for (const auto& s : scores) n_pos += s.positive ? 1 : 0;
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DegenerateInput("auc needs both labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });

  // Sum of mid-ranks (1-based) of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_tie = 0;
    while (j < order.size() && scores[order[j]].score == scores[order[i]].score) {
      pos_in_tie += scores[order[j]].positive ? 1 : 0;
      ++j;
    }
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    rank_sum += mid_rank * static_cast<double>(pos_in_tie);
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::vector<PassRateBin> bin_pass_rates(const std::vector<GradeOutcome>& points, double bin_width,
                                        double max_grade) {
  const auto n_bins = static_cast<std::size_t>(std::ceil(max_grade / bin_width));
  std::vector<PassRateBin> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = static_cast<double>(b) * bin_width;
    bins[b].hi = std::min(max_grade, static_cast<double>(b + 1) * bin_width);
  }
  for (const auto& p : points) {
    auto b = static_cast<std::size_t>(std::max(0.0, std::floor(p.grade / bin_width)));
    b = std::min(b, n_bins - 1);
    ++bins[b].count;
    bins[b].passed += p.passed ? 1 : 0;
  }
  return bins;
}

}  // namespace tutorweb::analytics
