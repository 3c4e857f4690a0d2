#include "tutorweb/kernels.hpp"

#include <cmath>

namespace tutorweb::kernels {

LogisticMoments logistic_moments_scalar(std::span<const double> x, std::span<const double> y,
                                        double b0, double b1) noexcept {
  LogisticMoments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x[i])));
    const double r = y[i] - p;
    const double w = p * (1.0 - p);
    m.score0 += r;
    m.score1 += r * x[i];
    m.info00 += w;
    m.info01 += w * x[i];
    m.info11 += w * x[i] * x[i];
  }
  return m;
}

}  // namespace tutorweb::kernels
