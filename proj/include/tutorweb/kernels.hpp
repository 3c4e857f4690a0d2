#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, where the
// build targets x86-64, an AVX2/FMA variant chosen at runtime. Set
// TUTORWEB_SIMD=scalar in the environment to force the reference path.

#include <span>
#include <string_view>

namespace tutorweb::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA supported by this CPU and allowed by the environment.
Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;

/// Score vector and Fisher information of the two-parameter logistic
/// log-likelihood at (b0, b1), with p_i = 1 / (1 + exp(-(b0 + b1 x_i))):
///   score0 = sum(y - p),  score1 = sum((y - p) x)
///   info00 = sum(w), info01 = sum(w x), info11 = sum(w x^2), w = p (1 - p)
struct LogisticMoments {
  double score0 = 0.0;
  double score1 = 0.0;
  double info00 = 0.0;
  double info01 = 0.0;
  double info11 = 0.0;
};

LogisticMoments logistic_moments_scalar(std::span<const double> x, std::span<const double> y,
                                        double b0, double b1) noexcept;
#if defined(__x86_64__) || defined(_M_X64)
LogisticMoments logistic_moments_avx2(std::span<const double> x, std::span<const double> y,
                                      double b0, double b1) noexcept;
#endif

LogisticMoments logistic_moments(std::span<const double> x, std::span<const double> y,
                                 double b0, double b1, Isa isa = active_isa()) noexcept;

}  // namespace tutorweb::kernels
