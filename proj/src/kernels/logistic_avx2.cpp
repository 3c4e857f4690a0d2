// Compiled with -mavx2 -mfma; only reached after a cpuid check.
#include "tutorweb/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace tutorweb::kernels {

namespace {

// exp(x) for 4 doubles: x = n ln2 + r, |r| <= ln2/2, degree-13 Taylor
// polynomial for e^r (truncation < 2e-16), then scale by 2^n through the
// exponent bits. Inputs are clamped to keep 2^n a normal double.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double inv_fact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d poly = _mm256_set1_pd(inv_fact[0]);
  for (int k = 1; k < 14; ++k) poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(inv_fact[k]));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(poly, _mm256_castsi256_pd(bits));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

LogisticMoments logistic_moments_avx2(std::span<const double> x, std::span<const double> y,
                                      double b0, double b1) noexcept {
  const std::size_t n = x.size();
  const __m256d vb0 = _mm256_set1_pd(b0);
  const __m256d vb1 = _mm256_set1_pd(b1);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign = _mm256_set1_pd(-0.0);

  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d i00 = _mm256_setzero_pd();
  __m256d i01 = _mm256_setzero_pd();
  __m256d i11 = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x.data() + i);
    const __m256d yv = _mm256_loadu_pd(y.data() + i);
    const __m256d eta = _mm256_fmadd_pd(vb1, xv, vb0);
    const __m256d e = exp_pd(_mm256_xor_pd(eta, sign));
    const __m256d p = _mm256_div_pd(one, _mm256_add_pd(one, e));
    const __m256d r = _mm256_sub_pd(yv, p);
    const __m256d w = _mm256_mul_pd(p, _mm256_sub_pd(one, p));
    const __m256d wx = _mm256_mul_pd(w, xv);
    s0 = _mm256_add_pd(s0, r);
    s1 = _mm256_fmadd_pd(r, xv, s1);
    i00 = _mm256_add_pd(i00, w);
    i01 = _mm256_add_pd(i01, wx);
    i11 = _mm256_fmadd_pd(wx, xv, i11);
  }

  LogisticMoments m{hsum(s0), hsum(s1), hsum(i00), hsum(i01), hsum(i11)};
  if (i < n) {
    const auto tail = logistic_moments_scalar(x.subspan(i), y.subspan(i), b0, b1);
    m.score0 += tail.score0;
    m.score1 += tail.score1;
    m.info00 += tail.info00;
    m.info01 += tail.info01;
    m.info11 += tail.info11;
  }
  return m;
}

}  // namespace tutorweb::kernels
