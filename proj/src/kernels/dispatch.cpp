#include "tutorweb/kernels.hpp"

#include <cstdlib>
#include <string>

namespace tutorweb::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool forced_scalar() noexcept {
  const char* env = std::getenv("TUTORWEB_SIMD");
  return env != nullptr && std::string(env) == "scalar";
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept {
  if (isa == Isa::Scalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

Isa active_isa() noexcept {
  static const Isa isa = (!forced_scalar() && isa_available(Isa::Avx2)) ? Isa::Avx2 : Isa::Scalar;
  return isa;
}

LogisticMoments logistic_moments(std::span<const double> x, std::span<const double> y, double b0,
                                 double b1, Isa isa) noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) return logistic_moments_avx2(x, y, b0, b1);
#endif
  (void)isa;
  return logistic_moments_scalar(x, y, b0, b1);
}

}  // namespace tutorweb::kernels
