#include <cstdlib>
#include <cstring>
#include <initializer_list>

#include "dirkwso/kernels.hpp"

namespace dirkwso::kernels {
namespace {

bool force_scalar() {
  const char* env = std::getenv("DIRKWSO_FORCE_SCALAR");
  return env != nullptr && *env != '\0' && std::strcmp(env, "0") != 0;
}

const Dispatch kScalar{Isa::scalar, imag_axis_modulus_scalar, band_matvec_scalar};
#if defined(DIRKWSO_HAVE_AVX2_KERNELS)
const Dispatch kAvx2{Isa::avx2, imag_axis_modulus_avx2, band_matvec_avx2};
#endif
#if defined(DIRKWSO_HAVE_NEON_KERNELS)
const Dispatch kNeon{Isa::neon, imag_axis_modulus_neon, band_matvec_neon};
#endif

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(DIRKWSO_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(DIRKWSO_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

}  // namespace

const Dispatch* for_isa(Isa isa) {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::scalar:
      return &kScalar;
#if defined(DIRKWSO_HAVE_AVX2_KERNELS)
    case Isa::avx2:
      return &kAvx2;
#endif
#if defined(DIRKWSO_HAVE_NEON_KERNELS)
    case Isa::neon:
      return &kNeon;
#endif
    default:
      return nullptr;
  }
}

const Dispatch& active() {
  static const Dispatch& chosen = []() -> const Dispatch& {
    if (force_scalar()) return kScalar;
    for (Isa isa : {Isa::avx2, Isa::neon}) {
      if (const Dispatch* d = for_isa(isa)) return *d;
    }
    return kScalar;
  }();
  return chosen;
}

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace dirkwso::kernels
