#pragma once

#include <cstddef>

// Hot loops with a scalar reference and ISA-specific variants. The variant is
// picked once at startup from CPU features; DIRKWSO_FORCE_SCALAR=1 in the
// environment pins the scalar path.

namespace dirkwso::kernels {

/// out[k] = |R(i y[k])| for a lower-triangular row-major s x s matrix a.
using ImagAxisModulusFn = void (*)(const double* a, const double* b, int s, const double* y,
                                   double* out, std::size_t n);

/// y = M x for an n x n band matrix stored by diagonals: diag[d * n + i] holds
/// M(i, i + d - kl) for d = 0..kl+ku. Entries that fall outside the matrix are ignored.
using BandMatvecFn = void (*)(const double* diag, int kl, int ku, std::size_t n,
                              const double* x, double* y);

void imag_axis_modulus_scalar(const double* a, const double* b, int s, const double* y,
                              double* out, std::size_t n);
void band_matvec_scalar(const double* diag, int kl, int ku, std::size_t n, const double* x,
                        double* y);

#if defined(__x86_64__) || defined(__i386__)
#define DIRKWSO_HAVE_AVX2_KERNELS 1
void imag_axis_modulus_avx2(const double* a, const double* b, int s, const double* y,
                            double* out, std::size_t n);
void band_matvec_avx2(const double* diag, int kl, int ku, std::size_t n, const double* x,
                      double* y);
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define DIRKWSO_HAVE_NEON_KERNELS 1
void imag_axis_modulus_neon(const double* a, const double* b, int s, const double* y,
                            double* out, std::size_t n);
void band_matvec_neon(const double* diag, int kl, int ku, std::size_t n, const double* x,
                      double* y);
#endif

/// Largest stage count the batched kernels accept.
inline constexpr int kMaxKernelStages = 64;

enum class Isa { scalar, avx2, neon };

struct Dispatch {
  Isa isa = Isa::scalar;
  ImagAxisModulusFn imag_axis_modulus = imag_axis_modulus_scalar;
  BandMatvecFn band_matvec = band_matvec_scalar;
};

/// Resolved once; thread-safe.
const Dispatch& active();
/// Variant table for a specific ISA, or nullptr when it is unavailable here.
const Dispatch* for_isa(Isa isa);
const char* to_string(Isa isa);

}  // namespace dirkwso::kernels
