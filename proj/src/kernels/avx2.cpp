#include <immintrin.h>

#include <cmath>

#include "dirkwso/kernels.hpp"

namespace dirkwso::kernels {

// Four sample points per lane group. Operation order matches the scalar
// reference; no FMA, so results agree bit for bit.
void imag_axis_modulus_avx2(const double* a, const double* b, int s, const double* y,
                            double* out, std::size_t n) {
  alignas(32) double xr[kMaxKernelStages * 4];
  alignas(32) double xi[kMaxKernelStages * 4];
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d yk = _mm256_loadu_pd(y + k);
    for (int i = 0; i < s; ++i) {
      __m256d sr = zero;
      __m256d si = zero;
      for (int j = 0; j < i; ++j) {
        const __m256d aij = _mm256_set1_pd(a[i * s + j]);
        sr = _mm256_add_pd(sr, _mm256_mul_pd(aij, _mm256_load_pd(xr + 4 * j)));
        si = _mm256_add_pd(si, _mm256_mul_pd(aij, _mm256_load_pd(xi + 4 * j)));
      }
      const __m256d nr = _mm256_sub_pd(one, _mm256_mul_pd(yk, si));
      const __m256d ni = _mm256_mul_pd(yk, sr);
      const __m256d di = _mm256_sub_pd(zero, _mm256_mul_pd(yk, _mm256_set1_pd(a[i * s + i])));
      const __m256d den = _mm256_add_pd(_mm256_mul_pd(one, one), _mm256_mul_pd(di, di));
      const __m256d re = _mm256_add_pd(_mm256_mul_pd(nr, one), _mm256_mul_pd(ni, di));
      const __m256d im = _mm256_sub_pd(_mm256_mul_pd(ni, one), _mm256_mul_pd(nr, di));
      _mm256_store_pd(xr + 4 * i, _mm256_div_pd(re, den));
      _mm256_store_pd(xi + 4 * i, _mm256_div_pd(im, den));
    }
    __m256d br = zero;
    __m256d bi = zero;
    for (int j = 0; j < s; ++j) {
      const __m256d bj = _mm256_set1_pd(b[j]);
      br = _mm256_add_pd(br, _mm256_mul_pd(bj, _mm256_load_pd(xr + 4 * j)));
      bi = _mm256_add_pd(bi, _mm256_mul_pd(bj, _mm256_load_pd(xi + 4 * j)));
    }
    const __m256d rr = _mm256_sub_pd(one, _mm256_mul_pd(yk, bi));
    const __m256d ri = _mm256_mul_pd(yk, br);
    const __m256d m2 = _mm256_add_pd(_mm256_mul_pd(rr, rr), _mm256_mul_pd(ri, ri));
    _mm256_storeu_pd(out + k, _mm256_sqrt_pd(m2));
  }
  if (k < n) imag_axis_modulus_scalar(a, b, s, y + k, out + k, n - k);
}

void band_matvec_avx2(const double* diag, int kl, int ku, std::size_t n, const double* x,
                      double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  const auto ni = static_cast<long>(n);
  for (int d = 0; d <= kl + ku; ++d) {
    const long off = d - kl;
    const long lo = off < 0 ? -off : 0;
    const long hi = off > 0 ? ni - off : ni;
    const double* dv = diag + static_cast<std::size_t>(d) * n;
    long i = lo;
    for (; i + 4 <= hi; i += 4) {
      const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(dv + i), _mm256_loadu_pd(x + i + off));
      _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < hi; ++i) y[i] += dv[i] * x[i + off];
  }
}

}  // namespace dirkwso::kernels
