#include "dirkwso/kernels.hpp"

#if defined(DIRKWSO_HAVE_NEON_KERNELS)
#include <arm_neon.h>

namespace dirkwso::kernels {

void imag_axis_modulus_neon(const double* a, const double* b, int s, const double* y,
                            double* out, std::size_t n) {
  double xr[kMaxKernelStages * 2];
  double xi[kMaxKernelStages * 2];
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t yk = vld1q_f64(y + k);
    for (int i = 0; i < s; ++i) {
      float64x2_t sr = zero;
      float64x2_t si = zero;
      for (int j = 0; j < i; ++j) {
        const float64x2_t aij = vdupq_n_f64(a[i * s + j]);
        sr = vaddq_f64(sr, vmulq_f64(aij, vld1q_f64(xr + 2 * j)));
        si = vaddq_f64(si, vmulq_f64(aij, vld1q_f64(xi + 2 * j)));
      }
      const float64x2_t nr = vsubq_f64(one, vmulq_f64(yk, si));
      const float64x2_t ni = vmulq_f64(yk, sr);
      const float64x2_t di = vsubq_f64(zero, vmulq_f64(yk, vdupq_n_f64(a[i * s + i])));
      const float64x2_t den = vaddq_f64(vmulq_f64(one, one), vmulq_f64(di, di));
      const float64x2_t re = vaddq_f64(vmulq_f64(nr, one), vmulq_f64(ni, di));
      const float64x2_t im = vsubq_f64(vmulq_f64(ni, one), vmulq_f64(nr, di));
      vst1q_f64(xr + 2 * i, vdivq_f64(re, den));
      vst1q_f64(xi + 2 * i, vdivq_f64(im, den));
    }
    float64x2_t br = zero;
    float64x2_t bi = zero;
    for (int j = 0; j < s; ++j) {
      const float64x2_t bj = vdupq_n_f64(b[j]);
      br = vaddq_f64(br, vmulq_f64(bj, vld1q_f64(xr + 2 * j)));
      bi = vaddq_f64(bi, vmulq_f64(bj, vld1q_f64(xi + 2 * j)));
    }
    const float64x2_t rr = vsubq_f64(one, vmulq_f64(yk, bi));
    const float64x2_t ri = vmulq_f64(yk, br);
    vst1q_f64(out + k, vsqrtq_f64(vaddq_f64(vmulq_f64(rr, rr), vmulq_f64(ri, ri))));
  }
  if (k < n) imag_axis_modulus_scalar(a, b, s, y + k, out + k, n - k);
}

void band_matvec_neon(const double* diag, int kl, int ku, std::size_t n, const double* x,
                      double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  const auto ni = static_cast<long>(n);
  for (int d = 0; d <= kl + ku; ++d) {
    const long off = d - kl;
    const long lo = off < 0 ? -off : 0;
    const long hi = off > 0 ? ni - off : ni;
    const double* dv = diag + static_cast<std::size_t>(d) * n;
    long i = lo;
    for (; i + 2 <= hi; i += 2) {
      const float64x2_t prod = vmulq_f64(vld1q_f64(dv + i), vld1q_f64(x + i + off));
      vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < hi; ++i) y[i] += dv[i] * x[i + off];
  }
}

}  // namespace dirkwso::kernels
#endif
