#include <cmath>

#include "dirkwso/kernels.hpp"

namespace dirkwso::kernels {

void imag_axis_modulus_scalar(const double* a, const double* b, int s, const double* y,
                              double* out, std::size_t n) {
  double xr[kMaxKernelStages];
  double xi[kMaxKernelStages];
  for (std::size_t k = 0; k < n; ++k) {
    const double yk = y[k];
    // (1 - i y a_ii) x_i = 1 + i y sum_j a_ij x_j
    for (int i = 0; i < s; ++i) {
      double sr = 0.0;
      double si = 0.0;
      for (int j = 0; j < i; ++j) {
        const double aij = a[i * s + j];
        sr += aij * xr[j];
        si += aij * xi[j];
      }
      const double nr = 1.0 - yk * si;
      const double ni = yk * sr;
      const double dr = 1.0;
      const double di = -yk * a[i * s + i];
      const double den = dr * dr + di * di;
      xr[i] = (nr * dr + ni * di) / den;
      xi[i] = (ni * dr - nr * di) / den;
    }
    double br = 0.0;
    double bi = 0.0;
    for (int j = 0; j < s; ++j) {
      br += b[j] * xr[j];
      bi += b[j] * xi[j];
    }
    const double rr = 1.0 - yk * bi;
    const double ri = yk * br;
    out[k] = std::sqrt(rr * rr + ri * ri);
  }
}

void band_matvec_scalar(const double* diag, int kl, int ku, std::size_t n, const double* x,
                        double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  const auto ni = static_cast<long>(n);
  for (int d = 0; d <= kl + ku; ++d) {
    const long off = d - kl;
    const long lo = off < 0 ? -off : 0;
    const long hi = off > 0 ? ni - off : ni;
    const double* dv = diag + static_cast<std::size_t>(d) * n;
    for (long i = lo; i < hi; ++i) y[i] += dv[i] * x[i + off];
  }
}

}  // namespace dirkwso::kernels
