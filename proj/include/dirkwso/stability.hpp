#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirkwso/tableau.hpp"

namespace dirkwso {

using Complex = std::complex<double>;

class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// R(z) = 1 + z b^T (I - zA)^{-1} e by forward substitution.
Complex stability_function(const Tableau& t, Complex z);

/// det(I - zA + z e b^T) / det(I - zA), evaluated with a complex LU.
Complex stability_function_det(const Tableau& t, Complex z);

enum class ScanMode { coarse, fine };

struct StabilityReport {
  bool a_stable = false;
  bool l_stable = false;
  double max_imag_axis_modulus = 0.0;
  double argmax_y = 0.0;
  double r_at_minus_inf = 0.0;  // |R(-1e12)|
  bool diag_nonneg = false;
  std::size_t sample_count = 0;
};

inline constexpr double kStabilitySlack = 1e-8;
inline constexpr double kMinusInfinityProbe = -1e12;
inline constexpr std::size_t kFineSamples = 100000;

/// y = 0 followed by 127 log-spaced points on [1e-3, 1e3].
std::vector<double> coarse_axis_grid();

/// y = 0 and y = tan(theta) on n midpoints of (-pi/2, pi/2).
std::vector<double> fine_axis_grid(std::size_t n = kFineSamples);

/// |R(iy)| for each y; uses the fastest available kernel.
std::vector<double> imag_axis_modulus(const Tableau& t, std::span<const double> ys);

StabilityReport check_a_stability(const Tableau& t, ScanMode mode);

struct Window {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  int nx = 400;
  int ny = 400;
};

/// Contour |R(z)| = 1 by marching squares over the window, chained into
/// polylines. Cells touching a pole are skipped. Empty when the window holds
/// no boundary.
std::vector<std::vector<Complex>> region_boundary(const Tableau& t, const Window& w);

/// "re,im" rows, polylines back to back.
std::string boundary_csv(const std::vector<std::vector<Complex>>& lines);

/// One <polyline> per contour piece, viewBox equal to the window (y flipped).
std::string boundary_svg(const std::vector<std::vector<Complex>>& lines, const Window& w);

}  // namespace dirkwso
