#include "dirkwso/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "dirkwso/kernels.hpp"

namespace dirkwso {

Complex stability_function(const Tableau& t, Complex z) {
  const std::size_t s = t.stages();
  std::vector<Complex> x(s);
  Complex bx = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const Complex diag = 1.0 - z * t.a(i, i);
    if (std::abs(diag) < 1e-14) throw PoleError("z is a pole of the stability function");
    Complex acc = 1.0;
    for (std::size_t j = 0; j < i; ++j) acc += z * t.a(i, j) * x[j];
    x[i] = acc / diag;
    bx += t.b()(Eigen::Index(i)) * x[i];
  }
  return 1.0 + z * bx;
}

Complex stability_function_det(const Tableau& t, Complex z) {
  const auto s = Eigen::Index(t.stages());
  using CMatrix = Eigen::MatrixXcd;
  const CMatrix a = t.A().cast<Complex>();
  const CMatrix den = CMatrix::Identity(s, s) - z * a;
  CMatrix num = den;
  num += z * Eigen::VectorXcd::Ones(s) * t.b().cast<Complex>().transpose();
  Complex d = 1.0;
  for (Eigen::Index i = 0; i < s; ++i) d *= den(i, i);  // triangular
  if (std::abs(d) < 1e-300) throw PoleError("z is a pole of the stability function");
  return Eigen::PartialPivLU<CMatrix>(num).determinant() / d;
}

std::vector<double> coarse_axis_grid() {
  std::vector<double> ys{0.0};
  const int m = 127;
  for (int i = 0; i < m; ++i) ys.push_back(std::pow(10.0, -3.0 + 6.0 * i / (m - 1)));
  return ys;
}

std::vector<double> fine_axis_grid(std::size_t n) {
  std::vector<double> ys{0.0};
  ys.reserve(n + 1);
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = -pi / 2 + pi * (double(i) + 0.5) / double(n);
    ys.push_back(std::tan(theta));
  }
  return ys;
}

std::vector<double> imag_axis_modulus(const Tableau& t, std::span<const double> ys) {
  const int s = static_cast<int>(t.stages());
  std::vector<double> out(ys.size());
  if (s > kernels::kMaxKernelStages) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
      out[k] = std::abs(stability_function(t, Complex(0.0, ys[k])));
    }
    return out;
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = t.A();
  kernels::active().imag_axis_modulus(a.data(), t.b().data(), s, ys.data(), out.data(),
                                      ys.size());
  return out;
}

StabilityReport check_a_stability(const Tableau& t, ScanMode mode) {
  StabilityReport rep;
  const auto ys = mode == ScanMode::coarse ? coarse_axis_grid() : fine_axis_grid();
  const auto mod = imag_axis_modulus(t, ys);
  rep.sample_count = ys.size();
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const double m = std::isfinite(mod[k]) ? mod[k] : std::numeric_limits<double>::infinity();
    if (m > rep.max_imag_axis_modulus) {
      rep.max_imag_axis_modulus = m;
      rep.argmax_y = ys[k];
    }
  }
  rep.diag_nonneg = t.A().diagonal().minCoeff() >= 0.0;
  try {
    rep.r_at_minus_inf = std::abs(stability_function(t, kMinusInfinityProbe));
  } catch (const PoleError&) {
    rep.r_at_minus_inf = std::numeric_limits<double>::infinity();
  }
  rep.a_stable = rep.diag_nonneg && rep.max_imag_axis_modulus <= 1.0 + kStabilitySlack;
  rep.l_stable = rep.a_stable && rep.r_at_minus_inf <= kStabilitySlack;
  return rep;
}

namespace {

struct GridPoint {
  int i;
  int j;
  int edge;  // 0 = horizontal edge from (i,j) to (i+1,j); 1 = vertical to (i,j+1)
  auto operator<=>(const GridPoint&) const = default;
};

}  // namespace

std::vector<std::vector<Complex>> region_boundary(const Tableau& t, const Window& w) {
  const int nx = std::max(w.nx, 2);
  const int ny = std::max(w.ny, 2);
  const double hx = (w.re_max - w.re_min) / (nx - 1);
  const double hy = (w.im_max - w.im_min) / (ny - 1);
  // f = |R| - 1, NaN at poles.
  std::vector<double> f(std::size_t(nx) * ny);
  auto at = [&](int i, int j) -> double& { return f[std::size_t(j) * nx + i]; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Complex z(w.re_min + i * hx, w.im_min + j * hy);
      try {
        at(i, j) = std::abs(stability_function(t, z)) - 1.0;
      } catch (const PoleError&) {
        at(i, j) = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  auto crossing = [&](const GridPoint& g) {
    const int i2 = g.edge == 0 ? g.i + 1 : g.i;
    const int j2 = g.edge == 0 ? g.j : g.j + 1;
    const double f1 = at(g.i, g.j);
    const double f2 = at(i2, j2);
    const double s = f1 / (f1 - f2);
    const double re = w.re_min + (g.i + (i2 - g.i) * s) * hx;
    const double im = w.im_min + (g.j + (j2 - g.j) * s) * hy;
    return Complex(re, im);
  };

  // Segments as pairs of edge ids; adjacency used for chaining.
  std::map<GridPoint, std::vector<GridPoint>> adj;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double v[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      if (std::any_of(v, v + 4, [](double x) { return !std::isfinite(x); })) continue;
      const GridPoint edges[4] = {{i, j, 0}, {i + 1, j, 1}, {i, j + 1, 0}, {i, j, 1}};
      int idx = 0;
      for (int k = 0; k < 4; ++k) idx |= (v[k] < 0.0 ? 1 : 0) << k;
      if (idx == 0 || idx == 15) continue;
      std::vector<int> cut;
      for (int k = 0; k < 4; ++k) {
        if ((v[k] < 0.0) != (v[(k + 1) % 4] < 0.0)) cut.push_back(k);
      }
      auto link = [&](int e1, int e2) {
        adj[edges[e1]].push_back(edges[e2]);
        adj[edges[e2]].push_back(edges[e1]);
      };
      if (cut.size() == 2) {
        link(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        if ((centre < 0.0) == (v[0] < 0.0)) {
          link(0, 1);
          link(2, 3);
        } else {
          link(0, 3);
          link(1, 2);
        }
      }
    }
  }

  std::vector<std::vector<Complex>> lines;
  std::map<GridPoint, bool> used;
  // Every crossing has at most two neighbours, one per adjacent cell.
  auto walk = [&](GridPoint start) {
    std::vector<Complex> line{crossing(start)};
    used[start] = true;
    GridPoint cur = start;
    for (;;) {
      const auto& nb = adj[cur];
      auto next = std::find_if(nb.begin(), nb.end(), [&](const GridPoint& n) { return !used[n]; });
      if (next == nb.end()) {
        if (line.size() > 2 && std::find(nb.begin(), nb.end(), start) != nb.end()) {
          line.push_back(line.front());
        }
        break;
      }
      cur = *next;
      used[cur] = true;
      line.push_back(crossing(cur));
    }
    lines.push_back(std::move(line));
  };
  // Open curves first (endpoints have one neighbour), then closed loops.
  for (const auto& [p, nb] : adj) {
    if (nb.size() == 1 && !used[p]) walk(p);
  }
  for (const auto& [p, nb] : adj) {
    if (!used[p]) walk(p);
  }
  return lines;
}

std::string boundary_csv(const std::vector<std::vector<Complex>>& lines) {
  std::ostringstream out;
  out << "re,im\n";
  char buf[64];
  for (const auto& line : lines) {
    for (const auto& z : line) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
      out << buf;
    }
  }
  return out.str();
}

std::string boundary_svg(const std::vector<std::vector<Complex>>& lines, const Window& w) {
  std::ostringstream out;
  char buf[160];
  const double width = w.re_max - w.re_min;
  const double height = w.im_max - w.im_min;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.17g %.17g %.17g %.17g\">\n",
                w.re_min, -w.im_max, width, height);
  out << buf;
  const double stroke = 0.002 * std::max(width, height);
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.17g\" y1=\"0\" x2=\"%.17g\" y2=\"0\" stroke=\"gray\" "
                "stroke-width=\"%.6g\"/>\n",
                w.re_min, w.re_max, stroke);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"0\" y1=\"%.17g\" x2=\"0\" y2=\"%.17g\" stroke=\"gray\" "
                "stroke-width=\"%.6g\"/>\n",
                -w.im_max, -w.im_min, stroke);
  out << buf;
  for (const auto& line : lines) {
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"" << stroke << "\" points=\"";
    for (std::size_t k = 0; k < line.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.9g,%.9g", k ? " " : "", line[k].real(), -line[k].imag());
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace dirkwso
