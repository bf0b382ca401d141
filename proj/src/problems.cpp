#include "dirkwso/problems.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace dirkwso {

std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs, int m) {
  const int n = static_cast<int>(xs.size());
  if (n <= m) throw std::invalid_argument("need more nodes than the derivative order");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[std::size_t(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[std::size_t(i)] - xs[std::size_t(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k > 0; --k) {
          c[std::size_t(i)][std::size_t(k)] =
              c1 * (k * c[std::size_t(i - 1)][std::size_t(k - 1)] - c5 * c[std::size_t(i - 1)][std::size_t(k)]) / c2;
        }
        c[std::size_t(i)][0] = -c1 * c5 * c[std::size_t(i - 1)][0] / c2;
      }
      for (int k = mn; k > 0; --k) {
        c[std::size_t(j)][std::size_t(k)] =
            (c4 * c[std::size_t(j)][std::size_t(k)] - k * c[std::size_t(j)][std::size_t(k - 1)]) / c3;
      }
      c[std::size_t(j)][0] = c4 * c[std::size_t(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[std::size_t(i)] = c[std::size_t(i)][std::size_t(m)];
  return w;
}

namespace {

bool supported(int order, int deriv) {
  return (order == 4 && (deriv == 1 || deriv == 2)) || (order == 6 && (deriv == 1 || deriv == 2)) ||
         (order == 2 && deriv == 4) || (order == 2 && (deriv == 1 || deriv == 2));
}

int half_width(int order, int deriv) { return deriv == 4 ? 2 : order / 2; }

// One-sided window length keeping the formal order.
int closure_width(int order, int deriv) { return order + deriv; }

}  // namespace

std::vector<double> stencil(int order, int derivative) {
  if (!supported(order, derivative)) {
    throw std::invalid_argument("unsupported stencil (order " + std::to_string(order) +
                                ", derivative " + std::to_string(derivative) + ")");
  }
  const int w = half_width(order, derivative);
  std::vector<double> xs;
  for (int k = -w; k <= w; ++k) xs.push_back(k);
  return fornberg_weights(0.0, xs, derivative);
}

Grid1D::Grid1D(int cells, int ord) : n(cells), order(ord), h(1.0 / cells) {
  if (cells < 2 * (ord + 4)) throw std::invalid_argument("grid too small for the stencil");
  x.resize(std::size_t(n + 1));
  for (int j = 0; j <= n; ++j) x[std::size_t(j)] = double(j) / n;
}

std::pair<int, std::vector<double>> Grid1D::row(int j, int deriv) const {
  const int ord = deriv == 4 ? 2 : order;
  if (!supported(ord, deriv)) throw std::invalid_argument("unsupported derivative for this grid");
  const int w = half_width(ord, deriv);
  int lo = j - w;
  int len = 2 * w + 1;
  if (j - w < 0 || j + w > n) {
    len = closure_width(ord, deriv);
    lo = j - w < 0 ? 0 : n + 1 - len;
  }
  std::vector<double> xs;
  for (int k = lo; k < lo + len; ++k) xs.push_back(double(k - j));
  auto wts = fornberg_weights(0.0, xs, deriv);
  const double scale = std::pow(double(n), deriv);
  double rest = 0.0;
  for (std::size_t k = 0; k < wts.size(); ++k) {
    wts[k] *= scale;
    if (lo + int(k) != j) rest += wts[k];
  }
  wts[std::size_t(j - lo)] = -rest;
  return {lo, wts};
}

template <class S>
VectorOf<S> Grid1D::differentiate(const VectorOf<S>& nodal, int deriv) const {
  VectorOf<S> out(n + 1);
  for (int j = 0; j <= n; ++j) {
    const auto [lo, w] = row(j, deriv);
    S acc(0);
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * nodal(lo + Eigen::Index(k));
    out(j) = acc;
  }
  return out;
}

template VectorOf<double> Grid1D::differentiate(const VectorOf<double>&, int) const;
template VectorOf<Complex> Grid1D::differentiate(const VectorOf<Complex>&, int) const;

ReducedOperator reduce(const Grid1D& g, int deriv, int first, int last) {
  const int m = last - first + 1;
  int kl = 0;
  int ku = 0;
  std::vector<std::pair<int, std::vector<double>>> rows;
  for (int j = first; j <= last; ++j) {
    rows.push_back(g.row(j, deriv));
    const auto& [lo, w] = rows.back();
    const int hi = lo + int(w.size()) - 1;
    kl = std::max(kl, j - std::max(lo, first));
    ku = std::max(ku, std::min(hi, last) - j);
  }
  ReducedOperator out{Banded<double>(m, kl, ku), {}};
  std::map<int, Vector> bcols;
  for (int r = 0; r < m; ++r) {
    const auto& [lo, w] = rows[std::size_t(r)];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const int node = lo + int(k);
      if (node >= first && node <= last) {
        out.interior.ref(r, node - first) += w[k];
      } else {
        auto it = bcols.try_emplace(node, Vector::Zero(m)).first;
        it->second(r) += w[k];
      }
    }
  }
  for (auto& [node, col] : bcols) out.boundary.emplace_back(node, std::move(col));
  return out;
}

Chebyshev::Chebyshev(int n) : x(n), D(n, n) {
  if (n < 2) throw std::invalid_argument("Chebyshev grid needs at least two points");
  const int N = n - 1;
  const double pi = std::numbers::pi;
  for (int j = 0; j <= N; ++j) x(j) = std::cos(pi * j / N);
  Vector cw(n);
  for (int j = 0; j <= N; ++j) cw(j) = ((j == 0 || j == N) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0);
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      D(i, j) = i == j ? 0.0 : cw(i) / cw(j) / (x(i) - x(j));
    }
  }
  // Negative-sum trick for the diagonal.
  for (int i = 0; i <= N; ++i) D(i, i) = -(D.row(i).sum());
}

double pr_phi(double t) { return std::exp(-t) * std::sin(10 * t) + std::cos(20 * t); }
double pr_dphi(double t) {
  return std::exp(-t) * (10 * std::cos(10 * t) - std::sin(10 * t)) - 20 * std::sin(20 * t);
}

namespace {

template <class S>
IvpProblem<S> prothero_robinson_impl(S lambda, double t_end) {
  using Vec = VectorOf<S>;
  IvpProblem<S> p;
  p.id = "prothero_robinson";
  p.t_end = t_end;
  p.u0 = Vec::Constant(1, S(pr_phi(0.0)));
  p.rhs = [lambda](double t, const Vec& u) {
    return Vec::Constant(1, lambda * (u(0) - pr_phi(t)) + pr_dphi(t));
  };
  p.jacobian = [lambda](double, const Vec&) {
    return Operator<S>::diagonal(Vec::Constant(1, lambda));
  };
  typename IvpProblem<S>::Affine af;
  af.L = [lambda](double) { return Operator<S>::diagonal(Vec::Constant(1, lambda)); };
  af.g = [lambda](double t) { return Vec::Constant(1, -lambda * pr_phi(t) + pr_dphi(t)); };
  p.affine = af;
  p.exact = [](double t) { return Vec::Constant(1, S(pr_phi(t))); };
  return p;
}

// Manufactured solution with closed-form derivatives.
template <class S>
struct Manufactured {
  std::function<S(double, double)> u, ut, ux, uxx;
};

Manufactured<double> sin_wave(double omega) {
  // u = cos(omega t) sin(10x + 10)
  return {
      [=](double x, double t) { return std::cos(omega * t) * std::sin(10 * x + 10); },
      [=](double x, double t) { return -omega * std::sin(omega * t) * std::sin(10 * x + 10); },
      [=](double x, double t) { return 10 * std::cos(omega * t) * std::cos(10 * x + 10); },
      [=](double x, double t) { return -100 * std::cos(omega * t) * std::sin(10 * x + 10); },
  };
}

Manufactured<Complex> gaussian_packet() {
  // u = exp(-(x-t)^2) cos(10x) sin(t)
  auto E = [](double x, double t) { return std::exp(-(x - t) * (x - t)); };
  auto hx = [](double x, double t) { return -2 * (x - t) * std::cos(10 * x) - 10 * std::sin(10 * x); };
  return {
      [=](double x, double t) { return Complex(E(x, t) * std::cos(10 * x) * std::sin(t)); },
      [=](double x, double t) {
        return Complex(std::cos(10 * x) * E(x, t) * (2 * (x - t) * std::sin(t) + std::cos(t)));
      },
      [=](double x, double t) { return Complex(E(x, t) * hx(x, t) * std::sin(t)); },
      [=](double x, double t) {
        const double dh = -2 * std::cos(10 * x) + 20 * (x - t) * std::sin(10 * x) - 100 * std::cos(10 * x);
        return Complex(E(x, t) * std::sin(t) * (-2 * (x - t) * hx(x, t) + dh));
      },
  };
}

// Linear 1D problem u_t = sum_k coef_k(x,t) d^k u + f with Dirichlet data on
// eliminated nodes. Unknowns are nodes first..last.
template <class S>
struct Linear1D {
  Grid1D grid;
  int first;
  int last;
  std::vector<int> derivs;
  std::map<int, ReducedOperator> ops;

  Linear1D(int n, int order, int first_, int last_, std::vector<int> ds)
      : grid(n, order), first(first_), last(last_), derivs(std::move(ds)) {
    for (int d : derivs) ops.emplace(d, reduce(grid, d, first, last));
  }
  int size() const { return last - first + 1; }
  double xu(int r) const { return grid.x[std::size_t(first + r)]; }

  // L = sum_d diag(coef_d) D_d; boundary part applied to given nodal values.
  Banded<S> assemble(const std::map<int, VectorOf<S>>& coef) const {
    int kl = 0;
    int ku = 0;
    for (const auto& [d, op] : ops) {
      kl = std::max(kl, op.interior.kl());
      ku = std::max(ku, op.interior.ku());
    }
    Banded<S> out(size(), kl, ku);
    for (const auto& [d, c] : coef) {
      Banded<S> piece = ops.at(d).interior.template cast<S>();
      piece.scale_rows(c);
      out.axpy(S(1), piece);
    }
    return out;
  }
  VectorOf<S> boundary_term(const std::map<int, VectorOf<S>>& coef,
                            const std::function<S(int)>& node_value) const {
    VectorOf<S> out = VectorOf<S>::Zero(size());
    for (const auto& [d, c] : coef) {
      for (const auto& [node, col] : ops.at(d).boundary) {
        out += c.cwiseProduct(col.template cast<S>()) * node_value(node);
      }
    }
    return out;
  }
};

template <class S>
void attach_exact(IvpProblem<S>& p, std::shared_ptr<const Linear1D<S>> lin, Manufactured<S> m) {
  using Vec = VectorOf<S>;
  p.u0 = Vec(lin->size());
  for (int r = 0; r < lin->size(); ++r) p.u0(r) = m.u(lin->xu(r), 0.0);
  p.exact = [lin, m](double t) {
    Vec v(lin->size());
    for (int r = 0; r < lin->size(); ++r) v(r) = m.u(lin->xu(r), t);
    return v;
  };
  const int n = lin->grid.n;
  p.exact_dx = [lin, m, n](double t) {
    Vec v(n + 1);
    for (int j = 0; j <= n; ++j) v(j) = m.ux(lin->grid.x[std::size_t(j)], t);
    return v;
  };
  p.dx = [lin, m, n](double t, const Vec& u) {
    Vec nodal(n + 1);
    for (int j = 0; j <= n; ++j) {
      nodal(j) = (j >= lin->first && j <= lin->last) ? u(j - lin->first) : m.u(lin->grid.x[std::size_t(j)], t);
    }
    return lin->grid.template differentiate<S>(nodal, 1);
  };
}

// Generic linear builder: coefficients may depend on x and t.
template <class S>
IvpProblem<S> linear_mol(const std::string& id, int n, int order, bool inflow_only,
                         std::map<int, std::function<S(double, double)>> coef_fn, bool time_dependent,
                         Manufactured<S> m) {
  using Vec = VectorOf<S>;
  std::vector<int> ds;
  for (const auto& [d, f] : coef_fn) ds.push_back(d);
  auto lin = std::make_shared<const Linear1D<S>>(n, order, 1, inflow_only ? n : n - 1, ds);

  auto coefs = [lin, coef_fn](double t) {
    std::map<int, Vec> c;
    for (const auto& [d, f] : coef_fn) {
      Vec v(lin->size());
      for (int r = 0; r < lin->size(); ++r) v(r) = f(lin->xu(r), t);
      c.emplace(d, std::move(v));
    }
    return c;
  };
  auto forcing = [lin, coef_fn, m](double t) {
    Vec f(lin->size());
    for (int r = 0; r < lin->size(); ++r) {
      const double x = lin->xu(r);
      S val = m.ut(x, t);
      for (const auto& [d, cf] : coef_fn) {
        const S du = d == 1 ? m.ux(x, t) : m.uxx(x, t);
        val -= cf(x, t) * du;
      }
      f(r) = val;
    }
    return f;
  };

  IvpProblem<S> p;
  p.id = id;
  typename IvpProblem<S>::Affine af;
  af.time_dependent = time_dependent;
  af.L = [lin, coefs](double t) { return Operator<S>::banded(lin->assemble(coefs(t))); };
  af.g = [lin, coefs, forcing, m](double t) {
    const auto c = coefs(t);
    auto node_value = [&](int node) { return m.u(lin->grid.x[std::size_t(node)], t); };
    return Vec(forcing(t) + lin->boundary_term(c, node_value));
  };
  if (!time_dependent) {
    auto L0 = std::make_shared<const Banded<S>>(lin->assemble(coefs(0.0)));
    auto g = af.g;
    p.rhs = [L0, g](double t, const Vec& u) { return Vec(L0->apply(u) + g(t)); };
    p.jacobian = [L0](double, const Vec&) { return Operator<S>::banded(*L0); };
  } else {
    auto g = af.g;
    p.rhs = [lin, coefs, g](double t, const Vec& u) {
      return Vec(lin->assemble(coefs(t)).apply(u) + g(t));
    };
    p.jacobian = [lin, coefs](double t, const Vec&) {
      return Operator<S>::banded(lin->assemble(coefs(t)));
    };
  }
  p.affine = af;
  attach_exact<S>(p, lin, m);
  return p;
}

IvpProblem<double> biharmonic(int n) {
  using Vec = Vector;
  // u = cos(15 t): u_x = 0 everywhere. Ghost nodes u_{-1} = u_1 - 2h h0 and
  // u_{n+1} = u_{n-1} + 2h h1 fold the Neumann data into rows 1 and n-1.
  const Grid1D grid(n, 2);
  const int m = n - 1;
  const double h = grid.h;
  const double s4 = std::pow(double(n), 4);  // exact, so interior rows annihilate constants
  Banded<double> L(m, 2, 2);
  for (int r = 0; r < m; ++r) {
    const double w[5] = {1, -4, 6, -4, 1};
    for (int k = -2; k <= 2; ++k) {
      const int c = r + k;
      if (c >= 0 && c < m) L.ref(r, c) -= w[k + 2] * s4;
    }
  }
  L.ref(0, 0) -= s4;          // ghost folded: coefficient of u_1 becomes 7
  L.ref(m - 1, m - 1) -= s4;
  auto ub = [](double t) { return std::cos(15 * t); };
  const double h0 = 0.0;
  const double h1 = 0.0;
  auto g = [=](double t) {
    Vec v = Vec::Constant(m, -15 * std::sin(15 * t));
    const double b = ub(t);
    // -(1/h^4) times the eliminated contributions
    v(0) -= s4 * (-4 * b - 2 * h * h0);
    v(1) -= s4 * b;
    v(m - 2) -= s4 * b;
    v(m - 1) -= s4 * (-4 * b + 2 * h * h1);
    return v;
  };
  IvpProblem<double> p;
  p.id = "biharmonic";
  auto Lp = std::make_shared<const Banded<double>>(L);
  p.rhs = [Lp, g](double t, const Vec& u) { return Vec(Lp->apply(u) + g(t)); };
  p.jacobian = [Lp](double, const Vec&) { return Operator<double>::banded(*Lp); };
  IvpProblem<double>::Affine af;
  af.L = [Lp](double) { return Operator<double>::banded(*Lp); };
  af.g = g;
  p.affine = af;
  p.u0 = Vec::Constant(m, 1.0);
  p.exact = [m, ub](double t) { return Vec(Vec::Constant(m, ub(t))); };
  p.exact_dx = [n](double) { return Vec(Vec::Zero(n + 1)); };
  p.dx = [grid, n, ub](double t, const Vec& u) {
    Vec nodal(n + 1);
    nodal(0) = ub(t);
    nodal(n) = ub(t);
    nodal.segment(1, n - 1) = u;
    return grid.differentiate<double>(nodal, 1);
  };
  return p;
}

IvpProblem<double> burgers(int n, int order) {
  using Vec = Vector;
  const double nu = 0.1;
  auto lin = std::make_shared<const Linear1D<double>>(n, order, 1, n - 1, std::vector<int>{1, 2});
  const int m = lin->size();
  const auto& D1 = lin->ops.at(1);
  const auto& D2 = lin->ops.at(2);
  auto bc = [](const ReducedOperator& op, double t) {
    Vec v = Vec::Zero(op.interior.size());
    for (const auto& [node, col] : op.boundary) v += col * std::cos(t);
    return v;
  };
  auto d1 = std::make_shared<const ReducedOperator>(D1);
  auto d2 = std::make_shared<const ReducedOperator>(D2);
  IvpProblem<double> p;
  p.id = "burgers";
  p.rhs = [=](double t, const Vec& u) {
    const Vec ux = d1->interior.apply(u) + bc(*d1, t);
    const Vec uxx = d2->interior.apply(u) + bc(*d2, t);
    return Vec(nu * uxx - u.cwiseProduct(ux) + Vec::Constant(m, -std::sin(t)));
  };
  p.jacobian = [=](double t, const Vec& u) {
    const Vec ux = d1->interior.apply(u) + bc(*d1, t);
    Banded<double> j = d2->interior.widened(d1->interior.kl(), d1->interior.ku());
    j.scale(nu);
    Banded<double> adv = d1->interior;
    adv.scale_rows(u);
    j.axpy(-1.0, adv);
    j.add_diagonal(-ux);
    return Operator<double>::banded(std::move(j));
  };
  p.u0 = Vec::Ones(m);
  p.exact = [m](double t) { return Vec(Vec::Constant(m, std::cos(t))); };
  p.exact_dx = [n](double) { return Vec(Vec::Zero(n + 1)); };
  p.dx = [lin, n](double t, const Vec& u) {
    Vec nodal(n + 1);
    nodal(0) = std::cos(t);
    nodal(n) = std::cos(t);
    nodal.segment(1, n - 1) = u;
    return lin->grid.differentiate<double>(nodal, 1);
  };
  return p;
}

int pick(int v, int dflt) { return v > 0 ? v : dflt; }

}  // namespace

IvpProblem<double> prothero_robinson(double lambda, double t_end) {
  return prothero_robinson_impl<double>(lambda, t_end);
}
IvpProblem<Complex> prothero_robinson(Complex lambda, double t_end) {
  return prothero_robinson_impl<Complex>(lambda, t_end);
}

IvpProblem<double> van_der_pol(double mu, double t_end) {
  using Vec = Vector;
  IvpProblem<double> p;
  p.id = "van_der_pol";
  p.t_end = t_end;
  p.u0 = Vec(2);
  p.u0 << 2.0, 0.0;
  p.rhs = [mu](double, const Vec& u) {
    Vec f(2);
    f << u(1), mu * (1 - u(0) * u(0)) * u(1) - u(0);
    return f;
  };
  p.jacobian = [mu](double, const Vec& u) {
    Matrix j(2, 2);
    j << 0.0, 1.0, -2 * mu * u(0) * u(1) - 1.0, mu * (1 - u(0) * u(0));
    return Operator<double>::dense(std::move(j));
  };
  return p;
}

IvpProblem<double> advdiff_2d(int n) {
  using Vec = Vector;
  if (n < 8) throw std::invalid_argument("advdiff_2d needs at least 8 points per direction");
  const double nu = 0.1;
  const double pi = std::numbers::pi;
  const Chebyshev cheb(n);
  const int mi = n - 2;
  const int dim = mi * mi;
  // Full operators on the n x n tensor grid, index (i, j) -> i + n j (x fast).
  const Matrix D = cheb.D;
  const Matrix D2 = D * D;
  const Matrix I = Matrix::Identity(n, n);
  auto kron = [](const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
    return k;
  };
  const Matrix Dx = kron(I, D);
  const Matrix Dy = kron(D, I);
  const Matrix full = nu * (kron(I, D2) + kron(D2, I)) - Dx - Dy;
  std::vector<int> interior;
  std::vector<int> boundary;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const bool inner = i > 0 && i < n - 1 && j > 0 && j < n - 1;
      (inner ? interior : boundary).push_back(i + n * j);
    }
  }
  Matrix L(dim, dim);
  Matrix B(dim, Eigen::Index(boundary.size()));
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) L(r, c) = full(interior[std::size_t(r)], interior[std::size_t(c)]);
    for (std::size_t c = 0; c < boundary.size(); ++c) B(r, Eigen::Index(c)) = full(interior[std::size_t(r)], boundary[c]);
  }
  const Vec xs = cheb.x;
  auto u_at = [pi](double x, double y, double t) {
    return std::exp(-pi * pi / 8 * t) * std::sin(pi * x + pi / 4) * std::sin(pi * y + pi / 4);
  };
  auto px = [xs, n](int idx) { return xs(idx % n); };
  auto py = [xs, n](int idx) { return xs(idx / n); };
  auto g = [=](double t) {
    Vec ub(Eigen::Index(boundary.size()));
    for (std::size_t k = 0; k < boundary.size(); ++k) ub(Eigen::Index(k)) = u_at(px(boundary[k]), py(boundary[k]), t);
    Vec f(dim);
    const double e = std::exp(-pi * pi / 8 * t);
    for (int r = 0; r < dim; ++r) {
      const double x = px(interior[std::size_t(r)]);
      const double y = py(interior[std::size_t(r)]);
      const double u = u_at(x, y, t);
      const double ux = e * pi * std::cos(pi * x + pi / 4) * std::sin(pi * y + pi / 4);
      const double uy = e * pi * std::sin(pi * x + pi / 4) * std::cos(pi * y + pi / 4);
      f(r) = (-pi * pi / 8 + 2 * nu * pi * pi) * u + ux + uy;
    }
    return Vec(f + B * ub);
  };
  auto Lp = std::make_shared<const Matrix>(L);
  IvpProblem<double> p;
  p.id = "advdiff_2d";
  p.rhs = [Lp, g](double t, const Vec& u) { return Vec(*Lp * u + g(t)); };
  p.jacobian = [Lp](double, const Vec&) { return Operator<double>::dense(*Lp); };
  IvpProblem<double>::Affine af;
  af.L = [Lp](double) { return Operator<double>::dense(*Lp); };
  af.g = g;
  p.affine = af;
  auto exact = [=](double t) {
    Vec v(dim);
    for (int r = 0; r < dim; ++r) v(r) = u_at(px(interior[std::size_t(r)]), py(interior[std::size_t(r)]), t);
    return v;
  };
  p.u0 = exact(0.0);
  p.exact = exact;
  // Gradient on the full grid, both components stacked.
  p.exact_dx = [=](double t) {
    const double e = std::exp(-pi * pi / 8 * t);
    Vec v(2 * n * n);
    for (int k = 0; k < n * n; ++k) {
      const double x = px(k);
      const double y = py(k);
      v(k) = e * pi * std::cos(pi * x + pi / 4) * std::sin(pi * y + pi / 4);
      v(n * n + k) = e * pi * std::sin(pi * x + pi / 4) * std::cos(pi * y + pi / 4);
    }
    return v;
  };
  auto dxp = std::make_shared<const Matrix>(Dx);
  auto dyp = std::make_shared<const Matrix>(Dy);
  p.dx = [=](double t, const Vec& u) {
    Vec full_u(n * n);
    for (std::size_t k = 0; k < boundary.size(); ++k) full_u(boundary[k]) = u_at(px(boundary[k]), py(boundary[k]), t);
    for (int r = 0; r < dim; ++r) full_u(interior[std::size_t(r)]) = u(r);
    Vec v(2 * n * n);
    v.head(n * n) = *dxp * full_u;
    v.tail(n * n) = *dyp * full_u;
    return v;
  };
  return p;
}

const std::vector<std::string>& problem_ids() {
  static const std::vector<std::string> ids = {
      "prothero_robinson", "heat",           "schrodinger",     "adv_diff",
      "advection",         "var_heat_x",     "var_heat_t_slow", "var_heat_t_fast",
      "var_heat_t_fast_alt", "biharmonic",   "burgers",         "advdiff_2d",
      "van_der_pol"};
  return ids;
}

AnyProblem make_problem(const std::string& id, const ProblemOptions& opt) {
  using Fn = std::function<double(double, double)>;
  const Fn one = [](double, double) { return 1.0; };
  if (id == "prothero_robinson") {
    if (opt.lambda_im != 0.0) return prothero_robinson(Complex(opt.lambda_re, opt.lambda_im));
    return prothero_robinson(opt.lambda_re);
  }
  if (id == "van_der_pol") return van_der_pol(opt.mu);
  if (id == "advdiff_2d") return advdiff_2d(pick(opt.n, 30));
  if (id == "biharmonic") {
    if (opt.order > 0 && opt.order != 2) throw std::invalid_argument("biharmonic uses the 2nd-order stencil");
    return biharmonic(pick(opt.n, 10000));
  }
  if (id == "burgers") return burgers(pick(opt.n, 1000), pick(opt.order, 6));
  if (id == "heat") {
    return linear_mol<double>(id, pick(opt.n, 10000), pick(opt.order, 4), false, {{2, one}}, false,
                              sin_wave(20));
  }
  if (id == "schrodinger") {
    const Complex coef(0.0, 2 * std::numbers::pi / 400.0);
    const std::function<Complex(double, double)> c2 = [coef](double, double) { return coef; };
    return linear_mol<Complex>(id, pick(opt.n, 10000), pick(opt.order, 4), false, {{2, c2}}, false,
                               gaussian_packet());
  }
  if (id == "adv_diff") {
    const Fn minus_one = [](double, double) { return -1.0; };
    const Fn nu = [](double, double) { return 1e-3; };
    return linear_mol<double>(id, pick(opt.n, 10000), pick(opt.order, 4), false,
                              {{1, minus_one}, {2, nu}}, false, sin_wave(5));
  }
  if (id == "advection") {
    const double tp = 2 * std::numbers::pi;
    Manufactured<double> wave{
        [=](double x, double t) { return std::sin(tp * (x - t)); },
        [=](double x, double t) { return -tp * std::cos(tp * (x - t)); },
        [=](double x, double t) { return tp * std::cos(tp * (x - t)); },
        [=](double x, double t) { return -tp * tp * std::sin(tp * (x - t)); },
    };
    const Fn minus_one = [](double, double) { return -1.0; };
    return linear_mol<double>(id, pick(opt.n, 10000), pick(opt.order, 4), true, {{1, minus_one}},
                              false, wave);
  }
  if (id == "var_heat_x") {
    const Fn kappa = [](double x, double) { return std::cos(x + 0.1); };
    const Fn dkappa = [](double x, double) { return -std::sin(x + 0.1); };
    return linear_mol<double>(id, pick(opt.n, 1000), pick(opt.order, 6), false,
                              {{1, dkappa}, {2, kappa}}, false, sin_wave(20));
  }
  if (id == "var_heat_t_slow" || id == "var_heat_t_fast" || id == "var_heat_t_fast_alt") {
    Fn kappa;
    if (id == "var_heat_t_slow") {
      kappa = [](double, double t) { return std::cos(0.1 * t + 0.2); };
    } else if (id == "var_heat_t_fast") {
      kappa = [](double, double t) { return 1.0 + 0.5 * std::cos(30 * t + 0.1); };
    } else {
      kappa = [](double, double t) { return 1.0 + 0.5 * std::cos(20 * t); };
    }
    return linear_mol<double>(id, pick(opt.n, 1000), pick(opt.order, 6), false, {{2, kappa}}, true,
                              sin_wave(20));
  }
  throw std::invalid_argument("unknown problem '" + id + "'");
}

}  // namespace dirkwso
