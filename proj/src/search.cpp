#include "dirkwso/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "dirkwso/conditions.hpp"
#include "dirkwso/stability.hpp"
#include "dirkwso/wso.hpp"

namespace dirkwso {
namespace {

// Forward-mode dual number; derivatives of the residual maps are exact.
struct Dual {
  double v = 0.0;
  double d = 0.0;
  Dual() = default;
  Dual(double x) : v(x) {}  // NOLINT: implicit on purpose
  Dual(double x, double dx) : v(x), d(dx) {}
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
inline Dual& operator+=(Dual& a, Dual b) { return a = a + b; }
inline Dual& operator-=(Dual& a, Dual b) { return a = a - b; }
inline Dual& operator*=(Dual& a, Dual b) { return a = a * b; }

inline double val(double x) { return x; }
inline double val(const Dual& x) { return x.v; }

template <class T>
T ipow(T x, int k) {
  T r(1.0);
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

template <class T>
struct Cx {
  T re;
  T im;
};
template <class T>
Cx<T> cmul(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T>
Cx<T> cdiv(const Cx<T>& a, const Cx<T>& b) {
  const T den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

// Dense row-major s x s storage of a lower-triangular A.
template <class T>
struct Lower {
  int s = 0;
  std::vector<T> m;
  T operator()(int i, int j) const { return m[std::size_t(i * s + j)]; }
  T& at(int i, int j) { return m[std::size_t(i * s + j)]; }
};

Lower<double> from_matrix(const Matrix& a) {
  Lower<double> l{int(a.rows()), std::vector<double>(std::size_t(a.size()), 0.0)};
  for (int i = 0; i < l.s; ++i) {
    for (int j = 0; j <= i; ++j) l.at(i, j) = a(i, j);
  }
  return l;
}

Matrix to_matrix(const Lower<double>& l) {
  Matrix a = Matrix::Zero(l.s, l.s);
  for (int i = 0; i < l.s; ++i) {
    for (int j = 0; j <= i; ++j) a(i, j) = l(i, j);
  }
  return a;
}

// Eigenvectors of a11 and a22 (first nonzero component fixed to 1), the
// abscissae and the betas, from the first `rows` rows of A.
template <class T>
struct Basis {
  std::vector<T> c;
  std::vector<T> w1;
  std::vector<T> w2;
  std::vector<T> beta1;  // index k - 2
  std::vector<T> beta2;
};

template <class T>
T tau(const Lower<T>& a, const std::vector<T>& c, int i, int k) {
  T acc(0.0);
  for (int j = 0; j <= i; ++j) acc += a(i, j) * ipow(c[std::size_t(j)], k - 1);
  return acc - ipow(c[std::size_t(i)], k) / T(double(k));
}

template <class T>
Basis<T> basis(const Lower<T>& a, int rows, int q) {
  Basis<T> B;
  B.c.assign(std::size_t(rows), T(0.0));
  B.w1.assign(std::size_t(rows), T(0.0));
  B.w2.assign(std::size_t(rows), T(0.0));
  for (int i = 0; i < rows; ++i) {
    T acc(0.0);
    for (int j = 0; j <= i; ++j) acc += a(i, j);
    B.c[std::size_t(i)] = acc;
  }
  const T a11 = a(0, 0);
  const T a22 = a(1, 1);
  B.w1[0] = T(1.0);
  for (int i = 1; i < rows; ++i) {
    T acc(0.0);
    for (int j = 0; j < i; ++j) acc += a(i, j) * B.w1[std::size_t(j)];
    B.w1[std::size_t(i)] = acc / (a11 - a(i, i));
  }
  B.w2[1] = T(1.0);
  for (int i = 2; i < rows; ++i) {
    T acc(0.0);
    for (int j = 1; j < i; ++j) acc += a(i, j) * B.w2[std::size_t(j)];
    B.w2[std::size_t(i)] = acc / (a22 - a(i, i));
  }
  for (int k = 2; k <= q; ++k) {
    const T b1 = tau(a, B.c, 0, k);
    B.beta1.push_back(b1);
    B.beta2.push_back(tau(a, B.c, 1, k) - b1 * B.w1[1]);
  }
  return B;
}

// WSO residuals tau_i^(k) - beta1 w1_i - beta2 w2_i for rows [lo, hi), k = 2..q.
template <class T>
void wso_rows(const Lower<T>& a, const Basis<T>& B, int q, int lo, int hi, std::vector<T>& out) {
  for (int i = std::max(lo, 2); i < hi; ++i) {
    for (int k = 2; k <= q; ++k) {
      out.push_back(tau(a, B.c, i, k) - B.beta1[std::size_t(k - 2)] * B.w1[std::size_t(i)] -
                    B.beta2[std::size_t(k - 2)] * B.w2[std::size_t(i)]);
    }
  }
}

template <class T>
std::vector<T> matvec(const Lower<T>& a, const std::vector<T>& v) {
  std::vector<T> out(v.size(), T(0.0));
  for (int i = 0; i < a.s; ++i) {
    T acc(0.0);
    for (int j = 0; j <= i; ++j) acc += a(i, j) * v[std::size_t(j)];
    out[std::size_t(i)] = acc;
  }
  return out;
}

template <class T>
T weighted(const Lower<T>& a, const std::vector<T>& v) {
  T acc(0.0);
  for (int j = 0; j < a.s; ++j) acc += a(a.s - 1, j) * v[std::size_t(j)];
  return acc;
}

template <class T>
std::vector<T> hadamard(const std::vector<T>& x, const std::vector<T>& y) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return out;
}

// Independent order conditions kept alongside WSO q (b = last row of A).
template <class T>
void order_rows(const Lower<T>& a, const std::vector<T>& c, int p, std::vector<T>& out) {
  const int s = a.s;
  std::vector<T> ones(std::size_t(s), T(1.0));
  out.push_back(weighted(a, ones) - T(1.0));
  std::vector<T> ck = ones;
  for (int l = 1; l <= p - 1; ++l) {
    ck = hadamard(ck, c);
    out.push_back(weighted(a, ck) - T(1.0 / (l + 1)));
  }
  if (p >= 4) {
    const auto Ac = matvec(a, c);
    out.push_back(weighted(a, hadamard(c, Ac)) - T(1.0 / 8));
    if (p >= 5) {
      const auto c2 = hadamard(c, c);
      const auto AAc = matvec(a, Ac);
      out.push_back(weighted(a, hadamard(c2, Ac)) - T(1.0 / 10));
      out.push_back(weighted(a, hadamard(c, matvec(a, c2))) - T(1.0 / 15));
      out.push_back(weighted(a, hadamard(c, AAc)) - T(1.0 / 30));
      out.push_back(weighted(a, matvec(a, hadamard(c, Ac))) - T(1.0 / 40));
      out.push_back(weighted(a, hadamard(Ac, Ac)) - T(1.0 / 20));
    }
  }
}

template <class T>
std::vector<T> equalities(const Lower<T>& a, int p, int q) {
  const auto B = basis(a, a.s, q);
  std::vector<T> out;
  wso_rows(a, B, q, 2, a.s, out);
  out.push_back(weighted(a, B.w1));
  out.push_back(weighted(a, B.w2));
  order_rows(a, B.c, p, out);
  return out;
}

// |R(iy)|^2 - 1 via forward substitution, b = last row.
template <class T>
T modulus_excess(const Lower<T>& a, double y) {
  const int s = a.s;
  std::vector<Cx<T>> X(static_cast<std::size_t>(s));
  const Cx<T> iy{T(0.0), T(y)};
  Cx<T> acc_b{T(0.0), T(0.0)};
  for (int i = 0; i < s; ++i) {
    Cx<T> acc{T(1.0), T(0.0)};
    for (int j = 0; j < i; ++j) {
      const Cx<T> t = cmul(iy, Cx<T>{a(i, j) * X[std::size_t(j)].re, a(i, j) * X[std::size_t(j)].im});
      acc.re += t.re;
      acc.im += t.im;
    }
    const Cx<T> den{T(1.0), T(0.0) - T(y) * a(i, i)};
    X[std::size_t(i)] = cdiv(acc, den);
  }
  for (int j = 0; j < s; ++j) {
    acc_b.re += a(s - 1, j) * X[std::size_t(j)].re;
    acc_b.im += a(s - 1, j) * X[std::size_t(j)].im;
  }
  const Cx<T> zb = cmul(iy, acc_b);
  const T re = T(1.0) + zb.re;
  const T im = zb.im;
  return re * re + im * im - T(1.0);
}

// Rooted trees of order n as lists of child indices into a global table.
struct TreeTable {
  std::vector<int> order;
  std::vector<std::vector<int>> children;
  std::vector<double> density;
  std::vector<std::vector<int>> by_order;

  TreeTable() {
    by_order.resize(7);
    add(1, {});
    for (int n = 2; n <= 6; ++n) {
      std::vector<int> picked;
      const int known = int(order.size());
      auto rec = [&](auto&& self, int remaining, int max_idx) -> void {
        if (remaining == 0) {
          add(n, picked);
          return;
        }
        for (int idx = max_idx; idx >= 0; --idx) {
          if (order[std::size_t(idx)] > remaining) continue;
          picked.push_back(idx);
          self(self, remaining - order[std::size_t(idx)], idx);
          picked.pop_back();
        }
      };
      rec(rec, n - 1, known - 1);
    }
  }

  void add(int n, const std::vector<int>& ch) {
    double g = n;
    for (int k : ch) g *= density[std::size_t(k)];
    by_order[std::size_t(n)].push_back(int(order.size()));
    order.push_back(n);
    children.push_back(ch);
    density.push_back(g);
  }
};

const TreeTable& trees() {
  static const TreeTable t;
  return t;
}

// Residuals b^T Psi(t) - 1/gamma(t) for every tree of order n.
template <class T>
std::vector<T> tree_rows(const Lower<T>& a, int n) {
  const auto& tt = trees();
  const std::size_t count = std::size_t(std::count_if(tt.order.begin(), tt.order.end(),
                                                      [n](int o) { return o <= n; }));
  std::vector<std::vector<T>> psi(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<T> w(std::size_t(a.s), T(1.0));
    for (int ch : tt.children[t]) w = hadamard(w, matvec(a, psi[std::size_t(ch)]));
    psi[t] = std::move(w);
  }
  std::vector<T> out;
  for (int t : tt.by_order[std::size_t(n)]) {
    out.push_back(weighted(a, psi[std::size_t(t)]) - T(1.0 / tt.density[std::size_t(t)]));
  }
  return out;
}

double objective(const Lower<double>& a, int p) {
  double f = 0.0;
  for (double r : tree_rows(a, p + 1)) f += r * r;
  return f;
}

// Variables: a list of (i, j) positions of A that are free.
using Slots = std::vector<std::pair<int, int>>;

Slots all_slots(int s) {
  Slots out;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j <= i; ++j) out.emplace_back(i, j);
  }
  return out;
}

std::vector<double> gather(const Lower<double>& a, const Slots& slots) {
  std::vector<double> x;
  for (auto [i, j] : slots) x.push_back(a(i, j));
  return x;
}

void scatter(Lower<double>& a, const Slots& slots, const std::vector<double>& x) {
  for (std::size_t k = 0; k < slots.size(); ++k) a.at(slots[k].first, slots[k].second) = x[k];
}

// Residual value and Jacobian with respect to the slots.
template <class F>
std::pair<Vector, Matrix> linearize(const F& f, const Lower<double>& base, const Slots& slots) {
  Lower<Dual> a{base.s, std::vector<Dual>(base.m.begin(), base.m.end())};
  Vector r;
  Matrix J;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    Dual& slot = a.at(slots[k].first, slots[k].second);
    slot.d = 1.0;
    const std::vector<Dual> out = f(a);
    slot.d = 0.0;
    if (k == 0) {
      r.resize(Eigen::Index(out.size()));
      J.resize(Eigen::Index(out.size()), Eigen::Index(slots.size()));
      for (std::size_t i = 0; i < out.size(); ++i) r(Eigen::Index(i)) = out[i].v;
    }
    for (std::size_t i = 0; i < out.size(); ++i) J(Eigen::Index(i), Eigen::Index(k)) = out[i].d;
  }
  if (slots.empty()) {
    Lower<double> copy = base;
    const auto out = f(copy);
    r.resize(Eigen::Index(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) r(Eigen::Index(i)) = val(out[i]);
    J.resize(r.size(), 0);
  }
  return {r, J};
}

template <class F>
Vector evaluate(const F& f, const Lower<double>& a) {
  const auto out = f(a);
  Vector r(Eigen::Index(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) r(Eigen::Index(i)) = val(out[i]);
  return r;
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool all_finite(const Lower<double>& a) {
  return std::all_of(a.m.begin(), a.m.end(), [](double v) { return std::isfinite(v); });
}

// Levenberg-Marquardt on the slots; returns the final max-norm residual.
template <class F>
double levenberg(const F& f, Lower<double>& a, const Slots& slots, int max_iter, double tol) {
  double mu = 1e-3;
  Vector r = evaluate(f, a);
  double cost = r.squaredNorm();
  for (int it = 0; it < max_iter && inf_norm(r) > tol; ++it) {
    auto [r0, J] = linearize(f, a, slots);
    const Matrix JtJ = J.transpose() * J;
    const Vector g = J.transpose() * r0;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Matrix H = JtJ;
      H.diagonal().array() += mu * (1.0 + JtJ.diagonal().array());
      const Vector dx = -H.ldlt().solve(g);
      Lower<double> trial = a;
      auto x = gather(trial, slots);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += dx(Eigen::Index(k));
      scatter(trial, slots, x);
      if (!all_finite(trial)) {
        mu *= 10;
        continue;
      }
      const Vector rt = evaluate(f, trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        a = std::move(trial);
        r = rt;
        cost = ct;
        mu = std::max(mu / 5, 1e-12);
        improved = true;
        break;
      }
      mu *= 10;
    }
    if (!improved) break;
  }
  return inf_norm(r);
}

// Gauss-Newton with minimum-norm steps (rank-revealing) on all slots.
template <class F>
double gauss_newton(const F& f, Lower<double>& a, const Slots& slots, int max_iter, double tol) {
  Vector r = evaluate(f, a);
  double best = inf_norm(r);
  for (int it = 0; it < max_iter && best > tol; ++it) {
    auto [r0, J] = linearize(f, a, slots);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(1e-13);
    cod.compute(J);
    const Vector dx = -cod.solve(r0);
    const auto x0 = gather(a, slots);
    bool improved = false;
    for (double step = 1.0; step > 1e-3 && !improved; step *= 0.5) {
      Lower<double> trial = a;
      auto x = x0;
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += step * dx(Eigen::Index(k));
      scatter(trial, slots, x);
      if (!all_finite(trial)) continue;
      const double nt = inf_norm(evaluate(f, trial));
      if (nt < best) {
        a = std::move(trial);
        best = nt;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return best;
}

Candidate finish(const Lower<double>& a, const SearchConfig& cfg) {
  Candidate c;
  c.a = to_matrix(a);
  const auto B = basis(a, a.s, cfg.q);
  c.w1 = Vector::Map(B.w1.data(), a.s);
  c.w2 = Vector::Map(B.w2.data(), a.s);
  c.beta1 = B.beta1;
  c.beta2 = B.beta2;
  c.eq_residual = equality_residual(c.a, cfg.p, cfg.q);
  c.F_value = objective(a, cfg.p);
  return c;
}

auto eq_map(int p, int q) {
  return [p, q](const auto& a) { return equalities(a, p, q); };
}

// Allowed excess of |R(iy)|^2 over 1 on the sample grid.
constexpr double kModulusSlack = 1e-9;

bool inequalities_hold(const Lower<double>& a, const SearchConfig& cfg, double slack) {
  const auto B = basis(a, a.s, 2);
  for (int i = 0; i < a.s; ++i) {
    if (a(i, i) < 0.0 || B.c[std::size_t(i)] < 0.0) return false;
    for (int j = 0; j <= i; ++j) {
      if (std::abs(a(i, j)) > cfg.coeff_bound) return false;
    }
  }
  for (double y : cfg.samples()) {
    if (modulus_excess(a, y) > slack) return false;
  }
  return true;
}

// Denser imaginary-axis grid guarding the optimizer against gaps in the
// sample set; 2048 log-spaced points on [1e-4, 1e4].
const std::vector<double>& guard_grid() {
  static const std::vector<double> g = [] {
    std::vector<double> v;
    for (int k = 0; k < 2048; ++k) v.push_back(std::pow(10.0, -4.0 + 8.0 * k / 2047.0));
    return v;
  }();
  return g;
}

bool guard_holds(const Lower<double>& a) {
  return std::all_of(guard_grid().begin(), guard_grid().end(),
                     [&](double y) { return modulus_excess(a, y) <= kModulusSlack; });
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Distinct diagonal draw (pairwise gap and away from a11, a22).
double draw_diag(std::mt19937_64& rng, const SearchConfig& cfg, const std::vector<double>& taken) {
  for (;;) {
    const double d = uniform(rng, cfg.diag_lo, cfg.diag_hi);
    if (std::all_of(taken.begin(), taken.end(),
                    [&](double t) { return std::abs(t - d) >= cfg.diag_gap; })) {
      return d;
    }
  }
}

// Scalar root of the row-3 tau^(5) equation in a33 (q = 5).
std::optional<double> solve_a33(double a11, double a22, int root, const SearchConfig& cfg,
                                std::mt19937_64& rng) {
  auto g = [&](double a33) -> double {
    const auto blk = leading_block(a11, a22, a33, root);
    if (!blk) return std::numeric_limits<double>::quiet_NaN();
    const Lower<double> l = from_matrix(*blk);
    const auto B = basis(l, 3, 5);
    return tau(l, B.c, 2, 5) - B.beta1[3] * B.w1[2] - B.beta2[3] * B.w2[2];
  };
  const int n = 400;
  std::vector<std::pair<double, double>> brackets;
  double x0 = cfg.diag_lo;
  double g0 = g(x0);
  for (int k = 1; k <= n; ++k) {
    const double x1 = cfg.diag_lo + (cfg.diag_hi - cfg.diag_lo) * k / n;
    const double g1 = g(x1);
    if (std::isfinite(g0) && std::isfinite(g1) && g0 * g1 < 0) brackets.emplace_back(x0, x1);
    x0 = x1;
    g0 = g1;
  }
  std::shuffle(brackets.begin(), brackets.end(), rng);
  for (auto [lo, hi] : brackets) {
    double glo = g(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (!std::isfinite(gm)) break;
      if ((gm < 0) == (glo < 0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    const double r = 0.5 * (lo + hi);
    const double gr = g(r);
    // A sign change across a pole is not a root.
    if (std::isfinite(gr) && std::abs(gr) < 1e-9 && std::abs(r - a11) >= cfg.diag_gap &&
        std::abs(r - a22) >= cfg.diag_gap) {
      return r;
    }
  }
  return std::nullopt;
}

// g(x) <= 0 constraints: -c_i, -a_ii, |R(iy)|^2 - 1, scaled a_ij^2 - bound^2.
template <class T>
std::vector<T> inequalities(const Lower<T>& m, const SearchConfig& cfg) {
  const double bound = cfg.coeff_bound;
  std::vector<T> g;
  for (int i = 0; i < m.s; ++i) {
    T ci(0.0);
    for (int j = 0; j <= i; ++j) ci += m(i, j);
    g.push_back(T(0.0) - ci);
    g.push_back(T(0.0) - m(i, i));
  }
  for (double y : cfg.samples()) g.push_back(modulus_excess(m, y));
  for (int i = 0; i < m.s; ++i) {
    for (int j = 0; j <= i; ++j) g.push_back((m(i, j) * m(i, j) - T(bound * bound)) / T(bound * bound));
  }
  return g;
}

// Levenberg-Marquardt on ||R||^2 restricted to the tangent space of E = 0,
// each trial projected back by Gauss-Newton. A trial is kept only when it is
// feasible for E, passes `admissible` and lowers ||R||^2. Returns the number
// of accepted steps, or -1 when the starting point is not on E = 0.
template <class FR, class Pred>
int manifold_descent(const FR& R, Lower<double>& a, const SearchConfig& cfg, int max_iter,
                     const Pred& admissible) {
  const auto E = eq_map(cfg.p, cfg.q);
  const Slots slots = all_slots(a.s);
  if (!(inf_norm(evaluate(E, a)) <= cfg.eq_tol)) return -1;
  double phi = evaluate(R, a).squaredNorm();
  double lambda = 1e-4;
  int moves = 0;
  for (int it = 0; it < max_iter && phi > 0.0; ++it) {
    auto [e, Je] = linearize(E, a, slots);
    auto [r, Jr] = linearize(R, a, slots);
    Eigen::JacobiSVD<Matrix> svd(Je, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > 1e-10 * std::max(1.0, sv(0))) ++rank;
    }
    const Matrix N = svd.matrixV().rightCols(Je.cols() - rank);
    const Matrix JN = Jr * N;
    const Matrix H0 = JN.transpose() * JN;
    const Vector g = JN.transpose() * r;
    bool accepted = false;
    while (lambda < 1e8) {
      Matrix H = H0;
      H.diagonal().array() += lambda * (1.0 + H0.diagonal().array());
      const Vector dz = -(N * H.ldlt().solve(g));
      Lower<double> trial = a;
      auto x = gather(trial, slots);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += dz(Eigen::Index(k));
      scatter(trial, slots, x);
      if (all_finite(trial)) {
        const double res = gauss_newton(E, trial, slots, cfg.gn_max_iter, cfg.gn_tol);
        const double pt = evaluate(R, trial).squaredNorm();
        if (res <= cfg.eq_tol && pt < phi && admissible(trial)) {
          const double gain = phi - pt;
          a = std::move(trial);
          phi = pt;
          lambda = std::max(lambda / 4, 1e-12);
          accepted = true;
          ++moves;
          if (gain <= 1e-14 * phi) return moves;
          break;
        }
      }
      lambda *= 5;
    }
    if (!accepted) break;
  }
  return moves;
}

}  // namespace

void SearchConfig::validate() const {
  auto bad = [](const std::string& m) { throw std::invalid_argument(m); };
  if (q < 4 || q > 5) bad("weak stage order must be 4 or 5 (two-dimensional K_q branch)");
  if (p < 4 || p > 5) bad("order must be 4 or 5");
  if (q > p) bad("weak stage order cannot exceed the order");
  if (s < p + 2) {
    bad("s = " + std::to_string(s) + " violates the stage bound s >= p + 2 for stiffly accurate schemes");
  }
  if (restarts < 0) bad("restarts must be non-negative");
  if (!(coeff_bound > 0) || !(eq_tol > 0)) bad("coeff_bound and eq_tol must be positive");
  if (!(diag_lo > 0) || !(diag_hi > diag_lo)) bad("invalid diagonal draw interval");
  if (threads < 1) bad("threads must be at least 1");
}

const std::vector<double>& SearchConfig::samples() const {
  static const std::vector<double> dflt = coarse_axis_grid();
  return cr6_samples.empty() ? dflt : cr6_samples;
}

Tableau Candidate::tableau(const std::string& label) const {
  return Tableau::validate(a, b(), label, Origin::search,
                           "random-restart search, restart " + std::to_string(restart));
}

std::vector<double> equality_residuals(const Matrix& a, int p, int q) {
  return equalities(from_matrix(a), p, q);
}

double equality_residual(const Matrix& a, int p, int q) {
  double m = 0.0;
  for (double r : equality_residuals(a, p, q)) m = std::max(m, std::abs(r));
  return m;
}

std::optional<Matrix> leading_block(double a11, double a22, double a33, int root) {
  const double den = a11 * a11 - 4 * a11 * a33 + 2 * a33 * a33;
  if (den == 0.0) return std::nullopt;
  const double sigma = 4 * a33 * (a11 * a11 - 5 * a11 * a33 + 3 * a33 * a33) / den;
  const double pi = 2 * a33 * a33 * (a11 * a11 - 6 * a11 * a33 + 6 * a33 * a33) / den;
  const double disc = sigma * sigma - 4 * pi;
  if (disc < 0.0) return std::nullopt;
  const double r1 = 0.5 * (sigma + std::sqrt(disc));
  const double r2 = 0.5 * (sigma - std::sqrt(disc));
  const double c2 = root == 0 ? r1 : r2;
  const double c3 = root == 0 ? r2 : r1;
  const double d = (a11 - c2) * (a11 * a33 - a11 * c2 - 2 * a33 * a33 + a33 * c2);
  if (d == 0.0) return std::nullopt;
  const double a32 = (a11 - c3) * (a22 - a33) * (a11 * a33 - a11 * c3 - 2 * a33 * a33 + a33 * c3) / d;
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = a11;
  m(1, 0) = c2 - a22;
  m(1, 1) = a22;
  m(2, 0) = c3 - a32 - a33;
  m(2, 1) = a32;
  m(2, 2) = a33;
  if (!m.allFinite()) return std::nullopt;
  return m;
}

Candidate step1a(const SearchConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const int s = cfg.s;
  const int q = cfg.q;
  const double bound = cfg.coeff_bound;
  for (int attempt = 0; attempt < cfg.draw_attempts; ++attempt) {
    // (a)-(d): diagonal draws and the closed-form leading 3x3 block.
    std::vector<double> diag;
    diag.push_back(draw_diag(rng, cfg, diag));
    diag.push_back(draw_diag(rng, cfg, diag));
    const int root = int(rng() & 1u);
    double a33 = 0.0;
    if (q == 4) {
      a33 = draw_diag(rng, cfg, diag);
    } else {
      const auto r = solve_a33(diag[0], diag[1], root, cfg, rng);
      if (!r) continue;
      a33 = *r;
    }
    diag.push_back(a33);
    const auto blk = leading_block(diag[0], diag[1], a33, root);
    if (!blk || blk->cwiseAbs().maxCoeff() > bound) continue;
    Lower<double> a{s, std::vector<double>(std::size_t(s * s), 0.0)};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j <= i; ++j) a.at(i, j) = (*blk)(i, j);
    }
    {
      const auto B = basis(a, 3, q);
      std::vector<double> chk;
      wso_rows(a, B, q, 2, 3, chk);
      double m = 0;
      for (double v : chk) m = std::max(m, std::abs(v));
      if (!(m <= cfg.eq_tol)) continue;
    }
    // (e): rows 4..s-1, each solved for its own entries.
    bool ok = true;
    for (int i = 3; i < s - 1 && ok; ++i) {
      const bool free_diag = i < q;  // fewer off-diagonal unknowns than equations
      if (!free_diag) diag.push_back(draw_diag(rng, cfg, diag));
      Slots slots;
      for (int j = 0; j < i; ++j) slots.emplace_back(i, j);
      if (free_diag) slots.emplace_back(i, i);
      const int row = i;
      auto f = [row, q](const auto& m) {
        using T = typename std::decay_t<decltype(m.m)>::value_type;
        const auto B = basis(m, row + 1, q);
        std::vector<T> out;
        wso_rows(m, B, q, row, row + 1, out);
        return out;
      };
      bool solved = false;
      for (int start = 0; start < cfg.row_starts && !solved; ++start) {
        for (int j = 0; j < i; ++j) a.at(i, j) = uniform(rng, -1.0, 1.0);
        a.at(i, i) = free_diag ? draw_diag(rng, cfg, diag) : diag.back();
        const double res = levenberg(f, a, slots, 200, 1e-13);
        bool inside = res <= cfg.eq_tol;
        for (int j = 0; j <= i && inside; ++j) inside = std::abs(a(i, j)) <= bound;
        if (inside && free_diag) inside = a(i, i) > 0.0;
        solved = inside;
      }
      if (!solved) ok = false;
      if (free_diag && ok) diag.push_back(a(i, i));
    }
    if (!ok) continue;
    // (f): the last row (= b) against the remaining equations; trailing rows
    // are freed as well while there are fewer unknowns than equations.
    const int n_eq = (q - 1) + 2 + 1 + (cfg.p - 1) + (cfg.p >= 4 ? 1 : 0) + (cfg.p >= 5 ? 5 : 0);
    int first_row = s - 1;
    int unknowns = s;
    while (unknowns < n_eq + (s - 1 - first_row) * (q - 1) && first_row > 3) {
      --first_row;
      unknowns += first_row + 1;
    }
    Slots slots;
    for (int i = first_row; i < s; ++i) {
      for (int j = 0; j <= i; ++j) slots.emplace_back(i, j);
    }
    const int p = cfg.p;
    auto f = [first_row, p, q](const auto& m) {
      using T = typename std::decay_t<decltype(m.m)>::value_type;
      const auto B = basis(m, m.s, q);
      std::vector<T> out;
      wso_rows(m, B, q, first_row, m.s, out);
      out.push_back(weighted(m, B.w1));
      out.push_back(weighted(m, B.w2));
      order_rows(m, B.c, p, out);
      return out;
    };
    const Lower<double> upper = a;
    for (int start = 0; start < cfg.row_starts; ++start) {
      a = upper;
      for (int i = first_row; i < s; ++i) {
        for (int j = 0; j < i; ++j) a.at(i, j) = i == s - 1 ? 1.0 / s + uniform(rng, -0.3, 0.3)
                                                            : uniform(rng, -1.0, 1.0);
        a.at(i, i) = uniform(rng, cfg.diag_lo, cfg.diag_hi);
      }
      const double res = levenberg(f, a, slots, 300, 1e-13);
      if (!(res <= cfg.eq_tol)) continue;
      const Candidate c = finish(a, cfg);
      if (c.eq_residual <= cfg.eq_tol && c.max_coeff() <= bound) return c;
    }
    throw SearchError("step 1A(f): final row solve failed");
  }
  throw SearchError("step 1A: no admissible diagonal draw within the attempt budget");
}

Candidate step1b(Candidate c, const SearchConfig& cfg) {
  Lower<double> a = from_matrix(c.a);
  const double before = equality_residual(c.a, cfg.p, cfg.q);
  Lower<double> trial = a;
  gauss_newton(eq_map(cfg.p, cfg.q), trial, all_slots(a.s), cfg.gn_max_iter, cfg.gn_tol);
  Candidate out = finish(trial, cfg);
  out.restart = c.restart;
  if (!(out.eq_residual <= before)) {
    Candidate keep = finish(a, cfg);
    keep.restart = c.restart;
    out = keep;
  }
  if (!(out.eq_residual <= cfg.eq_tol)) throw SearchError("step 1B: Gauss-Newton stagnated above eq_tol");
  return out;
}

Candidate step1c(Candidate c, const SearchConfig& cfg) {
  Lower<double> a = from_matrix(c.a);
  const Slots slots = all_slots(a.s);
  const double margin = 1e-6;

  auto ineq = [&cfg](const auto& m) { return inequalities(m, cfg); };
  const std::size_t n_in = ineq(a).size();
  std::vector<double> mu(n_in, 0.0);
  const double rho = 1.0;

  auto accept = [&](const Lower<double>& x) -> std::optional<Candidate> {
    if (!inequalities_hold(x, cfg, kModulusSlack)) return std::nullopt;
    Candidate out = finish(x, cfg);
    out.restart = c.restart;
    out.feasible = out.eq_residual <= cfg.eq_tol;
    if (!out.feasible) return std::nullopt;
    return out;
  };
  if (auto ok = accept(a)) return *ok;

  // Equalities are kept exactly (null-space steps plus projection); the
  // inequalities enter through a shifted squared hinge with multipliers.
  for (int outer = 0; outer < cfg.al_outer; ++outer) {
    auto hinge = [&](const auto& m) {
      using T = typename std::decay_t<decltype(m.m)>::value_type;
      const auto g = ineq(m);
      std::vector<T> r;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T arg = g[i] + T(margin + mu[i] / rho);
        r.push_back(val(arg) > 0.0 ? arg : T(0.0));
      }
      return r;
    };
    manifold_descent(hinge, a, cfg, cfg.al_inner, [](const Lower<double>&) { return true; });
    if (auto ok = accept(a)) return *ok;
    const auto g = ineq(a);
    for (std::size_t i = 0; i < n_in; ++i) mu[i] = std::max(0.0, mu[i] + rho * (g[i] + margin));
  }
  throw SearchError("step 1C: inequality constraints not met");
}

Candidate optimize_M(Candidate c, const SearchConfig& cfg) {
  Lower<double> a = from_matrix(c.a);
  const int p = cfg.p;
  // Order-(p+1) residuals plus a stiff hinge that switches on just inside
  // the feasible set, so near-active constraints shape the model.
  auto G = [p, &cfg](const auto& m) {
    using T = typename std::decay_t<decltype(m.m)>::value_type;
    auto r = tree_rows(m, p + 1);
    for (const T& gi : inequalities(m, cfg)) {
      const T arg = gi + T(1e-7);
      r.push_back(val(arg) > 0.0 ? T(1e3) * arg : T(0.0));
    }
    return r;
  };
  const int moves = manifold_descent(G, a, cfg, cfg.opt_max_iter,
                                     [&](const Lower<double>& x) {
                                       return inequalities_hold(x, cfg, kModulusSlack) && guard_holds(x);
                                     });
  Candidate out = finish(a, cfg);
  out.restart = c.restart;
  out.feasible = c.feasible;
  if (moves < 0 || !(out.F_value <= c.F_value) || !(out.eq_residual <= cfg.eq_tol) ||
      (moves > 0 && !verify_candidate(out, cfg).pass)) {
    c.optimizer_failed = true;
    return c;
  }
  return out;
}

std::vector<Candidate> pareto_select(const std::vector<Candidate>& pool) {
  if (pool.empty()) throw SearchError("Pareto selection of an empty pool");
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double fi = pool[i].F_value;
    const double mi = pool[i].max_coeff();
    bool dominated = false;
    for (std::size_t j = 0; j < pool.size() && !dominated; ++j) {
      if (i == j) continue;
      const double fj = pool[j].F_value;
      const double mj = pool[j].max_coeff();
      dominated = fj <= fi && mj <= mi && (fj < fi || mj < mi);
    }
    if (!dominated) out.push_back(pool[i]);
  }
  return out;
}

CandidateCheck verify_candidate(const Candidate& c, const SearchConfig& cfg) {
  CandidateCheck k;
  const Tableau t = c.tableau("candidate");
  k.order = report(t).order;
  k.wso = wso_of(t).q;
  k.stiffly_accurate = t.stiffly_accurate();
  k.abscissae_nonnegative = t.c().minCoeff() >= 0.0;
  k.diagonal_nonnegative = t.A().diagonal().minCoeff() >= 0.0;
  const auto st = check_a_stability(t, ScanMode::fine);
  k.a_stable = st.a_stable;
  k.max_imag_axis_modulus = st.max_imag_axis_modulus;
  k.irreducible = !reduce_confluent(t).reducible;
  k.pass = k.order >= cfg.p && k.wso >= cfg.q && k.stiffly_accurate && k.abscissae_nonnegative &&
           k.diagonal_nonnegative && k.a_stable && k.irreducible;
  return k;
}

std::string candidate_report(const Candidate& c, const CandidateCheck& k) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "restart %d\norder %d\nwso %d\nstiffly_accurate %d\nabscissae_nonnegative %d\n"
                "diagonal_nonnegative %d\na_stable %d\nmax_imag_axis_modulus %.17g\nirreducible %d\n"
                "eq_residual %.17g\nF %.17g\nmax_coeff %.17g\npass %d\n",
                c.restart, k.order, k.wso == kInfiniteWso ? -1 : k.wso, int(k.stiffly_accurate),
                int(k.abscissae_nonnegative), int(k.diagonal_nonnegative), int(k.a_stable),
                k.max_imag_axis_modulus, int(k.irreducible), c.eq_residual, c.F_value, c.max_coeff(),
                int(k.pass));
  return buf;
}

SearchResult run_search(const SearchConfig& cfg, const std::string& checkpoint_dir,
                        const std::function<void(int, const std::string&)>& progress) {
  cfg.validate();
  namespace fs = std::filesystem;
  SearchResult result;
  std::vector<std::optional<Candidate>> slots(std::size_t(cfg.restarts));
  std::vector<std::string> status(std::size_t(cfg.restarts));
  std::set<int> done;
  const fs::path dir(checkpoint_dir);
  const fs::path log = dir / "progress.txt";
  if (!checkpoint_dir.empty()) {
    fs::create_directories(dir);
    std::ifstream in(log);
    std::string word;
    int r = 0;
    std::string st;
    while (in >> word >> r >> st) {
      if (word != "restart" || r < 0 || r >= cfg.restarts) continue;
      done.insert(r);
      status[std::size_t(r)] = st;
      if (st == "feasible") {
        std::ifstream f(dir / ("cand_" + std::to_string(r) + ".txt"));
        std::stringstream ss;
        ss << f.rdbuf();
        const Tableau t = from_text(ss.str());
        Lower<double> a = from_matrix(t.A());
        Candidate c = finish(a, cfg);
        c.restart = r;
        c.feasible = true;
        slots[std::size_t(r)] = c;
      }
    }
  }

  std::mutex mu;
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= cfg.restarts) return;
      if (done.count(r)) continue;
      std::seed_seq seq{std::uint32_t(cfg.rng_seed & 0xffffffffu), std::uint32_t(cfg.rng_seed >> 32),
                        std::uint32_t(r)};
      std::mt19937_64 rng(seq);
      std::string st;
      std::optional<Candidate> found;
      std::optional<CandidateCheck> check;
      try {
        Candidate c = step1a(cfg, rng);
        c.restart = r;
        c = step1b(std::move(c), cfg);
        c = step1c(std::move(c), cfg);
        c = optimize_M(std::move(c), cfg);
        const CandidateCheck k = verify_candidate(c, cfg);
        if (k.pass) {
          st = "feasible";
          found = c;
          check = k;
        } else {
          st = "verify";

        }
      } catch (const SearchError& e) {
        const std::string what = e.what();
        st = what.rfind("step 1A", 0) == 0 ? "step1a" : what.rfind("step 1B", 0) == 0 ? "step1b" : "step1c";
      } catch (const std::exception&) {
        st = "error";
      }
      std::lock_guard<std::mutex> lock(mu);
      status[std::size_t(r)] = st;
      slots[std::size_t(r)] = found;
      if (!checkpoint_dir.empty()) {
        if (found) {
          std::ofstream(dir / ("cand_" + std::to_string(r) + ".txt"))
              << to_text(found->tableau("search_s" + std::to_string(cfg.s) + "_p" + std::to_string(cfg.p) +
                                        "_q" + std::to_string(cfg.q) + "_r" + std::to_string(r)));
          std::ofstream(dir / ("cand_" + std::to_string(r) + ".report")) << candidate_report(*found, *check);
        }
        std::ofstream(log, std::ios::app) << "restart " << r << " " << st << "\n";
      }
      if (progress) progress(r, st);
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < cfg.threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  result.restarts_run = cfg.restarts;
  for (int r = 0; r < cfg.restarts; ++r) {
    if (slots[std::size_t(r)]) result.pool.push_back(*slots[std::size_t(r)]);
    if (status[std::size_t(r)] != "feasible") ++result.failures[status[std::size_t(r)]];
  }
  if (!result.pool.empty()) result.pareto = pareto_select(result.pool);
  return result;
}

}  // namespace dirkwso
