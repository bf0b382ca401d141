// Acceptance run: one PASS/FAIL line per criterion, details indented above it.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dirkwso/conditions.hpp"
#include "dirkwso/convergence.hpp"
#include "dirkwso/problems.hpp"
#include "dirkwso/search.hpp"
#include "dirkwso/stability.hpp"
#include "dirkwso/threads.hpp"
#include "dirkwso/wso.hpp"

using namespace dirkwso;

namespace {

struct Scheme {
  const char* name;
  int p;
  int q;
};

const Scheme kNew[] = {{"dirk744", 4, 4}, {"dirk1254", 5, 4}, {"dirk1255", 5, 5}};

// Supplementary fit window reported next to the full-range slopes.
constexpr double kWinLo = 1.0 / 1024;
constexpr double kWinHi = 1.0 / 16;

class Verdict {
 public:
  void require(bool ok, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    std::printf("    [%s] %s\n", ok ? "ok" : "FAIL", buf);
    pass_ = pass_ && ok;
  }
  bool pass() const { return pass_; }

 private:
  bool pass_ = true;
};

bool in(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

double or_nan(const std::optional<double>& v) { return v ? *v : std::nan(""); }

void check_scheme(Verdict& v, const std::string& label, const Tableau& t, int p, int q) {
  const OrderReport rep = report(t);
  double order_res = 0.0;
  for (const auto& [k, r] : rep.residuals_by_order) {
    if (k <= p) order_res = std::max(order_res, r);
  }
  double wso_res = 0.0;
  for (int k = 1; k <= q; ++k) wso_res = std::max(wso_res, scaled_orthogonality(t, k));
  const KrylovReport kr = wso_of(t);
  v.require(rep.order == p && kr.q == q, "%s order %d wso %d (expected %d, %d)", label.c_str(),
            rep.order, kr.q == kInfiniteWso ? -1 : kr.q, p, q);
  v.require(order_res <= 1e-7 && wso_res <= 1e-7, "%s max order residual %.3g, scaled wso residual %.3g",
            label.c_str(), order_res, wso_res);
  v.require(t.stiffly_accurate(), "%s stiffly accurate", label.c_str());
  std::vector<double> roots;
  for (const auto& z : kr.min_poly_roots) roots.push_back(z.real());
  std::vector<double> diag = {t.a(0, 0), t.a(1, 1)};
  std::sort(roots.begin(), roots.end());
  std::sort(diag.begin(), diag.end());
  double gap = roots.size() == 2 ? 0.0 : 1.0;
  for (std::size_t i = 0; i < roots.size() && i < 2; ++i) {
    gap = std::max(gap, std::abs(roots[i] - diag[i]) + std::abs(kr.min_poly_roots[i].imag()));
  }
  v.require(kr.dim_Kq == 2 && gap <= 1e-6, "%s dim K_q %d, min-poly roots vs {a11, a22} gap %.3g",
            label.c_str(), kr.dim_Kq, gap);
}

bool criterion1() {
  Verdict v;
  for (const auto& s : kNew) check_scheme(v, s.name, builtin(s.name), s.p, s.q);
  return v.pass();
}

bool criterion2() {
  Verdict v;
  for (const auto& s : kNew) {
    const Tableau t = builtin(s.name);
    const StabilityReport r = check_a_stability(t, ScanMode::fine);
    const double inf = std::abs(stability_function(t, Complex(kMinusInfinityProbe, 0.0)));
    v.require(r.max_imag_axis_modulus <= 1.0 + 1e-8 && inf <= 1e-10,
              "%s max|R(iy)| - 1 = %.3g over %zu samples, |R(-1e12)| = %.3g", s.name,
              r.max_imag_axis_modulus - 1.0, r.sample_count, inf);
  }
  return v.pass();
}

void print_table(const ConvergenceTable& t) {
  std::printf("    %s on %s:", t.scheme.c_str(), t.problem.c_str());
  for (const auto& r : t.rows) {
    if (r.err_u) {
      std::printf(" %.2e", *r.err_u);
    } else {
      std::printf(" fail");
    }
  }
  std::printf("\n");
}

ConvergenceTable run(const char* scheme, const AnyProblem& p, const std::vector<double>& dts,
                     SweepOptions opt) {
  auto t = sweep(builtin(scheme), p, dts, opt);
  print_table(t);
  return t;
}

double slope_above_floor(const ConvergenceTable& t, ErrorKind k) {
  try {
    return fit_slope_above_floor(t, k);
  } catch (const FitError&) {
    return std::nan("");
  }
}

double slope_in(const ConvergenceTable& t, double lo, double hi, ErrorKind k) {
  try {
    return fit_slope(t, lo, hi, k);
  } catch (const FitError&) {
    return std::nan("");
  }
}

bool criterion3() {
  Verdict v;
  const AnyProblem pr = prothero_robinson(-1e4, 10.0);
  const auto dts = halving(10.0, 4, 14);
  SweepOptions opt;
  opt.error_floor = 1e-14;
  opt.windows.push_back({5e-3, 1e-1});
  const auto t744 = run("dirk744", pr, dts, opt);
  const auto t1255 = run("dirk1255", pr, dts, opt);
  const auto t541 = run("dirk541", pr, dts, opt);
  const double s744 = slope_above_floor(t744, ErrorKind::u);
  const double s1255 = slope_above_floor(t1255, ErrorKind::u);
  v.require(in(s744, 3.6, 4.4), "dirk744 slope %.3f in [3.6, 4.4]", s744);
  v.require(in(s1255, 4.5, 5.5), "dirk1255 slope %.3f in [4.5, 5.5]", s1255);
  const double w541 = or_nan(t541.windows[0].slope_u);
  const double w744 = or_nan(t744.windows[0].slope_u);
  const double w1255 = or_nan(t1255.windows[0].slope_u);
  v.require(w541 <= 3.0, "dirk541 stiff-window slope %.3f <= 3", w541);
  v.require(w744 - w541 >= 1.0, "stiff-window separation dirk744 - dirk541 = %.3f >= 1", w744 - w541);
  v.require(w1255 - w541 >= 1.0, "stiff-window separation dirk1255 - dirk541 = %.3f >= 1", w1255 - w541);
  return v.pass();
}

SweepOptions pde_options(double floor_u, double floor_ux) {
  SweepOptions opt;
  opt.error_floor = floor_u;
  opt.error_floor_ux = floor_ux;
  opt.windows.push_back({kWinLo, kWinHi});
  return opt;
}

struct Slopes {
  double u;
  double ux;
};

Slopes slopes(const ConvergenceTable& t) {
  const Slopes s{slope_above_floor(t, ErrorKind::u), slope_above_floor(t, ErrorKind::ux)};
  std::printf("    %s slopes above floor u %.3f u_x %.3f (window %s: u %.3f u_x %.3f)\n", t.scheme.c_str(),
              s.u, s.ux, t.windows[0].label().c_str(), or_nan(t.windows[0].slope_u),
              or_nan(t.windows[0].slope_ux));
  return s;
}

bool criterion4() {
  Verdict v;
  ProblemOptions po;
  po.n = 2000;
  const AnyProblem heat = make_problem("heat", po);
  const auto dts = halving(1.0, 2, 11);
  const auto opt = pde_options(1e-11, 4e-10);
  const Slopes a = slopes(run("dirk744", heat, dts, opt));
  const Slopes b = slopes(run("dirk1255", heat, dts, opt));
  const Slopes c = slopes(run("dirk1254", heat, dts, opt));
  v.require(in(a.u, 3.6, 4.4) && in(a.ux, 3.6, 4.4), "dirk744 u %.3f u_x %.3f in [3.6, 4.4]", a.u, a.ux);
  v.require(in(b.u, 4.5, 5.5) && in(b.ux, 4.5, 5.5), "dirk1255 u %.3f u_x %.3f in [4.5, 5.5]", b.u, b.ux);
  v.require(in(c.u, 4.5, 5.5), "dirk1254 u %.3f in [4.5, 5.5]", c.u);
  v.require(in(c.ux - c.u, -0.7, -0.3), "dirk1254 u_x - u deficit %.3f in [-0.7, -0.3]", c.ux - c.u);
  return v.pass();
}

bool criterion5() {
  Verdict v;
  ProblemOptions po;
  po.n = 2000;
  const AnyProblem adv = make_problem("advection", po);
  const auto dts = halving(1.0, 2, 11);
  const auto opt = pde_options(2e-11, 1.2e-10);
  const Slopes c = slopes(run("dirk1254", adv, dts, opt));
  const Slopes a = slopes(run("dirk744", adv, dts, opt));
  const Slopes b = slopes(run("dirk1255", adv, dts, opt));
  v.require(in(c.ux, 3.6, 4.4), "dirk1254 u_x %.3f in [3.6, 4.4]", c.ux);
  v.require(in(a.ux, 3.6, 4.4), "dirk744 u_x %.3f within 0.4 of 4", a.ux);
  v.require(in(b.ux, 4.6, 5.4), "dirk1255 u_x %.3f within 0.4 of 5", b.ux);
  return v.pass();
}

bool criterion6() {
  Verdict v;
  ProblemOptions po;
  po.n = 2000;
  const AnyProblem bih = make_problem("biharmonic", po);
  const auto dts = halving(1.0, 2, 11);
  const auto opt = pde_options(1e-10, 4e-10);
  const Slopes c = slopes(run("dirk1254", bih, dts, opt));
  const Slopes a = slopes(run("dirk744", bih, dts, opt));
  const Slopes b = slopes(run("dirk1255", bih, dts, opt));
  v.require(in(c.ux - c.u, -0.45, -0.05), "dirk1254 u_x - u deficit %.3f in [-0.45, -0.05]", c.ux - c.u);
  v.require(in(a.u, 3.6, 4.4) && in(a.ux, 3.6, 4.4), "dirk744 u %.3f u_x %.3f within 0.4 of 4", a.u, a.ux);
  v.require(in(b.u, 4.6, 5.4) && in(b.ux, 4.6, 5.4), "dirk1255 u %.3f u_x %.3f within 0.4 of 5", b.u, b.ux);
  return v.pass();
}

bool criterion7() {
  Verdict v;
  ProblemOptions po;
  po.n = 500;
  po.order = 6;
  const AnyProblem bur = make_problem("burgers", po);
  const auto dts = halving(1.0, 2, 10);
  const auto opt = pde_options(2.6e-12, 1e-12);
  const Slopes a = slopes(run("dirk744", bur, dts, opt));
  const Slopes b = slopes(run("dirk1255", bur, dts, opt));
  const Slopes r = slopes(run("dirk541", bur, dts, opt));
  v.require(in(a.u, 2.5, 3.5) && in(a.ux, 2.5, 3.5), "dirk744 u %.3f u_x %.3f in [2.5, 3.5]", a.u, a.ux);
  v.require(in(b.u, 2.5, 3.5) && in(b.ux, 2.5, 3.5), "dirk1255 u %.3f u_x %.3f in [2.5, 3.5]", b.u, b.ux);
  v.require(a.u > r.u && a.ux > r.ux && b.u > r.u && b.ux > r.ux,
            "both exceed dirk541 (u %.3f u_x %.3f)", r.u, r.ux);
  return v.pass();
}

bool criterion8() {
  Verdict v;
  const double mu = 500.0;
  const double T = 10.0;
  SweepOptions opt;
  opt.reference = van_der_pol_reference(mu, T, DIRKWSO_CACHE_DIR);
  opt.error_floor = 1e-14;
  const AnyProblem vdp = van_der_pol(mu, T);
  const auto dts = halving(0.5, 0, 11);
  for (const auto& s : {kNew[0], kNew[2]}) {
    const auto t = run(s.name, vdp, dts, opt);
    const double w = slope_in(t, 1e-2, 1e-1, ErrorKind::u);
    v.require(w <= s.p - 1, "%s stiff-window slope %.3f <= %d", s.name, w, s.p - 1);
  }
  return v.pass();
}

bool criterion9() {
  Verdict v;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0);

  double dual = 0.0;
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    for (int i = 0; i < 50; ++i) {
      const Complex z(u(rng), u(rng));
      const Complex r1 = stability_function(t, z);
      dual = std::max(dual, std::abs(r1 - stability_function_det(t, z)) / std::max(1.0, std::abs(r1)));
    }
  }
  v.require(dual <= 1e-10, "R(z) resolvent vs determinant formula, max relative gap %.3g", dual);

  int disagreements = 0;
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    const int s = int(t.stages());
    for (int k = 1; k <= 6; ++k) {
      const bool moments = scaled_orthogonality(t, k) <= kWsoTol;
      double sampled = 0.0;
      double dense = 0.0;
      for (int i = 0; i <= s; ++i) sampled = std::max(sampled, std::abs(transfer(t, k, Complex(-0.5 - i, 0.3 * i))));
      for (int i = 0; i < 40; ++i) dense = std::max(dense, std::abs(transfer(t, k, Complex(-20.0 + i, 7.0 - 0.35 * i))));
      disagreements += moments != (sampled <= 1e-8);
      disagreements += moments != (dense <= 1e-8);
    }
  }
  v.require(disagreements == 0, "transfer function three-way agreement, %d disagreements", disagreements);

  double scalar = 0.0;
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    for (int i = 0; i < 10; ++i) {
      const Complex lambda(-50.0 * std::abs(u(rng)) / 10.0, u(rng));
      IvpProblem<Complex> p;
      p.u0 = VectorOf<Complex>::Constant(1, 1.0);
      p.rhs = [lambda](double, const VectorOf<Complex>& y) { return VectorOf<Complex>(lambda * y); };
      p.jacobian = [lambda](double, const VectorOf<Complex>&) {
        return Operator<Complex>::dense(MatrixOf<Complex>::Constant(1, 1, lambda));
      };
      Integrator<Complex> integ(t, p);
      StepperState<Complex> st{0.0, p.u0, {}};
      integ.step(st, 0.1);
      const Complex r = stability_function(t, lambda * 0.1);
      scalar = std::max(scalar, std::abs(st.u(0) - r) / std::max(1.0, std::abs(r)));
    }
  }
  v.require(scalar <= 1e-12, "one step on u' = lambda u vs R(lambda dt), max gap %.3g", scalar);

  double poly = 0.0;
  for (const auto& s : kNew) {
    for (int k = 0; k <= s.p; ++k) {
      IvpProblem<double> p;
      p.u0 = Vector::Constant(1, k == 0 ? 1.0 : 0.0);
      p.rhs = [k](double t, const Vector&) { return Vector::Constant(1, k == 0 ? 0.0 : k * std::pow(t, k - 1)); };
      p.jacobian = [](double, const Vector&) { return Operator<double>::dense(Matrix::Zero(1, 1)); };
      p.exact = [k](double t) { return Vector::Constant(1, std::pow(t, k)); };
      Integrator<double> integ(builtin(s.name), p);
      poly = std::max(poly, *integ.integrate(0.25, 4).err_u);
    }
  }
  v.require(poly <= 1e-12, "polynomial solutions of degree <= p integrated exactly, max error %.3g", poly);

  double stencil_gap = 0.0;
  for (auto [order, deriv] : std::vector<std::pair<int, int>>{{4, 1}, {4, 2}, {6, 1}, {6, 2}, {2, 4}}) {
    const auto w = stencil(order, deriv);
    const int half = int(w.size()) / 2;
    // Moments: sum w_j j^m = m! delta_{m,deriv} for m < order + deriv.
    for (int m = 0; m < order + deriv; ++m) {
      double acc = 0.0;
      for (int j = -half; j <= half; ++j) acc += w[std::size_t(j + half)] * std::pow(double(j), m);
      double expect = 0.0;
      if (m == deriv) expect = std::tgamma(deriv + 1.0);
      stencil_gap = std::max(stencil_gap, std::abs(acc - expect));
    }
  }
  v.require(stencil_gap <= 1e-10, "centered stencils reproduce monomial moments, max gap %.3g", stencil_gap);

  double identity = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int s = 6;
    Matrix a = Matrix::Zero(s, s);
    Vector b(s);
    std::uniform_real_distribution<double> e(-1.0, 1.0);
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < i; ++j) a(i, j) = e(rng);
      a(i, i) = 0.1 + std::abs(e(rng));
      b(i) = e(rng);
    }
    const Tableau t = Tableau::validate(a, b, "random");
    for (int k = 1; k <= 5; ++k) {
      Vector r = stage_residual(t.A(), t.c(), k);
      for (int j = 0; j <= 4; ++j) {
        const double rhs = phi(t, j + k, k - 1) - phi(t, j + k, k) / k;
        identity = std::max(identity, std::abs(t.b().dot(r) - rhs) / std::max(1.0, std::abs(rhs)));
        r = t.A() * r;
      }
    }
  }
  v.require(identity <= 1e-12, "b^T A^j tau^(k) = phi_{j+k,k-1} - phi_{j+k,k}/k on random tableaux, gap %.3g",
            identity);

  for (const auto& s : kNew) {
    const Tableau t = builtin(s.name);
    const auto rc = retained_conditions(s.p, s.q);
    double kept = 0.0;
    double redundant = 0.0;
    for (const auto& id : rc.kept) kept = std::max(kept, std::abs(condition_residual(t.A(), t.b(), id)));
    for (const auto& id : rc.redundant_phi) redundant = std::max(redundant, std::abs(condition_residual(t.A(), t.b(), id)));
    v.require(kept <= 1e-8 && redundant <= 1e-8,
              "%s: %zu kept conditions (max %.3g), %zu redundant phi also vanish (max %.3g)", s.name,
              rc.kept.size(), kept, rc.redundant_phi.size(), redundant);
  }
  return v.pass();
}

bool criterion10() {
  Verdict v;
  SearchConfig cfg;
  cfg.s = 7;
  cfg.p = 4;
  cfg.q = 4;
  cfg.restarts = 500;
  cfg.rng_seed = 1;
  cfg.threads = default_threads();
  const SearchResult res = run_search(cfg);
  std::printf("    %d restarts, %zu feasible;", res.restarts_run, res.pool.size());
  for (const auto& [stage, n] : res.failures) std::printf(" %s %d", stage.c_str(), n);
  std::printf("\n");
  v.require(!res.pool.empty(), "at least one feasible candidate");
  if (res.pool.empty()) return v.pass();

  int reducible = 0;
  for (const auto& c : res.pool) reducible += !verify_candidate(c, cfg).irreducible;
  v.require(reducible == 0, "every emitted candidate irreducible (%d reducible)", reducible);

  const Candidate* best = &res.pareto.front();
  for (const auto& c : res.pareto) {
    if (c.F_value < best->F_value) best = &c;
  }
  const Tableau t = best->tableau("search_best");
  check_scheme(v, "best candidate", t, 4, 4);
  const StabilityReport st = check_a_stability(t, ScanMode::fine);
  v.require(st.max_imag_axis_modulus <= 1.0 + 1e-8, "best candidate A-stable (max|R(iy)| - 1 = %.3g)",
            st.max_imag_axis_modulus - 1.0);
  const double f_best = objective_F(t, 4);
  const double f_ref = objective_F(builtin("dirk744"), 4);
  v.require(f_best <= 10.0 * f_ref, "F(best) = %.3g <= 10 F(dirk744) = %.3g (max |a_ij| %.3f)", f_best,
            10.0 * f_ref, best->max_coeff());
  return v.pass();
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    bool (*fn)();
  };
  const Entry entries[] = {
      {1, "coefficient verification", criterion1},
      {2, "A- and L-stability", criterion2},
      {3, "Prothero-Robinson convergence", criterion3},
      {4, "heat equation convergence", criterion4},
      {5, "advection convergence", criterion5},
      {6, "biharmonic convergence", criterion6},
      {7, "Burgers convergence", criterion7},
      {8, "Van der Pol order reduction", criterion8},
      {9, "property suites", criterion9},
      {10, "search pipeline (7,4,4)", criterion10},
  };
  int failed = 0;
  for (const auto& e : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = e.fn();
    } catch (const std::exception& ex) {
      std::printf("    exception: %s\n", ex.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d (%s): %s [%.1fs]\n", e.id, e.title, ok ? "PASS" : "FAIL", secs);
    std::fflush(stdout);
    failed += !ok;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
