#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "dirkwso/operators.hpp"
#include "dirkwso/tableau.hpp"

namespace dirkwso {

enum class Field { real, complex };

/// u' = f(t, u) on [t0, t_end].
template <class S>
struct IvpProblem {
  using Vec = VectorOf<S>;

  /// f = L(t) u + g(t)
  struct Affine {
    std::function<Operator<S>(double)> L;
    std::function<Vec(double)> g;
    bool time_dependent = false;
  };

  std::string id;
  Vec u0;
  double t0 = 0.0;
  double t_end = 1.0;
  std::function<Vec(double, const Vec&)> rhs;
  /// Empty means finite-difference fallback.
  std::function<Operator<S>(double, const Vec&)> jacobian;
  std::optional<Affine> affine;
  std::function<Vec(double)> exact;
  std::function<Vec(double)> exact_dx;
  /// Discrete spatial derivative of a state at time t (boundary data included).
  std::function<Vec(double, const Vec&)> dx;

  Eigen::Index dim() const { return u0.size(); }
  static constexpr Field field() {
    return std::is_same_v<S, double> ? Field::real : Field::complex;
  }
};

struct StepStats {
  long steps = 0;
  long newton_iterations = 0;
  long linear_solves = 0;
  long factorizations = 0;
  long rhs_evaluations = 0;
  long rejected_solves = 0;
};

template <class S>
struct StepperState {
  double t = 0.0;
  VectorOf<S> u;
  StepStats stats;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 25;
};

class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, int stage) : std::runtime_error(what), stage_(stage) {}
  /// 1-based stage index, 0 when not tied to a stage.
  int stage() const { return stage_; }

 private:
  int stage_;
};

template <class S>
struct NewtonResult {
  VectorOf<S> x;
  int iterations = 0;
  double residual = 0.0;
};

template <class S>
double max_norm(const VectorOf<S>& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Newton iteration for residual(x) = 0. Converged when
/// |residual|_inf <= tol (1 + |x|_inf), or when an update is already that small
/// (roundoff floor of very stiff stages). Throws StepError on failure.
template <class S>
NewtonResult<S> newton_solve(const std::function<VectorOf<S>(const VectorOf<S>&)>& residual,
                             const std::function<ShiftedSolver<S>(const VectorOf<S>&)>& jacobian,
                             VectorOf<S> guess, const NewtonOptions& opt = {},
                             StepStats* stats = nullptr) {
  NewtonResult<S> out;
  out.x = std::move(guess);
  for (int it = 0;; ++it) {
    const VectorOf<S> r = residual(out.x);
    out.residual = max_norm<S>(r);
    const double scale = 1.0 + max_norm<S>(out.x);
    if (!std::isfinite(out.residual)) throw StepError("Newton iteration produced non-finite values", 0);
    if (out.residual <= opt.tol * scale) return out;
    if (it >= opt.max_iter) {
      if (stats) ++stats->rejected_solves;
      throw StepError("Newton iteration did not converge in " + std::to_string(opt.max_iter) +
                          " iterations (residual " + std::to_string(out.residual) + ")",
                      0);
    }
    const VectorOf<S> delta = jacobian(out.x).solve(r);
    if (stats) {
      ++stats->newton_iterations;
      ++stats->linear_solves;
      ++stats->factorizations;
    }
    out.x -= delta;
    ++out.iterations;
    if (max_norm<S>(delta) <= opt.tol * (1.0 + max_norm<S>(out.x))) return out;
  }
}

/// Forward-difference Jacobian, column by column.
template <class S>
Operator<S> fd_jacobian(const IvpProblem<S>& p, double t, const VectorOf<S>& u) {
  const Eigen::Index m = u.size();
  const VectorOf<S> f0 = p.rhs(t, u);
  MatrixOf<S> j(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double h = 1e-7 * std::max(1.0, std::abs(u(k)));
    VectorOf<S> up = u;
    up(k) += S(h);
    j.col(k) = (p.rhs(t, up) - f0) / S(h);
  }
  return Operator<S>::dense(std::move(j));
}

template <class S>
struct IntegrationResult {
  StepperState<S> state;
  std::optional<double> err_u;
  std::optional<double> err_ux;
};

/// Fixed-step DIRK integrator bound to one tableau and one problem.
/// Stage solves are warm-started from the previous stage value.
template <class S>
class Integrator {
 public:
  using Vec = VectorOf<S>;

  Integrator(Tableau tableau, const IvpProblem<S>& problem, NewtonOptions opt = {})
      : t_(std::move(tableau)), p_(problem), opt_(opt) {}

  /// Set false to route affine problems through the generic Newton path.
  void use_affine_fast_path(bool on) { affine_fast_ = on; }

  void step(StepperState<S>& st, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
    const std::size_t s = t_.stages();
    std::vector<Vec> F(s);
    Vec g_prev = st.u;
    Vec g;
    for (std::size_t i = 0; i < s; ++i) {
      const double ti = st.t + t_.c()(Eigen::Index(i)) * dt;
      const double aii = t_.a(i, i);
      Vec psi = st.u;
      for (std::size_t j = 0; j < i; ++j) {
        const double aij = t_.a(i, j);
        if (aij != 0.0) psi += S(dt * aij) * F[j];
      }
      if (aii == 0.0) {
        g = psi;
        F[i] = p_.rhs(ti, g);
        ++st.stats.rhs_evaluations;
      } else {
        const double gamma = dt * aii;
        try {
          g = solve_stage(ti, gamma, psi, g_prev, st.stats);
        } catch (const StepError& e) {
          throw StepError(std::string("stage ") + std::to_string(i + 1) + ": " + e.what(),
                          int(i) + 1);
        } catch (const SingularMatrixError& e) {
          throw StepError(std::string("stage ") + std::to_string(i + 1) + ": " + e.what(),
                          int(i) + 1);
        }
        F[i] = (g - psi) / S(gamma);
      }
      g_prev = g;
    }
    if (t_.stiffly_accurate()) {
      st.u = g;
    } else {
      Vec u = st.u;
      for (std::size_t j = 0; j < s; ++j) {
        const double bj = t_.b()(Eigen::Index(j));
        if (bj != 0.0) u += S(dt * bj) * F[j];
      }
      st.u = std::move(u);
    }
    st.t += dt;
    ++st.stats.steps;
  }

  IntegrationResult<S> integrate(double dt, long n_steps) {
    IntegrationResult<S> res;
    res.state.t = p_.t0;
    res.state.u = p_.u0;
    for (long n = 0; n < n_steps; ++n) {
      step(res.state, dt);
      // Re-anchor time to avoid drift over many steps.
      res.state.t = p_.t0 + double(n + 1) * dt;
    }
    if (p_.exact) res.err_u = max_norm<S>(Vec(res.state.u - p_.exact(res.state.t)));
    if (p_.exact_dx && p_.dx) {
      res.err_ux = max_norm<S>(Vec(p_.dx(res.state.t, res.state.u) - p_.exact_dx(res.state.t)));
    }
    return res;
  }

 private:
  Vec solve_stage(double ti, double gamma, const Vec& psi, const Vec& guess, StepStats& stats) {
    if (affine_fast_ && p_.affine) {
      const auto& af = *p_.affine;
      const Vec rhs = psi + S(gamma) * af.g(ti);
      ++stats.rhs_evaluations;
      ++stats.linear_solves;
      ++stats.newton_iterations;
      if (af.time_dependent) {
        ++stats.factorizations;
        return af.L(ti).factor_shifted(S(gamma)).solve(rhs);
      }
      auto it = cache_.find(gamma);
      if (it == cache_.end()) {
        ++stats.factorizations;
        if (!L_) L_ = af.L(ti);
        it = cache_.emplace(gamma, L_->factor_shifted(S(gamma))).first;
      }
      return it->second.solve(rhs);
    }
    auto residual = [&](const Vec& g) -> Vec {
      ++stats.rhs_evaluations;
      return Vec(g - psi - S(gamma) * p_.rhs(ti, g));
    };
    auto jac = [&](const Vec& g) {
      const Operator<S> J = p_.jacobian ? p_.jacobian(ti, g) : fd_jacobian(p_, ti, g);
      return J.factor_shifted(S(gamma));
    };
    return newton_solve<S>(residual, jac, guess, opt_, &stats).x;
  }

  Tableau t_;
  IvpProblem<S> p_;
  NewtonOptions opt_;
  bool affine_fast_ = true;
  std::optional<Operator<S>> L_;
  std::map<double, ShiftedSolver<S>> cache_;  // keyed by dt * a_ii
};

}  // namespace dirkwso
