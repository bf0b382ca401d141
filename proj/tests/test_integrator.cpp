#include <cmath>
#include <random>

#include "doctest.h"
#include "dirkwso/integrator.hpp"
#include "dirkwso/problems.hpp"
#include "dirkwso/stability.hpp"
#include "fixtures.hpp"

using namespace dirkwso;

namespace {

template <class S>
IvpProblem<S> linear_scalar(S lambda) {
  IvpProblem<S> p;
  p.id = "linear_scalar";
  p.u0 = VectorOf<S>::Constant(1, S(1.0));
  p.rhs = [lambda](double, const VectorOf<S>& u) { return VectorOf<S>(lambda * u); };
  p.jacobian = [lambda](double, const VectorOf<S>&) {
    return Operator<S>::dense(MatrixOf<S>::Constant(1, 1, lambda));
  };
  return p;
}

// u' = k t^(k-1), u(0) = 0, so u(t) = t^k.
IvpProblem<double> monomial(int k) {
  IvpProblem<double> p;
  p.id = "monomial";
  p.u0 = Vector::Constant(1, k == 0 ? 1.0 : 0.0);
  p.rhs = [k](double t, const Vector&) {
    return Vector::Constant(1, k == 0 ? 0.0 : k * std::pow(t, k - 1));
  };
  p.jacobian = [](double, const Vector&) { return Operator<double>::dense(Matrix::Zero(1, 1)); };
  p.exact = [k](double t) { return Vector::Constant(1, std::pow(t, k)); };
  return p;
}

}  // namespace

TEST_CASE("one step on u' = lambda u reproduces R(lambda dt)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-50.0, 0.0);
  std::uniform_real_distribution<double> im(-20.0, 20.0);
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    CAPTURE(n);
    for (int i = 0; i < 10; ++i) {
      const double dt = 0.1;
      const double lr = re(rng);
      {
        Integrator<double> integ(t, linear_scalar(lr));
        StepperState<double> st{0.0, Vector::Constant(1, 1.0), {}};
        integ.step(st, dt);
        const double r = stability_function(t, Complex(lr * dt, 0.0)).real();
        CHECK(std::abs(st.u(0) - r) <= 1e-12 * std::max(1.0, std::abs(r)));
      }
      {
        const Complex lc(lr, im(rng));
        Integrator<Complex> integ(t, linear_scalar(lc));
        StepperState<Complex> st{0.0, VectorOf<Complex>::Constant(1, 1.0), {}};
        integ.step(st, dt);
        const Complex r = stability_function(t, lc * dt);
        CHECK(std::abs(st.u(0) - r) <= 1e-12 * std::max(1.0, std::abs(r)));
      }
    }
  }
}

TEST_CASE("polynomial solutions are integrated exactly through the order") {
  const std::vector<std::pair<const char*, int>> schemes = {
      {"dirk744", 4}, {"dirk1254", 5}, {"dirk1255", 5}, {"dirk541", 4}, {"dirk551", 5},
      {"backward_euler", 1}, {"crank_nicolson_dirk", 2}};
  for (const auto& [name, p] : schemes) {
    CAPTURE(name);
    for (int k = 0; k <= p; ++k) {
      CAPTURE(k);
      Integrator<double> integ(builtin(name), monomial(k));
      const auto res = integ.integrate(0.25, 4);
      REQUIRE(res.err_u);
      CHECK(*res.err_u <= 1e-12);
    }
  }
  // One degree beyond the order is not exact.
  Integrator<double> integ(builtin("backward_euler"), monomial(2));
  CHECK(*integ.integrate(0.25, 4).err_u > 1e-3);
}

TEST_CASE("affine fast path and Newton path agree on the heat equation") {
  ProblemOptions opt;
  opt.n = 200;
  const auto p = std::get<IvpProblem<double>>(make_problem("heat", opt));
  for (const char* n : {"dirk744", "dirk1255"}) {
    Integrator<double> fast(builtin(n), p);
    Integrator<double> slow(builtin(n), p);
    slow.use_affine_fast_path(false);
    StepperState<double> a{0.0, p.u0, {}};
    StepperState<double> b{0.0, p.u0, {}};
    fast.step(a, 0.01);
    slow.step(b, 0.01);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.u.cwiseAbs().maxCoeff()));
    CHECK(a.stats.factorizations <= b.stats.factorizations);
  }
}

TEST_CASE("stiffly accurate scheme damps an infinitely stiff mode") {
  Integrator<double> integ(builtin("dirk744"), linear_scalar(-1e12));
  StepperState<double> st{0.0, Vector::Constant(1, 1.0), {}};
  integ.step(st, 1.0);
  CHECK(std::abs(st.u(0)) <= 1e-10);
}

TEST_CASE("Newton failure is reported with its stage") {
  IvpProblem<double> p;
  p.id = "blowup";
  p.u0 = Vector::Constant(1, 1.0);
  p.rhs = [](double, const Vector& u) { return Vector(u.array().exp() * 1e3); };
  p.jacobian = [](double, const Vector&) { return Operator<double>::dense(Matrix::Zero(1, 1)); };
  Integrator<double> integ(builtin("backward_euler"), p, NewtonOptions{1e-12, 3});
  StepperState<double> st{0.0, p.u0, {}};
  try {
    integ.step(st, 1.0);
    FAIL("expected StepError");
  } catch (const StepError& e) {
    CHECK(e.stage() == 1);
  }
  CHECK_THROWS_AS(integ.step(st, -1.0), std::invalid_argument);
}

TEST_CASE("finite-difference Jacobian fallback") {
  IvpProblem<double> p;
  p.id = "logistic";
  p.u0 = Vector::Constant(1, 0.5);
  p.rhs = [](double, const Vector& u) { return Vector(u.array() * (1.0 - u.array())); };
  p.exact = [](double t) { return Vector::Constant(1, 1.0 / (1.0 + std::exp(-t))); };
  Integrator<double> integ(builtin("dirk744"), p);
  const auto coarse = integ.integrate(0.1, 10);
  const auto fine = integ.integrate(0.05, 20);
  REQUIRE(coarse.err_u);
  CHECK(*coarse.err_u < 1e-6);
  CHECK(*fine.err_u < *coarse.err_u / 8);
}
