#include <random>

#include "doctest.h"
#include "dirkwso/conditions.hpp"
#include "dirkwso/stability.hpp"
#include "dirkwso/wso.hpp"
#include "fixtures.hpp"

using namespace dirkwso;

TEST_CASE("stage residual examples") {
  const auto be = stage_residuals(builtin("backward_euler"), 2);
  CHECK(be.tau.at(1)(0) == 0.0);
  CHECK(be.tau.at(2)(0) == doctest::Approx(0.5));

  const auto mid = stage_residuals(fixtures::implicit_midpoint(), 2);
  CHECK(mid.tau.at(2)(0) == doctest::Approx(0.125));

  const auto cn = stage_residuals(builtin("crank_nicolson_dirk"), 3);
  CHECK(cn.tau.at(2).cwiseAbs().maxCoeff() < 1e-16);
  CHECK(cn.tau.at(3)(0) == doctest::Approx(0.0));
  CHECK(cn.tau.at(3)(1) == doctest::Approx(1.0 / 6));

  CHECK_THROWS(stage_residuals(builtin("backward_euler"), 13));
  for (const auto& n : builtin_names()) {
    CHECK(stage_residuals(builtin(n), 1).tau.at(1).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("wso of simple schemes") {
  CHECK(wso_of(builtin("backward_euler")).q == 1);
  CHECK(wso_of(builtin("crank_nicolson_dirk")).q == 2);
  CHECK(wso_of(builtin("dirk541")).q == 1);
  CHECK(wso_of(builtin("dirk551")).q == 1);
  CHECK(wso_of(builtin("backward_euler")).dim_Kq == 0);
}

TEST_CASE("wso of the high weak stage order schemes") {
  const std::pair<const char*, int> cases[] = {{"dirk744", 4}, {"dirk1254", 4}, {"dirk1255", 5}};
  for (const auto& [name, q] : cases) {
    CAPTURE(name);
    const Tableau t = builtin(name);
    const KrylovReport rep = wso_of(t);
    CHECK(rep.q == q);
    CHECK(rep.dim_Kq == 2);
    CHECK(rep.min_poly_degree == 2);
    CHECK(rep.invariance_residual <= 1e-8);
    REQUIRE(rep.min_poly_roots.size() == 2);
    const double d1 = t.a(0, 0);
    const double d2 = t.a(1, 1);
    std::vector<double> expect{std::min(d1, d2), std::max(d1, d2)};
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(rep.min_poly_roots[std::size_t(i)] - expect[std::size_t(i)]) <= 1e-6);
    }
    // Roots are diagonal entries.
    for (const auto& r : rep.min_poly_roots) {
      double best = 1e300;
      for (std::size_t i = 0; i < t.stages(); ++i) best = std::min(best, std::abs(r - t.a(i, i)));
      CHECK(best <= 1e-6);
    }
    const MinPolyCheck mp = verify_min_poly(t, q);
    CHECK(mp.pass);
    CHECK(mp.degree == 2);

    // s - p + 1 - sigma >= dim K_q >= floor(q/2), sigma = 1.
    const int p = report(t).order;
    CHECK(int(t.stages()) - p >= rep.dim_Kq);
    CHECK(rep.dim_Kq >= q / 2);
  }
  CHECK(verify_min_poly(builtin("backward_euler"), 1).pass);
}

TEST_CASE("wso implies the phi equivalence") {
  for (const char* name : {"dirk744", "dirk1254", "dirk1255"}) {
    const Tableau t = builtin(name);
    const int q = wso_of(t).q;
    for (int k = 1; k <= q; ++k) {
      for (int j = 0; j + k <= 5; ++j) {
        CHECK(std::abs(phi(t, j + k, k - 1) - phi(t, j + k, k) / k) <= 1e-8);
      }
    }
  }
}

TEST_CASE("infinite weak stage order is reported at the probe limit") {
  // tau^(k) = 0 for every k when all stages sit at c = 0 with A = 0.
  Matrix a = Matrix::Zero(2, 2);
  Vector b(2);
  b << 0.5, 0.5;
  const KrylovReport rep = wso_of(Tableau::validate(a, b, "zero"));
  CHECK(rep.q == kInfiniteWso);
  CHECK(rep.probed_k_max == 8);
}

TEST_CASE("transfer function") {
  const Tableau be = builtin("backward_euler");
  CHECK(std::abs(transfer(be, 2, -1.0) - 0.25) < 1e-15);
  CHECK(std::abs(transfer(be, 1, Complex(-3, 2))) < 1e-15);
  CHECK_THROWS_AS(transfer(be, 2, 1.0), ResolventError);
  CHECK_THROWS_AS(transfer_w(be, 2, 0.0), ResolventError);
  // W_2 for backward Euler: 2 * (1/2)/(1-z) / (z/(1-z)) = 1/z.
  CHECK(std::abs(transfer_w(be, 2, Complex(-2, 1)) - 1.0 / Complex(-2, 1)) < 1e-14);

  const Tableau t = builtin("dirk1255");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Complex z(-50.0 * u(rng), 100.0 * (u(rng) - 0.5));
    CHECK(std::abs(transfer(t, 5, z)) <= 1e-8);
  }
}

TEST_CASE("transfer function three-way agreement") {
  // Vanishing at s+1 sample points, identically zero, and b^T A^j tau = 0 agree.
  for (const auto& name : builtin_names()) {
    const Tableau t = builtin(name);
    const auto s = int(t.stages());
    for (int k = 1; k <= 6; ++k) {
      CAPTURE(name);
      CAPTURE(k);
      const bool moments = scaled_orthogonality(t, k) <= kWsoTol;
      double sampled = 0.0;
      for (int i = 0; i <= s; ++i) {
        const Complex z(-0.5 - i, 0.3 * i);
        sampled = std::max(sampled, std::abs(transfer(t, k, z)));
      }
      double dense = 0.0;
      for (int i = 0; i < 40; ++i) {
        const Complex z(-20.0 + i, 7.0 - 0.35 * i);
        dense = std::max(dense, std::abs(transfer(t, k, z)));
      }
      CHECK(moments == (sampled <= 1e-8));
      CHECK(moments == (dense <= 1e-8));
    }
  }
}
