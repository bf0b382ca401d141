#include <complex>
#include <random>

#include "doctest.h"
#include "dirkwso/stability.hpp"
#include "dirkwso/tableau.hpp"
#include "fixtures.hpp"

using namespace dirkwso;

TEST_CASE("validate computes c as row sums") {
  Matrix a(1, 1);
  a << 1.0;
  Vector b(1);
  b << 1.0;
  const Tableau t = Tableau::validate(a, b, "be");
  CHECK(t.stages() == 1);
  CHECK(t.c()(0) == 1.0);
}

TEST_CASE("validate rejects bad input") {
  Matrix a(2, 2);
  a << 0.5, 0.1, 0.0, 0.5;
  Vector b(2);
  b << 0.5, 0.5;
  CHECK_THROWS_AS(Tableau::validate(a, b, "x"), TableauError);

  a(0, 1) = 5e-15;
  CHECK(Tableau::validate(a, b, "x").A()(0, 1) == 0.0);

  Vector b3(3);
  b3.setZero();
  CHECK_THROWS_AS(Tableau::validate(a, b3, "x"), TableauError);
  CHECK_THROWS_AS(Tableau::validate(Matrix::Zero(2, 3), b, "x"), TableauError);

  Matrix an = Matrix::Zero(2, 2);
  an(1, 0) = std::nan("");
  CHECK_THROWS_AS(Tableau::validate(an, b, "x"), TableauError);
}

TEST_CASE("built-in catalog") {
  const auto& names = builtin_names();
  for (const char* n : {"dirk744", "dirk1254", "dirk1255", "dirk541", "dirk551", "backward_euler",
                        "crank_nicolson_dirk"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
  const Tableau t744 = builtin("dirk744");
  CHECK(t744.stages() == 7);
  CHECK(t744.c()(0) == doctest::Approx(1.290066345260422e-01).epsilon(1e-15));
  CHECK(t744.b()(6) == 3.395048796261326e-01);
  CHECK(t744.stiffly_accurate());

  const Tableau t1255 = builtin("dirk1255");
  CHECK(t1255.stages() == 12);
  CHECK(t1255.A()(0, 0) == 4.113473525867655e-02);

  const Tableau be = builtin("backward_euler");
  CHECK(be.A()(0, 0) == 1.0);
  CHECK(be.b()(0) == 1.0);
  CHECK(be.origin() == Origin::builtin);

  CHECK_THROWS_AS(builtin("rk4"), TableauError);

  for (const auto& n : names) {
    const Tableau t = builtin(n);
    for (std::size_t i = 0; i < t.stages(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j <= i; ++j) sum += t.a(i, j);
      CHECK(t.c()(Eigen::Index(i)) == sum);
    }
    CHECK(!t.note().empty());
  }
}

TEST_CASE("text round trip is bit exact") {
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    const std::string text = to_text(t);
    const Tableau back = from_text(text);
    CHECK(back == t);
    CHECK(to_text(back) == text);
  }
  CHECK(to_text(builtin("backward_euler")).rfind("s 1\n", 0) == 0);
}

TEST_CASE("from_text reports line and column") {
  try {
    from_text("s 2\nlabel x\n0.5\n0.5 oops\nb 0.5 0.5\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 5);
  }
  CHECK_THROWS_AS(from_text("s 2\nlabel x\n0.5\n0.5 0.5 0.1\nb 0.5 0.5\n"), ParseError);
  CHECK_THROWS_AS(from_text("s 2\nlabel x\n0.5\n"), ParseError);
  CHECK_THROWS_AS(from_text("t 2\n"), ParseError);
  CHECK_THROWS_AS(from_text("s 1\nlabel x\n1\nb 1\nextra\n"), ParseError);

  const Tableau t = from_text("# header\ns 2\nlabel two words\n0.5\n# mid\n0 0.5\nb 0.5\n  0.5\n");
  CHECK(t.label() == "two words");
  CHECK(t.c()(1) == 0.5);
}

TEST_CASE("csv export") {
  const std::string csv = to_csv(builtin("crank_nicolson_dirk"));
  CHECK(csv.rfind("i,j,value\n", 0) == 0);
  CHECK(csv.find("2,2,5.0000000000000000e-01") != std::string::npos);
  CHECK(csv.find("b,1,5.0000000000000000e-01") != std::string::npos);
}

TEST_CASE("confluent reduction") {
  CHECK_FALSE(reduce_confluent(builtin("backward_euler")).reducible);
  CHECK_FALSE(reduce_confluent(builtin("dirk744")).reducible);

  const double g = 0.3;
  Matrix a(2, 2);
  a << g, 0, 0, g;
  Vector b(2);
  b << 0.5, 0.5;
  const auto rep = reduce_confluent(Tableau::validate(a, b, "conf"));
  REQUIRE(rep.reducible);
  CHECK(rep.r == 2);
  CHECK(rep.reduced->stages() == 1);
  CHECK(rep.reduced->A()(0, 0) == g);
  CHECK(rep.reduced->b()(0) == 1.0);
  CHECK_FALSE(reduce_confluent(*rep.reduced).reducible);
}

TEST_CASE("reduction preserves the stability function") {
  // Three stages share c = 0.4; two more follow.
  Matrix a = Matrix::Zero(5, 5);
  a(0, 0) = 0.4;
  a(1, 0) = 0.1;
  a(1, 1) = 0.3;
  a(2, 0) = -0.2;
  a(2, 1) = 0.35;
  a(2, 2) = 0.25;
  a(3, 0) = 0.2;
  a(3, 1) = 0.1;
  a(3, 2) = 0.05;
  a(3, 3) = 0.45;
  a(4, 0) = 0.15;
  a(4, 1) = -0.1;
  a(4, 2) = 0.3;
  a(4, 3) = 0.2;
  a(4, 4) = 0.35;
  Vector b(5);
  b << 0.1, 0.2, 0.15, 0.25, 0.3;
  const Tableau t = Tableau::validate(a, b, "conf5");
  const auto rep = reduce_confluent(t);
  REQUIRE(rep.reducible);
  CHECK(rep.r == 3);
  CHECK(rep.reduced->stages() == 3);
  CHECK_FALSE(reduce_confluent(*rep.reduced).reducible);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 20; ++k) {
    const Complex z(u(rng), u(rng));
    const Complex r1 = stability_function(t, z);
    const Complex r2 = stability_function(*rep.reduced, z);
    CHECK(std::abs(r1 - r2) <= 1e-12 * std::max(1.0, std::abs(r1)));
  }
}
