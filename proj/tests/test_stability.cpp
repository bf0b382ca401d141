#include <random>

#include "doctest.h"
#include "dirkwso/stability.hpp"
#include "fixtures.hpp"

using namespace dirkwso;

TEST_CASE("stability function examples") {
  const Tableau be = builtin("backward_euler");
  CHECK(std::abs(stability_function(be, -1.0) - 0.5) < 1e-15);
  for (double y : {0.5, 1.0, 2.0}) {
    CHECK(std::abs(stability_function(fixtures::implicit_midpoint(), Complex(0, y))) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
  for (const auto& n : builtin_names()) CHECK(stability_function(builtin(n), 0.0) == 1.0);
  CHECK_THROWS_AS(stability_function(be, 1.0), PoleError);
}

TEST_CASE("dual formula agreement") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    for (int i = 0; i < 50; ++i) {
      const Complex z(u(rng), u(rng));
      const Complex r1 = stability_function(t, z);
      const Complex r2 = stability_function_det(t, z);
      CHECK(std::abs(r1 - r2) <= 1e-10 * std::max(1.0, std::abs(r1)));
    }
  }
}

TEST_CASE("grids") {
  const auto g = coarse_axis_grid();
  CHECK(g.size() == 128);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(1e-3));
  CHECK(g[127] == doctest::Approx(1e3));
  CHECK(fine_axis_grid().size() == 100001);
}

TEST_CASE("A- and L-stability") {
  for (const char* n : {"dirk744", "dirk1254", "dirk1255"}) {
    CAPTURE(n);
    const auto rep = check_a_stability(builtin(n), ScanMode::fine);
    CHECK(rep.a_stable);
    CHECK(rep.l_stable);
    CHECK(rep.max_imag_axis_modulus <= 1.0 + 1e-8);
    CHECK(rep.r_at_minus_inf <= 1e-10);
    CHECK(rep.sample_count == 100001);
  }
  const auto mid = check_a_stability(fixtures::implicit_midpoint(), ScanMode::fine);
  CHECK(mid.a_stable);
  CHECK_FALSE(mid.l_stable);
  CHECK(mid.r_at_minus_inf == doctest::Approx(1.0));

  const auto ee = check_a_stability(fixtures::explicit_euler(), ScanMode::coarse);
  CHECK_FALSE(ee.a_stable);
  CHECK(std::abs(stability_function(fixtures::explicit_euler(), Complex(0, 2))) ==
        doctest::Approx(std::sqrt(5.0)));

  for (const char* n : {"dirk541", "dirk551", "backward_euler"}) {
    CHECK(check_a_stability(builtin(n), ScanMode::fine).a_stable);
  }
}

TEST_CASE("stiff decay and symmetry") {
  for (const auto& n : builtin_names()) {
    const Tableau t = builtin(n);
    if (t.stiffly_accurate() && t.A().diagonal().minCoeff() > 0) {
      const double r6 = std::abs(stability_function(t, -1e6));
      const double r12 = std::abs(stability_function(t, -1e12));
      CHECK(r6 >= r12);
      CHECK(r12 <= 1e-5);
    }
    for (double y : {0.1, 1.0, 7.5, 300.0}) {
      CHECK(std::abs(stability_function(t, Complex(0, y))) ==
            doctest::Approx(std::abs(stability_function(t, Complex(0, -y)))).epsilon(1e-14));
    }
  }
}

TEST_CASE("region boundary") {
  Window w{-1.0, 3.0, -2.0, 2.0, 201, 201};
  const auto lines = region_boundary(builtin("backward_euler"), w);
  REQUIRE(!lines.empty());
  std::size_t points = 0;
  for (const auto& line : lines) {
    for (const auto& z : line) {
      CHECK(std::abs(std::abs(z - 1.0) - 1.0) < 2e-3);
      ++points;
    }
  }
  CHECK(points > 100);

  Window empty{-10.0, -8.0, -1.0, 1.0, 50, 50};
  CHECK(region_boundary(builtin("backward_euler"), empty).empty());

  Window big{-15.0, 15.0, -15.0, 15.0, 301, 301};
  const auto l744 = region_boundary(builtin("dirk744"), big);
  REQUIRE(!l744.empty());
  for (const auto& line : l744) {
    for (const auto& z : line) CHECK(z.real() > -1e-9);
  }

  const std::string csv = boundary_csv(lines);
  CHECK(csv.rfind("re,im\n", 0) == 0);
  const std::string svg = boundary_svg(lines, w);
  CHECK(svg.find("viewBox=\"-1 -2 4 4\"") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
}
