#include <cstdlib>
#include <random>
#include <vector>

#include "doctest.h"
#include "dirkwso/kernels.hpp"
#include "dirkwso/stability.hpp"
#include "fixtures.hpp"

using namespace dirkwso;
namespace k = dirkwso::kernels;

namespace {

std::vector<const k::Dispatch*> variants() {
  std::vector<const k::Dispatch*> out;
  for (k::Isa isa : {k::Isa::scalar, k::Isa::avx2, k::Isa::neon}) {
    if (const auto* d = k::for_isa(isa)) out.push_back(d);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar variant always present") {
  REQUIRE(k::for_isa(k::Isa::scalar) != nullptr);
  MESSAGE("active kernel: " << k::to_string(k::active().isa));
}

TEST_CASE("imag-axis modulus variants agree with the reference") {
  std::mt19937_64 rng(1);
  for (int s : {1, 2, 5, 7, 12}) {
    const Tableau t = fixtures::random_dirk(rng, s);
    const Eigen::Matrix<double, -1, -1, Eigen::RowMajor> a = t.A();
    std::vector<double> ys = fine_axis_grid(1003);
    std::vector<double> ref(ys.size());
    k::imag_axis_modulus_scalar(a.data(), t.b().data(), s, ys.data(), ref.data(), ys.size());
    for (std::size_t i = 0; i < ys.size(); i += 97) {
      const double direct = std::abs(stability_function(t, Complex(0, ys[i])));
      CHECK(ref[i] == doctest::Approx(direct).epsilon(1e-12));
    }
    for (const auto* d : variants()) {
      CAPTURE(k::to_string(d->isa));
      // odd lengths exercise the tail loop
      for (std::size_t n : {ys.size(), std::size_t(3), std::size_t(0)}) {
        std::vector<double> got(n);
        d->imag_axis_modulus(a.data(), t.b().data(), s, ys.data(), got.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == ref[i]);
      }
    }
  }
}

TEST_CASE("band matvec variants agree with a dense product") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto [kl, ku, n] : {std::tuple{2, 2, 37}, std::tuple{0, 3, 9}, std::tuple{4, 1, 5},
                           std::tuple{1, 1, 1}}) {
    std::vector<double> diag(std::size_t((kl + ku + 1) * n));
    for (auto& v : diag) v = u(rng);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = u(rng);
    std::vector<double> dense(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d <= kl + ku; ++d) {
        const int j = i + d - kl;
        if (j >= 0 && j < n) dense[std::size_t(i)] += diag[std::size_t(d * n + i)] * x[std::size_t(j)];
      }
    }
    for (const auto* d : variants()) {
      std::vector<double> y(static_cast<std::size_t>(n), 42.0);
      d->band_matvec(diag.data(), kl, ku, std::size_t(n), x.data(), y.data());
      for (int i = 0; i < n; ++i) CHECK(y[std::size_t(i)] == doctest::Approx(dense[std::size_t(i)]).epsilon(1e-14));
    }
  }
}

TEST_CASE("scalar override") {
  // The choice is latched on first use; here only the parsing contract is checked.
  const char* env = std::getenv("DIRKWSO_FORCE_SCALAR");
  if (env && std::string(env) == "1") CHECK(k::active().isa == k::Isa::scalar);
}
