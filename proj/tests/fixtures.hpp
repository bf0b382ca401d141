#pragma once

#include <cmath>
#include <random>

#include "dirkwso/tableau.hpp"

namespace fixtures {

using dirkwso::Matrix;
using dirkwso::Tableau;
using dirkwso::Vector;

inline Tableau implicit_midpoint() {
  Matrix a(1, 1);
  a << 0.5;
  Vector b(1);
  b << 1.0;
  return Tableau::validate(a, b, "implicit_midpoint");
}

inline Tableau explicit_euler() {
  Matrix a = Matrix::Zero(1, 1);
  Vector b(1);
  b << 1.0;
  return Tableau::validate(a, b, "explicit_euler");
}

// Random lower-triangular tableau with entries in [-1, 1] and a positive diagonal.
inline Tableau random_dirk(std::mt19937_64& rng, int s) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < i; ++j) a(i, j) = u(rng);
    a(i, i) = 0.1 + 0.5 * std::abs(u(rng));
  }
  Vector b(s);
  for (int i = 0; i < s; ++i) b(i) = u(rng);
  return Tableau::validate(a, b, "random");
}

// Three-stage Gauss collocation (order 6, fully implicit).
inline std::pair<Matrix, Vector> gauss3() {
  const double r = std::sqrt(15.0);
  Matrix a(3, 3);
  a << 5.0 / 36, 2.0 / 9 - r / 15, 5.0 / 36 - r / 30,
       5.0 / 36 + r / 24, 2.0 / 9, 5.0 / 36 - r / 24,
       5.0 / 36 + r / 30, 2.0 / 9 + r / 15, 5.0 / 36;
  Vector b(3);
  b << 5.0 / 18, 4.0 / 9, 5.0 / 18;
  return {a, b};
}

}  // namespace fixtures
