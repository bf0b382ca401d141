#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "dirkwso/integrator.hpp"

namespace dirkwso {

using Complex = std::complex<double>;

/// Finite-difference weights for the m-th derivative at x0 from nodes xs.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs, int m);

/// Centered interior stencil for (order, derivative) in {(4,1),(4,2),(6,1),(6,2),(2,4)},
/// coefficients for offsets -w..w with h = 1. Throws on unsupported pairs.
std::vector<double> stencil(int order, int derivative);

/// Nodes x_j = j / n, j = 0..n. Differentiation rows are centered where the
/// stencil fits and one-sided near the ends (one extra node for second
/// derivatives).
struct Grid1D {
  int n = 0;  // cells
  int order = 4;
  double h = 0.0;
  std::vector<double> x;  // n + 1 nodes

  Grid1D(int cells, int order);
  /// Weights for derivative `deriv` at node j: first node index and coefficients.
  std::pair<int, std::vector<double>> row(int j, int deriv) const;
  /// Derivative of a full nodal vector at every node.
  template <class S>
  VectorOf<S> differentiate(const VectorOf<S>& nodal, int deriv) const;
};

/// Operator restricted to unknown nodes [first, last] with the columns for
/// the eliminated boundary nodes kept separately.
struct ReducedOperator {
  Banded<double> interior;
  std::vector<std::pair<int, Vector>> boundary;  // node index -> column over unknowns
};

ReducedOperator reduce(const Grid1D& g, int deriv, int first, int last);

/// Chebyshev-Gauss-Lobatto points x_j = cos(pi j / (n-1)) and the
/// differentiation matrix.
struct Chebyshev {
  Vector x;
  Matrix D;
  explicit Chebyshev(int n);
};

struct ProblemOptions {
  int n = 0;       // 0 means the default for the problem
  int order = 0;   // stencil order, 0 means default
  double lambda_re = -1e4;
  double lambda_im = 0.0;
  double mu = 500.0;
};

using AnyProblem = std::variant<IvpProblem<double>, IvpProblem<Complex>>;

/// Known ids, in registry order.
const std::vector<std::string>& problem_ids();

/// Throws std::invalid_argument for unknown ids or unusable sizes.
AnyProblem make_problem(const std::string& id, const ProblemOptions& opt = {});

IvpProblem<double> prothero_robinson(double lambda, double t_end = 10.0);
IvpProblem<Complex> prothero_robinson(Complex lambda, double t_end = 10.0);
/// The smooth profile e^{-t} sin(10t) + cos(20t) and its derivative.
double pr_phi(double t);
double pr_dphi(double t);

IvpProblem<double> van_der_pol(double mu, double t_end = 10.0);

IvpProblem<double> advdiff_2d(int n);

}  // namespace dirkwso
