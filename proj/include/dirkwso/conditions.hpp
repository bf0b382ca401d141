#pragma once

#include <map>
#include <string>
#include <vector>

#include "dirkwso/tableau.hpp"

namespace dirkwso {

/// A condition "holds" when its residual is at most this in magnitude.
inline constexpr double kConditionTol = 1e-8;

/// Highest order whose rooted-tree conditions are encoded.
inline constexpr int kMaxTreeOrder = 6;

/// phi_{l,k} = b^T A^{l-k} c^k - k!/(l+1)!, with c^k taken componentwise.
double phi(const Matrix& a, const Vector& b, int l, int k);
double phi(const Tableau& t, int l, int k);

struct ConditionResidual {
  std::string id;  // tree_<order>_<index>
  int order = 0;
  double residual = 0.0;  // lhs - rhs
};

/// One residual per rooted tree of each order <= p (p <= 6). Orders 1..5 follow
/// the row-major layout of the classical table (T, B, S-related, additional);
/// order 6 uses the canonical enumeration of the 20 trees.
std::vector<ConditionResidual> order_residuals(const Matrix& a, const Vector& b, int p);
std::vector<ConditionResidual> order_residuals(const Tableau& t, int p);

/// Number of rooted trees of order exactly p (1, 1, 2, 4, 9, 20).
int tree_count(int p);

struct OrderReport {
  int order = 0;
  std::map<int, double> residuals_by_order;  // p -> max |residual|
  int stage_order = 0;
  int B_max = 0;
  int C_max = 0;
  int S_max = 0;
  int T_max = 0;
};

/// Families B/C/S/T are probed up to this xi.
inline constexpr int kFamilyCap = 12;

OrderReport report(const Tableau& t);

/// Sum of squares of all order-(p+1) tree residuals, 1 <= p <= 5.
double objective_F(const Matrix& a, const Vector& b, int p);
double objective_F(const Tableau& t, int p);

/// Order-condition bookkeeping for a scheme of order p and weak stage order q.
struct RetainedConditions {
  std::vector<std::string> kept_phi;       // e.g. phi_1_1, phi_2_2, ...
  std::vector<std::string> redundant_phi;  // implied by WSO q plus the kept set
  /// Full list of independent order conditions to impose: phi_0_0, the kept
  /// phi's and every non-phi tree condition through order p.
  std::vector<std::string> kept;
};

/// Valid for (p,q) in {(3,2),(3,3),(4,3),(4,4),(5,4),(5,5)}; throws otherwise.
RetainedConditions retained_conditions(int p, int q);

/// Residual of a condition id: "phi_<l>_<k>", "tree_<p>_<i>", "T<k>" (b^T A^{k-1} e - 1/k!)
/// or "B<k>" (b^T c^{k-1} - 1/k). Throws std::invalid_argument on unknown ids.
double condition_residual(const Matrix& a, const Vector& b, const std::string& id);

}  // namespace dirkwso
