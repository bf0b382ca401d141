#pragma once

#include <complex>
#include <limits>
#include <map>
#include <vector>

#include "dirkwso/tableau.hpp"

namespace dirkwso {

using Complex = std::complex<double>;

/// tau^(k) = A c^{k-1} - c^k / k.
Vector stage_residual(const Matrix& a, const Vector& c, int k);

struct StageResiduals {
  std::map<int, Vector> tau;  // k = 1..K
};

/// Requires 1 <= K <= 12.
StageResiduals stage_residuals(const Tableau& t, int K);

/// Marker for "b is orthogonal to every K_q that was probed".
inline constexpr int kInfiniteWso = std::numeric_limits<int>::max();

struct KrylovReport {
  int q = 0;  // kInfiniteWso when every probed k passed
  int probed_k_max = 0;
  int dim_Kq = 0;
  int min_poly_degree = 0;
  std::vector<Complex> min_poly_roots;
  /// max over j <= s-1 and k <= q of |b^T A^j tau^(k)| (absolute, unscaled).
  double orthogonality_residual = 0.0;
  /// || A W - W B ||_inf for the orthonormal basis W of K_q and B = W^T A W.
  double invariance_residual = 0.0;
};

inline constexpr double kWsoTol = 1e-8;
inline constexpr double kRankCutoff = 1e-10;

/// Weak stage order via b ⊥ K_q with j = 0..s-1 and k = 1..K_max, using the
/// scaled tolerance 1e-8 * max(1, |b|_inf |A|_inf^j |tau^(k)|_inf). The
/// default K_max of 0 means s + 6, at which point q is reported infinite.
KrylovReport wso_of(const Tableau& t, int K_max = 0);

/// Largest scaled |b^T A^j tau^(k)| / scale over j < s, for one k.
double scaled_orthogonality(const Tableau& t, int k);

struct MinPolyCheck {
  bool pass = false;
  double residual = 0.0;
  int degree = 0;
};

/// For q >= 4: max_k |(A - a11 I)(A - a22 I) tau^(k)|_inf over k = 2..q.
/// For q <= 3 the degree-one analogue (A - a11 I) tau^(k) is reported.
MinPolyCheck verify_min_poly(const Tableau& t, int q);

class ResolventError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// b^T (I - z A)^{-1} tau^(k), by forward substitution.
Complex transfer(const Tableau& t, int k, Complex z);

/// W_k(z) = k b^T (I - z A)^{-1} tau^(k) / (R(z) - 1).
Complex transfer_w(const Tableau& t, int k, Complex z);

}  // namespace dirkwso
