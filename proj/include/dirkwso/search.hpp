#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirkwso/tableau.hpp"

namespace dirkwso {

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SearchConfig {
  int s = 7;
  int p = 4;
  int q = 4;
  int restarts = 500;
  std::uint64_t rng_seed = 1;
  double coeff_bound = 20.0;
  double eq_tol = 1e-10;
  /// Sample points y >= 0 where |R(iy)| <= 1 is imposed during the search.
  std::vector<double> cr6_samples;  // empty means the 128-point default grid
  int gn_max_iter = 50;
  double gn_tol = 1e-14;
  /// Diagonal redraws allowed inside one restart before giving up.
  int draw_attempts = 200;
  /// Random starts per row solve and for the final-row solve.
  int row_starts = 8;
  int al_outer = 15;
  int al_inner = 40;
  int opt_max_iter = 150;
  /// Draws for a_ii are uniform on (diag_lo, diag_hi) and pairwise at least diag_gap apart.
  double diag_lo = 0.01;
  double diag_hi = 1.5;
  double diag_gap = 1e-3;
  int threads = 1;

  /// Rejects q outside {4,5}, p outside {4,5}, q > p and s < p + 2.
  void validate() const;
  const std::vector<double>& samples() const;
};

struct Candidate {
  Matrix a;  // lower triangular; b is the last row
  Vector w1;
  Vector w2;
  std::vector<double> beta1;  // k = 2..q
  std::vector<double> beta2;
  double eq_residual = 0.0;
  bool feasible = false;
  double F_value = 0.0;
  bool optimizer_failed = false;
  int restart = -1;

  Vector b() const { return a.row(a.rows() - 1).transpose(); }
  double max_coeff() const { return a.cwiseAbs().maxCoeff(); }
  Tableau tableau(const std::string& label) const;
};

/// Stacked equality residual of a stiffly accurate candidate: WSO rows 3..s
/// in the eigenvector basis, b^T w1, b^T w2 and the retained order conditions.
std::vector<double> equality_residuals(const Matrix& a, int p, int q);
double equality_residual(const Matrix& a, int p, int q);

/// Closed-form rows 2 and 3 on the a11 != a22 branch: given a11, a22, a33 the
/// abscissae c2, c3 are the roots of x^2 - sigma x + pi with
///   sigma = 4 a33 (a11^2 - 5 a11 a33 + 3 a33^2) / (a11^2 - 4 a11 a33 + 2 a33^2)
///   pi    = 2 a33^2 (a11^2 - 6 a11 a33 + 6 a33^2) / (a11^2 - 4 a11 a33 + 2 a33^2)
/// and a32 = (a11-c3)(a22-a33)(a11 a33 - a11 c3 - 2 a33^2 + a33 c3)
///         / ((a11-c2)(a11 a33 - a11 c2 - 2 a33^2 + a33 c2)).
/// `root` picks which root becomes c2. Returns nothing when the roots are
/// complex or a denominator vanishes.
std::optional<Matrix> leading_block(double a11, double a22, double a33, int root);

Candidate step1a(const SearchConfig& cfg, std::mt19937_64& rng);
Candidate step1b(Candidate c, const SearchConfig& cfg);
/// Throws SearchError when the inequality constraints cannot be met.
Candidate step1c(Candidate c, const SearchConfig& cfg);
Candidate optimize_M(Candidate c, const SearchConfig& cfg);

/// Non-dominated set under (F, max |a_ij|), both minimized. Throws on empty input.
std::vector<Candidate> pareto_select(const std::vector<Candidate>& pool);

struct CandidateCheck {
  int order = 0;
  int wso = 0;
  bool stiffly_accurate = false;
  bool abscissae_nonnegative = false;
  bool diagonal_nonnegative = false;
  bool a_stable = false;
  bool irreducible = false;
  double max_imag_axis_modulus = 0.0;
  bool pass = false;
};

/// Independent verification through the conditions, wso and stability modules.
CandidateCheck verify_candidate(const Candidate& c, const SearchConfig& cfg);

struct SearchResult {
  std::vector<Candidate> pool;    // verified candidates, by restart index
  std::vector<Candidate> pareto;  // empty when the pool is empty
  int restarts_run = 0;
  std::map<std::string, int> failures;  // stage name -> count
};

/// Full pipeline. When checkpoint_dir is set, each verified candidate is
/// written there as cand_<restart>.txt (tableau text) with a .report file,
/// and restarts whose files already exist are loaded instead of recomputed.
SearchResult run_search(const SearchConfig& cfg, const std::string& checkpoint_dir = {},
                        const std::function<void(int, const std::string&)>& progress = {});

/// Text report for one candidate (used for the .report files).
std::string candidate_report(const Candidate& c, const CandidateCheck& check);

}  // namespace dirkwso
