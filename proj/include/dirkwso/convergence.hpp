#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dirkwso/integrator.hpp"
#include "dirkwso/problems.hpp"
#include "dirkwso/tableau.hpp"

namespace dirkwso {

struct ConvergenceRow {
  double dt = 0.0;
  long steps = 0;
  std::optional<double> err_u;
  std::optional<double> err_ux;
  StepStats stats;
  std::string failure;  // empty on success
};

enum class ErrorKind { u, ux };

struct FitWindow {
  double dt_lo = 0.0;
  double dt_hi = 0.0;
  std::optional<double> slope_u;
  std::optional<double> slope_ux;
  std::string label() const;
};

struct ConvergenceTable {
  std::string scheme;
  std::string problem;
  std::vector<ConvergenceRow> rows;  // dt descending
  std::vector<FitWindow> windows;
  /// Rows whose error is at or below 10 * floor are excluded from fits.
  double error_floor = 0.0;
  /// Floor for err_ux; negative means "same as error_floor".
  double error_floor_ux = -1.0;
  double floor_for(ErrorKind kind) const {
    return kind == ErrorKind::ux && error_floor_ux >= 0.0 ? error_floor_ux : error_floor;
  }
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepOptions {
  NewtonOptions newton;
  bool affine_fast_path = true;
  double error_floor = 0.0;
  double error_floor_ux = -1.0;
  std::vector<std::pair<double, double>> windows;
  /// Replaces exact(T) when set (reference solutions).
  std::optional<Vector> reference;
  /// Rows run concurrently; 0 means default_threads().
  int threads = 0;
};

/// n_steps = round(T / dt); throws std::invalid_argument when that is off by
/// more than 1e-12 relative.
long step_count(double span, double dt);

ConvergenceTable sweep(const Tableau& t, const AnyProblem& problem, std::vector<double> dts,
                       const SweepOptions& opt = {});

/// Least-squares slope of log(err) against log(dt).
double fit_slope(const std::vector<double>& dts, const std::vector<double>& errs);

/// Fit over rows with dt in [lo, hi] (inclusive up to 1e-12 relative) and
/// err > 10 * floor. Throws FitError when fewer than three rows qualify.
double fit_slope(const ConvergenceTable& table, double lo, double hi, ErrorKind kind);

/// Largest and smallest dt surviving the floor mask; slope over all of them.
double fit_slope_above_floor(const ConvergenceTable& table, ErrorKind kind);

/// Fills slope_u / slope_ux for every window where a fit is possible.
void fit_windows(ConvergenceTable& table);

/// Header "dt,err_u,err_ux,slope_window" followed by one line per row; the
/// scheme, problem, window slopes and solver statistics follow as '#' lines.
/// With plotdata the numeric columns are log10 values.
std::string to_csv(const ConvergenceTable& table, bool plotdata = false);
ConvergenceTable parse_csv(const std::string& text);
void emit(const ConvergenceTable& table, const std::string& path, bool plotdata = false);

/// dt_k = base * 2^-k for k = k_lo..k_hi.
std::vector<double> halving(double base, int k_lo, int k_hi);

/// Classical RK4 from t0 to t_end with n steps.
Vector rk4(const IvpProblem<double>& p, long n);

/// Reference solution at T for van der Pol by RK4 at dt = 1e-6, cached as a
/// text file in cache_dir (created if missing). Empty cache_dir disables caching.
Vector van_der_pol_reference(double mu, double t_end, const std::string& cache_dir);

}  // namespace dirkwso
