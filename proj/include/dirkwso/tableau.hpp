#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dirkwso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class TableauError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by from_text; carries the 1-based position of the offending token.
class ParseError : public TableauError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class Origin { builtin, file, search };

const char* to_string(Origin origin);

/// Butcher tableau of a diagonally implicit Runge-Kutta scheme.
///
/// Immutable once built. The abscissae are always the row sums of A, so
/// c = A e holds exactly as computed; there is no way to supply c.
class Tableau {
 public:
  /// Checks shape, finiteness and lower-triangularity (strict upper entries
  /// must be below 1e-14 in magnitude; they are then stored as exact zeros).
  static Tableau validate(const Matrix& raw_a, const Vector& raw_b, std::string label,
                          Origin origin = Origin::file, std::string note = {});

  std::size_t stages() const { return static_cast<std::size_t>(b_.size()); }
  const Matrix& A() const { return a_; }
  const Vector& b() const { return b_; }
  const Vector& c() const { return c_; }
  double a(std::size_t i, std::size_t j) const { return a_(Eigen::Index(i), Eigen::Index(j)); }

  const std::string& label() const { return label_; }
  Origin origin() const { return origin_; }
  /// Free-form provenance note (reference the coefficients were transcribed from, etc.)
  const std::string& note() const { return note_; }

  /// Last row of A equals b bit-for-bit.
  bool stiffly_accurate() const;
  double max_abs_coefficient() const;

  friend bool operator==(const Tableau& lhs, const Tableau& rhs);

 private:
  Tableau() = default;

  Matrix a_;
  Vector b_;
  Vector c_;
  std::string label_;
  Origin origin_ = Origin::file;
  std::string note_;
};

/// Names accepted by builtin(), in catalog order.
const std::vector<std::string>& builtin_names();

/// Built-in catalog; throws TableauError for unknown names.
Tableau builtin(std::string_view name);

struct ReductionReport {
  bool reducible = false;
  /// Number of leading confluent stages merged into one (0 when irreducible).
  std::size_t r = 0;
  std::optional<Tableau> reduced;
};

/// Tolerance used when comparing abscissae for confluence.
inline constexpr double kConfluenceTol = 1e-12;

/// Detects a leading block of r >= 2 stages sharing one abscissa and, if
/// present, merges them into a single stage (a*_21 = A_21 e, b*_1 = b_1^T e).
ReductionReport reduce_confluent(const Tableau& t);

/// Line-oriented text form: "s <n>", "label <text>", n rows of A (row i has
/// i entries), then "b" and n weights. Lines starting with '#' are comments.
std::string to_text(const Tableau& t);
Tableau from_text(std::string_view text);

/// "i,j,value" rows for the lower triangle of A (1-based), then b as "b,j,value".
std::string to_csv(const Tableau& t);

}  // namespace dirkwso
