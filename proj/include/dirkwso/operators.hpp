#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dirkwso/kernels.hpp"

namespace dirkwso {

template <class S>
using VectorOf = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatrixOf = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x n band matrix with kl sub- and ku super-diagonals, stored by diagonal:
/// entry (i, i + d - kl) lives at diag[d * n + i].
template <class S>
class Banded {
 public:
  Banded() = default;
  Banded(Eigen::Index n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), diag_(std::size_t((kl + ku + 1) * n), S(0)) {}

  Eigen::Index size() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }
  const std::vector<S>& data() const { return diag_; }

  bool in_band(Eigen::Index i, Eigen::Index j) const { return j - i >= -kl_ && j - i <= ku_; }
  S operator()(Eigen::Index i, Eigen::Index j) const {
    return in_band(i, j) ? diag_[index(i, j)] : S(0);
  }
  S& ref(Eigen::Index i, Eigen::Index j) {
    if (!in_band(i, j)) throw std::out_of_range("entry outside the band");
    return diag_[index(i, j)];
  }

  VectorOf<S> apply(const VectorOf<S>& x) const {
    VectorOf<S> y(n_);
    if constexpr (std::is_same_v<S, double>) {
      kernels::active().band_matvec(diag_.data(), kl_, ku_, std::size_t(n_), x.data(), y.data());
    } else {
      y.setZero();
      for (int d = 0; d <= kl_ + ku_; ++d) {
        const Eigen::Index off = d - kl_;
        const Eigen::Index lo = std::max<Eigen::Index>(0, -off);
        const Eigen::Index hi = std::min<Eigen::Index>(n_, n_ - off);
        const S* dv = diag_.data() + std::size_t(d) * std::size_t(n_);
        for (Eigen::Index i = lo; i < hi; ++i) y(i) += dv[i] * x(i + off);
      }
    }
    return y;
  }

  /// this = alpha * this
  Banded& scale(S alpha) {
    for (auto& v : diag_) v *= alpha;
    return *this;
  }
  /// Row i multiplied by w(i).
  Banded& scale_rows(const VectorOf<S>& w) {
    for (int d = 0; d <= kl_ + ku_; ++d) {
      for (Eigen::Index i = 0; i < n_; ++i) diag_[std::size_t(d) * std::size_t(n_) + std::size_t(i)] *= w(i);
    }
    return *this;
  }
  Banded& add_diagonal(const VectorOf<S>& w) {
    for (Eigen::Index i = 0; i < n_; ++i) diag_[index(i, i)] += w(i);
    return *this;
  }
  /// this += alpha * other; other's band must fit inside this one.
  Banded& axpy(S alpha, const Banded& other) {
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - other.kl_);
           j <= std::min<Eigen::Index>(n_ - 1, i + other.ku_); ++j) {
        ref(i, j) += alpha * other(i, j);
      }
    }
    return *this;
  }
  Banded widened(int kl, int ku) const {
    Banded out(n_, std::max(kl, kl_), std::max(ku, ku_));
    out.axpy(S(1), *this);
    return out;
  }

  MatrixOf<S> to_dense() const {
    MatrixOf<S> m = MatrixOf<S>::Zero(n_, n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - kl_);
           j <= std::min<Eigen::Index>(n_ - 1, i + ku_); ++j) {
        m(i, j) = (*this)(i, j);
      }
    }
    return m;
  }

  template <class T>
  Banded<T> cast() const {
    Banded<T> out(n_, kl_, ku_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - kl_);
           j <= std::min<Eigen::Index>(n_ - 1, i + ku_); ++j) {
        out.ref(i, j) = T((*this)(i, j));
      }
    }
    return out;
  }

 private:
  std::size_t index(Eigen::Index i, Eigen::Index j) const {
    return std::size_t(j - i + kl_) * std::size_t(n_) + std::size_t(i);
  }

  Eigen::Index n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  std::vector<S> diag_;
};

/// LU with partial pivoting of a band matrix (column-oriented, LAPACK gbtf2 layout).
template <class S>
class BandedLU {
 public:
  explicit BandedLU(const Banded<S>& m)
      : n_(m.size()), kl_(m.kl()), ku_(m.ku()), ldab_(2 * kl_ + ku_ + 1),
        ab_(std::size_t(ldab_) * std::size_t(n_), S(0)), ipiv_(std::size_t(n_)) {
    const int kv = kl_ + ku_;
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (Eigen::Index i = std::max<Eigen::Index>(0, j - ku_);
           i <= std::min<Eigen::Index>(n_ - 1, j + kl_); ++i) {
        at(i, j) = m(i, j);
      }
    }
    Eigen::Index ju = 0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Eigen::Index km = std::min<Eigen::Index>(kl_, n_ - 1 - j);
      Eigen::Index jp = 0;
      double best = -1.0;
      for (Eigen::Index r = 0; r <= km; ++r) {
        const double v = std::abs(at(j + r, j));
        if (v > best) {
          best = v;
          jp = r;
        }
      }
      ipiv_[std::size_t(j)] = j + jp;
      if (best == 0.0) throw SingularMatrixError("band matrix is singular");
      ju = std::max(ju, std::min<Eigen::Index>(j + ku_ + jp, n_ - 1));
      if (jp != 0) {
        for (Eigen::Index c = j; c <= ju; ++c) std::swap(at(j, c), at(j + jp, c));
      }
      const S piv = at(j, j);
      for (Eigen::Index r = 1; r <= km; ++r) at(j + r, j) /= piv;
      for (Eigen::Index c = j + 1; c <= ju; ++c) {
        const S u = at(j, c);
        if (u == S(0)) continue;
        for (Eigen::Index r = 1; r <= km; ++r) at(j + r, c) -= at(j + r, j) * u;
      }
    }
    (void)kv;
  }

  VectorOf<S> solve(VectorOf<S> x) const {
    const int kv = kl_ + ku_;
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Eigen::Index p = ipiv_[std::size_t(j)];
      if (p != j) std::swap(x(j), x(p));
      const Eigen::Index km = std::min<Eigen::Index>(kl_, n_ - 1 - j);
      const S xj = x(j);
      for (Eigen::Index r = 1; r <= km; ++r) x(j + r) -= at(j + r, j) * xj;
    }
    for (Eigen::Index j = n_ - 1; j >= 0; --j) {
      x(j) /= at(j, j);
      const S xj = x(j);
      for (Eigen::Index i = std::max<Eigen::Index>(0, j - kv); i < j; ++i) x(i) -= at(i, j) * xj;
    }
    return x;
  }

 private:
  S& at(Eigen::Index i, Eigen::Index j) {
    return ab_[std::size_t(j) * std::size_t(ldab_) + std::size_t(kl_ + ku_ + i - j)];
  }
  const S& at(Eigen::Index i, Eigen::Index j) const {
    return ab_[std::size_t(j) * std::size_t(ldab_) + std::size_t(kl_ + ku_ + i - j)];
  }

  Eigen::Index n_;
  int kl_;
  int ku_;
  int ldab_;
  std::vector<S> ab_;
  std::vector<Eigen::Index> ipiv_;
};

/// Factored I - gamma * M, ready for repeated solves.
template <class S>
class ShiftedSolver {
 public:
  struct DiagonalInverse {
    VectorOf<S> inv;
  };
  /// Band LU of I - gamma M refined against the unrounded operator, with the
  /// residual accumulated in extended precision.
  struct RefinedBanded {
    BandedLU<S> lu;
    Banded<S> m;
    S gamma;
    VectorOf<S> solve(const VectorOf<S>& rhs) const;
  };
  using Impl = std::variant<DiagonalInverse, RefinedBanded, Eigen::PartialPivLU<MatrixOf<S>>>;

  explicit ShiftedSolver(Impl impl) : impl_(std::make_shared<Impl>(std::move(impl))) {}

  VectorOf<S> solve(const VectorOf<S>& rhs) const {
    return std::visit(
        [&](const auto& f) -> VectorOf<S> {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, DiagonalInverse>) {
            return f.inv.cwiseProduct(rhs);
          } else {
            return f.solve(rhs);
          }
        },
        *impl_);
  }

 private:
  std::shared_ptr<const Impl> impl_;
};

inline constexpr int kRefinementSteps = 2;

template <class S>
VectorOf<S> ShiftedSolver<S>::RefinedBanded::solve(const VectorOf<S>& rhs) const {
  using W = std::conditional_t<std::is_same_v<S, double>, long double, std::complex<long double>>;
  VectorOf<S> x = lu.solve(rhs);
  const Eigen::Index n = m.size();
  VectorOf<S> r(n);
  for (int step = 0; step < kRefinementSteps; ++step) {
    double rmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      W acc = W(0);
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - m.kl());
      const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + m.ku());
      for (Eigen::Index j = lo; j <= hi; ++j) acc += W(m(i, j)) * W(x(j));
      const W ri = W(rhs(i)) - W(x(i)) + W(gamma) * acc;
      r(i) = S(ri);
      rmax = std::max(rmax, double(std::abs(ri)));
    }
    if (rmax == 0.0) break;
    const VectorOf<S> dx = lu.solve(r);
    x += dx;
    if (dx.cwiseAbs().maxCoeff() <= 1e-17 * (1.0 + x.cwiseAbs().maxCoeff())) break;
  }
  return x;
}

/// Linear operator in one of three storage forms.
template <class S>
class Operator {
 public:
  struct Diagonal {
    VectorOf<S> d;
  };
  using Storage = std::variant<Diagonal, Banded<S>, MatrixOf<S>>;

  Operator() = default;
  static Operator diagonal(VectorOf<S> d) { return Operator(Storage(Diagonal{std::move(d)})); }
  static Operator banded(Banded<S> b) { return Operator(Storage(std::move(b))); }
  static Operator dense(MatrixOf<S> m) { return Operator(Storage(std::move(m))); }

  Eigen::Index size() const {
    return std::visit(
        [](const auto& m) -> Eigen::Index {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Diagonal>) {
            return m.d.size();
          } else if constexpr (std::is_same_v<M, Banded<S>>) {
            return m.size();
          } else {
            return m.rows();
          }
        },
        storage_);
  }

  VectorOf<S> apply(const VectorOf<S>& x) const {
    return std::visit(
        [&](const auto& m) -> VectorOf<S> {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Diagonal>) {
            return m.d.cwiseProduct(x);
          } else if constexpr (std::is_same_v<M, Banded<S>>) {
            return m.apply(x);
          } else {
            return m * x;
          }
        },
        storage_);
  }

  /// Factor I - gamma * M.
  ShiftedSolver<S> factor_shifted(S gamma) const {
    using Solver = ShiftedSolver<S>;
    return std::visit(
        [&](const auto& m) -> Solver {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Diagonal>) {
            VectorOf<S> den = VectorOf<S>::Ones(m.d.size()) - gamma * m.d;
            for (Eigen::Index i = 0; i < den.size(); ++i) {
              if (den(i) == S(0)) throw SingularMatrixError("shifted diagonal operator is singular");
            }
            return Solver(typename Solver::Impl(typename Solver::DiagonalInverse{den.cwiseInverse()}));
          } else if constexpr (std::is_same_v<M, Banded<S>>) {
            Banded<S> shifted = m;
            shifted.scale(-gamma);
            shifted.add_diagonal(VectorOf<S>::Ones(m.size()));
            return Solver(typename Solver::Impl(
                typename Solver::RefinedBanded{BandedLU<S>(shifted), m, gamma}));
          } else {
            MatrixOf<S> shifted = MatrixOf<S>::Identity(m.rows(), m.cols()) - gamma * m;
            Eigen::PartialPivLU<MatrixOf<S>> lu(shifted);
            if (lu.determinant() == S(0)) throw SingularMatrixError("shifted dense operator is singular");
            return Solver(typename Solver::Impl(std::move(lu)));
          }
        },
        storage_);
  }

  MatrixOf<S> to_dense() const {
    return std::visit(
        [](const auto& m) -> MatrixOf<S> {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Diagonal>) {
            return m.d.asDiagonal();
          } else if constexpr (std::is_same_v<M, Banded<S>>) {
            return m.to_dense();
          } else {
            return m;
          }
        },
        storage_);
  }

  const Storage& storage() const { return storage_; }

 private:
  explicit Operator(Storage s) : storage_(std::move(s)) {}
  Storage storage_;
};

}  // namespace dirkwso
