#include "dirkwso/wso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dirkwso/stability.hpp"

namespace dirkwso {
namespace {

double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

int effective_k_max(const Tableau& t, int k_max) {
  const int s = static_cast<int>(t.stages());
  if (k_max <= 0) return s + 6;
  return k_max;
}

// Largest scaled |b^T A^j tau| over j < s; the scale is
// max(1, |b|_inf |A|_inf^j |tau|_inf).
double scaled_max(const Tableau& t, const Vector& tau) {
  const Matrix& a = t.A();
  const double nb = t.b().cwiseAbs().maxCoeff();
  const double na = inf_norm(a);
  const double nt = tau.cwiseAbs().maxCoeff();
  double worst = 0.0;
  double apow = 1.0;
  Vector v = tau;
  for (std::size_t j = 0; j < t.stages(); ++j) {
    const double scale = std::max(1.0, nb * apow * nt);
    worst = std::max(worst, std::abs(t.b().dot(v)) / scale);
    v = a * v;
    apow *= na;
  }
  return worst;
}

// Columns A^j tau^(k), j = 0..s-1, k = 1..q.
Matrix krylov_generators(const Tableau& t, int q) {
  const auto s = Eigen::Index(t.stages());
  Matrix g(s, s * std::max(q, 0));
  for (int k = 1; k <= q; ++k) {
    Vector v = stage_residual(t.A(), t.c(), k);
    for (Eigen::Index j = 0; j < s; ++j) {
      g.col((k - 1) * s + j) = v;
      v = t.A() * v;
    }
  }
  return g;
}

// Monic minimal polynomial of a small square matrix: smallest d for which
// B^d lies in span{I, ..., B^{d-1}}. Coefficients low to high, leading 1 implied.
Vector minimal_polynomial(const Matrix& bm, double tol) {
  const Eigen::Index r = bm.rows();
  Matrix powers(r * r, r + 1);
  Matrix p = Matrix::Identity(r, r);
  for (Eigen::Index d = 0; d <= r; ++d) {
    powers.col(d) = Eigen::Map<const Vector>(p.data(), r * r);
    p = p * bm;
  }
  for (Eigen::Index d = 1; d <= r; ++d) {
    const Matrix basis = powers.leftCols(d);
    const Vector target = powers.col(d);
    const Vector coef = basis.colPivHouseholderQr().solve(-target);
    const double resid = (basis * coef + target).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
    if (resid <= tol * scale) return coef;
  }
  return Vector();
}

std::vector<Complex> companion_roots(const Vector& coef) {
  const Eigen::Index d = coef.size();
  if (d == 0) return {};
  Matrix comp = Matrix::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  comp.col(d - 1) = -coef;
  Eigen::EigenSolver<Matrix> es(comp, false);
  std::vector<Complex> roots(es.eigenvalues().data(), es.eigenvalues().data() + d);
  std::sort(roots.begin(), roots.end(), [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return roots;
}

}  // namespace

Vector stage_residual(const Matrix& a, const Vector& c, int k) {
  if (k < 1) throw std::invalid_argument("stage residual index must be >= 1");
  Vector ck1 = Vector::Ones(c.size());
  for (int i = 0; i < k - 1; ++i) ck1 = ck1.cwiseProduct(c);
  return a * ck1 - ck1.cwiseProduct(c) / double(k);
}

StageResiduals stage_residuals(const Tableau& t, int K) {
  if (K < 1 || K > 12) throw std::invalid_argument("stage_residuals requires 1 <= K <= 12");
  StageResiduals out;
  for (int k = 1; k <= K; ++k) out.tau[k] = stage_residual(t.A(), t.c(), k);
  return out;
}

double scaled_orthogonality(const Tableau& t, int k) {
  return scaled_max(t, stage_residual(t.A(), t.c(), k));
}

KrylovReport wso_of(const Tableau& t, int K_max) {
  const int kmax = effective_k_max(t, K_max);
  KrylovReport rep;
  rep.probed_k_max = kmax;
  int q = 0;
  for (int k = 1; k <= kmax; ++k) {
    if (scaled_orthogonality(t, k) > kWsoTol) break;
    q = k;
  }
  rep.q = q == kmax ? kInfiniteWso : q;

  const Matrix gen = krylov_generators(t, q);
  for (Eigen::Index col = 0; col < gen.cols(); ++col) {
    rep.orthogonality_residual =
        std::max(rep.orthogonality_residual, std::abs(t.b().dot(gen.col(col))));
  }
  if (gen.cols() == 0) return rep;

  Eigen::JacobiSVD<Matrix> svd(gen, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cutoff = kRankCutoff * std::max(1.0, sv(0));
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  rep.dim_Kq = static_cast<int>(rank);
  if (rank == 0) return rep;

  const Matrix w = svd.matrixU().leftCols(rank);
  const Matrix bm = w.transpose() * t.A() * w;
  rep.invariance_residual = inf_norm(t.A() * w - w * bm);
  const Vector coef = minimal_polynomial(bm, 1e-8);
  rep.min_poly_degree = static_cast<int>(coef.size());
  rep.min_poly_roots = companion_roots(coef);
  return rep;
}

MinPolyCheck verify_min_poly(const Tableau& t, int q) {
  MinPolyCheck out;
  const int kq = std::min(q, static_cast<int>(t.stages()) + 6);
  const auto s = Eigen::Index(t.stages());
  const Matrix id = Matrix::Identity(s, s);
  Matrix p = t.A() - t.a(0, 0) * id;
  out.degree = 1;
  if (kq >= 4) {
    if (s < 2) throw std::invalid_argument("degree-two check needs at least two stages");
    p = p * (t.A() - t.a(1, 1) * id);
    out.degree = 2;
  }
  if (kq < 2) out.degree = 0;
  for (int k = 2; k <= kq; ++k) {
    out.residual = std::max(out.residual,
                            (p * stage_residual(t.A(), t.c(), k)).cwiseAbs().maxCoeff());
  }
  out.pass = out.residual <= kWsoTol;
  return out;
}

Complex transfer(const Tableau& t, int k, Complex z) {
  const Vector tau = stage_residual(t.A(), t.c(), k);
  const std::size_t s = t.stages();
  std::vector<Complex> x(s);
  for (std::size_t i = 0; i < s; ++i) {
    const Complex diag = 1.0 - z * t.a(i, i);
    if (std::abs(diag) < 1e-14) throw ResolventError("I - zA is singular at this z");
    Complex acc = tau(Eigen::Index(i));
    for (std::size_t j = 0; j < i; ++j) acc += z * t.a(i, j) * x[j];
    x[i] = acc / diag;
  }
  Complex out = 0.0;
  for (std::size_t i = 0; i < s; ++i) out += t.b()(Eigen::Index(i)) * x[i];
  return out;
}

Complex transfer_w(const Tableau& t, int k, Complex z) {
  const Complex r1 = stability_function(t, z) - 1.0;
  if (std::abs(r1) == 0.0) throw ResolventError("R(z) = 1; W_k is undefined");
  return double(k) * transfer(t, k, z) / r1;
}

}  // namespace dirkwso
