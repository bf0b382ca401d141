#include "dirkwso/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dirkwso/wso.hpp"

namespace dirkwso {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Vector row_sums(const Matrix& a) { return a.rowwise().sum(); }

// Rooted tree stored as its list of subtrees; a lone node has none.
struct Tree {
  std::vector<Tree> children;

  int order() const {
    int n = 1;
    for (const auto& ch : children) n += ch.order();
    return n;
  }
  double density() const {
    double g = order();
    for (const auto& ch : children) g *= ch.density();
    return g;
  }
  // Psi(t) = prod_children (A Psi(child)), componentwise; Psi(node) = e.
  Vector stage_weights(const Matrix& a) const {
    Vector w = Vector::Ones(a.rows());
    for (const auto& ch : children) w = w.cwiseProduct(a * ch.stage_weights(a));
    return w;
  }
};

Tree node() { return Tree{}; }
Tree with(std::vector<Tree> children) { return Tree{std::move(children)}; }
// A^n applied to the given tree: n nested single-child nodes.
Tree chain(int n, Tree inner) {
  for (int i = 0; i < n; ++i) inner = with({std::move(inner)});
  return inner;
}
Tree bushy(int k) { return with(std::vector<Tree>(std::size_t(k), node())); }

// Classical table layout for orders 1..5, read left to right, top to bottom.
std::vector<Tree> tabulated_trees(int p) {
  const Tree t = node();
  const Tree c = bushy(1);  // c = A e
  switch (p) {
    case 1:
      return {t};
    case 2:
      return {c};
    case 3:
      return {chain(1, c), bushy(2)};
    case 4:
      return {chain(2, c), bushy(3), chain(1, bushy(2)), with({t, c})};
    case 5:
      return {chain(3, c),            // b^T A^4 e
              bushy(4),               // b^T c^4
              chain(2, bushy(2)),     // b^T A^2 c^2
              with({t, t, c}),        // b^T C^2 A c
              with({t, bushy(2)}),    // b^T C A c^2
              chain(1, bushy(3)),     // b^T A c^3
              with({t, chain(1, c)}), // b^T C A^2 c
              chain(1, with({t, c})), // b^T A C A c
              with({c, c})};          // b^T D A c
    default:
      break;
  }
  throw std::invalid_argument("no tabulated trees of order " + std::to_string(p));
}

// Canonical enumeration: children listed as non-increasing indices into the
// global list of smaller trees.
const std::vector<std::vector<Tree>>& enumerated_trees() {
  static const std::vector<std::vector<Tree>> by_order = [] {
    std::vector<std::vector<Tree>> out(kMaxTreeOrder + 1);
    std::vector<std::pair<int, Tree>> all;  // (order, tree) in generation order
    out[1].push_back(node());
    all.emplace_back(1, node());
    for (int n = 2; n <= kMaxTreeOrder; ++n) {
      std::vector<std::size_t> picked;
      auto recurse = [&](auto&& self, int remaining, std::size_t max_index) -> void {
        if (remaining == 0) {
          std::vector<Tree> ch;
          for (auto idx : picked) ch.push_back(all[idx].second);
          out[std::size_t(n)].push_back(with(std::move(ch)));
          return;
        }
        for (std::size_t idx = max_index + 1; idx-- > 0;) {
          if (all[idx].first > remaining) continue;
          picked.push_back(idx);
          self(self, remaining - all[idx].first, idx);
          picked.pop_back();
        }
      };
      recurse(recurse, n - 1, all.size() - 1);
      for (const auto& tr : out[std::size_t(n)]) all.emplace_back(n, tr);
    }
    return out;
  }();
  return by_order;
}

const std::vector<Tree>& trees_of_order(int p) {
  static const std::vector<std::vector<Tree>> table = [] {
    std::vector<std::vector<Tree>> out(kMaxTreeOrder + 1);
    for (int q = 1; q <= 5; ++q) out[std::size_t(q)] = tabulated_trees(q);
    out[6] = enumerated_trees()[6];
    return out;
  }();
  if (p < 1 || p > kMaxTreeOrder) throw std::invalid_argument("tree order out of range");
  return table[std::size_t(p)];
}

Vector cpow(const Vector& c, int k) {
  Vector out = Vector::Ones(c.size());
  for (int i = 0; i < k; ++i) out = out.cwiseProduct(c);
  return out;
}

double tree_residual(const Matrix& a, const Vector& b, const Tree& tr) {
  return b.dot(tr.stage_weights(a)) - 1.0 / tr.density();
}

}  // namespace

double phi(const Matrix& a, const Vector& b, int l, int k) {
  if (k < 0 || k > l) throw std::invalid_argument("phi requires 0 <= k <= l");
  Vector v = cpow(row_sums(a), k);
  for (int i = 0; i < l - k; ++i) v = a * v;
  return b.dot(v) - factorial(k) / factorial(l + 1);
}

double phi(const Tableau& t, int l, int k) { return phi(t.A(), t.b(), l, k); }

int tree_count(int p) { return static_cast<int>(trees_of_order(p).size()); }

std::vector<ConditionResidual> order_residuals(const Matrix& a, const Vector& b, int p) {
  if (p < 1 || p > kMaxTreeOrder) throw std::invalid_argument("order must be in 1..6");
  std::vector<ConditionResidual> out;
  for (int q = 1; q <= p; ++q) {
    const auto& trees = trees_of_order(q);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      out.push_back({"tree_" + std::to_string(q) + "_" + std::to_string(i + 1), q,
                     tree_residual(a, b, trees[i])});
    }
  }
  return out;
}

std::vector<ConditionResidual> order_residuals(const Tableau& t, int p) {
  return order_residuals(t.A(), t.b(), p);
}

OrderReport report(const Tableau& t) {
  OrderReport rep;
  const auto residuals = order_residuals(t, kMaxTreeOrder);
  for (const auto& r : residuals) {
    auto& slot = rep.residuals_by_order[r.order];
    slot = std::max(slot, std::abs(r.residual));
  }
  for (int p = 1; p <= kMaxTreeOrder; ++p) {
    if (rep.residuals_by_order[p] > kConditionTol) break;
    rep.order = p;
  }

  const Matrix& a = t.A();
  const Vector& b = t.b();
  const Vector& c = t.c();

  for (int k = 1; k <= kFamilyCap; ++k) {
    if (std::abs(b.dot(cpow(c, k - 1)) - 1.0 / k) > kConditionTol) break;
    rep.B_max = k;
  }
  for (int k = 1; k <= kFamilyCap; ++k) {
    if (stage_residual(a, c, k).cwiseAbs().maxCoeff() > kConditionTol) break;
    rep.C_max = k;
  }
  for (int k = 1; k <= kFamilyCap; ++k) {
    Vector v = Vector::Ones(b.size());
    for (int i = 0; i < k - 1; ++i) v = a * v;
    if (std::abs(b.dot(v) - 1.0 / factorial(k)) > kConditionTol) break;
    rep.T_max = k;
  }
  // S(xi): b^T A^j tau^(k) = 0 for k >= 1, j + k < xi. S(1) is vacuous.
  rep.S_max = 1;
  for (int xi = 2; xi <= kFamilyCap; ++xi) {
    bool holds = true;
    for (int k = 1; k < xi && holds; ++k) {
      Vector v = stage_residual(a, c, k);
      for (int j = 0; j + k < xi; ++j) {
        if (std::abs(b.dot(v)) > kConditionTol) {
          holds = false;
          break;
        }
        v = a * v;
      }
    }
    if (!holds) break;
    rep.S_max = xi;
  }
  rep.stage_order = std::min(rep.B_max, rep.C_max);
  return rep;
}

double objective_F(const Matrix& a, const Vector& b, int p) {
  if (p < 1 || p > 5) throw std::invalid_argument("objective_F requires 1 <= p <= 5");
  double sum = 0.0;
  for (const auto& tr : trees_of_order(p + 1)) {
    const double r = tree_residual(a, b, tr);
    sum += r * r;
  }
  return sum;
}

double objective_F(const Tableau& t, int p) { return objective_F(t.A(), t.b(), p); }

RetainedConditions retained_conditions(int p, int q) {
  static const std::vector<std::pair<int, int>> rows = {{3, 2}, {3, 3}, {4, 3},
                                                        {4, 4}, {5, 4}, {5, 5}};
  if (std::find(rows.begin(), rows.end(), std::pair{p, q}) == rows.end()) {
    throw std::invalid_argument("(p,q) = (" + std::to_string(p) + "," + std::to_string(q) +
                                ") is not tabulated");
  }
  auto phi_id = [](int l, int k) { return "phi_" + std::to_string(l) + "_" + std::to_string(k); };
  RetainedConditions out;
  for (int l = 1; l <= p - 1; ++l) out.kept_phi.push_back(phi_id(l, l));
  // Table order: first the subdiagonal phi_{l,l-1}, then phi_{l,l-2}, ...
  for (int d = 1; d <= p - 2; ++d) {
    for (int l = d + 1; l <= p - 1; ++l) out.redundant_phi.push_back(phi_id(l, l - d));
  }
  out.kept.push_back(phi_id(0, 0));
  out.kept.insert(out.kept.end(), out.kept_phi.begin(), out.kept_phi.end());
  // Non-phi trees of the classical table: the "additional" column.
  if (p >= 4) out.kept.push_back("tree_4_4");
  if (p >= 5) {
    for (int i : {4, 5, 7, 8, 9}) out.kept.push_back("tree_5_" + std::to_string(i));
  }
  return out;
}

double condition_residual(const Matrix& a, const Vector& b, const std::string& id) {
  auto bad = [&] { return std::invalid_argument("unknown condition id '" + id + "'"); };
  int x = 0;
  int y = 0;
  char tail = 0;
  if (std::sscanf(id.c_str(), "phi_%d_%d%c", &x, &y, &tail) == 2) {
    if (x < 0 || y < 0 || y > x) throw bad();
    return phi(a, b, x, y);
  }
  if (std::sscanf(id.c_str(), "tree_%d_%d%c", &x, &y, &tail) == 2) {
    if (x < 1 || x > kMaxTreeOrder) throw bad();
    const auto& trees = trees_of_order(x);
    if (y < 1 || y > static_cast<int>(trees.size())) throw bad();
    return tree_residual(a, b, trees[std::size_t(y - 1)]);
  }
  if (std::sscanf(id.c_str(), "T%d%c", &x, &tail) == 1 && x >= 1) {
    Vector v = Vector::Ones(b.size());
    for (int i = 0; i < x - 1; ++i) v = a * v;
    return b.dot(v) - 1.0 / factorial(x);
  }
  if (std::sscanf(id.c_str(), "B%d%c", &x, &tail) == 1 && x >= 1) {
    return b.dot(cpow(row_sums(a), x - 1)) - 1.0 / x;
  }
  throw bad();
}

}  // namespace dirkwso
