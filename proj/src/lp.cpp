#include <cmath>
#include <limits>
#include <vector>

#include "ropejump/errors.hpp"
#include "ropejump/optim.hpp"

namespace ropejump {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Original variable j is x_j = offset_j + sum_k T(j, k) y_k with y >= 0.
struct VariableMap {
  VecX offset;
  MatX T;
  std::vector<std::pair<int, double>> range_rows;  // (column of y, width) for doubly bounded vars
};

VariableMap map_variables(const LpProblem& p, int n) {
  VecX lo = p.lower.size() ? p.lower : VecX::Constant(n, -kInf);
  VecX hi = p.upper.size() ? p.upper : VecX::Constant(n, kInf);
  VariableMap vm;
  vm.offset = VecX::Zero(n);
  std::vector<std::pair<int, double>> cols;  // (original var, sign)
  for (int j = 0; j < n; ++j) {
    const bool has_lo = std::isfinite(lo[j]);
    const bool has_hi = std::isfinite(hi[j]);
    if (has_lo) {
      vm.offset[j] = lo[j];
      if (has_hi) vm.range_rows.emplace_back(static_cast<int>(cols.size()), hi[j] - lo[j]);
      cols.emplace_back(j, 1.0);
    } else if (has_hi) {
      vm.offset[j] = hi[j];
      cols.emplace_back(j, -1.0);
    } else {
      cols.emplace_back(j, 1.0);
      cols.emplace_back(j, -1.0);
    }
  }
  vm.T = MatX::Zero(n, static_cast<int>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) vm.T(cols[k].first, static_cast<int>(k)) = cols[k].second;
  return vm;
}

// Dense tableau simplex on  min c^T z  s.t.  M z = r, z >= 0, r >= 0.
class Tableau {
 public:
  // One artificial column per row; the artificials form the starting basis.
  Tableau(const MatX& M, const VecX& r) : m_(static_cast<int>(M.rows())), n_(static_cast<int>(M.cols())) {
    t_ = MatX::Zero(m_, n_ + m_ + 1);
    t_.leftCols(n_) = M;
    t_.block(0, n_, m_, m_).setIdentity();
    t_.col(n_ + m_) = r;
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  int rows() const { return m_; }
  const std::vector<int>& basis() const { return basis_; }
  double rhs(int i) const { return t_(i, n_ + m_); }
  int iterations() const { return iterations_; }

  // Returns false when unbounded.
  bool optimize(const VecX& cost, const std::vector<bool>& allowed) {
    const int cols = n_ + m_;
    for (;;) {
      // Reduced costs d_j = c_j - c_B^T B^-1 a_j, with the tableau already holding B^-1 a_j.
      int enter = -1;
      for (int j = 0; j < cols; ++j) {
        if (!allowed[j] || in_basis(j)) continue;
        double d = cost[j];
        for (int i = 0; i < m_; ++i) d -= cost[basis_[i]] * t_(i, j);
        if (d < -kTol * (1.0 + std::abs(cost[j]))) {
          enter = j;
          break;  // Bland: smallest index
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a > kPivotTol) {
          const double ratio = rhs(i) / a;
          if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  void pivot(int row, int col) {
    ++iterations_;
    t_.row(row) /= t_(row, col);
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  bool in_basis(int j) const {
    for (int b : basis_) if (b == j) return true;
    return false;
  }

  double entry(int i, int j) const { return t_(i, j); }

  void drop_row(int i) {
    MatX nt(m_ - 1, t_.cols());
    nt << t_.topRows(i), t_.bottomRows(m_ - 1 - i);
    t_ = nt;
    basis_.erase(basis_.begin() + i);
    --m_;
  }

  static constexpr double kTol = 1e-11;
  static constexpr double kPivotTol = 1e-11;

 private:
  int m_, n_;
  MatX t_;
  std::vector<int> basis_;
  int iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& p) {
  const int n = static_cast<int>(p.c.size());
  const int m_ub = static_cast<int>(p.A.rows());
  const int m_eq = static_cast<int>(p.A_eq.rows());
  if ((m_ub && p.A.cols() != n) || p.b.size() != m_ub) throw DomainError("LP: A/b dimensions disagree");
  if ((m_eq && p.A_eq.cols() != n) || p.b_eq.size() != m_eq) throw DomainError("LP: A_eq/b_eq dimensions disagree");
  if ((p.lower.size() && p.lower.size() != n) || (p.upper.size() && p.upper.size() != n))
    throw DomainError("LP: bound dimensions disagree");

  const VariableMap vm = map_variables(p, n);
  const int ny = static_cast<int>(vm.T.cols());
  const int n_range = static_cast<int>(vm.range_rows.size());
  const int m_ineq = m_ub + n_range;
  const int m = m_ineq + m_eq;
  const int nz = ny + m_ineq;  // y and slacks

  MatX M = MatX::Zero(m, nz);
  VecX r(m);
  if (m_ub) {
    M.block(0, 0, m_ub, ny) = p.A * vm.T;
    r.head(m_ub) = p.b - p.A * vm.offset;
  }
  for (int k = 0; k < n_range; ++k) {
    M(m_ub + k, vm.range_rows[k].first) = 1.0;
    r[m_ub + k] = vm.range_rows[k].second;
  }
  M.block(0, ny, m_ineq, m_ineq).setIdentity();
  if (m_eq) {
    M.block(m_ineq, 0, m_eq, ny) = p.A_eq * vm.T;
    r.tail(m_eq) = p.b_eq - p.A_eq * vm.offset;
  }
  VecX sign = VecX::Ones(m);
  for (int i = 0; i < m; ++i) {
    if (r[i] < 0.0) {
      sign[i] = -1.0;
      M.row(i) *= -1.0;
      r[i] = -r[i];
    }
  }

  LpResult res;
  Tableau tab(M, r);
  const int total = nz + m;

  // Phase 1: minimize the sum of artificials.
  VecX c1 = VecX::Zero(total);
  c1.tail(m).setOnes();
  std::vector<bool> allow_all(total, true);
  tab.optimize(c1, allow_all);
  double infeas = 0.0;
  for (int i = 0; i < tab.rows(); ++i)
    if (tab.basis()[i] >= nz) infeas += tab.rhs(i);
  const double scale = 1.0 + r.lpNorm<Eigen::Infinity>();
  if (infeas > 1e-9 * scale) {
    res.status = LpStatus::Infeasible;
    res.iterations = tab.iterations();
    return res;
  }
  // Drive remaining artificials out of the basis; drop redundant rows.
  std::vector<int> row_of_original(m);
  for (int i = 0; i < m; ++i) row_of_original[i] = i;
  for (int i = 0; i < tab.rows();) {
    if (tab.basis()[i] < nz) { ++i; continue; }
    int col = -1;
    for (int j = 0; j < nz; ++j)
      if (!tab.in_basis(j) && std::abs(tab.entry(i, j)) > 1e-9) { col = j; break; }
    if (col >= 0) {
      tab.pivot(i, col);
      ++i;
    } else {
      tab.drop_row(i);
      row_of_original.erase(row_of_original.begin() + i);
    }
  }

  // Phase 2.
  VecX c2 = VecX::Zero(total);
  c2.head(ny) = vm.T.transpose() * p.c;
  std::vector<bool> allow(total, false);
  for (int j = 0; j < nz; ++j) allow[j] = true;
  const bool bounded = tab.optimize(c2, allow);
  res.iterations = tab.iterations();
  if (!bounded) {
    res.status = LpStatus::Unbounded;
    return res;
  }

  VecX z = VecX::Zero(nz);
  for (int i = 0; i < tab.rows(); ++i)
    if (tab.basis()[i] < nz) z[tab.basis()[i]] = tab.rhs(i);
  res.x = vm.offset + vm.T * z.head(ny);
  res.value = p.c.dot(res.x);
  res.status = LpStatus::Optimal;

  // Duals from the final basis: B^T y = c_B on the kept rows.
  const int mk = tab.rows();
  MatX B(mk, mk);
  VecX cB(mk);
  for (int i = 0; i < mk; ++i) {
    const int col = tab.basis()[i];
    for (int k = 0; k < mk; ++k) B(k, i) = M(row_of_original[k], col);
    cB[i] = c2[col];
  }
  VecX y_kept = VecX::Zero(mk);
  if (mk) y_kept = B.transpose().fullPivLu().solve(cB);
  VecX y = VecX::Zero(m);
  for (int k = 0; k < mk; ++k) y[row_of_original[k]] = y_kept[k];
  res.duals = VecX::Zero(m_ub);
  for (int i = 0; i < m_ub; ++i) res.duals[i] = std::max(0.0, -sign[i] * y[i]);
  res.duals_eq = VecX::Zero(m_eq);
  for (int i = 0; i < m_eq; ++i) res.duals_eq[i] = -sign[m_ineq + i] * y[m_ineq + i];
  return res;
}

}  // namespace ropejump
