#include <cmath>
#include <limits>
#include <vector>

#include "ropejump/errors.hpp"
#include "ropejump/optim.hpp"

namespace ropejump {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Goldfarb-Idnani dual method on constraints written as  n_i^T x >= b_i.
//
// Invariants: G^-1 = J J^T, and for the q active normals N, J^T N = [R; 0] with R upper
// triangular. Adding or dropping a constraint restores them with Givens rotations.
class DualActiveSet {
 public:
  DualActiveSet(const MatX& G, const VecX& g, MatX normals, VecX rhs, int n_eq)
      : n_(static_cast<int>(G.rows())), N_(std::move(normals)), b_(std::move(rhs)), n_eq_(n_eq) {
    Eigen::LLT<MatX> llt(G);
    if (llt.info() != Eigen::Success) throw DomainError("QP: Hessian is not positive definite");
    MatX L = llt.matrixL();
    J_ = L.transpose().triangularView<Eigen::Upper>().solve(MatX::Identity(n_, n_));
    R_ = MatX::Zero(n_, n_);
    x_ = -J_ * (J_.transpose() * g);
  }

  QpStatus run(int max_iters) {
    const int m = static_cast<int>(N_.cols());
    std::vector<bool> active(m, false);

    for (int i = 0; i < n_eq_; ++i) {
      VecX d = J_.transpose() * N_.col(i);
      VecX z = primal_direction(d);
      VecX r = dual_direction(d);
      const double zn = z.dot(N_.col(i));
      double t = 0.0;
      if (std::abs(zn) > 1e-14) t = (b_[i] - N_.col(i).dot(x_)) / zn;
      x_ += t * z;
      for (int k = 0; k < q_; ++k) u_[k] -= t * r[k];
      if (!add_constraint(d)) return QpStatus::Infeasible;  // dependent equalities
      active_.push_back(i);
      u_.push_back(t);
      active[i] = true;
    }

    for (iterations_ = 0; iterations_ < max_iters; ++iterations_) {
      int p = -1;
      double worst = 0.0;
      for (int i = n_eq_; i < m; ++i) {
        if (active[i]) continue;
        const double s = N_.col(i).dot(x_) - b_[i];
        if (s < worst - kFeasTol * (1.0 + std::abs(b_[i]))) {
          worst = s;
          p = i;
        }
      }
      if (p < 0) return QpStatus::Optimal;

      double u_plus = 0.0;
      for (;;) {
        ++iterations_;
        if (iterations_ > max_iters) return QpStatus::Failed;
        const VecX np = N_.col(p);
        VecX d = J_.transpose() * np;
        VecX z = primal_direction(d);
        VecX r = dual_direction(d);

        double t1 = kInf;
        int k_drop = -1;
        for (int k = 0; k < q_; ++k) {
          if (active_[k] < n_eq_) continue;
          if (r[k] > kDualTol && u_[k] / r[k] < t1) {
            t1 = u_[k] / r[k];
            k_drop = k;
          }
        }
        const double zn = z.dot(np);
        const double s_p = np.dot(x_) - b_[p];
        double t2 = kInf;
        if (z.norm() > 1e-12 && zn > 1e-14) t2 = -s_p / zn;

        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) return QpStatus::Infeasible;

        if (!std::isfinite(t2)) {
          for (int k = 0; k < q_; ++k) u_[k] -= t * r[k];
          u_plus += t;
          active[active_[k_drop]] = false;
          drop_constraint(k_drop);
          continue;
        }
        x_ += t * z;
        for (int k = 0; k < q_; ++k) u_[k] -= t * r[k];
        u_plus += t;
        if (t2 <= t1) {
          if (!add_constraint(d)) return QpStatus::Failed;
          active_.push_back(p);
          u_.push_back(u_plus);
          active[p] = true;
          break;
        }
        active[active_[k_drop]] = false;
        drop_constraint(k_drop);
      }
    }
    return QpStatus::Failed;
  }

  const VecX& x() const { return x_; }
  int iterations() const { return iterations_; }

  // Multiplier per constraint in the n^T x >= b convention.
  VecX multipliers() const {
    VecX u = VecX::Zero(N_.cols());
    for (int k = 0; k < q_; ++k) u[active_[k]] = u_[k];
    return u;
  }

 private:
  VecX primal_direction(const VecX& d) const {
    return J_.rightCols(n_ - q_) * d.tail(n_ - q_);
  }

  VecX dual_direction(const VecX& d) const {
    if (q_ == 0) return VecX();
    return R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d.head(q_));
  }

  bool add_constraint(VecX& d) {
    for (int j = n_ - 1; j > q_; --j) {
      const double a = d[j - 1], b = d[j];
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h, s = b / h;
      d[j - 1] = h;
      d[j] = 0.0;
      for (int k = 0; k < n_; ++k) {
        const double t1 = J_(k, j - 1), t2 = J_(k, j);
        J_(k, j - 1) = c * t1 + s * t2;
        J_(k, j) = -s * t1 + c * t2;
      }
    }
    if (q_ >= n_ || std::abs(d[q_]) < 1e-12 * (1.0 + d.head(q_ + 1).norm())) return false;
    R_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    ++q_;
    return true;
  }

  void drop_constraint(int l) {
    for (int j = l; j < q_ - 1; ++j) R_.col(j).head(q_) = R_.col(j + 1).head(q_);
    R_.col(q_ - 1).setZero();
    active_.erase(active_.begin() + l);
    u_.erase(u_.begin() + l);
    --q_;
    for (int j = l; j < q_; ++j) {
      const double a = R_(j, j), b = R_(j + 1, j);
      if (b == 0.0) continue;
      const double h = std::hypot(a, b);
      const double c = a / h, s = b / h;
      for (int k = j; k < q_; ++k) {
        const double t1 = R_(j, k), t2 = R_(j + 1, k);
        R_(j, k) = c * t1 + s * t2;
        R_(j + 1, k) = -s * t1 + c * t2;
      }
      R_(j + 1, j) = 0.0;
      for (int k = 0; k < n_; ++k) {
        const double t1 = J_(k, j), t2 = J_(k, j + 1);
        J_(k, j) = c * t1 + s * t2;
        J_(k, j + 1) = -s * t1 + c * t2;
      }
    }
  }

  static constexpr double kFeasTol = 1e-11;
  static constexpr double kDualTol = 1e-14;

  int n_;
  MatX N_;
  VecX b_;
  int n_eq_;
  MatX J_, R_;
  VecX x_;
  int q_ = 0;
  std::vector<int> active_;
  std::vector<double> u_;
  int iterations_ = 0;
};

}  // namespace

QpResult solve_qp(const QpProblem& p) {
  const int n = static_cast<int>(p.G.rows());
  if (p.G.cols() != n || p.g.size() != n) throw DomainError("QP: G/g dimensions disagree");
  const int m_eq = static_cast<int>(p.A_eq.rows());
  const int m = static_cast<int>(p.A.rows());
  if ((m_eq && p.A_eq.cols() != n) || p.b_eq.size() != m_eq) throw DomainError("QP: A_eq/b_eq dimensions disagree");
  if ((m && p.A.cols() != n) || p.b.size() != m) throw DomainError("QP: A/b dimensions disagree");

  // Unit-norm rows in the n^T x >= b convention; zero rows are checked directly.
  MatX normals(n, m_eq + m);
  VecX rhs(m_eq + m);
  VecX scale = VecX::Ones(m_eq + m);
  for (int i = 0; i < m_eq; ++i) {
    const double s = p.A_eq.row(i).norm();
    if (s == 0.0) {
      if (std::abs(p.b_eq[i]) > 1e-12) return {QpStatus::Infeasible, {}, {}, {}, 0.0, 0};
      normals.col(i).setZero();
      rhs[i] = 0.0;
      continue;
    }
    scale[i] = s;
    normals.col(i) = p.A_eq.row(i).transpose() / s;
    rhs[i] = p.b_eq[i] / s;
  }
  for (int i = 0; i < m; ++i) {
    const double s = p.A.row(i).norm();
    const int c = m_eq + i;
    if (s == 0.0) {
      if (p.b[i] < -1e-12) return {QpStatus::Infeasible, {}, {}, {}, 0.0, 0};
      normals.col(c).setZero();
      rhs[c] = -1.0;  // trivially satisfied
      continue;
    }
    scale[c] = s;
    normals.col(c) = -p.A.row(i).transpose() / s;
    rhs[c] = -p.b[i] / s;
  }

  DualActiveSet solver(p.G, p.g, std::move(normals), std::move(rhs), m_eq);
  QpResult res;
  res.status = solver.run(50 * (n + m + m_eq) + 100);
  res.iterations = solver.iterations();
  if (res.status != QpStatus::Optimal) return res;
  res.x = solver.x();
  res.value = 0.5 * res.x.dot(p.G * res.x) + p.g.dot(res.x);
  const VecX u = solver.multipliers();
  res.lambda_eq.resize(m_eq);
  for (int i = 0; i < m_eq; ++i) res.lambda_eq[i] = -u[i] / scale[i];
  res.lambda.resize(m);
  for (int i = 0; i < m; ++i) res.lambda[i] = u[m_eq + i] / scale[m_eq + i];
  return res;
}

}  // namespace ropejump
