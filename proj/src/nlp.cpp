#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ropejump/errors.hpp"
#include "ropejump/optim.hpp"

namespace ropejump {

const char* to_string(NlpStatus s) {
  switch (s) {
    case NlpStatus::Optimal: return "optimal";
    case NlpStatus::MaxIters: return "max_iters";
    case NlpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double kkt_residual(const VecX& gradient, const MatX& jacobian, const VecX& lambda,
                    const VecX& bound_multipliers) {
  VecX r = gradient + bound_multipliers;
  if (lambda.size()) r += jacobian.transpose() * lambda;
  return r.lpNorm<Eigen::Infinity>();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  VecX x;
  double f = 0.0;
  VecX g;
  VecX r;  // residuals (Gauss-Newton mode)
  bool ok = false;
};

struct Derivs {
  VecX grad;
  MatX jac;   // m x n
  MatX jac_r; // residual Jacobian, Gauss-Newton mode only
};

class Sqp {
 public:
  explicit Sqp(const NlpProblem& p) : p_(p), opt_(p.options) {
    lo_ = p.lower.size() ? p.lower : VecX::Constant(p.n, -kInf);
    hi_ = p.upper.size() ? p.upper : VecX::Constant(p.n, kInf);
    gauss_newton_ = static_cast<bool>(p.residuals);
    if (opt_.hessian == HessianMode::GaussNewton && !gauss_newton_)
      throw DomainError("NLP: Gauss-Newton Hessian requires the residual form of the objective");
    if (gauss_newton_) opt_.hessian = HessianMode::GaussNewton;
  }

  NlpResult run() {
    const int n = p_.n, m = p_.m;
    NlpResult res;
    Point cur = evaluate(clamp(p_.x0));
    if (!cur.ok) throw SolverError("NLP: objective/constraints cannot be evaluated at the initial guess");
    Derivs dv = derivatives(cur, 0);

    MatX B = MatX::Identity(n, n);
    bool first_update = true;
    double rho = opt_.penalty_initial;
    VecX lambda = VecX::Zero(m);
    VecX nu = VecX::Zero(n);
    int resets = 0;
    double damping = 1e-4;  // Levenberg term of the Gauss-Newton Hessian, relative

    res.status = NlpStatus::MaxIters;
    std::vector<double> history;  // objective after each accepted feasible step
    int iter = 0;
    for (; iter < opt_.max_iters; ++iter) {
      if (opt_.hessian == HessianMode::GaussNewton) {
        B = 2.0 * dv.jac_r.transpose() * dv.jac_r;
        const double scale = 1.0 + B.diagonal().maxCoeff();
        B.diagonal().array() += damping * scale;
      }

      Step st;
      for (int attempt = 0; attempt < 6; ++attempt) {
        st = solve_subproblem(cur, cur.g, dv, B, rho);
        if (!st.ok) break;
        const double slack = st.t.size() ? st.t.maxCoeff() : 0.0;
        if (slack <= 1e-9 * (1.0 + violation(cur)) || rho >= 1e8) break;
        rho *= 10.0;
      }
      if (!st.ok) {
        if (opt_.hessian == HessianMode::Bfgs && resets < 3) {
          B = MatX::Identity(n, n);
          first_update = true;
          ++resets;
          continue;
        }
        break;
      }
      lambda = st.lambda;
      nu = st.nu;
      const double viol = violation(cur);
      const double stat = kkt_residual(dv.grad, dv.jac, lambda, nu);
      const double step_len = st.d.lpNorm<Eigen::Infinity>();
      if (viol <= opt_.tol_feas && stat <= opt_.tol_stat) {
        res.status = NlpStatus::Optimal;
        break;
      }
      if (step_len <= opt_.tol_step * (1.0 + cur.x.lpNorm<Eigen::Infinity>())) {
        res.status = viol <= opt_.tol_feas ? NlpStatus::Optimal : NlpStatus::Infeasible;
        if (res.status == NlpStatus::Optimal && stat > opt_.tol_stat) res.status = NlpStatus::MaxIters;
        break;
      }
      const double lam_max = lambda.size() ? lambda.lpNorm<Eigen::Infinity>() : 0.0;
      rho = std::max(rho, 1.5 * lam_max + 1e-3);

      // l1 merit line search.
      const double phi0 = merit(cur, rho);
      double dphi = dv.grad.dot(st.d) - rho * positive_sum(cur.g);
      if (st.t.size()) dphi += rho * st.t.sum();
      if (opt_.hessian == HessianMode::GaussNewton || dphi >= 0.0) dphi = std::min(dphi, -0.5 * st.d.dot(B * st.d));
      double alpha = 1.0;
      Point trial;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        trial = evaluate(clamp(cur.x + alpha * st.d));
        if (trial.ok && merit(trial, rho) <= phi0 + 1e-4 * alpha * dphi) {
          accepted = true;
          break;
        }
        if (ls == 0 && trial.ok && m) {
          // Second-order correction against the Maratos effect.
          const VecX g0 = trial.g - dv.jac * st.d;
          const Step soc = solve_subproblem(cur, g0, dv, B, rho);
          if (soc.ok) {
            Point corrected = evaluate(clamp(cur.x + soc.d));
            if (corrected.ok && merit(corrected, rho) <= phi0 + 1e-4 * dphi) {
              trial = std::move(corrected);
              accepted = true;
              break;
            }
          }
        }
        alpha *= 0.5;
      }
      if (opt_.hessian == HessianMode::GaussNewton) {
        if (!accepted || alpha < 0.25) {
          damping = std::min(damping * 10.0, 1e6);
          if (!accepted && damping < 1e6) continue;
        } else if (alpha == 1.0) {
          damping = std::max(damping * 0.25, 1e-12);
        }
      }
      if (!accepted) {
        if (opt_.hessian == HessianMode::Bfgs && resets < 3) {
          B = MatX::Identity(n, n);
          first_update = true;
          ++resets;
          continue;
        }
        break;
      }

      Derivs dv_new = derivatives(trial, iter + 1);
      if (opt_.hessian == HessianMode::Bfgs) {
        const VecX s = trial.x - cur.x;
        VecX y = dv_new.grad - dv.grad;
        if (m) y += (dv_new.jac - dv.jac).transpose() * lambda;
        bfgs_update(B, s, y, first_update);
      }
      cur = std::move(trial);
      dv = std::move(dv_new);
      if (opt_.stall_window > 0) {
        if (violation(cur) <= opt_.tol_feas) {
          history.push_back(cur.f);
        } else {
          history.clear();
        }
        const int w = opt_.stall_window;
        if (static_cast<int>(history.size()) > w) {
          const double before = history[history.size() - 1 - w];
          if (before - cur.f <= opt_.stall_rtol * (1.0 + std::abs(cur.f))) {
            res.stalled = true;
            ++iter;
            break;
          }
        }
      }
    }

    res.iterations = iter;
    res.x = cur.x;
    res.objective = cur.f;
    res.constraints = cur.g;
    res.lambda = lambda;
    res.bound_multipliers = nu;
    res.gradient = dv.grad;
    res.jacobian = dv.jac;
    res.kkt_residual = kkt_residual(dv.grad, dv.jac, lambda, nu);
    res.max_violation = violation(cur);
    res.evaluations = evaluations_;
    if (res.status == NlpStatus::MaxIters && res.max_violation > opt_.tol_feas && iter < opt_.max_iters)
      res.status = NlpStatus::Infeasible;
    return res;
  }

 private:
  struct Step {
    bool ok = false;
    VecX d, t, lambda, nu;
  };

  VecX clamp(const VecX& x) const { return x.cwiseMax(lo_).cwiseMin(hi_); }

  Point evaluate(const VecX& x) {
    ++evaluations_;
    Point pt;
    pt.x = x;
    pt.g = VecX::Zero(p_.m);
    try {
      if (gauss_newton_) {
        p_.residuals(x, pt.r, pt.g);
        pt.f = pt.r.squaredNorm();
      } else {
        p_.evaluate(x, pt.f, pt.g);
      }
      if (p_.linear_cost.size()) pt.f += p_.linear_cost.dot(x);
      pt.ok = std::isfinite(pt.f) && pt.g.allFinite();
    } catch (const Error&) {
      pt.ok = false;
    }
    return pt;
  }

  Derivs derivatives(const Point& at, int iter) {
    const int n = p_.n, m = p_.m;
    Derivs dv;
    if (p_.derivatives) {
      p_.derivatives(at.x, dv.grad, dv.jac);
      if (gauss_newton_) throw DomainError("NLP: analytic derivatives with residual form unsupported");
      return dv;
    }
    dv.grad.resize(n);
    dv.jac.resize(m, n);
    if (gauss_newton_) dv.jac_r.resize(at.r.size(), n);
    for (int j = 0; j < n; ++j) {
      const double h = opt_.fd_step * std::max(1.0, std::abs(at.x[j]));
      const bool can_up = at.x[j] + h <= hi_[j];
      const bool can_down = at.x[j] - h >= lo_[j];
      VecX xp = at.x, xm = at.x;
      Point up, down;
      if (opt_.central_differences && can_up && can_down) {
        xp[j] += h;
        xm[j] -= h;
        up = evaluate(xp);
        down = evaluate(xm);
        if (up.ok && down.ok) {
          set_column(dv, j, up, down, 2.0 * h);
          continue;
        }
      }
      if (can_up) {
        xp = at.x;
        xp[j] += h;
        up = evaluate(xp);
        if (up.ok) {
          set_column(dv, j, up, at, h);
          continue;
        }
      }
      if (can_down) {
        xm = at.x;
        xm[j] -= h;
        down = evaluate(xm);
        if (down.ok) {
          set_column(dv, j, at, down, h);
          continue;
        }
      }
      std::ostringstream os;
      os << "NLP: finite differences failed for variable " << j << " at iterate " << iter
         << " (x_j = " << at.x[j] << ")";
      throw SolverError(os.str());
    }
    return dv;
  }

  void set_column(Derivs& dv, int j, const Point& a, const Point& b, double h) const {
    dv.grad[j] = (a.f - b.f) / h;
    if (p_.m) dv.jac.col(j) = (a.g - b.g) / h;
    if (gauss_newton_) dv.jac_r.col(j) = (a.r - b.r) / h;
  }

  // Elastic QP around cur.x; g0 is the constant term of the linearized constraints.
  Step solve_subproblem(const Point& cur, const VecX& g0, const Derivs& dv, const MatX& B, double rho) const {
    // Slacks are only needed when the linearization is inconsistent.
    if (Step st = solve_plain(cur, g0, dv, B); st.ok) return st;
    return solve_elastic(cur, g0, dv, B, rho);
  }

  Step solve_plain(const Point& cur, const VecX& g0, const Derivs& dv, const MatX& B) const {
    const int n = p_.n, m = p_.m;
    QpProblem qp;
    qp.G = B;
    qp.G.diagonal().array() += 1e-10 * (1.0 + B.diagonal().cwiseAbs().maxCoeff());
    qp.g = dv.grad;
    std::vector<int> up_rows, lo_rows;
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(hi_[j])) up_rows.push_back(j);
      if (std::isfinite(lo_[j])) lo_rows.push_back(j);
    }
    qp.A = MatX::Zero(m + static_cast<int>(up_rows.size() + lo_rows.size()), n);
    qp.b = VecX::Zero(qp.A.rows());
    int r = 0;
    for (int i = 0; i < m; ++i, ++r) {
      qp.A.row(r) = dv.jac.row(i);
      qp.b[r] = -g0[i];
    }
    for (int j : up_rows) {
      qp.A(r, j) = 1.0;
      qp.b[r++] = hi_[j] - cur.x[j];
    }
    for (int j : lo_rows) {
      qp.A(r, j) = -1.0;
      qp.b[r++] = cur.x[j] - lo_[j];
    }
    qp.A_eq.resize(0, n);
    qp.b_eq.resize(0);
    const QpResult sol = solve_qp(qp);
    Step st;
    if (sol.status != QpStatus::Optimal) return st;
    st.ok = true;
    st.d = sol.x;
    st.t = VecX::Zero(m);
    st.lambda = sol.lambda.head(m);
    st.nu = VecX::Zero(n);
    r = m;
    for (int j : up_rows) st.nu[j] += sol.lambda[r++];
    for (int j : lo_rows) st.nu[j] -= sol.lambda[r++];
    return st;
  }

  Step solve_elastic(const Point& cur, const VecX& g0, const Derivs& dv, const MatX& B, double rho) const {
    const int n = p_.n, m = p_.m;
    const int nv = n + m;
    QpProblem qp;
    qp.G = MatX::Zero(nv, nv);
    qp.G.topLeftCorner(n, n) = B;
    qp.G.topLeftCorner(n, n).diagonal().array() += 1e-10 * (1.0 + B.diagonal().cwiseAbs().maxCoeff());
    if (m) qp.G.bottomRightCorner(m, m).diagonal().setConstant(1e-8 * std::max(1.0, rho));
    qp.g = VecX::Zero(nv);
    qp.g.head(n) = dv.grad;
    if (m) qp.g.tail(m).setConstant(rho);

    std::vector<int> up_rows, lo_rows;
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(hi_[j])) up_rows.push_back(j);
      if (std::isfinite(lo_[j])) lo_rows.push_back(j);
    }
    const int rows = 2 * m + static_cast<int>(up_rows.size() + lo_rows.size());
    qp.A = MatX::Zero(rows, nv);
    qp.b = VecX::Zero(rows);
    int r = 0;
    for (int i = 0; i < m; ++i, ++r) {
      qp.A.row(r).head(n) = dv.jac.row(i);
      qp.A(r, n + i) = -1.0;
      qp.b[r] = -g0[i];
    }
    for (int i = 0; i < m; ++i, ++r) {
      qp.A(r, n + i) = -1.0;
      qp.b[r] = 0.0;
    }
    for (int j : up_rows) {
      qp.A(r, j) = 1.0;
      qp.b[r++] = hi_[j] - cur.x[j];
    }
    for (int j : lo_rows) {
      qp.A(r, j) = -1.0;
      qp.b[r++] = cur.x[j] - lo_[j];
    }
    qp.A_eq.resize(0, nv);
    qp.b_eq.resize(0);

    const QpResult sol = solve_qp(qp);
    Step st;
    if (sol.status != QpStatus::Optimal) return st;
    st.ok = true;
    st.d = sol.x.head(n);
    st.t = sol.x.tail(m).cwiseMax(0.0);
    st.lambda = sol.lambda.head(m);
    st.nu = VecX::Zero(n);
    r = 2 * m;
    for (int j : up_rows) st.nu[j] += sol.lambda[r++];
    for (int j : lo_rows) st.nu[j] -= sol.lambda[r++];
    return st;
  }

  static double positive_sum(const VecX& g) { return g.cwiseMax(0.0).sum(); }

  double violation(const Point& pt) const {
    return pt.g.size() ? std::max(0.0, pt.g.maxCoeff()) : 0.0;
  }

  double merit(const Point& pt, double rho) const { return pt.f + rho * positive_sum(pt.g); }

  static void bfgs_update(MatX& B, const VecX& s, VecX y, bool& first) {
    const double sy = s.dot(y);
    if (first && sy > 1e-16) {
      const double scale = y.squaredNorm() / sy;
      if (std::isfinite(scale) && scale > 0.0) B *= scale;
      first = false;
    }
    const VecX Bs = B * s;
    const double sBs = s.dot(Bs);
    if (sBs <= 1e-20) return;
    if (sy < 0.2 * sBs) {  // Powell damping keeps B positive definite
      const double theta = 0.8 * sBs / (sBs - sy);
      y = theta * y + (1.0 - theta) * Bs;
    }
    const double sy2 = s.dot(y);
    if (sy2 <= 1e-20) return;
    B += y * y.transpose() / sy2 - Bs * Bs.transpose() / sBs;
    B = 0.5 * (B + B.transpose());
  }

  const NlpProblem& p_;
  NlpOptions opt_;
  VecX lo_, hi_;
  bool gauss_newton_ = false;
  int evaluations_ = 0;
};

}  // namespace

NlpResult solve_nlp(const NlpProblem& problem) {
  if (problem.n <= 0 || problem.x0.size() != problem.n)
    throw DomainError("NLP: initial guess dimension must equal n");
  if ((problem.lower.size() && problem.lower.size() != problem.n) ||
      (problem.upper.size() && problem.upper.size() != problem.n))
    throw DomainError("NLP: bound dimensions disagree");
  if (problem.lower.size() && problem.upper.size() && (problem.lower.array() > problem.upper.array()).any())
    throw DomainError("NLP: lower bound exceeds upper bound");
  if (!problem.evaluate && !problem.residuals) throw DomainError("NLP: no objective supplied");
  Sqp sqp(problem);
  return sqp.run();
}

}  // namespace ropejump
