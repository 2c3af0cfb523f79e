#pragma once

#include <functional>
#include <string>

#include "ropejump/types.hpp"

namespace ropejump {

// ---------------------------------------------------------------------------
// Linear programming
// ---------------------------------------------------------------------------

enum class LpStatus { Optimal, Unbounded, Infeasible };
const char* to_string(LpStatus s);

/// minimize c^T x  s.t.  A x <= b,  A_eq x = b_eq,  lower <= x <= upper.
///
/// Empty A_eq/b_eq means no equality rows. Empty lower/upper means free variables;
/// individual entries may be +-infinity.
struct LpProblem {
  VecX c;
  MatX A;
  VecX b;
  MatX A_eq;
  VecX b_eq;
  VecX lower;
  VecX upper;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  VecX x;
  double value = 0.0;
  VecX duals;     // >= 0, one per row of A, with c + A^T duals + A_eq^T duals_eq + (bound terms) = 0
  VecX duals_eq;  // one per row of A_eq
  int iterations = 0;
};

/// Dense two-phase simplex with Bland's anti-cycling rule.
LpResult solve_lp(const LpProblem& problem);

// ---------------------------------------------------------------------------
// Strictly convex quadratic programming
// ---------------------------------------------------------------------------

enum class QpStatus { Optimal, Infeasible, Failed };

/// minimize 1/2 x^T G x + g^T x  s.t.  A_eq x = b_eq,  A x <= b.  G must be positive definite.
struct QpProblem {
  MatX G;
  VecX g;
  MatX A_eq;
  VecX b_eq;
  MatX A;
  VecX b;
};

struct QpResult {
  QpStatus status = QpStatus::Failed;
  VecX x;
  VecX lambda;     // >= 0 per row of A; G x + g + A^T lambda + A_eq^T lambda_eq = 0
  VecX lambda_eq;
  double value = 0.0;
  int iterations = 0;
};

/// Goldfarb-Idnani dual active-set method.
QpResult solve_qp(const QpProblem& problem);

// ---------------------------------------------------------------------------
// Smooth nonlinear programming
// ---------------------------------------------------------------------------

enum class NlpStatus { Optimal, MaxIters, Infeasible };
const char* to_string(NlpStatus s);

enum class HessianMode {
  Bfgs,         // damped BFGS on the Lagrangian
  GaussNewton,  // 2 J^T J from the residual form of the objective
};

struct NlpOptions {
  double tol_stat = 1e-6;   // stationarity, infinity norm of the Lagrangian gradient
  double tol_feas = 1e-8;   // max constraint / bound violation
  double tol_step = 1e-10;  // relative step length treated as converged
  int max_iters = 200;
  double fd_step = 1e-6;    // relative finite-difference step
  bool central_differences = true;
  HessianMode hessian = HessianMode::Bfgs;
  double penalty_initial = 10.0;  // l1 merit / elastic penalty weight
  int stall_window = 15;          // iterations; 0 disables the stall test
  double stall_rtol = 1e-7;       // relative objective decrease over the window counted as stalled
};

/// minimize f(x) + c^T x  s.t.  g(x) <= 0,  lower <= x <= upper.
///
/// `evaluate` fills the objective and the m constraint values. When `residuals` is set the
/// objective is the sum of squares of the residual vector and `evaluate` is not used for f;
/// this enables a Levenberg-damped Gauss-Newton Hessian. The optional linear term c
/// (`linear_cost`) is added in both modes. Gradients come from `derivatives` when provided,
/// otherwise from finite differences.
struct NlpProblem {
  int n = 0;
  int m = 0;
  std::function<void(const VecX& x, double& f, VecX& g)> evaluate;
  std::function<void(const VecX& x, VecX& r, VecX& g)> residuals;
  std::function<void(const VecX& x, VecX& grad, MatX& jac)> derivatives;
  VecX linear_cost;
  VecX lower;
  VecX upper;
  VecX x0;
  NlpOptions options;
};

struct NlpResult {
  NlpStatus status = NlpStatus::MaxIters;
  VecX x;
  double objective = 0.0;
  VecX constraints;       // g(x)
  VecX lambda;            // >= 0, one per constraint
  VecX bound_multipliers; // > 0 for an active upper bound, < 0 for an active lower bound
  VecX gradient;          // objective gradient at x
  MatX jacobian;          // constraint Jacobian at x
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool stalled = false;   // stopped early: feasible, objective no longer improving (status MaxIters)
};

/// ||grad + J^T lambda + bound_multipliers||_inf
double kkt_residual(const VecX& gradient, const MatX& jacobian, const VecX& lambda,
                    const VecX& bound_multipliers);

/// SQP with an elastic QP subproblem and an l1 merit line search.
///
/// Throws SolverError when the problem cannot be evaluated at the initial guess or when
/// derivatives cannot be formed at an iterate.
NlpResult solve_nlp(const NlpProblem& problem);

}  // namespace ropejump
