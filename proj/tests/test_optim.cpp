#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "ropejump/errors.hpp"
#include "ropejump/optim.hpp"

using namespace ropejump;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

VecX vec(std::initializer_list<double> v) {
  VecX out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("LP: textbook maximization") {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18, x, y >= 0  ->  (2, 6), value 36.
  LpProblem lp;
  lp.c = vec({-3, -5});
  lp.A.resize(3, 2);
  lp.A << 1, 0, 0, 2, 3, 2;
  lp.b = vec({4, 12, 18});
  lp.lower = VecX::Zero(2);
  lp.upper = VecX::Constant(2, kInf);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(6.0));
  CHECK(r.value == doctest::Approx(-36.0));
  CHECK(r.duals.minCoeff() >= -1e-12);
  // Complementary slackness on the inequality rows.
  const VecX slack = lp.b - lp.A * r.x;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(slack[i] * r.duals[i]) <= 1e-9);
}

TEST_CASE("LP: equality rows, free variables, infeasible and unbounded problems") {
  LpProblem lp;
  lp.c = vec({1, 1});
  lp.A_eq.resize(1, 2);
  lp.A_eq << 1, -1;
  lp.b_eq = vec({1});
  lp.lower = VecX::Zero(2);
  lp.upper = VecX::Constant(2, kInf);
  LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0).epsilon(1e-12));

  lp.c = vec({-1, -1});
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);

  lp.A.resize(1, 2);
  lp.A << 1, 1;
  lp.b = vec({-1});
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("LP: random feasible problems satisfy weak duality") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 30; ++t) {
    const int n = 4, m = 8;
    LpProblem lp;
    lp.A = MatX::NullaryExpr(m, n, [&] { return g(rng); });
    const VecX x_feas = VecX::NullaryExpr(n, [&] { return g(rng); });
    lp.b = lp.A * x_feas + VecX::Constant(m, 1.0);
    lp.c = VecX::NullaryExpr(n, [&] { return g(rng); });
    lp.lower = VecX::Constant(n, -10.0);
    lp.upper = VecX::Constant(n, 10.0);
    lp.lower = lp.lower.cwiseMin(x_feas);
    lp.upper = lp.upper.cwiseMax(x_feas);
    const LpResult r = solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(((lp.A * r.x - lp.b).maxCoeff()) <= 1e-9);
    CHECK(r.value <= lp.c.dot(x_feas) + 1e-9);
  }
}

TEST_CASE("QP: matches the closed-form KKT solution") {
  // min 1/2 x'Gx + g'x s.t. x0 + x1 = 1, x0 <= 0.2
  QpProblem qp;
  qp.G = Eigen::Matrix2d{{4, 1}, {1, 2}};
  qp.g = vec({1, 1});
  qp.A_eq.resize(1, 2);
  qp.A_eq << 1, 1;
  qp.b_eq = vec({1});
  qp.A.resize(1, 2);
  qp.A << 1, 0;
  qp.b = vec({0.2});
  const QpResult r = solve_qp(qp);
  REQUIRE(r.status == QpStatus::Optimal);
  // Unconstrained-in-inequality optimum along x0 + x1 = 1: minimise 2a^2 + a(1-a) + (1-a)^2 + 1
  // -> a = 0.25 > 0.2, so the bound is active: x = (0.2, 0.8).
  CHECK(r.x[0] == doctest::Approx(0.2));
  CHECK(r.x[1] == doctest::Approx(0.8));
  const VecX stat = qp.G * r.x + qp.g + qp.A.transpose() * r.lambda + qp.A_eq.transpose() * r.lambda_eq;
  CHECK(stat.norm() <= 1e-10);
  CHECK(r.lambda[0] >= 0.0);
}

TEST_CASE("QP: infeasible constraints are detected") {
  QpProblem qp;
  qp.G = MatX::Identity(2, 2);
  qp.g = VecX::Zero(2);
  qp.A.resize(2, 2);
  qp.A << 1, 0, -1, 0;
  qp.b = vec({-1, -1});  // x0 <= -1 and x0 >= 1
  CHECK(solve_qp(qp).status == QpStatus::Infeasible);
}

TEST_CASE("NLP: Rosenbrock restricted to a disc ends on the circle") {
  // min (1-x)^2 + 100 (y - x^2)^2  s.t.  x^2 + y^2 <= 1.5. The circle cuts off (1, 1), so the
  // optimum lies on it.
  NlpProblem p;
  p.n = 2;
  p.m = 1;
  p.evaluate = [](const VecX& x, double& f, VecX& g) {
    f = std::pow(1 - x[0], 2) + 100 * std::pow(x[1] - x[0] * x[0], 2);
    g.resize(1);
    g[0] = x[0] * x[0] + x[1] * x[1] - 1.5;
  };
  p.lower = VecX::Constant(2, -5.0);
  p.upper = VecX::Constant(2, 5.0);
  p.x0 = vec({-1.2, 1.0});
  p.options.max_iters = 500;
  const NlpResult r = solve_nlp(p);
  REQUIRE(r.status == NlpStatus::Optimal);
  CHECK(r.constraints[0] == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(r.lambda[0] > 0.0);
  CHECK(r.kkt_residual <= 1e-5);
  // Independent check: on the circle x = sqrt(1.5) (cos t, sin t) the objective has a minimum at the same point.
  const double t = std::atan2(r.x[1], r.x[0]);
  auto f_circle = [](double s) {
    const double x = std::sqrt(1.5) * std::cos(s), y = std::sqrt(1.5) * std::sin(s);
    return std::pow(1 - x, 2) + 100 * std::pow(y - x * x, 2);
  };
  CHECK(f_circle(t) <= f_circle(t + 1e-3) + 1e-12);
  CHECK(f_circle(t) <= f_circle(t - 1e-3) + 1e-12);
}

TEST_CASE("NLP: Gauss-Newton residual form with active bounds") {
  // min (x-3)^2 + (y+1)^2 with 0 <= x <= 2, y >= 0 -> (2, 0), bound multipliers of the right sign.
  NlpProblem p;
  p.n = 2;
  p.m = 0;
  p.residuals = [](const VecX& x, VecX& r, VecX& g) {
    r = vec({x[0] - 3, x[1] + 1});
    g.resize(0);
  };
  p.lower = vec({0, 0});
  p.upper = vec({2, kInf});
  p.x0 = vec({1, 1});
  p.options.hessian = HessianMode::GaussNewton;
  const NlpResult r = solve_nlp(p);
  REQUIRE(r.status == NlpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.bound_multipliers[0] > 0.0);
  CHECK(r.bound_multipliers[1] < 0.0);
  CHECK(r.objective == doctest::Approx(2.0));
}

TEST_CASE("NLP: linear cost term with one active inequality") {
  // min x^2 + y^2 - x  s.t.  x + y >= 1 -> (0.75, 0.25)
  NlpProblem p;
  p.n = 2;
  p.m = 1;
  p.evaluate = [](const VecX& x, double& f, VecX& g) {
    f = x.squaredNorm();
    g = vec({1 - x[0] - x[1]});
  };
  p.linear_cost = vec({-1, 0});
  p.lower = VecX::Constant(2, -kInf);
  p.upper = VecX::Constant(2, kInf);
  p.x0 = vec({3, -2});
  const NlpResult r = solve_nlp(p);
  REQUIRE(r.status == NlpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(0.75));
  CHECK(r.x[1] == doctest::Approx(0.25));
}

TEST_CASE("NLP: an objective that cannot be evaluated at x0 throws SolverError") {
  NlpProblem p;
  p.n = 1;
  p.m = 0;
  p.evaluate = [](const VecX& x, double& f, VecX& g) {
    f = std::log(x[0]);
    g.resize(0);
  };
  p.lower = vec({-1});
  p.upper = vec({1});
  p.x0 = vec({-0.5});
  CHECK_THROWS_AS(solve_nlp(p), SolverError);
}
