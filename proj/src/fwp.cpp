#include "ropejump/fwp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ropejump/errors.hpp"
#include "ropejump/optim.hpp"
#include "ropejump/reduced_model.hpp"

namespace ropejump {

namespace {

// skew_of(p) f = p x f
Mat3 skew_of(const Vec3& p) {
  Mat3 S;
  S << 0.0, -p.z(), p.y(), p.z(), 0.0, -p.x(), -p.y(), p.x(), 0.0;
  return S;
}

}  // namespace

void ContactSet::validate() const {
  std::vector<std::string> issues;
  for (const auto& [name, a] : {std::pair{"axis_left", axis_left}, {"axis_right", axis_right}, {"normal", normal}})
    if (!a.allFinite() || std::abs(a.norm() - 1.0) > 1e-9) issues.push_back(std::string(name) + " must be a unit vector");
  if (!(mu > 0.0)) issues.push_back("mu must be > 0");
  if (!(f_leg_max >= 0.0)) issues.push_back("f_leg_max must be >= 0 (N)");
  if (!(f_r_max >= 0.0)) issues.push_back("f_r_max must be >= 0 (N)");
  if (!issues.empty()) throw ConfigError(issues);
}

VPolytope wheel_force_polytope(const Vec3& normal, double mu, double f_max) {
  const Mat3 R = contact_frame(normal).rotation();
  Eigen::Matrix<double, 3, 5> local;
  local << 0, mu, -mu, -mu, mu,  //
      0, mu, mu, -mu, -mu,       //
      0, 1, 1, 1, 1;
  const Eigen::Matrix<double, 3, 5> world = R * local * f_max;
  VPolytope P;
  P.dim = 3;
  for (int j = 0; j < 5; ++j) {
    const VecX v = world.col(j);
    if (std::none_of(P.vertices.begin(), P.vertices.end(), [&](const VecX& u) { return (u - v).norm() == 0.0; }))
      P.vertices.push_back(v);
  }
  P.affine_rank = mu > 0.0 && f_max > 0.0 ? 3 : (f_max > 0.0 ? 1 : 0);
  return P;
}

VPolytope rope_force_polytope(const Vec3& axis, double f_r_max) {
  VPolytope P;
  P.dim = 3;
  P.vertices = {VecX(-axis * f_r_max), VecX(Vec3::Zero())};
  P.affine_rank = f_r_max > 0.0 ? 1 : 0;
  return P;
}

std::vector<VecX> lift_to_wrench(const VPolytope& forces, const Vec3& p) {
  std::vector<VecX> out;
  out.reserve(forces.vertices.size());
  for (const auto& f : forces.vertices) {
    const Vec3 f3 = f;
    VecX w(6);
    w << f3, p.cross(f3);
    out.push_back(w);
  }
  return out;
}

Fwp build_fwp(const ContactSet& c) {
  c.validate();
  const std::vector<std::vector<VecX>> factors = {
      lift_to_wrench(wheel_force_polytope(c.normal, c.mu, c.f_leg_max), c.wheel_left),
      lift_to_wrench(wheel_force_polytope(c.normal, c.mu, c.f_leg_max), c.wheel_right),
      lift_to_wrench(rope_force_polytope(c.axis_left, c.f_r_max), c.hoist_left),
      lift_to_wrench(rope_force_polytope(c.axis_right, c.f_r_max), c.hoist_right),
  };
  std::vector<VecX> sums{VecX::Zero(6)};
  for (const auto& f : factors) {
    std::vector<VecX> next;
    next.reserve(sums.size() * f.size());
    for (const auto& s : sums)
      for (const auto& v : f) next.push_back(s + v);
    sums = std::move(next);
  }
  Fwp out;
  out.raw_vertices = static_cast<int>(sums.size());
  Hull h = hull_with_facets(sums);
  out.V = std::move(h.V);
  out.H = std::move(h.H);
  return out;
}

Wrench gravitational_wrench(const Scenario& scenario) { return {scenario.mass * scenario.gravity, Vec3::Zero()}; }

ContactSet contact_geometry(const Vec3& p, const Scenario& sc) {
  const ContactFrame fr = contact_frame(sc.contact_normal);
  ContactSet c;
  c.normal = fr.n;
  c.wheel_left = -sc.d_w * fr.n - 0.5 * sc.d_b * fr.t1 + sc.wheel_z_offset * fr.t2;
  c.wheel_right = -sc.d_w * fr.n + 0.5 * sc.d_b * fr.t1 + sc.wheel_z_offset * fr.t2;
  c.hoist_left = -0.5 * sc.d_h * fr.t1;
  c.hoist_right = 0.5 * sc.d_h * fr.t1;
  const Vec3 dl = p + c.hoist_left - sc.anchor_left;
  const Vec3 dr = p + c.hoist_right - sc.anchor_right;
  if (!(dl.norm() > 0.0) || !(dr.norm() > 0.0)) throw DomainError("contact_geometry: attachment coincides with an anchor");
  c.axis_left = dl.normalized();
  c.axis_right = dr.normalized();
  c.mu = sc.mu;
  c.f_leg_max = sc.f_leg_max;
  c.f_r_max = sc.f_r_max;
  return c;
}

bool cone_feasible(const ContactSet& c, const Wrench& w) {
  // x = (f_left[3], f_right[3], t_left, t_right); rope force = -axis * t.
  const ContactFrame fr = contact_frame(c.normal);
  LpProblem lp;
  lp.c = VecX::Zero(8);
  lp.A = MatX::Zero(10, 8);
  lp.b = VecX::Zero(10);
  for (int k = 0; k < 2; ++k) {
    const int o = 3 * k, r = 5 * k;
    lp.A.block<1, 3>(r, o) = -fr.n.transpose();
    lp.A.block<1, 3>(r + 1, o) = (fr.t1 - c.mu * fr.n).transpose();
    lp.A.block<1, 3>(r + 2, o) = (-fr.t1 - c.mu * fr.n).transpose();
    lp.A.block<1, 3>(r + 3, o) = (fr.t2 - c.mu * fr.n).transpose();
    lp.A.block<1, 3>(r + 4, o) = (-fr.t2 - c.mu * fr.n).transpose();
  }
  lp.A_eq = MatX::Zero(6, 8);
  lp.A_eq.block<3, 3>(0, 0) = Mat3::Identity();
  lp.A_eq.block<3, 3>(0, 3) = Mat3::Identity();
  lp.A_eq.block<3, 1>(0, 6) = -c.axis_left;
  lp.A_eq.block<3, 1>(0, 7) = -c.axis_right;
  lp.A_eq.block<3, 3>(3, 0) = skew_of(c.wheel_left);
  lp.A_eq.block<3, 3>(3, 3) = skew_of(c.wheel_right);
  lp.A_eq.block<3, 1>(3, 6) = -c.hoist_left.cross(c.axis_left);
  lp.A_eq.block<3, 1>(3, 7) = -c.hoist_right.cross(c.axis_right);
  lp.b_eq = w.stacked();
  const double inf = std::numeric_limits<double>::infinity();
  lp.lower = VecX::Constant(8, -inf);
  lp.upper = VecX::Constant(8, inf);
  lp.lower[6] = lp.lower[7] = 0.0;
  return solve_lp(lp).status == LpStatus::Optimal;
}

bool feasibility(const Vec3& p, const Scenario& scenario, bool actuation_limits) {
  const ContactSet c = contact_geometry(p, scenario);
  const Wrench g = gravitational_wrench(scenario);
  const Wrench hold{-g.force, -g.moment};
  if (!actuation_limits) return cone_feasible(c, hold);
  return contains(build_fwp(c).H, hold.stacked());
}

void HeatmapGrid::validate() const {
  std::vector<std::string> issues;
  if (ny < 1 || nz < 1) issues.push_back("heatmap grid needs ny, nz >= 1");
  if (!(y_max >= y_min) || !(z_max >= z_min)) issues.push_back("heatmap ranges must have max >= min (m)");
  if (!std::isfinite(x)) issues.push_back("heatmap x must be finite (m)");
  if (!issues.empty()) throw ConfigError(issues);
}

std::vector<HeatmapCell> margin_heatmap(const HeatmapGrid& grid, const Vec6& direction, const Scenario& scenario,
                                        int threads) {
  grid.validate();
  scenario.validate();
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw DomainError("heatmap direction must be unit-norm");
  const int n = grid.ny * grid.nz;
  std::vector<HeatmapCell> cells(n);
  const Wrench g = gravitational_wrench(scenario);
  const VecX hold = -g.stacked();
  const VecX v = direction;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      HeatmapCell& cell = cells[k];
      cell.z = grid.z(k / grid.ny);
      cell.y = grid.y(k % grid.ny);
      try {
        const Fwp f = build_fwp(contact_geometry(Vec3(grid.x, cell.y, cell.z), scenario));
        const MarginResult m = directional_margin(f.H, hold, v);
        cell.feasible = m.status != MarginResult::Status::InfeasibleOrigin;
        cell.unbounded = m.status == MarginResult::Status::Unbounded;
        cell.gamma = m.gamma;
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  };
  int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  t = std::clamp(t, 1, n);
  std::vector<std::thread> pool;
  for (int i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return cells;
}

}  // namespace ropejump
