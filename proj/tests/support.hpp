#pragma once

#include <random>

#include "ropejump/reduced_model.hpp"
#include "ropejump/types.hpp"

namespace rjtest {

using namespace ropejump;

// Random hanging state away from the singular plane and the anchor line.
inline ReducedState random_state(std::mt19937_64& rng, const Scenario& sc) {
  std::uniform_real_distribution<double> psi(0.2, 1.3), y(0.5, 4.5), z(-10.0, -2.0), rate(-2.0, 2.0);
  Vec3 p(0.0, y(rng), z(rng));
  const double a = psi(rng);
  const double radial = std::hypot(p.x(), p.z());
  p.x() = radial * std::sin(a);
  p.z() = -radial * std::cos(a);
  ReducedState q = inverse_kinematics(p, sc);
  q.psi_dot = 0.5 * rate(rng);
  q.l1_dot = rate(rng);
  q.l2_dot = rate(rng);
  return q;
}

inline ReducedState with_coords(ReducedState q, const Vec3& c) {
  q.psi = c[0];
  q.l1 = c[1];
  q.l2 = c[2];
  return q;
}

}  // namespace rjtest
