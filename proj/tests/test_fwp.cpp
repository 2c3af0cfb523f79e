#include <cmath>
#include <limits>

#include "doctest.h"
#include "fwp_oracle.hpp"
#include "ropejump/errors.hpp"
#include "ropejump/fwp.hpp"
#include "ropejump/reduced_model.hpp"

using namespace ropejump;

TEST_CASE("wheel polytope: apex plus friction pyramid corners at full load") {
  const VPolytope P = wheel_force_polytope(Vec3::UnitX(), 0.8, 300.0);
  REQUIRE(P.vertices.size() == 5);
  CHECK(P.vertices[0].norm() == 0.0);
  for (int j = 1; j < 5; ++j) {
    const Vec3 f = P.vertices[j];
    CHECK(f.x() == doctest::Approx(300.0));
    CHECK(std::abs(f.y()) == doctest::Approx(240.0));
    CHECK(std::abs(f.z()) == doctest::Approx(240.0));
  }
}

TEST_CASE("rope polytope pulls towards the anchor") {
  const Vec3 a = Vec3(0.2, 0.5, -1.0).normalized();
  const VPolytope P = rope_force_polytope(a, 90.0);
  REQUIRE(P.vertices.size() == 2);
  CHECK((Vec3(P.vertices[0]) + 90.0 * a).norm() <= 1e-12);
  CHECK(P.vertices[1].norm() == 0.0);
  CHECK(P.affine_rank == 1);
}

TEST_CASE("wrench lifting uses p x f") {
  const VPolytope P = rope_force_polytope(Vec3::UnitZ(), 10.0);
  const auto W = lift_to_wrench(P, Vec3(1.0, 0.0, 0.0));
  CHECK((W[0].tail<3>() - Vec3(1, 0, 0).cross(Vec3(0, 0, -10))).norm() <= 1e-12);
  CHECK(W[0].head<3>().z() == -10.0);
}

TEST_CASE("gravitational wrench for the 15 kg robot") {
  Scenario sc;
  sc.mass = 15.0;
  const Wrench w = gravitational_wrench(sc);
  CHECK((w.force - Vec3(0, 0, -147.15)).norm() <= 1e-12);
  CHECK(w.moment.norm() == 0.0);
}

TEST_CASE("contact geometry offsets") {
  Scenario sc;
  const ContactSet c = contact_geometry(Vec3(1.5, 2.5, -6.0), sc);
  CHECK((c.wheel_left - Vec3(-0.4, -0.4, 0.0)).norm() <= 1e-12);
  CHECK((c.wheel_right - Vec3(-0.4, 0.4, 0.0)).norm() <= 1e-12);
  CHECK((c.hoist_left - Vec3(0.0, -0.15, 0.0)).norm() <= 1e-12);
  CHECK((c.hoist_right - Vec3(0.0, 0.15, 0.0)).norm() <= 1e-12);
  CHECK(c.axis_left.norm() == doctest::Approx(1.0));
  // Axis from the anchor towards the attachment point.
  CHECK(c.axis_left.dot(Vec3(1.5, 2.35, -6.0) - sc.anchor_left) > 0.0);
}

TEST_CASE("FWP membership agrees with the bounded force-existence LP") {
  Scenario sc;
  sc.mass = 15.0;
  sc.f_leg_max = 600.0;
  sc.f_r_max = 300.0;
  for (double y : {0.5, 2.5, 4.5})
    for (double z : {-9.0, -5.0, -2.5}) {
      const ContactSet c = contact_geometry(Vec3(1.5, y, z), sc);
      const Fwp f = build_fwp(c);
      const Wrench g = gravitational_wrench(sc);
      const Vec6 hold = -g.stacked();
      CHECK(contains(f.H, hold) == rjtest::force_existence(c, hold));
      // Every raw Minkowski combination lies inside the H-rep.
      CHECK(f.raw_vertices == 5 * 5 * 2 * 2);
      for (const auto& v : f.V.vertices) CHECK(contains(f.H, v, 1e-7));
    }
}

TEST_CASE("cone feasibility is implied by bounded feasibility") {
  Scenario sc;
  for (double y : {0.2, 1.0, 2.5, 4.8})
    for (double z : {-10.0, -6.0, -2.0}) {
      const Vec3 p(1.5, y, z);
      if (feasibility(p, sc, true)) CHECK(feasibility(p, sc, false));
    }
}

TEST_CASE("vertical margin on the vertical wall is either 0 or m g") {
  Scenario sc;
  sc.mass = 15.0;
  sc.f_leg_max = 600.0;
  sc.f_r_max = 300.0;
  HeatmapGrid grid;
  grid.ny = 5;
  grid.nz = 5;
  Vec6 dir = Vec6::Zero();
  dir[2] = -1.0;
  int feasible = 0;
  for (const auto& cell : margin_heatmap(grid, dir, sc, 1)) {
    CHECK(cell.error.empty());
    if (cell.feasible) {
      ++feasible;
      CHECK(cell.gamma == doctest::Approx(147.15).epsilon(1e-9));
    } else {
      CHECK(cell.gamma == 0.0);
    }
  }
  CHECK(feasible > 0);
}

TEST_CASE("a 1x1 heatmap equals the direct margin call") {
  Scenario sc;
  HeatmapGrid grid;
  grid.ny = grid.nz = 1;
  grid.y_min = 2.0;
  grid.z_min = -5.0;
  Vec6 dir = Vec6::Zero();
  dir[0] = -1.0;
  const auto cells = margin_heatmap(grid, dir, sc, 1);
  REQUIRE(cells.size() == 1);
  const Fwp f = build_fwp(contact_geometry(Vec3(grid.x, 2.0, -5.0), sc));
  const MarginResult m = directional_margin(f.H, -gravitational_wrench(sc).stacked(), VecX(dir));
  CHECK(cells[0].gamma == m.gamma);
}

TEST_CASE("larger friction never shrinks the feasible region") {
  HeatmapGrid grid;
  grid.ny = 6;
  grid.nz = 6;
  Vec6 dir = Vec6::Zero();
  dir[2] = -1.0;
  std::vector<std::vector<HeatmapCell>> maps;
  for (double mu : {0.4, 0.6, 0.8}) {
    Scenario sc;
    sc.mu = mu;
    maps.push_back(margin_heatmap(grid, dir, sc, 1));
  }
  for (std::size_t i = 0; i < maps[0].size(); ++i) {
    if (maps[0][i].feasible) CHECK(maps[1][i].feasible);
    if (maps[1][i].feasible) CHECK(maps[2][i].feasible);
  }
}

TEST_CASE("heatmap rejects bad inputs") {
  Scenario sc;
  HeatmapGrid grid;
  grid.ny = 0;
  CHECK_THROWS_AS(margin_heatmap(grid, Vec6::Unit(0), sc), ConfigError);
  grid.ny = 2;
  CHECK_THROWS_AS(margin_heatmap(grid, 2.0 * Vec6::Unit(0), sc), DomainError);
}
