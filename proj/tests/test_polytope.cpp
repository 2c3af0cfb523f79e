#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ropejump/errors.hpp"
#include "ropejump/polytope.hpp"

using namespace ropejump;

namespace {

std::vector<VecX> cube(int d, double s = 1.0) {
  std::vector<VecX> pts;
  for (int mask = 0; mask < (1 << d); ++mask) {
    VecX v(d);
    for (int i = 0; i < d; ++i) v[i] = (mask >> i & 1) ? s : -s;
    pts.push_back(v);
  }
  return pts;
}

std::vector<VecX> random_cloud(std::mt19937_64& rng, int d, int n) {
  std::normal_distribution<double> g;
  std::vector<VecX> pts;
  for (int i = 0; i < n; ++i) pts.push_back(VecX::NullaryExpr(d, [&] { return g(rng); }));
  return pts;
}

// Bisection on containment along v from w0.
double bisect_margin(const HPolytope& H, const VecX& w0, const VecX& v, double hi) {
  double lo = 0.0;
  while (contains(H, w0 + hi * v, 0.0)) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (contains(H, w0 + mid * v, 0.0) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

TEST_CASE("cube facets") {
  for (int d = 2; d <= 5; ++d) {
    const HPolytope H = v_to_h(convex_hull(cube(d)));
    CHECK(H.rows() == 2 * d);
    for (int r = 0; r < H.rows(); ++r) {
      CHECK(H.A.row(r).norm() == doctest::Approx(1.0));
      CHECK(H.b[r] == doctest::Approx(1.0));
      CHECK(H.A.row(r).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("simplex facets count and interior points are dropped from the V-rep") {
  std::vector<VecX> pts = {VecX::Zero(3), VecX::Unit(3, 0), VecX::Unit(3, 1), VecX::Unit(3, 2)};
  pts.push_back(VecX::Constant(3, 0.1));  // interior
  pts.push_back(VecX::Unit(3, 0));        // duplicate
  const VPolytope V = convex_hull(pts);
  CHECK(V.vertices.size() == 4);
  CHECK(V.affine_rank == 3);
  CHECK(v_to_h(V).rows() == 4);
}

TEST_CASE("random clouds: every point inside, every facet supported by d points, vertices are extreme") {
  std::mt19937_64 rng(21);
  for (int d = 2; d <= 6; ++d) {
    const auto pts = random_cloud(rng, d, 40);
    const Hull h = hull_with_facets(pts);
    for (const auto& p : pts) CHECK(contains(h.H, p, 1e-9));
    for (int r = 0; r < h.H.rows(); ++r) {
      int touching = 0;
      for (const auto& v : h.V.vertices)
        if (std::abs(h.H.A.row(r).dot(v) - h.H.b[r]) <= 1e-9) ++touching;
      CHECK(touching >= d);
    }
    // A vertex is extreme iff removing it shrinks the hull: it must violate the hull of the others.
    for (std::size_t i = 0; i < h.V.vertices.size(); ++i) {
      std::vector<VecX> rest = h.V.vertices;
      rest.erase(rest.begin() + static_cast<long>(i));
      CHECK_FALSE(contains(v_to_h(convex_hull(rest)), h.V.vertices[i], 1e-9));
    }
    CHECK(last_hull_stats().max_residual <= 1e-9);
  }
}

TEST_CASE("Minkowski sum of boxes is a box with summed half-widths") {
  const VPolytope A = convex_hull(cube(3, 1.0));
  const VPolytope B = convex_hull(cube(3, 0.5));
  const VPolytope S = minkowski_sum(A, B);
  CHECK(S.vertices.size() == 8);
  for (const auto& v : S.vertices) CHECK(v.cwiseAbs().minCoeff() == doctest::Approx(1.5));
}

TEST_CASE("Minkowski sum support function is additive") {
  std::mt19937_64 rng(22);
  const VPolytope P = convex_hull(random_cloud(rng, 4, 15));
  const VPolytope Q = convex_hull(random_cloud(rng, 4, 15));
  const VPolytope S = minkowski_sum(P, Q);
  auto support = [](const VPolytope& X, const VecX& u) {
    double m = -1e300;
    for (const auto& v : X.vertices) m = std::max(m, u.dot(v));
    return m;
  };
  for (const auto& u : random_cloud(rng, 4, 20))
    CHECK(support(S, u) == doctest::Approx(support(P, u) + support(Q, u)).epsilon(1e-12));
}

TEST_CASE("flat inputs: v_to_h throws, rank-1 sets keep their endpoints") {
  std::vector<VecX> flat;
  for (const auto& p : cube(2)) {
    VecX v(3);
    v << p, 0.0;
    flat.push_back(v);
  }
  const VPolytope V = convex_hull(flat);
  CHECK(V.degenerate());
  CHECK(V.affine_rank == 2);
  CHECK(V.vertices.size() == 4);
  CHECK_THROWS_AS(v_to_h(V), DegenerateGeometryError);

  std::vector<VecX> line;
  for (double t : {0.3, -1.0, 0.0, 2.0}) line.push_back(VecX::Constant(3, t));
  const VPolytope L = convex_hull(line);
  CHECK(L.affine_rank == 1);
  REQUIRE(L.vertices.size() == 2);
  CHECK(L.vertices[0][0] == doctest::Approx(-1.0));
  CHECK(L.vertices[1][0] == doctest::Approx(2.0));
}

TEST_CASE("directional margin equals bisection on containment") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const HPolytope H = v_to_h(convex_hull(random_cloud(rng, 6, 60)));
    VecX w0 = VecX::Zero(6);
    for (const auto& v : random_cloud(rng, 6, 5)) {
      const VecX u = v.normalized();
      const MarginResult m = directional_margin(H, w0, u);
      if (m.status != MarginResult::Status::Ok) continue;
      CHECK(m.gamma == doctest::Approx(bisect_margin(H, w0, u, 1.0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("directional margin edge cases") {
  const HPolytope H = v_to_h(convex_hull(cube(2)));
  VecX v(2);
  v << 1.0, 0.0;
  VecX w0(2);
  w0 << 3.0, 0.0;
  CHECK(directional_margin(H, w0, v).status == MarginResult::Status::InfeasibleOrigin);
  CHECK(directional_margin(H, w0, v).gamma == 0.0);
  w0 << 1.0, 0.0;  // on the boundary, pointing out
  CHECK(directional_margin(H, w0, v).gamma == doctest::Approx(0.0));
  CHECK_THROWS_AS(directional_margin(H, VecX::Zero(2), 2.0 * v), DomainError);
  // A half-plane bounded on one side only.
  HPolytope half{2, MatX(1, 2), VecX(1)};
  half.A << 1.0, 0.0;
  half.b << 1.0;
  VecX up(2);
  up << 0.0, 1.0;
  CHECK(directional_margin(half, VecX::Zero(2), up).status == MarginResult::Status::Unbounded);
}

TEST_CASE("near-duplicate vertices collapse onto the cube") {
  // Relative perturbations of 1e-13 fall inside the duplicate tolerance.
  std::mt19937_64 rng(24);
  std::normal_distribution<double> g;
  std::vector<VecX> pts = cube(3);
  for (int i = 0; i < 30; ++i) {
    VecX v = cube(3)[i % 8];
    v[i % 3] *= 1.0 + 1e-13 * g(rng);
    pts.push_back(v);
  }
  const Hull h = hull_with_facets(pts);
  CHECK(h.H.rows() == 6);
  for (const auto& p : pts) CHECK(contains(h.H, p, 1e-9));
}
