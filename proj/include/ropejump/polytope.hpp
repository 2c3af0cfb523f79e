#pragma once

#include <vector>

#include "ropejump/types.hpp"

namespace ropejump {

/// Vertex representation. affine_rank < dim marks a flat (degenerate) set.
struct VPolytope {
  int dim = 0;
  std::vector<VecX> vertices;  // lexicographic order after convex_hull()
  int affine_rank = -1;

  bool degenerate() const { return affine_rank < dim; }
};

/// Half-space representation: A w <= b, unit-norm rows.
struct HPolytope {
  int dim = 0;
  MatX A;
  VecX b;

  int rows() const { return static_cast<int>(A.rows()); }
};

/// Diagnostics of the last V -> H conversion on this thread.
struct HullStats {
  bool exact_fallback = false;  // floating-point result failed validation, rationals were used
  int rays = 0;                 // facets found
  double max_residual = 0.0;    // worst vertex violation / facet support gap of the returned H-rep
};
const HullStats& last_hull_stats();

/// Minimal vertex set of the convex hull. Duplicates (within 1e-12 relative) are merged.
VPolytope convex_hull(const std::vector<VecX>& points);

/// Hull of all pairwise vertex sums.
VPolytope minkowski_sum(const VPolytope& P, const VPolytope& Q);

/// Facets of a full-dimensional polytope (double description on the polar cone).
///
/// Throws DegenerateGeometryError when P is flat. Rows come back in lexicographic order.
HPolytope v_to_h(const VPolytope& P);

/// convex_hull() and v_to_h() of a full-dimensional point set from a single facet enumeration.
struct Hull {
  VPolytope V;
  HPolytope H;
};
Hull hull_with_facets(const std::vector<VecX>& points);

/// True iff every row holds within tol (closed set).
bool contains(const HPolytope& H, const VecX& w, double tol = 1e-8);

struct MarginResult {
  enum class Status { Ok, InfeasibleOrigin, Unbounded };
  Status status = Status::Ok;
  double gamma = 0.0;
};

/// max gamma >= 0 with w0 + gamma v inside H. A w0 outside H (by more than tol) gives gamma = 0
/// with InfeasibleOrigin; a ray no row limits gives Unbounded. Throws DomainError unless |v| = 1.
MarginResult directional_margin(const HPolytope& H, const VecX& w0, const VecX& v, double tol = 1e-8);

}  // namespace ropejump
