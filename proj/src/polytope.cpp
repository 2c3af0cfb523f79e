#include "ropejump/polytope.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <gmpxx.h>

#include "ropejump/errors.hpp"

namespace ropejump {

namespace {

thread_local HullStats g_stats;

// ---------------------------------------------------------------------------
// Scalar traits: tolerant doubles, exact rationals.
// ---------------------------------------------------------------------------

template <class S>
struct Arith;

template <>
struct Arith<double> {
  static constexpr double eps = 1e-9;
  static int sign(double x) { return x > eps ? 1 : (x < -eps ? -1 : 0); }
  static double abs(double x) { return std::abs(x); }
  static void normalize(std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& v : r) v /= s;
  }
};

template <>
struct Arith<mpq_class> {
  static int sign(const mpq_class& x) { return sgn(x); }
  static mpq_class abs(const mpq_class& x) { return ::abs(x); }
  static void normalize(std::vector<mpq_class>& r) {
    // Scale by the largest magnitude entry to keep the numbers small.
    mpq_class m = 0;
    for (const auto& v : r)
      if (::abs(v) > m) m = ::abs(v);
    if (m != 0)
      for (auto& v : r) v /= m;
  }
};

template <class S>
using Row = std::vector<S>;

// Rank of a set of rows (each of length n); stops once `cap` is reached.
template <class S>
int rank_of(std::vector<Row<S>> M, int n, int cap) {
  int rank = 0;
  const int k = static_cast<int>(M.size());
  for (int col = 0; col < n && rank < k && rank < cap; ++col) {
    int piv = -1;
    S best = 0;
    for (int i = rank; i < k; ++i) {
      const S a = Arith<S>::abs(M[i][col]);
      if (Arith<S>::sign(a) != 0 && (piv < 0 || a > best)) {
        piv = i;
        best = a;
      }
    }
    if (piv < 0) continue;
    std::swap(M[piv], M[rank]);
    for (int i = rank + 1; i < k; ++i) {
      if (Arith<S>::sign(M[i][col]) == 0) continue;
      const S f = M[i][col] / M[rank][col];
      for (int j = col; j < n; ++j) M[i][j] -= f * M[rank][j];
    }
    ++rank;
  }
  return rank;
}

struct Bits {
  std::vector<std::uint64_t> w;
  explicit Bits(int m = 0) : w((m + 63) / 64, 0) {}
  void set(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1U; }
};

int and_count(const Bits& a, const Bits& b) {
  int c = 0;
  for (std::size_t i = 0; i < a.w.size(); ++i) c += std::popcount(a.w[i] & b.w[i]);
  return c;
}

Bits and_bits(const Bits& a, const Bits& b) {
  Bits r;
  r.w.resize(a.w.size());
  for (std::size_t i = 0; i < a.w.size(); ++i) r.w[i] = a.w[i] & b.w[i];
  return r;
}

template <class S>
struct Ray {
  Row<S> x;
  Bits zero;  // processed rows tight at this ray
};

template <class S>
S dot(const Row<S>& a, const Row<S>& b) {
  S s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Extreme rays of the pointed cone {x : A x <= 0}, A of full column rank n.
// Returns an empty vector when the rows do not have full column rank.
template <class S>
std::vector<Ray<S>> double_description(const std::vector<Row<S>>& A, int n) {
  const int m = static_cast<int>(A.size());

  // Initial basis: first n independent rows in the given order.
  std::vector<int> basis;
  {
    std::vector<Row<S>> picked;
    for (int i = 0; i < m && static_cast<int>(basis.size()) < n; ++i) {
      picked.push_back(A[i]);
      if (rank_of<S>(picked, n, n) == static_cast<int>(picked.size())) {
        basis.push_back(i);
      } else {
        picked.pop_back();
      }
    }
  }
  if (static_cast<int>(basis.size()) < n) return {};

  // Columns of -A0^{-1} via Gauss-Jordan on [A0 | -I].
  std::vector<Row<S>> aug(n, Row<S>(2 * n, S(0)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug[i][j] = A[basis[i]][j];
    aug[i][n + i] = -1;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (Arith<S>::abs(aug[i][col]) > Arith<S>::abs(aug[piv][col])) piv = i;
    std::swap(aug[piv], aug[col]);
    const S p = aug[col][col];
    for (auto& v : aug[col]) v /= p;
    for (int i = 0; i < n; ++i) {
      if (i == col || aug[i][col] == S(0)) continue;
      const S f = aug[i][col];
      for (int j = 0; j < 2 * n; ++j) aug[i][j] -= f * aug[col][j];
    }
  }
  std::vector<Ray<S>> rays;
  for (int j = 0; j < n; ++j) {
    Ray<S> r{Row<S>(n), Bits(m)};
    for (int i = 0; i < n; ++i) r.x[i] = aug[i][n + j];
    Arith<S>::normalize(r.x);
    for (int i = 0; i < n; ++i)
      if (i != j) r.zero.set(basis[i]);
    rays.push_back(std::move(r));
  }

  std::vector<char> done(m, 0);
  for (int b : basis) done[b] = 1;
  std::vector<S> val;
  for (int i = 0; i < m; ++i) {
    if (done[i]) continue;
    done[i] = 1;
    const Row<S>& a = A[i];
    val.resize(rays.size());
    std::vector<int> pos, neg;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      val[r] = dot(a, rays[r].x);
      const int s = Arith<S>::sign(val[r]);
      if (s > 0) pos.push_back(static_cast<int>(r));
      else if (s < 0) neg.push_back(static_cast<int>(r));
      else rays[r].zero.set(i);
    }
    if (pos.empty()) continue;  // redundant row

    std::vector<Ray<S>> fresh;
    for (int p : pos) {
      for (int q : neg) {
        if (and_count(rays[p].zero, rays[q].zero) < n - 2) continue;
        Bits z = and_bits(rays[p].zero, rays[q].zero);
        std::vector<Row<S>> tight;
        for (int k = 0; k < m; ++k)
          if (z.test(k)) tight.push_back(A[k]);
        if (rank_of<S>(tight, n, n - 1) != n - 2) continue;
        Ray<S> r{Row<S>(n), std::move(z)};
        for (int k = 0; k < n; ++k) r.x[k] = val[p] * rays[q].x[k] - val[q] * rays[p].x[k];
        Arith<S>::normalize(r.x);
        r.zero.set(i);
        fresh.push_back(std::move(r));
      }
    }
    std::vector<Ray<S>> kept;
    kept.reserve(rays.size() - pos.size() + fresh.size());
    for (std::size_t r = 0; r < rays.size(); ++r)
      if (Arith<S>::sign(val[r]) <= 0) kept.push_back(std::move(rays[r]));
    for (auto& r : fresh) kept.push_back(std::move(r));
    rays = std::move(kept);
  }
  return rays;
}

// ---------------------------------------------------------------------------
// Full-dimensional hull core.
// ---------------------------------------------------------------------------

struct Facets {
  MatX A;  // unit rows
  VecX b;
  double residual = 0.0;
  bool exact = false;
};

double data_scale(const std::vector<VecX>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

// Worst of: vertex violation, and distance of each facet from its d-th closest point.
double facet_residual(const MatX& A, const VecX& b, const std::vector<VecX>& pts) {
  const int d = static_cast<int>(A.cols());
  double worst = 0.0;
  std::vector<double> gaps(pts.size());
  for (int j = 0; j < A.rows(); ++j) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double s = A.row(j).dot(pts[i]) - b[j];
      worst = std::max(worst, s);
      gaps[i] = std::abs(s);
    }
    std::nth_element(gaps.begin(), gaps.begin() + (d - 1), gaps.end());
    worst = std::max(worst, gaps[d - 1]);
  }
  return worst;
}

void sort_unique_rows(MatX& A, VecX& b, double tol) {
  std::vector<int> idx(A.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](int i) {
    std::vector<double> k(A.cols() + 1);
    for (int j = 0; j < A.cols(); ++j) k[j] = A(i, j);
    k[A.cols()] = b[i];
    return k;
  };
  std::sort(idx.begin(), idx.end(), [&](int x, int y) { return key(x) < key(y); });
  std::vector<int> out;
  for (int i : idx) {
    bool dup = false;
    for (int o : out)
      if ((A.row(o) - A.row(i)).cwiseAbs().maxCoeff() <= tol && std::abs(b[o] - b[i]) <= tol * std::max(1.0, std::abs(b[i]))) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(i);
  }
  MatX A2(out.size(), A.cols());
  VecX b2(out.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    A2.row(r) = A.row(out[r]);
    b2[r] = b[out[r]];
  }
  A = std::move(A2);
  b = std::move(b2);
}

// Rows ordered by distance from the centroid so likely vertices enter the DD first.
std::vector<int> insertion_order(const std::vector<VecX>& pts, const VecX& c) {
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return (pts[a] - c).squaredNorm() > (pts[b] - c).squaredNorm(); });
  return order;
}

Facets facets_double(const std::vector<VecX>& pts) {
  const int d = static_cast<int>(pts[0].size());
  const int n = d + 1;
  VecX c = VecX::Zero(d);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double s = 0.0;
  for (const auto& p : pts) s = std::max(s, (p - c).norm());
  const std::vector<int> order = insertion_order(pts, c);

  std::vector<Row<double>> rows;
  std::vector<VecX> u;  // scaled, centred points in insertion order
  for (int i : order) {
    u.push_back((pts[i] - c) / s);
    Row<double> r(n);
    for (int j = 0; j < d; ++j) r[j] = u.back()[j];
    r[d] = -1.0;
    const double nr = std::sqrt(u.back().squaredNorm() + 1.0);
    for (double& v : r) v /= nr;
    rows.push_back(std::move(r));
  }
  const auto rays = double_description<double>(rows, n);

  Facets f;
  f.A.resize(static_cast<int>(rays.size()), d);
  f.b.resize(static_cast<int>(rays.size()));
  for (std::size_t k = 0; k < rays.size(); ++k) {
    Eigen::Map<const VecX> x(rays[k].x.data(), n);
    VecX a = x.head(d);
    double t = x[d];
    // Polish: refit the hyperplane through its incident points.
    std::vector<int> inc;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(a.dot(u[i]) - t) <= 1e-7 * a.norm()) inc.push_back(static_cast<int>(i));
    if (static_cast<int>(inc.size()) >= d) {
      MatX M(inc.size(), n);
      for (std::size_t i = 0; i < inc.size(); ++i) {
        M.row(i).head(d) = u[inc[i]].transpose();
        M(i, d) = -1.0;
      }
      Eigen::JacobiSVD<MatX> svd(M, Eigen::ComputeFullV);
      VecX y = svd.matrixV().col(n - 1);
      if (y.head(d).dot(a) < 0.0) y = -y;
      a = y.head(d);
      t = y[d];
    }
    const double na = a.norm();
    // a.(x - c)/s <= t  ->  a.x <= t s + a.c
    f.A.row(k) = (a / na).transpose();
    f.b[k] = (t * s + a.dot(c)) / na;
  }
  return f;
}

Facets facets_exact(const std::vector<VecX>& pts) {
  const int d = static_cast<int>(pts[0].size());
  const int n = d + 1;
  std::vector<mpq_class> c(d, 0);
  for (const auto& p : pts)
    for (int j = 0; j < d; ++j) c[j] += mpq_class(p[j]);
  for (auto& v : c) v /= static_cast<long>(pts.size());
  VecX cd(d);
  for (int j = 0; j < d; ++j) cd[j] = c[j].get_d();
  const std::vector<int> order = insertion_order(pts, cd);

  std::vector<Row<mpq_class>> rows;
  for (int i : order) {
    Row<mpq_class> r(n);
    for (int j = 0; j < d; ++j) r[j] = mpq_class(pts[i][j]) - c[j];
    r[d] = -1;
    rows.push_back(std::move(r));
  }
  const auto rays = double_description<mpq_class>(rows, n);
  Facets f;
  f.exact = true;
  f.A.resize(static_cast<int>(rays.size()), d);
  f.b.resize(static_cast<int>(rays.size()));
  for (std::size_t k = 0; k < rays.size(); ++k) {
    mpq_class rhs = rays[k].x[d];
    for (int j = 0; j < d; ++j) rhs += rays[k].x[j] * c[j];
    VecX a(d);
    for (int j = 0; j < d; ++j) a[j] = rays[k].x[j].get_d();
    const double na = a.norm();
    f.A.row(k) = (a / na).transpose();
    f.b[k] = rhs.get_d() / na;
  }
  return f;
}

// pts must be pairwise distinct and affinely full-dimensional.
Facets hull_facets(const std::vector<VecX>& pts) {
  const double scale = data_scale(pts);
  const double tol = 1e-9 * scale;
  Facets f = facets_double(pts);
  sort_unique_rows(f.A, f.b, 1e-12);
  f.residual = f.A.rows() > 0 ? facet_residual(f.A, f.b, pts) : std::numeric_limits<double>::infinity();
  if (f.A.rows() <= static_cast<int>(pts[0].size()) || !(f.residual <= tol)) {
    Facets e = facets_exact(pts);
    sort_unique_rows(e.A, e.b, 1e-12);
    e.residual = facet_residual(e.A, e.b, pts);
    f = std::move(e);
  }
  return f;
}

std::vector<VecX> dedupe(const std::vector<VecX>& points) {
  const double tol = 1e-12 * data_scale(points);
  std::vector<VecX> sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const VecX& a, const VecX& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  std::vector<VecX> out;
  for (const auto& p : sorted) {
    bool dup = false;
    for (auto it = out.rbegin(); it != out.rend(); ++it)
      if ((*it - p).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(p);
  }
  return out;
}

struct AffineFrame {
  VecX origin;
  MatX basis;  // d x r orthonormal
};

AffineFrame affine_frame(const std::vector<VecX>& pts) {
  const int d = static_cast<int>(pts[0].size());
  VecX c = VecX::Zero(d);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  MatX M(pts.size(), d);
  for (std::size_t i = 0; i < pts.size(); ++i) M.row(i) = (pts[i] - c).transpose();
  Eigen::JacobiSVD<MatX> svd(M, Eigen::ComputeThinV);
  const VecX sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, data_scale(pts)) * std::sqrt(static_cast<double>(pts.size()));
  int r = 0;
  while (r < sv.size() && sv[r] > tol) ++r;
  return {c, svd.matrixV().leftCols(r)};
}

void sort_lex(std::vector<VecX>& v) {
  std::sort(v.begin(), v.end(), [](const VecX& a, const VecX& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
}

// Indices of the extreme points of a full-dimensional point set.
std::vector<int> extreme_points(const std::vector<VecX>& pts, const Facets& f) {
  const int d = static_cast<int>(pts[0].size());
  const double tol = 1e-8 * data_scale(pts);
  std::vector<int> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<Row<double>> normals;
    for (int j = 0; j < f.A.rows(); ++j)
      if (std::abs(f.A.row(j).dot(pts[i]) - f.b[j]) <= tol) {
        const VecX a = f.A.row(j).transpose();
        normals.emplace_back(a.data(), a.data() + d);
      }
    if (static_cast<int>(normals.size()) >= d && rank_of<double>(normals, d, d) == d)
      out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

const HullStats& last_hull_stats() { return g_stats; }

VPolytope convex_hull(const std::vector<VecX>& points) {
  if (points.empty()) throw DomainError("convex_hull: no points");
  const int d = static_cast<int>(points[0].size());
  for (const auto& p : points)
    if (p.size() != d || !p.allFinite()) throw DomainError("convex_hull: points must be finite and of equal dimension");
  const std::vector<VecX> pts = dedupe(points);
  VPolytope P;
  P.dim = d;
  if (pts.size() == 1) {
    P.affine_rank = 0;
    P.vertices = pts;
    return P;
  }
  const AffineFrame fr = affine_frame(pts);
  const int r = static_cast<int>(fr.basis.cols());
  P.affine_rank = r;
  if (r == d) {
    const Facets f = hull_facets(pts);
    for (int i : extreme_points(pts, f)) P.vertices.push_back(pts[i]);
  } else {
    std::vector<VecX> proj;
    for (const auto& p : pts) proj.push_back(fr.basis.transpose() * (p - fr.origin));
    if (r == 1) {
      const auto [lo, hi] = std::minmax_element(proj.begin(), proj.end(),
                                                [](const VecX& a, const VecX& b) { return a[0] < b[0]; });
      P.vertices = {pts[lo - proj.begin()], pts[hi - proj.begin()]};
    } else {
      const Facets f = hull_facets(proj);
      for (int i : extreme_points(proj, f)) P.vertices.push_back(pts[i]);
    }
  }
  sort_lex(P.vertices);
  return P;
}

VPolytope minkowski_sum(const VPolytope& P, const VPolytope& Q) {
  if (P.dim != Q.dim) throw DomainError("minkowski_sum: dimension mismatch");
  if (P.vertices.empty() || Q.vertices.empty()) throw DomainError("minkowski_sum: empty operand");
  std::vector<VecX> sums;
  sums.reserve(P.vertices.size() * Q.vertices.size());
  for (const auto& p : P.vertices)
    for (const auto& q : Q.vertices) sums.push_back(p + q);
  return convex_hull(sums);
}

HPolytope v_to_h(const VPolytope& P) {
  if (P.vertices.empty()) throw DomainError("v_to_h: empty polytope");
  const std::vector<VecX> pts = dedupe(P.vertices);
  const int d = static_cast<int>(pts[0].size());
  if (static_cast<int>(pts.size()) <= d || affine_frame(pts).basis.cols() < d)
    throw DegenerateGeometryError("v_to_h: polytope is flat (affine rank below its dimension)");
  const Facets f = hull_facets(pts);
  g_stats = {f.exact, static_cast<int>(f.A.rows()), f.residual};
  return {d, f.A, f.b};
}

Hull hull_with_facets(const std::vector<VecX>& points) {
  if (points.empty()) throw DomainError("hull_with_facets: no points");
  const std::vector<VecX> pts = dedupe(points);
  const int d = static_cast<int>(pts[0].size());
  if (static_cast<int>(pts.size()) <= d || affine_frame(pts).basis.cols() < d)
    throw DegenerateGeometryError("hull_with_facets: point set is flat (affine rank below its dimension)");
  const Facets f = hull_facets(pts);
  g_stats = {f.exact, static_cast<int>(f.A.rows()), f.residual};
  Hull h;
  h.V.dim = d;
  h.V.affine_rank = d;
  for (int i : extreme_points(pts, f)) h.V.vertices.push_back(pts[i]);
  sort_lex(h.V.vertices);
  h.H = {d, f.A, f.b};
  return h;
}

bool contains(const HPolytope& H, const VecX& w, double tol) {
  if (w.size() != H.dim) throw DomainError("contains: dimension mismatch");
  for (int j = 0; j < H.rows(); ++j)
    if (H.A.row(j).dot(w) - H.b[j] > tol) return false;
  return true;
}

MarginResult directional_margin(const HPolytope& H, const VecX& w0, const VecX& v, double tol) {
  if (w0.size() != H.dim || v.size() != H.dim) throw DomainError("directional_margin: dimension mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-9) throw DomainError("directional_margin: direction must be unit-norm");
  // One-dimensional LP: the ratio test over rows gives the exact optimum.
  if (!contains(H, w0, tol)) return {MarginResult::Status::InfeasibleOrigin, 0.0};
  double gamma = std::numeric_limits<double>::infinity();
  for (int j = 0; j < H.rows(); ++j) {
    const double av = H.A.row(j).dot(v);
    if (av <= 1e-12) continue;
    gamma = std::min(gamma, std::max(0.0, (H.b[j] - H.A.row(j).dot(w0)) / av));
  }
  if (std::isinf(gamma)) return {MarginResult::Status::Unbounded, 0.0};
  return {MarginResult::Status::Ok, gamma};
}

}  // namespace ropejump
