#include "hybreach/geometry.hpp"

#include "hybreach/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hybreach {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Brings an edge-aligned frame into the canonical angle range [0, pi/2).
RotatedRect canonical_rect(const Point2& center, double extent_u, double extent_v, double theta) {
  constexpr double quarter = std::numbers::pi / 2.0;
  double turns = std::floor(theta / quarter);
  double reduced = theta - turns * quarter;
  if (reduced >= quarter - 1e-12) {
    reduced = 0.0;
    turns += 1.0;
  }
  if (reduced < 1e-12) reduced = 0.0;
  const bool swap = static_cast<long long>(std::llround(turns)) % 2 != 0;
  RotatedRect r;
  r.center = center;
  r.half_extents = swap ? Point2(extent_v, extent_u) : Point2(extent_u, extent_v);
  r.angle = reduced;
  return r;
}

}  // namespace

HyperRect::HyperRect(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() < 1) throw Error(ErrorKind::InvalidArgument, "HyperRect needs dimension >= 1");
  require_same_dim(lower_.size(), upper_.size(), "HyperRect bounds");
  for (Eigen::Index k = 0; k < lower_.size(); ++k) {
    if (!std::isfinite(lower_[k]) || !std::isfinite(upper_[k])) {
      throw Error(ErrorKind::NonFinite, "HyperRect bounds must be finite");
    }
    if (lower_[k] > upper_[k]) {
      throw Error(ErrorKind::InvalidArgument,
                  "HyperRect lower > upper in dimension " + std::to_string(k));
    }
  }
}

HyperRect HyperRect::around(const Vector& center, const Vector& half_widths) {
  return HyperRect(center - half_widths, center + half_widths);
}

std::vector<Vector> HyperRect::corners() const {
  const auto n = dim();
  std::vector<Vector> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Vector c = lower_;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) c[k] = upper_[k];
    }
    out.push_back(std::move(c));
  }
  return out;
}

HyperRect HyperRect::scaled(double factor) const {
  if (factor < 0.0) throw Error(ErrorKind::InvalidArgument, "scale factor must be >= 0");
  const Vector c = center();
  const Vector half = 0.5 * factor * widths();
  return HyperRect(c - half, c + half);
}

Point2 RotatedRect::axis(int i) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return i == 0 ? Point2(c, s) : Point2(-s, c);
}

std::array<Point2, 4> RotatedRect::corners() const {
  const Point2 u = axis(0) * half_extents[0];
  const Point2 v = axis(1) * half_extents[1];
  return {center - u - v, center + u - v, center + u + v, center - u + v};
}

void RotatedRect::halfspaces(Eigen::Matrix<double, 4, 2>& normals, Eigen::Vector4d& offsets) const {
  for (int i = 0; i < 2; ++i) {
    const Point2 a = axis(i);
    const double mid = a.dot(center);
    normals.row(2 * i) = a.transpose();
    offsets[2 * i] = mid + half_extents[i];
    normals.row(2 * i + 1) = -a.transpose();
    offsets[2 * i + 1] = -mid + half_extents[i];
  }
}

bool RotatedRect::contains(const Point2& p, double tol) const {
  const Point2 d = p - center;
  return std::abs(d.dot(axis(0))) <= half_extents[0] + tol &&
         std::abs(d.dot(axis(1))) <= half_extents[1] + tol;
}

HyperRect RotatedRect::bounding_box() const {
  const Point2 u = axis(0) * half_extents[0];
  const Point2 v = axis(1) * half_extents[1];
  const Point2 reach = u.cwiseAbs() + v.cwiseAbs();
  return HyperRect(center - reach, center + reach);
}

std::vector<HyperRect> uniform_partition(const HyperRect& rect, std::span<const int> counts) {
  const auto n = rect.dim();
  require_same_dim(static_cast<Eigen::Index>(counts.size()), n, "uniform_partition counts");
  std::size_t total = 1;
  for (int c : counts) {
    if (c < 1) throw Error(ErrorKind::InvalidArgument, "partition count must be >= 1");
    total *= static_cast<std::size_t>(c);
  }

  // Shared grid lines so adjacent cells have bitwise-identical faces.
  std::vector<std::vector<double>> edges(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const int c = counts[static_cast<std::size_t>(k)];
    auto& e = edges[static_cast<std::size_t>(k)];
    e.resize(static_cast<std::size_t>(c) + 1);
    const double lo = rect.lower()[k];
    const double width = rect.upper()[k] - lo;
    for (int i = 0; i < c; ++i) e[static_cast<std::size_t>(i)] = lo + width * i / c;
    e[static_cast<std::size_t>(c)] = rect.upper()[k];
  }

  std::vector<HyperRect> out;
  out.reserve(total);
  std::vector<int> index(static_cast<std::size_t>(n), 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    Vector lo(n);
    Vector hi(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(index[static_cast<std::size_t>(k)]);
      lo[k] = edges[static_cast<std::size_t>(k)][i];
      hi[k] = edges[static_cast<std::size_t>(k)][i + 1];
    }
    out.emplace_back(std::move(lo), std::move(hi));
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (++index[k] < counts[k]) break;
      index[k] = 0;
    }
  }
  return out;
}

HyperRect bounding_rect(std::span<const HyperRect> rects) {
  if (rects.empty()) throw Error(ErrorKind::EmptyCollection, "bounding_rect of empty list");
  Vector lo = rects.front().lower();
  Vector hi = rects.front().upper();
  for (const auto& r : rects.subspan(1)) {
    require_same_dim(r.dim(), lo.size(), "bounding_rect");
    lo = lo.cwiseMin(r.lower());
    hi = hi.cwiseMax(r.upper());
  }
  return HyperRect(std::move(lo), std::move(hi));
}

double volume(const HyperRect& rect) { return rect.widths().prod(); }

bool contains(const HyperRect& rect, const Vector& point, double tol) {
  require_same_dim(rect.dim(), point.size(), "contains");
  return ((rect.lower().array() - tol) <= point.array()).all() &&
         (point.array() <= (rect.upper().array() + tol)).all();
}

bool contains(const HyperRect& outer, const HyperRect& inner, double tol) {
  require_same_dim(outer.dim(), inner.dim(), "contains");
  return ((outer.lower().array() - tol) <= inner.lower().array()).all() &&
         (inner.upper().array() <= (outer.upper().array() + tol)).all();
}

HyperRect intersect(const HyperRect& a, const HyperRect& b, bool& ok) {
  require_same_dim(a.dim(), b.dim(), "intersect");
  Vector lo = a.lower().cwiseMax(b.lower());
  Vector hi = a.upper().cwiseMin(b.upper());
  ok = (lo.array() <= hi.array()).all();
  if (!ok) return a;
  return HyperRect(std::move(lo), std::move(hi));
}

std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower_size = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower_size && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

RotatedRect min_area_rotated_rect(std::span<const Point2> points) {
  if (points.empty()) throw Error(ErrorKind::EmptyCollection, "min_area_rotated_rect of no points");
  const auto hull = convex_hull(points);
  if (hull.size() == 1) return canonical_rect(hull[0], 0.0, 0.0, 0.0);
  if (hull.size() == 2) {
    const Point2 d = hull[1] - hull[0];
    return canonical_rect(0.5 * (hull[0] + hull[1]), 0.5 * d.norm(), 0.0, std::atan2(d.y(), d.x()));
  }

  // The optimal rectangle has a side collinear with some hull edge.
  double best_area = std::numeric_limits<double>::infinity();
  RotatedRect best;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2 edge = hull[(i + 1) % hull.size()] - hull[i];
    const double len = edge.norm();
    if (len == 0.0) continue;
    const Point2 u = edge / len;
    const Point2 v(-u.y(), u.x());
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const auto& p : hull) {
      const double pu = p.dot(u);
      const double pv = p.dot(v);
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      vmin = std::min(vmin, pv);
      vmax = std::max(vmax, pv);
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area) {
      best_area = area;
      const Point2 center = u * (0.5 * (umin + umax)) + v * (0.5 * (vmin + vmax));
      best = canonical_rect(center, 0.5 * (umax - umin), 0.5 * (vmax - vmin), std::atan2(u.y(), u.x()));
    }
  }
  return best;
}

RotatedRect min_area_rotated_rect(std::span<const Vector> points) {
  std::vector<Point2> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    if (p.size() != 2) throw Error(ErrorKind::DimensionMismatch, "rotated rectangles are 2D only");
    pts.emplace_back(p[0], p[1]);
  }
  return min_area_rotated_rect(std::span<const Point2>(pts));
}

}  // namespace hybreach
