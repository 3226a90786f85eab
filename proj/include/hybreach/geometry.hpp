#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace hybreach {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Point2 = Eigen::Vector2d;

/// Closed axis-aligned box {x | lower <= x <= upper}. Degenerate faces are allowed.
class HyperRect {
 public:
  HyperRect(Vector lower, Vector upper);

  /// Box of half-width `half_widths` around `center`.
  static HyperRect around(const Vector& center, const Vector& half_widths);

  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  Eigen::Index dim() const noexcept { return lower_.size(); }

  Vector center() const { return 0.5 * (lower_ + upper_); }
  Vector widths() const { return upper_ - lower_; }

  /// All 2^n corners, corner i taking upper[k] when bit k of i is set.
  std::vector<Vector> corners() const;

  /// Box scaled about its center by `factor` (>= 0).
  HyperRect scaled(double factor) const;

  friend bool operator==(const HyperRect& a, const HyperRect& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Vector lower_;
  Vector upper_;
};

/// Planar rectangle with axes (cos angle, sin angle) and (-sin angle, cos angle).
struct RotatedRect {
  Point2 center = Point2::Zero();
  Point2 half_extents = Point2::Zero();
  double angle = 0.0;  // [0, pi/2)

  double area() const { return 4.0 * half_extents[0] * half_extents[1]; }
  Point2 axis(int i) const;
  std::array<Point2, 4> corners() const;

  /// Rows n_i and offsets d_i with n_i . p <= d_i describing the rectangle.
  void halfspaces(Eigen::Matrix<double, 4, 2>& normals, Eigen::Vector4d& offsets) const;

  bool contains(const Point2& p, double tol) const;
  HyperRect bounding_box() const;
};

/// Splits `rect` into prod(counts) boxes; dimension 0 varies fastest.
std::vector<HyperRect> uniform_partition(const HyperRect& rect, std::span<const int> counts);

HyperRect bounding_rect(std::span<const HyperRect> rects);

double volume(const HyperRect& rect);

bool contains(const HyperRect& rect, const Vector& point, double tol);
bool contains(const HyperRect& outer, const HyperRect& inner, double tol);

/// Box intersection; empty optional semantics are left to the caller via `ok`.
HyperRect intersect(const HyperRect& a, const HyperRect& b, bool& ok);

/// Andrew's monotone chain; counter-clockwise, no repeated or collinear vertices.
std::vector<Point2> convex_hull(std::span<const Point2> points);

/// Minimum-area enclosing rectangle via convex hull and rotating calipers.
RotatedRect min_area_rotated_rect(std::span<const Point2> points);

/// Overload for state vectors; rejects anything that is not 2D.
RotatedRect min_area_rotated_rect(std::span<const Vector> points);

}  // namespace hybreach
