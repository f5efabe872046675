#pragma once

// Planar and 3D geometry kernel: rings, polygons with holes, convex clipping,
// offsets, oriented boxes, Feret diameters and visibility tests.
//
// All coordinates are meters in a local east-north frame (+x east, +y north).
// Rings are stored open: the closing vertex is not repeated.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace heliopack {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Ring = std::vector<Point2>;
using Box2 = Eigen::AlignedBox2d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

template <typename Scalar>
Scalar cross2(const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Shoelace area; positive for counterclockwise rings.
template <typename Scalar>
Scalar signed_area(std::span<const Vec2<Scalar>> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return Scalar(0);
  Scalar twice(0);
  for (std::size_t i = 0; i < n; ++i) twice += cross2<Scalar>(ring[i], ring[(i + 1) % n]);
  return twice / Scalar(2);
}

inline double signed_area(const Ring& ring) { return signed_area<double>(std::span<const Point2>(ring)); }

/// Area-weighted centroid of a ring. Falls back to the vertex mean when the
/// ring has no area.
template <typename Scalar>
Vec2<Scalar> ring_centroid(std::span<const Vec2<Scalar>> ring) {
  const std::size_t n = ring.size();
  Vec2<Scalar> mean = Vec2<Scalar>::Zero();
  for (const auto& p : ring) mean += p;
  if (n == 0) return mean;
  mean /= Scalar(n);
  Scalar a2(0);
  Vec2<Scalar> acc = Vec2<Scalar>::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2<Scalar> p = ring[i] - mean;
    const Vec2<Scalar> q = ring[(i + 1) % n] - mean;
    const Scalar c = cross2<Scalar>(p, q);
    a2 += c;
    acc += (p + q) * c;
  }
  if (std::abs(a2) < Scalar(1e-15)) return mean;
  return mean + acc / (Scalar(3) * a2);
}

template <typename Scalar>
bool is_convex(std::span<const Vec2<Scalar>> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2<Scalar> e1 = ring[(i + 1) % n] - ring[i];
    const Vec2<Scalar> e2 = ring[(i + 2) % n] - ring[(i + 1) % n];
    const Scalar c = cross2<Scalar>(e1, e2);
    if (c > Scalar(0)) {
      if (sign < 0) return false;
      sign = 1;
    } else if (c < Scalar(0)) {
      if (sign > 0) return false;
      sign = -1;
    }
  }
  return sign != 0;
}

/// Rooftop outline with obstacle holes. Exterior counterclockwise, holes
/// clockwise after normalize().
struct RoofPolygon {
  Ring exterior;
  std::vector<Ring> holes;
  double rotation_applied = 0.0;  // degrees, accumulated by rotate_roof

  double area() const;
};

struct OrientedBox {
  Point2 center = Point2::Zero();
  double half_a = 0.0;  // along the long axis
  double half_b = 0.0;
  double angle = 0.0;  // long-axis direction in degrees from +x, in [0, 180)
  bool degenerate = false;

  double area() const { return 4.0 * half_a * half_b; }
  Point2 long_axis() const { return {std::cos(deg2rad(angle)), std::sin(deg2rad(angle))}; }
  Point2 short_axis() const { return {-std::sin(deg2rad(angle)), std::cos(deg2rad(angle))}; }
  std::array<Point2, 4> corners() const;
};

struct FeretDiameters {
  double max = 0.0;
  double min = 0.0;
  double elongation() const { return min > 0.0 ? max / min : INFINITY; }
};

enum class Location { Outside, Boundary, Inside };

Location locate(const Point2& p, std::span<const Point2> ring, double eps = 1e-9);
Location locate(const Point2& p, const RoofPolygon& roof, double eps = 1e-9);

/// Orients the exterior counterclockwise and holes clockwise; drops repeated
/// and collinear vertices.
void normalize(RoofPolygon& roof);
Ring remove_collinear(const Ring& ring, double eps = 1e-12);

Box2 bounds(std::span<const Point2> points);
Point2 polygon_centroid(const RoofPolygon& roof);

Ring convex_hull(std::span<const Point2> points);

/// Minimum-area enclosing rectangle via rotating calipers over the convex
/// hull. Collinear input yields a box with half_b == 0 and degenerate set.
OrientedBox min_rotated_box(std::span<const Point2> points);
OrientedBox min_rotated_box(const RoofPolygon& roof);

FeretDiameters feret_diameters(std::span<const Point2> points);

/// Sutherland-Hodgman clip of a convex subject against a convex clip ring.
Ring clip_convex(std::span<const Point2> subject, std::span<const Point2> clip);

/// Overlap area of two convex rings; bitwise commutative.
double convex_overlap_area(std::span<const Point2> a, std::span<const Point2> b);

struct ClipResult {
  std::vector<Ring> pieces;
  double area = 0.0;
};

/// Boolean intersection of two simple polygons.
ClipResult clip_intersection(const Ring& a, const Ring& b);

/// Grows (distance > 0) or shrinks (distance < 0) the polygon: the exterior
/// moves outward/inward and holes move the opposite way. Shrinking may split
/// the polygon; an empty vector means it vanished.
std::vector<RoofPolygon> offset_polygon(const RoofPolygon& roof, double distance);

/// Area available for panels: the exterior shrunk by `boundary` minus every
/// hole grown by `obstacle`.
std::vector<RoofPolygon> setback_region(const RoofPolygon& roof, double boundary, double obstacle);

/// True when the convex ring lies inside one of the region polygons, with
/// touching allowed up to `eps`.
bool convex_inside(const std::vector<RoofPolygon>& region, std::span<const Point2> convex,
                   double eps = 1e-6);

/// True iff the open segment p1-p2 stays in the closed roof region and does
/// not cross any hole. Throws InvalidInput if an endpoint is outside.
bool segment_visible(const Point2& p1, const Point2& p2, const RoofPolygon& roof);

RoofPolygon rotated_about(const RoofPolygon& roof, const Point2& center, double degrees);

/// Rotates about the centroid so the minimum box long axis lies at
/// `target_angle` degrees from +x.
RoofPolygon rotate_roof(const RoofPolygon& roof, double target_angle);

}  // namespace heliopack
