#include "heliopack/geom.hpp"

#include "heliopack/error.hpp"

#include <boost/geometry.hpp>

#include <algorithm>
#include <limits>

namespace heliopack {

namespace bg = boost::geometry;

namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, false, true>;  // CCW outer, closed
using BMulti = bg::model::multi_polygon<BPolygon>;

constexpr double kSnap = 1e-6;

double snap(double v) { return std::round(v / kSnap) * kSnap; }

void append_ring(const Ring& ring, BPolygon::ring_type& out) {
  for (const auto& p : ring) out.push_back(BPoint(snap(p.x()), snap(p.y())));
  if (!ring.empty()) out.push_back(out.front());
}

BPolygon to_boost(const RoofPolygon& roof, bool with_holes = true) {
  BPolygon poly;
  append_ring(roof.exterior, poly.outer());
  if (with_holes) {
    for (const auto& h : roof.holes) {
      poly.inners().emplace_back();
      append_ring(h, poly.inners().back());
    }
  }
  bg::correct(poly);
  return poly;
}

BPolygon ring_to_boost(const Ring& ring) {
  BPolygon poly;
  append_ring(ring, poly.outer());
  bg::correct(poly);
  return poly;
}

Ring from_boost_ring(const BPolygon::ring_type& r) {
  Ring ring;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) ring.emplace_back(bg::get<0>(r[i]), bg::get<1>(r[i]));
  return remove_collinear(ring);
}

std::vector<RoofPolygon> from_boost(const BMulti& multi, double rotation) {
  std::vector<RoofPolygon> out;
  for (const auto& poly : multi) {
    RoofPolygon roof;
    roof.exterior = from_boost_ring(poly.outer());
    roof.rotation_applied = rotation;
    if (roof.exterior.size() < 3 || std::abs(signed_area(roof.exterior)) < 1e-12) continue;
    for (const auto& inner : poly.inners()) {
      Ring h = from_boost_ring(inner);
      if (h.size() >= 3 && std::abs(signed_area(h)) > 1e-12) roof.holes.push_back(std::move(h));
    }
    normalize(roof);
    out.push_back(std::move(roof));
  }
  return out;
}

BMulti buffer(const BPolygon& poly, double distance) {
  BMulti out;
  bg::strategy::buffer::distance_symmetric<double> dist(distance);
  bg::strategy::buffer::join_miter join(2.0);
  bg::strategy::buffer::end_flat end;
  bg::strategy::buffer::point_square point;
  bg::strategy::buffer::side_straight side;
  bg::buffer(poly, out, dist, side, join, end, point);
  return out;
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

template <typename Fn>
void for_each_ring(const RoofPolygon& roof, Fn&& fn) {
  fn(roof.exterior);
  for (const auto& h : roof.holes) fn(h);
}

// Strict crossing of segments p1p2 and q1q2 (interiors intersect at one point).
bool proper_crossing(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const double d1 = cross2<double>(p2 - p1, q1 - p1);
  const double d2 = cross2<double>(p2 - p1, q2 - p1);
  const double d3 = cross2<double>(q2 - q1, p1 - q1);
  const double d4 = cross2<double>(q2 - q1, p2 - q1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

struct CaliperEdge {
  Point2 dir;
  double width;   // extent along dir
  double height;  // extent along the inward normal
  Point2 center;
};

// Visits every hull edge with its supporting-rectangle extents. Hull must be
// counterclockwise with at least three vertices.
template <typename Fn>
void rotating_calipers(const Ring& hull, Fn&& fn) {
  const std::size_t h = hull.size();
  auto next = [h](std::size_t i) { return (i + 1) % h; };
  std::size_t far = 0, right = 0, left = 0;
  {
    const Point2 e = (hull[1] - hull[0]).normalized();
    const Point2 n(-e.y(), e.x());
    for (std::size_t k = 0; k < h; ++k) {
      if (hull[k].dot(n) > hull[far].dot(n)) far = k;
      if (hull[k].dot(e) > hull[right].dot(e)) right = k;
      if (hull[k].dot(e) < hull[left].dot(e)) left = k;
    }
  }
  for (std::size_t i = 0; i < h; ++i) {
    const Point2 e = (hull[next(i)] - hull[i]).normalized();
    const Point2 n(-e.y(), e.x());
    while (hull[next(far)].dot(n) > hull[far].dot(n)) far = next(far);
    while (hull[next(right)].dot(e) > hull[right].dot(e)) right = next(right);
    while (hull[next(left)].dot(e) < hull[left].dot(e)) left = next(left);
    const double lo = hull[left].dot(e);
    const double hi = hull[right].dot(e);
    const double base = hull[i].dot(n);
    const double top = hull[far].dot(n);
    CaliperEdge edge;
    edge.dir = e;
    edge.width = hi - lo;
    edge.height = top - base;
    edge.center = e * (0.5 * (lo + hi)) + n * (0.5 * (base + top));
    fn(edge);
  }
}

OrientedBox degenerate_box(std::span<const Point2> points) {
  OrientedBox box;
  box.degenerate = true;
  if (points.empty()) return box;
  // Farthest pair gives the segment direction.
  std::size_t ia = 0, ib = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = (points[i] - points[j]).squaredNorm();
      if (d > best) {
        best = d;
        ia = i;
        ib = j;
      }
    }
  box.center = 0.5 * (points[ia] + points[ib]);
  box.half_a = 0.5 * std::sqrt(std::max(best, 0.0));
  if (box.half_a > 0.0) {
    const Point2 d = points[ib] - points[ia];
    double ang = rad2deg(std::atan2(d.y(), d.x()));
    ang = std::fmod(ang + 360.0, 180.0);
    box.angle = ang;
  }
  return box;
}

}  // namespace

double RoofPolygon::area() const {
  double a = std::abs(signed_area(exterior));
  for (const auto& h : holes) a -= std::abs(signed_area(h));
  return a;
}

std::array<Point2, 4> OrientedBox::corners() const {
  const Point2 u = long_axis() * half_a;
  const Point2 v = short_axis() * half_b;
  return {center - u - v, center + u - v, center + u + v, center - u + v};
}

Location locate(const Point2& p, std::span<const Point2> ring, double eps) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = ring[i];
    const Point2& b = ring[j];
    if (segment_distance(p, a, b) <= eps) return Location::Boundary;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside ? Location::Inside : Location::Outside;
}

Location locate(const Point2& p, const RoofPolygon& roof, double eps) {
  const Location ext = locate(p, roof.exterior, eps);
  if (ext != Location::Inside) return ext;
  for (const auto& h : roof.holes) {
    const Location l = locate(p, h, eps);
    if (l == Location::Boundary) return Location::Boundary;
    if (l == Location::Inside) return Location::Outside;
  }
  return Location::Inside;
}

Ring remove_collinear(const Ring& ring, double eps) {
  Ring r;
  for (const auto& p : ring)
    if (r.empty() || (p - r.back()).norm() > eps) r.push_back(p);
  while (r.size() > 1 && (r.front() - r.back()).norm() <= eps) r.pop_back();
  bool changed = true;
  while (changed && r.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < r.size() && r.size() >= 3; ++i) {
      const Point2& a = r[(i + r.size() - 1) % r.size()];
      const Point2& b = r[i];
      const Point2& c = r[(i + 1) % r.size()];
      const double len = (c - a).norm();
      if (len <= eps || std::abs(cross2<double>(b - a, c - a)) <= eps * len) {
        r.erase(r.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  return r;
}

void normalize(RoofPolygon& roof) {
  roof.exterior = remove_collinear(roof.exterior);
  if (signed_area(roof.exterior) < 0.0) std::reverse(roof.exterior.begin(), roof.exterior.end());
  for (auto& h : roof.holes) {
    h = remove_collinear(h);
    if (signed_area(h) > 0.0) std::reverse(h.begin(), h.end());
  }
  std::erase_if(roof.holes, [](const Ring& h) { return h.size() < 3; });
}

Box2 bounds(std::span<const Point2> points) {
  Box2 box;
  for (const auto& p : points) box.extend(p);
  return box;
}

Point2 polygon_centroid(const RoofPolygon& roof) {
  double total = 0.0;
  Point2 acc = Point2::Zero();
  auto add = [&](const Ring& ring, double sign) {
    const double a = std::abs(signed_area(ring));
    acc += sign * a * ring_centroid<double>(std::span<const Point2>(ring));
    total += sign * a;
  };
  add(roof.exterior, 1.0);
  for (const auto& h : roof.holes) add(h, -1.0);
  if (std::abs(total) < 1e-15) return ring_centroid<double>(std::span<const Point2>(roof.exterior));
  return acc / total;
}

Ring convex_hull(std::span<const Point2> points) {
  Ring pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Ring hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross2<double>(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2<double>(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

OrientedBox min_rotated_box(std::span<const Point2> points) {
  const Ring hull = convex_hull(points);
  if (hull.size() < 3) return degenerate_box(points);
  const Box2 bb = bounds(hull);
  const double scale = std::max(bb.sizes().maxCoeff(), 1e-12);
  if (std::abs(signed_area(hull)) <= 1e-12 * scale * scale) return degenerate_box(points);

  OrientedBox best;
  double best_area = std::numeric_limits<double>::infinity();
  rotating_calipers(hull, [&](const CaliperEdge& e) {
    const double area = e.width * e.height;
    if (area < best_area * (1.0 - 1e-12)) {
      best_area = area;
      Point2 axis = e.dir;
      double a = e.width, b = e.height;
      if (b > a) {
        axis = Point2(-e.dir.y(), e.dir.x());
        std::swap(a, b);
      }
      double ang = rad2deg(std::atan2(axis.y(), axis.x()));
      ang = std::fmod(ang + 360.0, 180.0);
      if (ang >= 180.0 - 1e-12) ang = 0.0;
      best.center = e.center;
      best.half_a = 0.5 * a;
      best.half_b = 0.5 * b;
      best.angle = ang;
      best.degenerate = false;
    }
  });
  return best;
}

OrientedBox min_rotated_box(const RoofPolygon& roof) {
  if (roof.exterior.size() < 3) throw InvalidInput("min_rotated_box: polygon needs at least 3 vertices");
  return min_rotated_box(std::span<const Point2>(roof.exterior));
}

FeretDiameters feret_diameters(std::span<const Point2> points) {
  if (points.size() < 3) throw InvalidInput("feret_diameters: need at least 3 points");
  const Ring hull = convex_hull(points);
  FeretDiameters f;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) f.max = std::max(f.max, (hull[i] - hull[j]).norm());
  if (hull.size() < 3 || std::abs(signed_area(hull)) <= 1e-12 * f.max * f.max) {
    if (hull.size() < 3) {
      for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
          f.max = std::max(f.max, (points[i] - points[j]).norm());
    }
    f.min = 0.0;
    return f;
  }
  f.min = std::numeric_limits<double>::infinity();
  rotating_calipers(hull, [&](const CaliperEdge& e) { f.min = std::min(f.min, e.height); });
  return f;
}

Ring clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
  Ring out(subject.begin(), subject.end());
  Ring input;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !out.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % m];
    const Point2 ab = b - a;
    input.swap(out);
    out.clear();
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = input[i];
      const Point2& q = input[(i + 1) % n];
      const double dp = cross2<double>(ab, p - a);
      const double dq = cross2<double>(ab, q - a);
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

double convex_overlap_area(std::span<const Point2> a, std::span<const Point2> b) {
  auto less = [](std::span<const Point2> x, std::span<const Point2> y) {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                        [](const Point2& p, const Point2& q) {
                                          return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
                                        });
  };
  if (less(b, a)) std::swap(a, b);
  const Ring r = clip_convex(a, b);
  return std::max(0.0, signed_area<double>(std::span<const Point2>(r)));
}

ClipResult clip_intersection(const Ring& a_in, const Ring& b_in) {
  ClipResult result;
  Ring a = a_in, b = b_in;
  if (a.size() < 3 || b.size() < 3) return result;
  if (std::abs(signed_area(a)) <= 0.0 || std::abs(signed_area(b)) <= 0.0) return result;
  if (signed_area(a) < 0.0) std::reverse(a.begin(), a.end());
  if (signed_area(b) < 0.0) std::reverse(b.begin(), b.end());
  const bool convex = is_convex<double>(std::span<const Point2>(a)) && is_convex<double>(std::span<const Point2>(b));
  if (convex) {
    auto lex_less = [](const Ring& x, const Ring& y) {
      return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                          [](const Point2& p, const Point2& q) {
                                            return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
                                          });
    };
    if (lex_less(b, a)) std::swap(a, b);
    Ring piece = clip_convex(a, b);
    const double area = signed_area(piece);
    if (piece.size() >= 3 && area > 0.0) {
      result.area = area;
      result.pieces.push_back(std::move(piece));
    }
    return result;
  }
  BPolygon pa = ring_to_boost(a), pb = ring_to_boost(b);
  BMulti out;
  // Fixed operand order keeps the area commutative to the last bit.
  if (bg::area(pb) < bg::area(pa) || (bg::area(pb) == bg::area(pa) && a.front().x() > b.front().x()))
    std::swap(pa, pb);
  bg::intersection(pa, pb, out);
  for (const auto& poly : out) {
    Ring r = from_boost_ring(poly.outer());
    if (r.size() < 3) continue;
    result.area += std::abs(signed_area(r));
    result.pieces.push_back(std::move(r));
  }
  return result;
}

std::vector<RoofPolygon> offset_polygon(const RoofPolygon& roof, double distance) {
  if (roof.exterior.size() < 3) throw InvalidInput("offset_polygon: exterior needs at least 3 vertices");
  if (distance == 0.0) {
    RoofPolygon copy = roof;
    normalize(copy);
    return {copy};
  }
  return from_boost(buffer(to_boost(roof), distance), roof.rotation_applied);
}

std::vector<RoofPolygon> setback_region(const RoofPolygon& roof, double boundary, double obstacle) {
  if (roof.exterior.size() < 3) return {};
  if (boundary < 0.0 || obstacle < 0.0) throw InvalidInput("setback_region: setbacks must be non-negative");
  BMulti shell;
  if (boundary > 0.0) {
    shell = buffer(to_boost(roof, false), -boundary);
  } else {
    shell.push_back(to_boost(roof, false));
  }
  BMulti blocked;
  for (const auto& hole : roof.holes) {
    if (hole.size() < 3) continue;
    BMulti grown;
    if (obstacle > 0.0) {
      grown = buffer(ring_to_boost(hole), obstacle);
    } else {
      grown.push_back(ring_to_boost(hole));
    }
    BMulti merged;
    bg::union_(blocked, grown, merged);
    blocked = std::move(merged);
  }
  if (blocked.empty()) return from_boost(shell, roof.rotation_applied);
  BMulti out;
  bg::difference(shell, blocked, out);
  return from_boost(out, roof.rotation_applied);
}

bool convex_inside(const std::vector<RoofPolygon>& region, std::span<const Point2> convex, double eps) {
  if (convex.size() < 3) return false;
  const Point2 c = ring_centroid<double>(convex);
  Ring shrunk;
  shrunk.reserve(convex.size());
  for (const auto& p : convex) {
    const Point2 d = p - c;
    const double len = d.norm();
    shrunk.push_back(len > eps ? Point2(c + d * (1.0 - eps / len)) : c);
  }
  const Box2 sb = bounds(shrunk);
  for (const auto& poly : region) {
    const Box2 pb = bounds(poly.exterior);
    if (!pb.contains(sb)) continue;
    bool ok = true;
    for (const auto& p : shrunk) {
      if (locate(p, poly, 0.0) == Location::Outside) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for_each_ring(poly, [&](const Ring& ring) {
      if (!ok) return;
      const std::size_t n = ring.size();
      for (std::size_t i = 0; i < n && ok; ++i) {
        const Point2& a = ring[i];
        const Point2& b = ring[(i + 1) % n];
        Box2 eb;
        eb.extend(a);
        eb.extend(b);
        if (!eb.intersects(sb)) continue;
        if (locate(a, shrunk, 0.0) == Location::Inside) ok = false;
        for (std::size_t k = 0; k < shrunk.size() && ok; ++k)
          if (proper_crossing(a, b, shrunk[k], shrunk[(k + 1) % shrunk.size()])) ok = false;
      }
    });
    if (ok) return true;
  }
  return false;
}

bool segment_visible(const Point2& p1, const Point2& p2, const RoofPolygon& roof) {
  constexpr double kTol = 1e-7;
  if (locate(p1, roof, kTol) == Location::Outside || locate(p2, roof, kTol) == Location::Outside)
    throw InvalidInput("segment_visible: endpoint outside roof");
  const Point2 d = p2 - p1;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return true;

  std::vector<double> ts{0.0, 1.0};
  for_each_ring(roof, [&](const Ring& ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = ring[i];
      const Point2& b = ring[(i + 1) % n];
      // Vertices on or near the segment.
      const double ta = (a - p1).dot(d) / len2;
      if (ta > 0.0 && ta < 1.0 && (p1 + ta * d - a).norm() <= kTol) ts.push_back(ta);
      const Point2 e = b - a;
      const double denom = cross2<double>(d, e);
      if (std::abs(denom) < 1e-15) continue;
      const double t = cross2<double>(a - p1, e) / denom;
      const double s = cross2<double>(a - p1, d) / denom;
      if (t > 0.0 && t < 1.0 && s >= -1e-12 && s <= 1.0 + 1e-12) ts.push_back(t);
    }
  });
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] < 1e-12) continue;
    const Point2 mid = p1 + 0.5 * (ts[i] + ts[i + 1]) * d;
    if (locate(mid, roof, kTol) == Location::Outside) return false;
  }
  return true;
}

RoofPolygon rotated_about(const RoofPolygon& roof, const Point2& center, double degrees) {
  const Eigen::Rotation2Dd rot(deg2rad(degrees));
  auto apply = [&](const Ring& ring) {
    Ring out;
    out.reserve(ring.size());
    for (const auto& p : ring) out.push_back(center + rot * (p - center));
    return out;
  };
  RoofPolygon out;
  out.exterior = apply(roof.exterior);
  for (const auto& h : roof.holes) out.holes.push_back(apply(h));
  out.rotation_applied = roof.rotation_applied + degrees;
  return out;
}

RoofPolygon rotate_roof(const RoofPolygon& roof, double target_angle) {
  if (!(target_angle >= 0.0 && target_angle < 180.0))
    throw InvalidInput("rotate_roof: target angle must lie in [0, 180)");
  const OrientedBox box = min_rotated_box(roof);
  if (box.degenerate || box.half_b <= 0.0) throw InvalidInput("rotate_roof: degenerate bounding box");
  RoofPolygon out = rotated_about(roof, polygon_centroid(roof), target_angle - box.angle);
  normalize(out);
  return out;
}

}  // namespace heliopack
