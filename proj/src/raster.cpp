#include "heliopack/raster.hpp"

#include "heliopack/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

namespace heliopack {

namespace {

template <typename Array, typename Op>
Array rank_filter(const Array& in, const std::vector<Pixel>& offsets, typename Array::Scalar init, Op op) {
  const int h = static_cast<int>(in.rows()), w = static_cast<int>(in.cols());
  Array out(h, w);
  for (int c = 0; c < w; ++c)
    for (int r = 0; r < h; ++r) {
      auto v = init;
      for (const auto& o : offsets) {
        const int rr = r + o.x(), cc = c + o.y();
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        v = op(v, in(rr, cc));
      }
      out(r, c) = v;
    }
  return out;
}

struct Max {
  template <typename T>
  T operator()(T a, T b) const { return std::max(a, b); }
};
struct Min {
  template <typename T>
  T operator()(T a, T b) const { return std::min(a, b); }
};

Band brightness(const RasterImage& image) {
  Band b = image.bands.front();
  for (std::size_t i = 1; i < image.bands.size(); ++i) b = b.max(image.bands[i]);
  return b;
}

LabeledRegion make_region(int label, std::vector<Pixel> pixels, double resolution) {
  LabeledRegion reg;
  reg.label = label;
  reg.pixels = std::move(pixels);
  reg.area = static_cast<double>(reg.pixels.size()) * resolution * resolution;
  // Hull of pixel corners; only the extreme pixels of each row matter.
  std::unordered_map<int, std::pair<int, int>> extent;
  for (const auto& p : reg.pixels) {
    auto [it, fresh] = extent.try_emplace(p.x(), p.y(), p.y());
    if (!fresh) {
      it->second.first = std::min(it->second.first, p.y());
      it->second.second = std::max(it->second.second, p.y());
    }
  }
  Ring corners;
  corners.reserve(extent.size() * 4);
  for (const auto& [r, cc] : extent) {
    for (int dr : {0, 1}) {
      corners.emplace_back(cc.first * resolution, -(r + dr) * resolution);
      corners.emplace_back((cc.second + 1) * resolution, -(r + dr) * resolution);
    }
  }
  const FeretDiameters f = feret_diameters(std::span<const Point2>(corners));
  reg.feret_max = f.max;
  reg.feret_min = f.min;
  return reg;
}

// Directed pixel-edge tracing with the region on the left. Corner (i, j) is
// the point X = j, Y = -i.
std::vector<Ring> trace_rings(const std::vector<Pixel>& pixels) {
  if (pixels.empty()) return {};
  int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = std::numeric_limits<int>::min(), c1 = r1;
  for (const auto& p : pixels) {
    r0 = std::min(r0, p.x());
    r1 = std::max(r1, p.x());
    c0 = std::min(c0, p.y());
    c1 = std::max(c1, p.y());
  }
  const int h = r1 - r0 + 3, w = c1 - c0 + 3;  // one pixel of padding
  Mask m = Mask::Zero(h, w);
  for (const auto& p : pixels) m(p.x() - r0 + 1, p.y() - c0 + 1) = 1;

  // Directions: 0 east, 1 north, 2 west, 3 south (in X/Y).
  const std::array<int, 4> di{0, -1, 0, 1};
  const std::array<int, 4> dj{1, 0, -1, 0};
  const int cw = w + 1;
  auto key = [cw](int i, int j) { return i * cw + j; };
  // Outgoing edge directions per corner, as a 4-bit set.
  std::vector<std::uint8_t> out(static_cast<std::size_t>((h + 1) * cw), 0);
  for (int r = 1; r < h - 1; ++r)
    for (int c = 1; c < w - 1; ++c) {
      if (!m(r, c)) continue;
      if (!m(r - 1, c)) out[key(r, c + 1)] |= 1 << 2;  // top, westward
      if (!m(r + 1, c)) out[key(r + 1, c)] |= 1 << 0;  // bottom, eastward
      if (!m(r, c - 1)) out[key(r, c)] |= 1 << 3;      // left, southward
      if (!m(r, c + 1)) out[key(r + 1, c + 1)] |= 1 << 1;  // right, northward
    }

  // Start from corners with a single outgoing edge first so no loop begins
  // at a saddle, where the closing edge would be ambiguous.
  std::vector<Ring> rings;
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i <= h; ++i)
      for (int j = 0; j <= w; ++j) {
        while (out[key(i, j)] && (pass == 1 || std::popcount(out[key(i, j)]) == 1)) {
          int dir = 0;
          while (!(out[key(i, j)] & (1 << dir))) ++dir;
          std::vector<std::array<int, 2>> verts;
          int ci = i, cj = j;
          const int si = i, sj = j;
          int prev = -1;
          do {
            out[key(ci, cj)] &= static_cast<std::uint8_t>(~(1 << dir));
            if (dir != prev) verts.push_back({ci, cj});
            prev = dir;
            ci += di[dir];
            cj += dj[dir];
            if (ci == si && cj == sj) break;
            // Prefer a left turn so diagonal neighbours stay separate.
            const std::uint8_t avail = out[key(ci, cj)];
            int next = -1;
            for (int turn : {1, 0, 3}) {
              const int d = (prev + turn) % 4;
              if (avail & (1 << d)) {
                next = d;
                break;
              }
            }
            if (next < 0) break;
            dir = next;
          } while (true);
          Ring ring;
          ring.reserve(verts.size());
          for (const auto& v : verts) ring.emplace_back(v[1] + c0 - 1, -(v[0] + r0 - 1));
          ring = remove_collinear(ring);
          if (ring.size() >= 3) rings.push_back(std::move(ring));
        }
      }
  }
  return rings;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

void douglas_peucker(const Ring& pts, std::size_t first, std::size_t last, double tol, std::vector<bool>& keep) {
  if (last <= first + 1) return;
  double worst = -1.0;
  std::size_t idx = first;
  for (std::size_t k = first + 1; k < last; ++k) {
    const double d = point_segment_distance(pts[k], pts[first], pts[last % pts.size()]);
    if (d > worst) {
      worst = d;
      idx = k;
    }
  }
  if (worst > tol) {
    keep[idx] = true;
    douglas_peucker(pts, first, idx, tol, keep);
    douglas_peucker(pts, idx, last, tol, keep);
  }
}

}  // namespace

void RasterImage::validate() const {
  if (empty()) throw InvalidInput("raster image is empty");
  if (!(resolution > 0.0)) throw InvalidInput("raster resolution must be positive");
  for (const auto& b : bands)
    if (b.rows() != bands.front().rows() || b.cols() != bands.front().cols())
      throw InvalidInput("raster bands differ in size");
}

StructuringKernel StructuringKernel::disk(int radius) {
  if (radius < 0) throw InvalidInput("kernel radius must be non-negative");
  StructuringKernel k;
  k.radius = radius;
  k.shape = Mask::Zero(2 * radius + 1, 2 * radius + 1);
  for (int dr = -radius; dr <= radius; ++dr)
    for (int dc = -radius; dc <= radius; ++dc)
      if (dr * dr + dc * dc <= radius * radius) k.shape(dr + radius, dc + radius) = 1;
  return k;
}

StructuringKernel StructuringKernel::line(int length, int drow, int dcol) {
  if (length < 1) throw InvalidInput("line kernel length must be positive");
  const int half = length / 2;
  StructuringKernel k;
  k.radius = half;
  k.shape = Mask::Zero(2 * half + 1, 2 * half + 1);
  for (int s = -half; s <= half; ++s) k.shape(half + s * drow, half + s * dcol) = 1;
  return k;
}

std::vector<Pixel> StructuringKernel::offsets() const {
  std::vector<Pixel> out;
  for (int c = 0; c < shape.cols(); ++c)
    for (int r = 0; r < shape.rows(); ++r)
      if (shape(r, c)) out.emplace_back(r - radius, c - radius);
  return out;
}

Band dilate(const Band& band, const StructuringKernel& kernel) {
  return rank_filter(band, kernel.offsets(), -std::numeric_limits<float>::infinity(), Max{});
}

Band erode(const Band& band, const StructuringKernel& kernel) {
  return rank_filter(band, kernel.offsets(), std::numeric_limits<float>::infinity(), Min{});
}

Mask dilate(const Mask& mask, const StructuringKernel& kernel) {
  return rank_filter(mask, kernel.offsets(), std::uint8_t{0}, Max{});
}

Mask erode(const Mask& mask, const StructuringKernel& kernel) {
  return rank_filter(mask, kernel.offsets(), std::uint8_t{1}, Min{});
}

RasterImage morphological_gradient(const RasterImage& image, const StructuringKernel& kernel) {
  image.validate();
  const int span = 2 * kernel.radius + 1;
  if (span > image.height() || span > image.width()) throw InvalidInput("structuring kernel larger than image");
  RasterImage out;
  out.resolution = image.resolution;
  Band g = Band::Zero(image.height(), image.width());
  for (const auto& b : image.bands) g = g.max(dilate(b, kernel) - erode(b, kernel));
  out.bands.push_back(std::move(g));
  return out;
}

double otsu_threshold(const Band& band) {
  if (band.size() == 0) throw InvalidInput("empty band");
  const double lo = band.minCoeff(), hi = band.maxCoeff();
  if (hi <= lo) return lo;
  constexpr int kBins = 256;
  std::array<double, kBins> hist{};
  const double width = (hi - lo) / kBins;
  for (Eigen::Index i = 0; i < band.size(); ++i) {
    const int bin = std::min(kBins - 1, static_cast<int>((band(i) - lo) / width));
    hist[bin] += 1.0;
  }
  const double total = static_cast<double>(band.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * hist[i];
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < kBins - 1; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return lo + (best_bin + 1) * width;
}

Mask threshold_and_fill(const RasterImage& gradient, double threshold) {
  gradient.validate();
  const Band& g = gradient.bands.front();
  const int h = static_cast<int>(g.rows()), w = static_cast<int>(g.cols());
  Mask fg = (g > static_cast<float>(threshold)).cast<std::uint8_t>();
  Mask outside = Mask::Zero(h, w);
  std::deque<Pixel> queue;
  auto seed = [&](int r, int c) {
    if (!fg(r, c) && !outside(r, c)) {
      outside(r, c) = 1;
      queue.emplace_back(r, c);
    }
  };
  for (int r = 0; r < h; ++r) {
    seed(r, 0);
    seed(r, w - 1);
  }
  for (int c = 0; c < w; ++c) {
    seed(0, c);
    seed(h - 1, c);
  }
  while (!queue.empty()) {
    const Pixel p = queue.front();
    queue.pop_front();
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = p.x() + dr, cc = p.y() + dc;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        seed(rr, cc);
      }
  }
  return (outside == 0).cast<std::uint8_t>();
}

std::vector<LabeledRegion> label_regions(const Mask& mask, double resolution) {
  const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
  Eigen::ArrayXXi labels = Eigen::ArrayXXi::Zero(h, w);
  std::vector<LabeledRegion> regions;
  std::deque<Pixel> queue;
  int next = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c) || labels(r, c)) continue;
      ++next;
      std::vector<Pixel> pixels;
      labels(r, c) = next;
      queue.emplace_back(r, c);
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        pixels.push_back(p);
        const std::array<Pixel, 4> nbrs{Pixel(p.x() - 1, p.y()), Pixel(p.x() + 1, p.y()), Pixel(p.x(), p.y() - 1),
                                        Pixel(p.x(), p.y() + 1)};
        for (const auto& q : nbrs) {
          if (q.x() < 0 || q.x() >= h || q.y() < 0 || q.y() >= w) continue;
          if (!mask(q.x(), q.y()) || labels(q.x(), q.y())) continue;
          labels(q.x(), q.y()) = next;
          queue.push_back(q);
        }
      }
      regions.push_back(make_region(next, std::move(pixels), resolution));
    }
  return regions;
}

std::vector<LabeledRegion> filter_regions(const std::vector<LabeledRegion>& regions, double min_area,
                                          double max_elongation) {
  if (min_area < 0.0 || max_elongation < 1.0) throw InvalidInput("filter thresholds out of range");
  std::vector<LabeledRegion> kept;
  for (const auto& r : regions) {
    if (r.area < min_area || r.feret_min <= 0.0) continue;
    if (r.feret_max / r.feret_min > max_elongation) continue;
    kept.push_back(r);
  }
  return kept;
}

Mask ndvi_mask(const RasterImage& image, int red_band, int nir_band, double threshold) {
  image.validate();
  const int n = static_cast<int>(image.bands.size());
  if (red_band < 0 || red_band >= n || nir_band < 0 || nir_band >= n)
    throw ConfigError("NDVI band index out of range for a " + std::to_string(n) + "-band image");
  const Eigen::ArrayXXd red = image.bands[red_band].cast<double>();
  const Eigen::ArrayXXd nir = image.bands[nir_band].cast<double>();
  const Eigen::ArrayXXd den = nir + red;
  Mask out = Mask::Zero(red.rows(), red.cols());
  for (Eigen::Index i = 0; i < den.size(); ++i)
    if (den(i) != 0.0 && (nir(i) - red(i)) / den(i) > threshold) out(i) = 1;
  return out;
}

Mask shadow_mask(const RasterImage& image, const std::vector<int>& kernel_lengths, double threshold) {
  image.validate();
  if (kernel_lengths.empty()) throw InvalidInput("shadow index needs at least one kernel length");
  const Band bright = brightness(image);
  const int h = static_cast<int>(bright.rows()), w = static_cast<int>(bright.cols());
  Band acc = Band::Zero(h, w);
  const std::array<std::array<int, 2>, 4> dirs{{{0, 1}, {1, 1}, {1, 0}, {1, -1}}};
  for (int len : kernel_lengths) {
    // Replicated edges keep the image border from reading as a dark frame.
    const int pad = 2 * (len / 2);
    Band padded(h + 2 * pad, w + 2 * pad);
    for (int c = 0; c < padded.cols(); ++c)
      for (int r = 0; r < padded.rows(); ++r)
        padded(r, c) = bright(std::clamp(r - pad, 0, h - 1), std::clamp(c - pad, 0, w - 1));
    for (const auto& d : dirs) {
      const auto k = StructuringKernel::line(len, d[0], d[1]);
      acc += (erode(dilate(padded, k), k).block(pad, pad, h, w) - bright) / 4.0f;
    }
  }
  acc /= static_cast<float>(kernel_lengths.size());
  return (acc > static_cast<float>(threshold)).cast<std::uint8_t>();
}

Ring simplify_ring(const Ring& ring, double tolerance) {
  const std::size_t n = ring.size();
  if (n <= 3) return ring;
  // Anchor at vertex 0 and the vertex farthest from it.
  std::size_t far = 0;
  double best = -1.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double d = (ring[k] - ring[0]).squaredNorm();
    if (d > best) {
      best = d;
      far = k;
    }
  }
  std::vector<bool> keep(n, false);
  keep[0] = keep[far] = true;
  douglas_peucker(ring, 0, far, tolerance, keep);
  douglas_peucker(ring, far, n, tolerance, keep);
  Ring out;
  for (std::size_t k = 0; k < n; ++k)
    if (keep[k]) out.push_back(ring[k]);
  return out;
}

std::vector<RoofPolygon> regions_to_polygons(const std::vector<LabeledRegion>& regions, double resolution,
                                             std::vector<std::string>* warnings) {
  if (!(resolution > 0.0)) throw InvalidInput("resolution must be positive");
  std::vector<RoofPolygon> result;
  for (const auto& reg : regions) {
    std::vector<Ring> outer, inner;
    for (auto& ring : trace_rings(reg.pixels)) {
      for (auto& p : ring) p *= resolution;
      (signed_area(ring) > 0.0 ? outer : inner).push_back(std::move(ring));
    }
    std::vector<RoofPolygon> polys;
    for (auto& ext : outer) {
      RoofPolygon poly;
      poly.exterior = simplify_ring(ext, resolution);
      if (poly.exterior.size() < 3 || std::abs(signed_area(poly.exterior)) < resolution * resolution ||
          feret_diameters(std::span<const Point2>(poly.exterior)).min < resolution) {
        if (warnings)
          warnings->push_back("region " + std::to_string(reg.label) + ": part thinner than one pixel dropped");
        continue;
      }
      polys.push_back(std::move(poly));
    }
    for (auto& hole : inner) {
      // Smallest exterior containing the hole.
      int owner = -1;
      double owner_area = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < polys.size(); ++k) {
        const double a = std::abs(signed_area(polys[k].exterior));
        if (a < owner_area && locate(ring_centroid<double>(std::span<const Point2>(hole)), polys[k].exterior) ==
                                  Location::Inside) {
          owner = static_cast<int>(k);
          owner_area = a;
        }
      }
      Ring simple = simplify_ring(hole, resolution);
      if (owner < 0 || simple.size() < 3) continue;
      polys[owner].holes.push_back(std::move(simple));
    }
    for (auto& poly : polys) {
      normalize(poly);
      const Point2 origin = bounds(poly.exterior).min();
      for (auto& p : poly.exterior) p -= origin;
      for (auto& h : poly.holes)
        for (auto& p : h) p -= origin;
      result.push_back(std::move(poly));
    }
  }
  return result;
}

std::vector<RoofPolygon> segment_rooftops(const RasterImage& image, const SegmentOptions& options,
                                          std::vector<std::string>* warnings) {
  image.validate();
  const auto disk = StructuringKernel::disk(options.kernel_radius);
  const RasterImage grad = morphological_gradient(image, disk);
  const Band& g = grad.bands.front();
  const double thr = options.threshold ? *options.threshold : otsu_threshold(g);
  const Mask filled = threshold_and_fill(grad, thr);
  const auto buildings =
      filter_regions(label_regions(filled, image.resolution), options.min_area, options.max_elongation);

  const int h = image.height(), w = image.width();
  Mask excluded = Mask::Zero(h, w);
  if (options.red_band || options.nir_band) {
    if (!options.red_band || !options.nir_band) throw ConfigError("NDVI masking needs both red and NIR bands");
    excluded = excluded.max(ndvi_mask(image, *options.red_band, *options.nir_band, options.ndvi_threshold));
  }
  if (options.mask_shadows) {
    const Band bright = brightness(image);
    const double msi_thr =
        options.msi_threshold ? *options.msi_threshold : 0.15 * (bright.maxCoeff() - bright.minCoeff());
    excluded = excluded.max(shadow_mask(image, options.msi_lengths, msi_thr));
  }
  const Mask edges = (g > static_cast<float>(thr)).cast<std::uint8_t>();

  std::vector<LabeledRegion> roofs;
  for (const auto& b : buildings) {
    Mask region = Mask::Zero(h, w);
    for (const auto& p : b.pixels) region(p.x(), p.y()) = 1;
    // Largest edge-free component is the open roof surface; everything else
    // inside the building outline becomes an obstacle.
    const Mask interior = region * (1 - edges);
    const auto parts = label_regions(interior, image.resolution);
    if (parts.empty()) continue;
    const auto surface = std::max_element(parts.begin(), parts.end(), [](const auto& a, const auto& c) {
      return a.pixels.size() < c.pixels.size();
    });
    Mask surf = Mask::Zero(h, w);
    for (const auto& p : surface->pixels) surf(p.x(), p.y()) = 1;
    const Mask roof = erode(region, disk) * dilate(surf, disk) * (1 - excluded);
    std::vector<Pixel> pixels;
    for (int c = 0; c < w; ++c)
      for (int r = 0; r < h; ++r)
        if (roof(r, c)) pixels.emplace_back(r, c);
    if (pixels.size() < 3) continue;
    roofs.push_back(make_region(b.label, std::move(pixels), image.resolution));
  }
  return regions_to_polygons(roofs, image.resolution, warnings);
}

}  // namespace heliopack
