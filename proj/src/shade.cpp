#include "heliopack/shade.hpp"

#include "heliopack/error.hpp"
#include "heliopack/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <tuple>

namespace heliopack {

namespace {

constexpr double kUpstreamEps = 1e-9;

// Keeps the part of a convex 3D polygon where value(p) >= 0 (value affine).
template <typename Fn>
std::vector<Point3> clip_halfspace(const std::vector<Point3>& poly, Fn value) {
  std::vector<Point3> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = poly[i];
    const Point3& q = poly[(i + 1) % n];
    const double vp = value(p), vq = value(q);
    if (vp >= 0.0) out.push_back(p);
    if ((vp >= 0.0) != (vq >= 0.0)) out.push_back(p + (vp / (vp - vq)) * (q - p));
  }
  return out;
}

void make_ccw(Ring& r) {
  if (signed_area<double>(std::span<const Point2>(r)) < 0.0) std::reverse(r.begin(), r.end());
}

double max_height(const CandidatePanel& p) {
  double h = 0.0;
  for (const auto& c : p.corners3d) h = std::max(h, c.z());
  return h;
}

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof v);
  }
};

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw DataError("shadow cache is truncated");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

}  // namespace

ShadowPrism make_prism(const CandidatePanel& caster, const SunVector& sun) {
  return {caster.corners3d, -sun.unit};
}

Plane panel_plane(const CandidatePanel& panel) {
  const auto& c = panel.corners3d;
  Point3 n = (c[0] - c[1]).cross(c[2] - c[1]);
  if (n.z() < 0.0) n = -n;
  return {c[1], n.normalized()};
}

std::vector<Point3> shadow_on_plane(const ShadowPrism& prism, const Plane& plane, double min_distance) {
  if (prism.direction.z() >= 0.0) return {};
  const double dn = prism.direction.dot(plane.normal);
  if (std::abs(dn) < 1e-12) return {};
  auto distance = [&](const Point3& p) { return (plane.origin - p).dot(plane.normal) / dn; };
  const std::vector<Point3> base(prism.base.begin(), prism.base.end());
  std::vector<Point3> upstream = clip_halfspace(base, [&](const Point3& p) { return distance(p) - min_distance; });
  for (auto& p : upstream) p += distance(p) * prism.direction;
  return upstream;
}

double shaded_fraction(const CandidatePanel& caster, const CandidatePanel& receiver, const SunVector& sun) {
  if (sun.elevation <= 0.0) return 0.0;
  const Plane plane = panel_plane(receiver);
  const auto shadow = shadow_on_plane(make_prism(caster, sun), plane, kUpstreamEps);
  if (shadow.size() < 3) return 0.0;
  const auto& c = receiver.corners3d;
  const Point3 e1 = (c[0] - c[1]).normalized();
  const Point3 e2 = (c[2] - c[1]).normalized();
  auto to2d = [&](const Point3& p) { return Point2((p - c[1]).dot(e1), (p - c[1]).dot(e2)); };
  Ring rec, sh;
  for (const auto& p : c) rec.push_back(to2d(p));
  for (const auto& p : shadow) sh.push_back(to2d(p));
  make_ccw(rec);
  make_ccw(sh);
  const double area = std::abs(signed_area<double>(std::span<const Point2>(rec)));
  if (area <= 0.0) return 0.0;
  const double hit = convex_overlap_area(std::span<const Point2>(sh), std::span<const Point2>(rec));
  return std::clamp(hit / area, 0.0, 1.0);
}

ShadowMatrix::ShadowMatrix(int num_candidates, int num_samples, std::vector<ShadowTriplet> triplets)
    : diagonal(Eigen::MatrixXd::Zero(num_candidates, num_samples)), n_(num_candidates), k_(num_samples) {
  for (const auto& t : triplets) {
    if (t.receiver >= static_cast<std::uint32_t>(n_) || t.caster >= static_cast<std::uint32_t>(n_) ||
        t.k >= static_cast<std::uint32_t>(k_))
      throw InvalidInput("shadow entry out of range");
    if (t.receiver == t.caster) throw InvalidInput("diagonal terms belong in the diagonal matrix");
    if (!(t.fraction > 0.0f) || t.fraction > 1.0f) throw InvalidInput("shadow fraction outside (0, 1]");
  }
  auto key_r = [](const ShadowTriplet& t) { return std::make_tuple(t.receiver, t.caster, t.k); };
  std::sort(triplets.begin(), triplets.end(), [&](const auto& a, const auto& b) { return key_r(a) < key_r(b); });
  for (std::size_t i = 1; i < triplets.size(); ++i)
    if (key_r(triplets[i]) == key_r(triplets[i - 1])) throw InvalidInput("duplicate shadow entry");

  recv_offset_.assign(n_ + 1, 0);
  cast_offset_.assign(n_ + 1, 0);
  for (const auto& t : triplets) {
    ++recv_offset_[t.receiver + 1];
    ++cast_offset_[t.caster + 1];
  }
  for (int i = 0; i < n_; ++i) {
    recv_offset_[i + 1] += recv_offset_[i];
    cast_offset_[i + 1] += cast_offset_[i];
  }
  by_receiver_.resize(triplets.size());
  by_caster_.resize(triplets.size());
  std::vector<std::size_t> fill_r(recv_offset_.begin(), recv_offset_.end() - 1);
  std::vector<std::size_t> fill_c(cast_offset_.begin(), cast_offset_.end() - 1);
  for (const auto& t : triplets) by_receiver_[fill_r[t.receiver]++] = {t.caster, t.k, t.fraction};
  // Sorted by receiver already, so each caster slice comes out ordered by (receiver, k).
  for (const auto& t : triplets) by_caster_[fill_c[t.caster]++] = {t.receiver, t.k, t.fraction};
}

double ShadowMatrix::get(int i, int j, int k) const {
  if (i == j) return diagonal(i, k);
  const auto row = by_receiver(i);
  const auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(j, k), [](const ShadowEntry& e, auto key) {
    return std::make_pair(static_cast<int>(e.other), static_cast<int>(e.k)) < key;
  });
  if (it != row.end() && static_cast<int>(it->other) == j && it->k == k) return it->fraction;
  return 0.0;
}

std::vector<ShadowTriplet> ShadowMatrix::triplets() const {
  std::vector<ShadowTriplet> out;
  out.reserve(by_receiver_.size());
  for (int i = 0; i < n_; ++i)
    for (const auto& e : by_receiver(i)) out.push_back({static_cast<std::uint32_t>(i), e.other, e.k, e.fraction});
  return out;
}

namespace {

struct RawShadow {
  int receiver;
  int caster;
  int k;
  double fraction;
};

// Shading of every receiver by every caster (distinct ids, both indexing
// `candidates`), per sample, culled by swept boxes. Results are sorted by
// (receiver, caster, k).
std::vector<RawShadow> collect_shadows(const std::vector<CandidatePanel>& candidates, const std::vector<int>& receivers,
                                       const std::vector<int>& casters, const TimeSampleSet& samples,
                                       const ShadowOptions& options) {
  const int K = samples.size();
  if (receivers.empty() || casters.empty() || K == 0) return {};
  const int nr = static_cast<int>(receivers.size());
  std::vector<Box2> boxes(nr);
  Box2 all;
  double cell = 0.0;
  for (int r = 0; r < nr; ++r) {
    boxes[r] = bounds(std::span<const Point2>(candidates.at(static_cast<std::size_t>(receivers[r])).footprint));
    all.extend(boxes[r]);
    cell = std::max({cell, boxes[r].sizes().x(), boxes[r].sizes().y()});
  }
  cell = std::max(cell, 0.5);
  const int gx = std::max(1, static_cast<int>(std::ceil(all.sizes().x() / cell)) + 1);
  const int gy = std::max(1, static_cast<int>(std::ceil(all.sizes().y() / cell)) + 1);
  auto cx = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - all.min().x()) / cell)), 0, gx - 1); };
  auto cy = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - all.min().y()) / cell)), 0, gy - 1); };
  std::vector<std::vector<int>> grid(static_cast<std::size_t>(gx) * gy);
  for (int r = 0; r < nr; ++r)
    for (int y = cy(boxes[r].min().y()); y <= cy(boxes[r].max().y()); ++y)
      for (int x = cx(boxes[r].min().x()); x <= cx(boxes[r].max().x()); ++x)
        grid[static_cast<std::size_t>(y) * gx + x].push_back(r);

  const double cull2 = options.cull_distance * options.cull_distance;
  std::vector<std::vector<RawShadow>> per_sample(K);
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t ks) {
    const TimeSample& s = samples.samples[ks];
    if (s.sun.elevation <= 0.0 || s.sun.elevation < options.min_elevation) return;
    const Point2 away = -Point2(s.sun.unit.x(), s.sun.unit.y()).normalized();
    const double cot = 1.0 / std::tan(deg2rad(s.sun.elevation));
    std::vector<int> seen(nr, -1);
    auto& out = per_sample[ks];
    for (int cj = 0; cj < static_cast<int>(casters.size()); ++cj) {
      const int j = casters[cj];
      const CandidatePanel& caster = candidates.at(static_cast<std::size_t>(j));
      const double height = max_height(caster);
      if (height <= 0.0) continue;
      const Box2 own = bounds(std::span<const Point2>(caster.footprint));
      Box2 swept = own;
      const double reach = std::min(height * cot, options.cull_distance + 2.0 * cell);
      swept.extend(own.min() + reach * away);
      swept.extend(own.max() + reach * away);
      for (int y = cy(swept.min().y()); y <= cy(swept.max().y()); ++y)
        for (int x = cx(swept.min().x()); x <= cx(swept.max().x()); ++x)
          for (int r : grid[static_cast<std::size_t>(y) * gx + x]) {
            const int i = receivers[r];
            if (i == j || seen[r] == cj) continue;
            seen[r] = cj;
            if (!swept.intersects(boxes[r])) continue;
            const CandidatePanel& receiver = candidates[static_cast<std::size_t>(i)];
            if ((receiver.anchor - caster.anchor).squaredNorm() > cull2) continue;
            if (options.skip_pairs && options.skip_pairs->adjacent(i, j)) continue;
            const double f = shaded_fraction(caster, receiver, s.sun);
            if (f >= kMinShadowFraction) out.push_back({i, j, s.k, f});
          }
    }
  });
  std::size_t total = 0;
  for (const auto& v : per_sample) total += v.size();
  std::vector<RawShadow> out;
  out.reserve(total);
  for (auto& v : per_sample) {
    out.insert(out.end(), v.begin(), v.end());
    std::vector<RawShadow>().swap(v);
  }
  std::sort(out.begin(), out.end(), [](const RawShadow& a, const RawShadow& b) {
    return std::tie(a.receiver, a.caster, a.k) < std::tie(b.receiver, b.caster, b.k);
  });
  return out;
}

}  // namespace

ShadowMatrix build_shadow_matrix(const std::vector<CandidatePanel>& candidates, const TimeSampleSet& samples,
                                 const ShadowOptions& options) {
  const int n = static_cast<int>(candidates.size());
  const int K = samples.size();
  if (K > 65535) throw InvalidInput("too many time samples");
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  auto raw = collect_shadows(candidates, all, all, samples, options);
  std::vector<ShadowTriplet> trips;
  trips.reserve(raw.size());
  for (const auto& r : raw)
    trips.push_back({static_cast<std::uint32_t>(r.receiver), static_cast<std::uint32_t>(r.caster),
                     static_cast<std::uint16_t>(r.k), static_cast<float>(r.fraction)});
  return ShadowMatrix(n, K, std::move(trips));
}

Eigen::MatrixXd fixed_shading(const std::vector<CandidatePanel>& candidates, const std::vector<int>& placed,
                              const std::vector<int>& targets, const TimeSampleSet& samples,
                              const ShadowOptions& options) {
  std::vector<char> is_placed(candidates.size(), 0);
  for (int j : placed) is_placed.at(static_cast<std::size_t>(j)) = 1;
  std::vector<int> row_of(candidates.size(), -1);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (is_placed.at(static_cast<std::size_t>(targets[t])))
      throw InvalidInput("a placed panel cannot be a shading target");
    row_of[static_cast<std::size_t>(targets[t])] = static_cast<int>(t);
  }
  ShadowOptions opts = options;
  opts.skip_pairs = nullptr;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(targets.size()), samples.size());
  for (const auto& r : collect_shadows(candidates, targets, placed, samples, opts)) out(row_of[r.receiver], r.k) += r.fraction;
  return out.cwiseMin(1.0);
}

void apply_fixed_shading(ShadowMatrix& matrix, const std::vector<CandidatePanel>& candidates,
                         const std::vector<int>& placed, const std::vector<int>& targets,
                         const TimeSampleSet& samples, const ShadowOptions& options) {
  const Eigen::MatrixXd rows = fixed_shading(candidates, placed, targets, samples, options);
  for (std::size_t t = 0; t < targets.size(); ++t) matrix.diagonal.row(targets[t]) = rows.row(static_cast<Eigen::Index>(t));
}

std::uint64_t shadow_cache_key(const std::vector<CandidatePanel>& candidates, const TimeSampleSet& samples,
                               const ShadowOptions& options) {
  Fnv h;
  h.value(static_cast<std::uint64_t>(candidates.size()));
  h.value(static_cast<std::uint64_t>(samples.size()));
  for (const auto& c : candidates)
    for (const auto& p : c.corners3d) h.bytes(p.data(), 3 * sizeof(double));
  for (const auto& s : samples.samples) {
    h.bytes(s.sun.unit.data(), 3 * sizeof(double));
    h.value(s.sun.elevation);
  }
  h.value(options.cull_distance);
  h.value(options.min_elevation);
  if (options.skip_pairs) {
    h.value(static_cast<std::uint64_t>(options.skip_pairs->num_edges()));
    for (const auto& [a, b] : options.skip_pairs->edges()) {
      h.value(a);
      h.value(b);
    }
  }
  return h.h;
}

void write_shadow_cache(const std::filesystem::path& path, const ShadowMatrix& matrix, std::uint64_t key) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write shadow cache " + path.string());
    const auto trips = matrix.triplets();
    put_le<std::uint64_t>(out, key);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.num_candidates()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.num_samples()));
    put_le<std::uint64_t>(out, trips.size());
    for (const auto& t : trips) {
      put_le<std::uint32_t>(out, t.receiver);
      put_le<std::uint32_t>(out, t.caster);
      put_le<std::uint16_t>(out, t.k);
      put_le<float>(out, t.fraction);
    }
    if (!out) throw DataError("failed writing shadow cache " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<ShadowMatrix> read_shadow_cache(const std::filesystem::path& path, std::uint64_t key, int n, int k) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  if (get_le<std::uint64_t>(in) != key) return std::nullopt;
  const auto fn = get_le<std::uint32_t>(in);
  const auto fk = get_le<std::uint32_t>(in);
  if (fn != static_cast<std::uint32_t>(n) || fk != static_cast<std::uint32_t>(k)) return std::nullopt;
  const auto count = get_le<std::uint64_t>(in);
  const auto size = std::filesystem::file_size(path);
  if (size != 24 + count * 14) throw DataError("shadow cache size does not match its entry count");
  std::vector<ShadowTriplet> trips(count);
  for (auto& t : trips) {
    t.receiver = get_le<std::uint32_t>(in);
    t.caster = get_le<std::uint32_t>(in);
    t.k = get_le<std::uint16_t>(in);
    t.fraction = get_le<float>(in);
  }
  try {
    return ShadowMatrix(n, k, std::move(trips));
  } catch (const InvalidInput& e) {
    throw DataError(std::string("corrupt shadow cache: ") + e.what());
  }
}

}  // namespace heliopack
