#include "heliopack/layout.hpp"

#include "heliopack/error.hpp"
#include "heliopack/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace heliopack {

namespace {

// Width axis u and facing axis f; (u, f) is counter-clockwise.
std::pair<Point2, Point2> axes(double azimuth) {
  const double a = deg2rad(azimuth);
  return {Point2(std::cos(a), -std::sin(a)), Point2(std::sin(a), std::cos(a))};
}

Box2 box_of(std::span<const Point2> pts) { return bounds(pts); }

bool boxes_overlap(const Box2& a, const Box2& b) {
  return a.min().x() < b.max().x() && b.min().x() < a.max().x() && a.min().y() < b.max().y() &&
         b.min().y() < a.max().y();
}

constexpr double kAreaEps = 1e-9;

}  // namespace

void PanelSpec::validate() const {
  if (!(length > 0.0) || !(width > 0.0)) throw InvalidInput("panel dimensions must be positive");
  if (!(rated_power > 0.0)) throw InvalidInput("panel rating must be positive");
}

void GridOptions::validate() const {
  if (azimuths.empty() || tilts.empty() || shifts.empty()) throw InvalidInput("grid option lists must be nonempty");
  if (boundary_setback < 0.0 || obstacle_setback < 0.0 || access_clearance < 0.0)
    throw InvalidInput("setbacks must be non-negative");
  for (double t : tilts)
    if (t < 0.0 || t >= 90.0) throw InvalidInput("tilt must be in [0, 90)");
  for (double a : azimuths)
    if (a < 0.0 || a >= 360.0) throw InvalidInput("azimuth must be in [0, 360)");
}

std::vector<PanelConfig> enumerate_configs(const GridOptions& opts) {
  std::vector<PanelConfig> out;
  for (double az : opts.azimuths)
    for (double tilt : opts.tilts)
      for (int s = 0; s < static_cast<int>(opts.shifts.size()); ++s)
        out.push_back({static_cast<int>(out.size()), az, tilt, s});
  return out;
}

std::vector<PanelOrientation> config_orientations(const GridOptions& opts) {
  std::vector<PanelOrientation> out;
  for (const auto& c : enumerate_configs(opts)) out.push_back(c.orientation());
  return out;
}

Point2 CandidatePanel::facing() const { return axes(azimuth).second; }

std::array<Point2, 4> CandidatePanel::access_zone(double clearance) const {
  const Point2 f = facing();
  const Point2 fr = footprint[1], fl = footprint[2];
  return {fr, fr + clearance * f, fl + clearance * f, fl};
}

CandidatePanel panel_geometry(const PanelSpec& spec, const PanelConfig& config, const Point2& anchor) {
  CandidatePanel p;
  p.config = config.index;
  p.azimuth = config.azimuth;
  p.tilt = config.tilt;
  p.shift = config.shift;
  p.anchor = anchor;
  const auto [u, f] = axes(config.azimuth);
  const double t = deg2rad(config.tilt);
  const double half_w = spec.width / 2.0, half_d = spec.length * std::cos(t) / 2.0;
  const double rise = spec.length * std::sin(t);
  p.footprint = {anchor + half_w * u - half_d * f, anchor + half_w * u + half_d * f,
                 anchor - half_w * u + half_d * f, anchor - half_w * u - half_d * f};
  const std::array<double, 4> z{rise, 0.0, 0.0, rise};
  for (int k = 0; k < 4; ++k) p.corners3d[k] = Point3(p.footprint[k].x(), p.footprint[k].y(), z[k]);
  return p;
}

std::vector<CandidatePanel> generate_candidates(const RoofPolygon& roof, const PanelSpec& spec,
                                                const GridOptions& opts) {
  spec.validate();
  opts.validate();
  if (roof.exterior.size() < 3 || roof.area() <= 0.0) return {};
  const auto region = setback_region(roof, opts.boundary_setback, opts.obstacle_setback);
  if (region.empty()) return {};
  const auto configs = enumerate_configs(opts);
  std::vector<std::vector<CandidatePanel>> per_config(configs.size());
  parallel_for(configs.size(), [&](std::size_t ci) {
    const PanelConfig& cfg = configs[ci];
    const auto [u, f] = axes(cfg.azimuth);
    const double pitch_u = spec.width, pitch_f = spec.length * std::cos(deg2rad(cfg.tilt));
    double u0 = INFINITY, u1 = -INFINITY, f0 = INFINITY, f1 = -INFINITY;
    for (const auto& part : region)
      for (const auto& p : part.exterior) {
        u0 = std::min(u0, p.dot(u));
        u1 = std::max(u1, p.dot(u));
        f0 = std::min(f0, p.dot(f));
        f1 = std::max(f1, p.dot(f));
      }
    const Eigen::Vector2d& shift = opts.shifts[cfg.shift];
    const double start_u = u0 + 0.5 * shift.x() * pitch_u, start_f = f0 + 0.5 * shift.y() * pitch_f;
    const int cols = static_cast<int>(std::floor((u1 - start_u) / pitch_u + 1e-9));
    const int rows = static_cast<int>(std::floor((f1 - start_f) / pitch_f + 1e-9));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double cu = start_u + (c + 0.5) * pitch_u, cf = start_f + (r + 0.5) * pitch_f;
        CandidatePanel p = panel_geometry(spec, cfg, cu * u + cf * f);
        if (!convex_inside(region, std::span<const Point2>(p.footprint))) continue;
        p.grid_row = r;
        p.grid_col = c;
        per_config[ci].push_back(p);
      }
  });
  std::vector<CandidatePanel> out;
  for (auto& v : per_config)
    for (auto& p : v) {
      p.id = static_cast<int>(out.size());
      out.push_back(std::move(p));
    }
  return out;
}

ConflictGraph::ConflictGraph(int num_nodes, std::vector<std::pair<int, int>> edges) : n_(num_nodes) {
  for (auto& e : edges) {
    if (e.first == e.second) throw InvalidInput("conflict graph self-loop");
    if (e.first > e.second) std::swap(e.first, e.second);
    if (e.first < 0 || e.second >= n_) throw InvalidInput("conflict edge out of range");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  std::vector<int> degree(n_ + 1, 0);
  for (const auto& [a, b] : edges_) {
    ++degree[a];
    ++degree[b];
  }
  offset_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) offset_[i + 1] = offset_[i] + degree[i];
  adj_.resize(offset_[n_]);
  std::vector<int> fill(offset_.begin(), offset_.end() - 1);
  for (const auto& [a, b] : edges_) {
    adj_[fill[a]++] = b;
    adj_[fill[b]++] = a;
  }
  for (int i = 0; i < n_; ++i) std::sort(adj_.begin() + offset_[i], adj_.begin() + offset_[i + 1]);
}

bool ConflictGraph::adjacent(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

bool ConflictGraph::is_independent(const std::vector<int>& selected) const {
  std::vector<char> on(n_, 0);
  for (int i : selected) {
    if (i < 0 || i >= n_) return false;
    on[i] = 1;
  }
  for (const auto& [a, b] : edges_)
    if (on[a] && on[b]) return false;
  return true;
}

bool panels_conflict(const CandidatePanel& a, const CandidatePanel& b, double clearance) {
  const std::span<const Point2> fa(a.footprint), fb(b.footprint);
  if (convex_overlap_area(fa, fb) > kAreaEps) return true;
  if (clearance <= 0.0) return false;
  const auto za = a.access_zone(clearance), zb = b.access_zone(clearance);
  return convex_overlap_area(std::span<const Point2>(za), fb) > kAreaEps ||
         convex_overlap_area(std::span<const Point2>(zb), fa) > kAreaEps;
}

ConflictGraph build_conflict_graph(const std::vector<CandidatePanel>& candidates, const GridOptions& opts) {
  const int n = static_cast<int>(candidates.size());
  if (n == 0) return ConflictGraph(0, {});
  const double clearance = opts.access_clearance;
  // Extended boxes cover footprint plus access zone.
  std::vector<Box2> ext(n), foot(n);
  double cell = 0.0;
  for (int i = 0; i < n; ++i) {
    foot[i] = box_of(std::span<const Point2>(candidates[i].footprint));
    ext[i] = foot[i];
    const auto z = candidates[i].access_zone(clearance);
    ext[i].extend(box_of(std::span<const Point2>(z)));
    cell = std::max({cell, ext[i].sizes().x(), ext[i].sizes().y()});
  }
  Box2 all;
  for (const auto& b : ext) all.extend(b);
  cell = std::max(cell, 1e-6);
  const int gx = std::max(1, static_cast<int>(std::ceil(all.sizes().x() / cell)));
  const int gy = std::max(1, static_cast<int>(std::ceil(all.sizes().y() / cell)));
  auto cell_range = [&](const Box2& b) {
    const int x0 = std::clamp(static_cast<int>((b.min().x() - all.min().x()) / cell), 0, gx - 1);
    const int x1 = std::clamp(static_cast<int>((b.max().x() - all.min().x()) / cell), 0, gx - 1);
    const int y0 = std::clamp(static_cast<int>((b.min().y() - all.min().y()) / cell), 0, gy - 1);
    const int y1 = std::clamp(static_cast<int>((b.max().y() - all.min().y()) / cell), 0, gy - 1);
    return std::array<int, 4>{x0, x1, y0, y1};
  };
  std::vector<std::array<int, 4>> ranges(n);
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(gx) * gy);
  for (int i = 0; i < n; ++i) {
    ranges[i] = cell_range(ext[i]);
    for (int y = ranges[i][2]; y <= ranges[i][3]; ++y)
      for (int x = ranges[i][0]; x <= ranges[i][1]; ++x) buckets[static_cast<std::size_t>(y) * gx + x].push_back(i);
  }
  std::vector<std::vector<std::pair<int, int>>> found(buckets.size());
  parallel_for(buckets.size(), [&](std::size_t bi) {
    const int bx = static_cast<int>(bi % gx), by = static_cast<int>(bi / gx);
    const auto& members = buckets[bi];
    for (std::size_t p = 0; p < members.size(); ++p)
      for (std::size_t q = p + 1; q < members.size(); ++q) {
        const int i = members[p], j = members[q];
        // Handle each pair only in the lowest cell both occupy.
        const int lx = std::max(ranges[i][0], ranges[j][0]), ly = std::max(ranges[i][2], ranges[j][2]);
        if (lx != bx || ly != by) continue;
        if (!boxes_overlap(ext[i], foot[j]) && !boxes_overlap(ext[j], foot[i])) continue;
        if (panels_conflict(candidates[i], candidates[j], clearance)) found[bi].emplace_back(i, j);
      }
  });
  std::vector<std::pair<int, int>> edges;
  for (auto& f : found) edges.insert(edges.end(), f.begin(), f.end());
  return ConflictGraph(n, std::move(edges));
}

}  // namespace heliopack
