#include <doctest.h>

#include "heliopack/error.hpp"
#include "heliopack/layout.hpp"
#include "oracles.hpp"

#include <map>
#include <random>

using namespace heliopack;

namespace {

Ring rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

RoofPolygon roof_of(Ring ext, std::vector<Ring> holes = {}) {
  RoofPolygon r;
  r.exterior = std::move(ext);
  r.holes = std::move(holes);
  normalize(r);
  return r;
}

GridOptions single_config(double az, double tilt) {
  GridOptions o;
  o.azimuths = {az};
  o.tilts = {tilt};
  o.shifts = {{0, 0}};
  return o;
}

oracle::Poly poly(std::span<const Point2> pts) { return {pts.begin(), pts.end()}; }

}  // namespace

TEST_CASE("panel_geometry") {
  const PanelSpec spec;
  const auto flat = panel_geometry(spec, {0, 180.0, 0.0, 0}, {5, 5});
  const Box2 fb = bounds(std::span<const Point2>(flat.footprint));
  CHECK(fb.sizes().x() == doctest::Approx(1.0));
  CHECK(fb.sizes().y() == doctest::Approx(1.6));
  for (const auto& c : flat.corners3d) CHECK(c.z() == 0.0);
  CHECK(signed_area<double>(std::span<const Point2>(flat.footprint)) > 0.0);

  const auto tilted = panel_geometry(spec, {0, 180.0, 30.0, 0}, {0, 0});
  const Box2 tb = bounds(std::span<const Point2>(tilted.footprint));
  CHECK(tb.sizes().y() == doctest::Approx(1.6 * std::cos(deg2rad(30.0))));
  double top = 0.0;
  for (int k = 0; k < 4; ++k) {
    top = std::max(top, tilted.corners3d[k].z());
    // Low edge on the south (facing) side.
    if (tilted.corners3d[k].z() == 0.0) CHECK(tilted.corners3d[k].y() < 0.0);
    CHECK(tilted.corners3d[k].head<2>() == tilted.footprint[k]);
  }
  CHECK(top == doctest::Approx(0.8));
  // Coplanar corners with panel length along the slope.
  const Point3 n = (tilted.corners3d[1] - tilted.corners3d[0]).cross(tilted.corners3d[3] - tilted.corners3d[0]);
  CHECK(std::abs(n.dot(tilted.corners3d[2] - tilted.corners3d[0])) < 1e-12);
  CHECK((tilted.corners3d[0] - tilted.corners3d[1]).norm() == doctest::Approx(1.6));

  // East-facing: the horizontal edge (tilt hinge) runs north-south.
  const auto east = panel_geometry(spec, {0, 90.0, 20.0, 0}, {0, 0});
  const Point2 hinge = east.footprint[1] - east.footprint[2];
  CHECK(std::abs(hinge.x()) < 1e-12);
  CHECK(hinge.norm() == doctest::Approx(1.0));
  CHECK(east.facing().x() == doctest::Approx(1.0));
}

TEST_CASE("generate_candidates counts") {
  GridOptions defaults;
  CHECK(defaults.num_configs() == 128);
  CHECK(enumerate_configs(defaults).size() == 128);

  const PanelSpec spec;
  CHECK(generate_candidates(roof_of(rect(0, 0, 2, 2)), spec, defaults).empty());
  CHECK(generate_candidates(RoofPolygon{}, spec, defaults).empty());

  const auto cands = generate_candidates(roof_of(rect(0, 0, 10, 10)), spec, single_config(180, 0));
  CHECK(cands.size() == 40);
  for (std::size_t i = 0; i < cands.size(); ++i) CHECK(cands[i].id == static_cast<int>(i));

  GridOptions bad = defaults;
  bad.tilts = {95};
  CHECK_THROWS_AS(generate_candidates(roof_of(rect(0, 0, 10, 10)), spec, bad), InvalidInput);
}

TEST_CASE("every candidate respects boundary and obstacle setbacks") {
  const RoofPolygon roof = roof_of({{0, 0}, {12, 0}, {12, 5}, {7, 5}, {7, 9}, {0, 9}}, {rect(3, 3, 4.2, 4.1)});
  const auto cands = generate_candidates(roof, PanelSpec{}, GridOptions{});
  REQUIRE(cands.size() > 100);
  const oracle::Poly ext = roof.exterior;
  const std::vector<oracle::Poly> holes{roof.holes[0]};
  for (const auto& c : cands) {
    for (int s = 0; s <= 4; ++s)
      for (int t = 0; t <= 4; ++t) {
        const double a = s / 4.0, b = t / 4.0;
        const Point2 p = (1 - a) * ((1 - b) * c.footprint[0] + b * c.footprint[1]) +
                         a * ((1 - b) * c.footprint[3] + b * c.footprint[2]);
        CHECK(oracle::inside_ring(p, ext));
        CHECK(oracle::min_distance_to_rings(p, {ext}) >= 0.6 - 1e-6);
        CHECK_FALSE(oracle::inside_ring(p, holes[0]));
        CHECK(oracle::min_distance_to_rings(p, holes) >= 0.3 - 1e-6);
      }
  }
}

TEST_CASE("candidate generation is equivariant under a quarter turn") {
  const RoofPolygon roof = roof_of({{0.3, 0.1}, {11.7, 0.4}, {11.2, 8.9}, {0.1, 8.2}}, {rect(4.1, 3.3, 5.4, 4.9)});
  const RoofPolygon turned = rotated_about(roof, {0, 0}, 90.0);
  const GridOptions opts;
  const auto a = generate_candidates(roof, PanelSpec{}, opts);
  const auto b = generate_candidates(turned, PanelSpec{}, opts);
  CHECK(a.size() == b.size());
  std::map<std::tuple<double, double, int>, int> ca, cb;
  for (const auto& c : a) ++ca[{c.azimuth, c.tilt, c.shift}];
  // A counter-clockwise quarter turn maps compass azimuth a to a - 90.
  for (const auto& c : b) ++cb[{std::fmod(c.azimuth + 90.0, 360.0), c.tilt, c.shift}];
  CHECK(ca == cb);
}

TEST_CASE("candidate generation is deterministic") {
  const RoofPolygon roof = roof_of(rect(0, 0, 9, 7), {rect(2, 2, 3, 3)});
  const auto a = generate_candidates(roof, PanelSpec{}, GridOptions{});
  const auto b = generate_candidates(roof, PanelSpec{}, GridOptions{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].config == b[i].config);
    CHECK(a[i].anchor == b[i].anchor);
  }
  // Id order: configuration-major, then row-major.
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto key = [](const CandidatePanel& c) { return std::make_tuple(c.config, c.grid_row, c.grid_col); };
    CHECK(key(a[i - 1]) < key(a[i]));
  }
  const auto ga = build_conflict_graph(a, GridOptions{});
  const auto gb = build_conflict_graph(b, GridOptions{});
  CHECK(ga.edges() == gb.edges());
}

TEST_CASE("conflict rules") {
  const PanelSpec spec;
  const GridOptions opts;
  const PanelConfig south{0, 180.0, 0.0, 0};
  const auto a = panel_geometry(spec, south, {0, 0});
  CHECK_FALSE(panels_conflict(a, panel_geometry(spec, south, {5, 0}), 0.6));
  CHECK(panels_conflict(a, panel_geometry(spec, south, {0, 0}), 0.6));
  // Directly south with a 0.3 m gap: inside the access strip.
  CHECK(panels_conflict(a, panel_geometry(spec, south, {0, -1.9}), 0.6));
  CHECK_FALSE(panels_conflict(a, panel_geometry(spec, south, {0, -2.3}), 0.6));
  // Side by side in a row.
  CHECK_FALSE(panels_conflict(a, panel_geometry(spec, south, {1.0, 0}), 0.6));
  // Directly north with a small gap: the northern panel's strip hits a.
  CHECK(panels_conflict(a, panel_geometry(spec, south, {0, 1.9}), 0.6));

  const auto g = build_conflict_graph({a, panel_geometry(spec, south, {0, -1.9}), panel_geometry(spec, south, {3, -0.5})},
                                      opts);
  CHECK(g.num_edges() == 1);
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(1, 0));
  CHECK_FALSE(g.adjacent(0, 2));
  CHECK(g.is_independent({0, 2}));
  CHECK_FALSE(g.is_independent({0, 1}));
}

TEST_CASE("grid culling finds exactly the brute-force conflict pairs") {
  const RoofPolygon roof = roof_of(rect(0, 0, 7, 6), {rect(3, 2.5, 3.8, 3.2)});
  const GridOptions opts;
  const auto cands = generate_candidates(roof, PanelSpec{}, opts);
  const auto g = build_conflict_graph(cands, opts);
  std::vector<std::pair<int, int>> brute;
  for (int i = 0; i < static_cast<int>(cands.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(cands.size()); ++j)
      if (panels_conflict(cands[i], cands[j], opts.access_clearance)) brute.emplace_back(i, j);
  CHECK(g.edges() == brute);
  for (const auto& [i, j] : g.edges()) CHECK(i < j);

  // Spot-check the exact predicate against rasterized overlap areas.
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(cands.size()) - 1);
  int checked = 0;
  while (checked < 150) {
    const int i = pick(rng), j = pick(rng);
    if (i == j || (cands[i].anchor - cands[j].anchor).norm() > 3.0) continue;
    ++checked;
    const auto za = cands[i].access_zone(0.6), zb = cands[j].access_zone(0.6);
    const double area =
        oracle::raster_overlap_area(poly(cands[i].footprint), poly(cands[j].footprint), 0.01) +
        oracle::raster_overlap_area(poly(za), poly(cands[j].footprint), 0.01) +
        oracle::raster_overlap_area(poly(zb), poly(cands[i].footprint), 0.01);
    const bool edge = g.adjacent(i, j);
    if (area > 0.02) CHECK(edge);
    if (!edge) CHECK(area <= 0.02);
  }
}
