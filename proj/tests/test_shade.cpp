#include <doctest.h>

#include "heliopack/error.hpp"
#include "heliopack/shade.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace heliopack;

namespace {

CandidatePanel panel(double az, double tilt, Point2 anchor, int id = 0, PanelSpec spec = {}) {
  CandidatePanel p = panel_geometry(spec, {0, az, tilt, 0}, anchor);
  p.id = id;
  return p;
}

std::vector<oracle::P3> corners(const CandidatePanel& p) { return {p.corners3d.begin(), p.corners3d.end()}; }

TimeSampleSet sun_samples(const std::vector<std::pair<double, double>>& az_el) {
  TimeSampleSet set;
  for (const auto& [az, el] : az_el) {
    TimeSample s;
    s.k = set.size();
    s.sun = sun_from_angles(az, el);
    set.samples.push_back(s);
  }
  return set;
}

std::vector<CandidatePanel> cluster(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(0.0, 6.0);
  std::uniform_int_distribution<int> az(0, 7), tilt(0, 3);
  std::vector<CandidatePanel> out;
  for (int i = 0; i < n; ++i) out.push_back(panel(45.0 * az(rng), 10.0 * tilt(rng), {pos(rng), pos(rng)}, i));
  return out;
}

}  // namespace

TEST_CASE("shadow_on_plane basic projections") {
  const auto flat = panel(180, 0, {2, 3});
  const Plane roof{Point3::Zero(), Point3::UnitZ()};
  const auto same = shadow_on_plane(make_prism(flat, sun_from_angles(200, 40)), roof);
  REQUIRE(same.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK((same[k] - flat.corners3d[k]).norm() < 1e-12);

  ShadowPrism wall;
  wall.base = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(1, 0, 1), Point3(0, 0, 1)};
  wall.direction = -sun_from_angles(180, 45).unit;
  const auto sh = shadow_on_plane(wall, roof);
  Ring flat2;
  for (const auto& p : sh) flat2.emplace_back(p.x(), p.y());
  const Box2 bb = bounds(flat2);
  CHECK(std::abs(signed_area(flat2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bb.max().y() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bb.min().y() == doctest::Approx(0.0).epsilon(1e-12));

  CHECK(shadow_on_plane(make_prism(flat, sun_from_angles(180, -5)), roof).empty());
}

TEST_CASE("shadow corners match per-corner ray casts") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> az(0, 360), el(5, 80), pos(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto caster = panel(az(rng), 30, {pos(rng), pos(rng)});
    const SunVector sun = sun_from_angles(az(rng), el(rng));
    // A plane well below every caster corner, tilted away from the sun, keeps the whole quad.
    const Point3 down_sun = Point3(sun.unit.x(), sun.unit.y(), 0.0).normalized();
    const Point3 normal = (Point3::UnitZ() + 0.3 * down_sun).normalized();
    const Plane low{Point3(0, 0, -10), normal};
    const auto sh = shadow_on_plane(make_prism(caster, sun), low);
    REQUIRE(sh.size() == 4);
    const Point3 d = -sun.unit;
    const Point3 e1 = normal.cross(Point3::UnitX()).normalized();
    const Point3 e2 = normal.cross(e1);
    for (int k = 0; k < 4; ++k) {
      // Solve p + t d = o + a e1 + b e2.
      Eigen::Matrix3d m;
      m << d, -e1, -e2;
      const Point3 sol = m.colPivHouseholderQr().solve(low.origin - caster.corners3d[k]);
      const Point3 hit = caster.corners3d[k] + sol.x() * d;
      CHECK((hit - sh[k]).norm() < 1e-9);
    }
  }
}

TEST_CASE("shaded_fraction reference cases") {
  const auto a = panel(180, 30, {0, 0});
  CHECK(shaded_fraction(a, panel(180, 30, {0, 2}), sun_from_angles(180, -3)) == 0.0);
  CHECK(shaded_fraction(panel(180, 0, {0, 0}), panel(180, 0, {1.5, 0}), sun_from_angles(100, 10)) == 0.0);
  CHECK(shaded_fraction(panel(180, 0, {0, 0}), panel(180, 0, {0, 0}), sun_from_angles(100, 10)) == 0.0);

  // Caster 0.6 m north of an identical receiver, sun due south at 20 degrees.
  const double depth = 1.6 * std::cos(deg2rad(30.0));
  const auto receiver = panel(180, 30, {0, 0});
  const auto north = panel(180, 30, {0, depth + 0.6});
  const SunVector sun = sun_from_angles(180, 20);
  const double exact_n = shaded_fraction(north, receiver, sun);
  CHECK(std::abs(exact_n - oracle::monte_carlo_shaded_fraction(corners(north), corners(receiver), sun.unit, 100000,
                                                               1)) <= 0.02);
  CHECK(exact_n == 0.0);
  // The mirrored arrangement: caster south of the receiver.
  const auto south = panel(180, 30, {0, -(depth + 0.6)});
  const double exact_s = shaded_fraction(south, receiver, sun);
  const double mc = oracle::monte_carlo_shaded_fraction(corners(south), corners(receiver), sun.unit, 100000, 2);
  CHECK(exact_s > 0.1);
  CHECK(std::abs(exact_s - mc) <= 0.02);
}

TEST_CASE("shaded_fraction agrees with Monte Carlo on random fixtures") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> az(0, 360), el(8, 70), off(-2.5, 2.5);
  std::uniform_int_distribution<int> tilt(1, 3), dir(0, 7);
  int nonzero = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const SunVector sun = sun_from_angles(az(rng), el(rng));
    const auto caster = panel(45.0 * dir(rng), 10.0 * tilt(rng), {0, 0});
    // Receivers placed behind the caster relative to the sun most of the time.
    const Point2 away = -Point2(sun.unit.x(), sun.unit.y()).normalized();
    const auto receiver = panel(45.0 * dir(rng), 10.0 * tilt(rng), 1.5 * away + Point2(off(rng), off(rng)) * 0.5);
    const double exact = shaded_fraction(caster, receiver, sun);
    const double mc =
        oracle::monte_carlo_shaded_fraction(corners(caster), corners(receiver), sun.unit, 100000, 100 + trial);
    CHECK(std::abs(exact - mc) <= 0.02);
    if (exact > 0.0) ++nonzero;
  }
  CHECK(nonzero >= 15);
}

TEST_CASE("no shading when the receiver is entirely sunward of the caster") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> az(0, 360), el(5, 80), pos(-4, 4);
  std::uniform_int_distribution<int> tilt(0, 3), dir(0, 7);
  int tested = 0;
  for (int trial = 0; trial < 2000 && tested < 200; ++trial) {
    const SunVector sun = sun_from_angles(az(rng), el(rng));
    const auto c = panel(45.0 * dir(rng), 10.0 * tilt(rng), {pos(rng), pos(rng)});
    const auto r = panel(45.0 * dir(rng), 10.0 * tilt(rng), {pos(rng), pos(rng)});
    double caster_max = -INFINITY, receiver_min = INFINITY;
    for (const auto& p : c.corners3d) caster_max = std::max(caster_max, p.dot(sun.unit));
    for (const auto& p : r.corners3d) receiver_min = std::min(receiver_min, p.dot(sun.unit));
    if (receiver_min <= caster_max) continue;
    ++tested;
    CHECK(shaded_fraction(c, r, sun) == 0.0);
  }
  CHECK(tested == 200);
}

TEST_CASE("build_shadow_matrix trivial cases") {
  const auto samples = sun_samples({{150, 20}, {180, 35}, {220, 15}});
  const auto one = build_shadow_matrix({panel(180, 30, {0, 0})}, samples);
  CHECK(one.num_entries() == 0);
  CHECK(one.diagonal.isZero(0.0));

  std::vector<CandidatePanel> flats;
  for (int i = 0; i < 6; ++i) flats.push_back(panel(180, 0, {1.1 * i, 0.3 * i}, i));
  CHECK(build_shadow_matrix(flats, samples).num_entries() == 0);
}

TEST_CASE("stored entries equal direct calls and are order independent") {
  const auto samples = sun_samples({{120, 12}, {150, 25}, {180, 35}, {210, 25}, {240, 12}, {180, 1}});
  const std::vector<CandidatePanel> two{panel(180, 30, {0, -1.8}, 0), panel(180, 20, {0, 0}, 1)};
  const auto m = build_shadow_matrix(two, samples);
  CHECK(m.num_entries() > 0);
  for (const auto& t : m.triplets()) {
    CHECK(t.fraction > 0.0f);
    CHECK(t.fraction <= 1.0f);
    CHECK(t.fraction == static_cast<float>(shaded_fraction(two[t.caster], two[t.receiver], samples.samples[t.k].sun)));
    CHECK(samples.samples[t.k].sun.elevation >= 3.0);
    CHECK(m.get(t.receiver, t.caster, t.k) == doctest::Approx(t.fraction));
  }

  std::mt19937_64 rng(2);
  const auto cands = cluster(rng, 40);
  const auto base = build_shadow_matrix(cands, samples);
  std::vector<int> perm(cands.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<CandidatePanel> shuffled(cands.size());
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = cands[perm[i]];
  const auto other = build_shadow_matrix(shuffled, samples);
  std::vector<ShadowTriplet> mapped;
  for (auto t : other.triplets()) {
    t.receiver = static_cast<std::uint32_t>(perm[t.receiver]);
    t.caster = static_cast<std::uint32_t>(perm[t.caster]);
    mapped.push_back(t);
  }
  std::sort(mapped.begin(), mapped.end(), [](const auto& a, const auto& b) {
    return std::tie(a.receiver, a.caster, a.k) < std::tie(b.receiver, b.caster, b.k);
  });
  CHECK(mapped == base.triplets());
}

TEST_CASE("culling is monotone and complete without limits") {
  std::mt19937_64 rng(6);
  const auto cands = cluster(rng, 50);
  const auto samples = sun_samples({{100, 6}, {135, 18}, {180, 30}, {225, 18}, {260, 6}, {190, 2}});
  ShadowOptions small{1.5, 3.0, nullptr}, large{3.0, 3.0, nullptr};
  const auto a = build_shadow_matrix(cands, samples, small).triplets();
  const auto b = build_shadow_matrix(cands, samples, large).triplets();
  CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end(), [](const auto& x, const auto& y) {
    return std::tie(x.receiver, x.caster, x.k) < std::tie(y.receiver, y.caster, y.k);
  }));
  CHECK(b.size() >= a.size());

  ShadowOptions all{INFINITY, 0.0, nullptr};
  const auto full = build_shadow_matrix(cands, samples, all);
  std::size_t expected = 0;
  for (const auto& s : samples.samples)
    for (const auto& r : cands)
      for (const auto& c : cands) {
        if (r.id == c.id) continue;
        const double f = shaded_fraction(c, r, s.sun);
        if (f >= kMinShadowFraction) {
          ++expected;
          CHECK(full.get(r.id, c.id, s.k) == doctest::Approx(f));
        }
      }
  CHECK(full.num_entries() == expected);
}

TEST_CASE("conflicting pairs can be skipped") {
  std::mt19937_64 rng(9);
  const auto cands = cluster(rng, 30);
  const auto samples = sun_samples({{150, 20}, {200, 25}});
  const ConflictGraph g = build_conflict_graph(cands, GridOptions{});
  ShadowOptions opt;
  opt.skip_pairs = &g;
  const auto m = build_shadow_matrix(cands, samples, opt);
  for (const auto& t : m.triplets()) CHECK_FALSE(g.adjacent(t.receiver, t.caster));
  const auto full = build_shadow_matrix(cands, samples);
  CHECK(full.num_entries() >= m.num_entries());
}

TEST_CASE("apply_fixed_shading") {
  const auto samples = sun_samples({{180, 20}, {180, 40}, {180, -2}});
  std::vector<CandidatePanel> cands{panel(180, 30, {0, 0}, 0), panel(180, 0, {0, -1.2}, 1)};
  PanelSpec big;
  big.length = 12.0;
  big.width = 12.0;
  cands.push_back(panel(180, 60, {0, -6.0}, 2, big));
  cands.push_back(panel(180, 30, {0, -2.0}, 3));
  ShadowMatrix m(4, 3, {});
  apply_fixed_shading(m, cands, {}, {0}, samples);
  CHECK(m.diagonal.row(0).isZero(0.0));
  apply_fixed_shading(m, cands, {1}, {0}, samples);
  CHECK(m.diagonal.row(0).isZero(0.0));
  apply_fixed_shading(m, cands, {2, 3}, {0}, samples);
  CHECK(m.diagonal(0, 0) == 1.0);
  CHECK(m.diagonal(0, 1) == 1.0);
  CHECK(m.diagonal(0, 2) == 0.0);
  CHECK_THROWS_AS(apply_fixed_shading(m, cands, {0}, {0}, samples), InvalidInput);

  std::mt19937_64 rng(19);
  const auto many = cluster(rng, 40);
  const auto sunny = sun_samples({{120, 10}, {180, 30}, {240, 10}, {200, 2}});
  const std::vector<int> placed{1, 4, 9, 16, 25, 36}, targets{0, 2, 3, 5, 7, 11, 13};
  ShadowOptions all{INFINITY, 3.0, nullptr};
  const Eigen::MatrixXd rows = fixed_shading(many, placed, targets, sunny, all);
  for (std::size_t t = 0; t < targets.size(); ++t)
    for (int k = 0; k < 4; ++k) {
      double sum = 0.0;
      if (sunny.samples[k].sun.elevation >= 3.0)
        for (int j : placed) sum += shaded_fraction(many[j], many[targets[t]], sunny.samples[k].sun);
      CHECK(rows(static_cast<Eigen::Index>(t), k) == doctest::Approx(std::min(1.0, sum)).epsilon(1e-12));
    }
}

TEST_CASE("shadow cache round trip") {
  std::mt19937_64 rng(14);
  const auto cands = cluster(rng, 30);
  const auto samples = sun_samples({{130, 15}, {180, 30}, {230, 15}});
  const auto m = build_shadow_matrix(cands, samples);
  const auto key = shadow_cache_key(cands, samples, ShadowOptions{});
  const auto path = std::filesystem::temp_directory_path() / "heliopack_test_shadow.bin";
  write_shadow_cache(path, m, key);
  const auto back = read_shadow_cache(path, key, 30, 3);
  REQUIRE(back.has_value());
  CHECK(back->triplets() == m.triplets());
  CHECK_FALSE(read_shadow_cache(path, key + 1, 30, 3).has_value());
  CHECK_FALSE(read_shadow_cache(path, key, 31, 3).has_value());
  CHECK_FALSE(read_shadow_cache(path.string() + ".missing", key, 30, 3).has_value());
  CHECK(std::filesystem::file_size(path) == 24 + 14 * m.num_entries());

  ShadowOptions other;
  other.cull_distance = 10.0;
  CHECK(shadow_cache_key(cands, samples, other) != key);

  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
  if (m.num_entries() > 0) CHECK_THROWS_AS(read_shadow_cache(path, key, 30, 3), DataError);
  std::filesystem::remove(path);
}
