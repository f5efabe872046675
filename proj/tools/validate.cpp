#include "validate.hpp"

#include "heliopack/geom.hpp"
#include "heliopack/layout.hpp"
#include "heliopack/opt.hpp"
#include "heliopack/shade.hpp"
#include "heliopack/solar.hpp"
#include "instance_context.hpp"
#include "oracles.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

namespace heliopack::cli {

namespace {

void report(std::ostream& out, bool ok, const std::string& name, const std::string& detail) {
  out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

bool check_solvers(const ValidateOptions& o, std::ostream& out) {
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<int> size(5, 15);
  int exact_ok = 0, local_ok = 0;
  double worst = 1.0;
  for (int t = 0; t < o.solver_instances; ++t) {
    auto inst = oracle::random_instance(size(rng), 6, 0.25, 0.3, rng);
    oracle::round_to_float(inst);
    const oracle::InstanceContext p(inst);
    const auto truth = oracle::enumerate_independent_sets(inst);
    const Solution ex = solve_exact(p.ctx);
    const double tol = 1e-9 * std::max(1.0, std::abs(truth.best));
    if (std::abs(ex.objective - truth.best) <= tol) ++exact_ok;
    LocalSearchOptions lo;
    lo.rng_seed = o.seed + static_cast<std::uint64_t>(t);
    const Solution ls = solve_local_search(p.ctx, {greedy_seed(p.ctx)}, lo);
    const double ratio = truth.best > 0.0 ? ls.objective / truth.best : (ls.objective >= truth.best - tol ? 1.0 : 0.0);
    worst = std::min(worst, ratio);
    if (ratio >= 0.99) ++local_ok;
  }
  const int n = o.solver_instances;
  report(out, exact_ok == n, "exact solver vs enumeration", std::to_string(exact_ok) + "/" + std::to_string(n));
  report(out, local_ok == n, "local search within 1% of optimum",
         std::to_string(local_ok) + "/" + std::to_string(n) + fmt(", worst ratio %.4f", worst));
  return exact_ok == n && local_ok == n;
}

std::vector<oracle::P3> corners(const CandidatePanel& c) { return {c.corners3d.begin(), c.corners3d.end()}; }

bool check_shading(const ValidateOptions& o, std::ostream& out) {
  std::mt19937_64 rng(o.seed + 17);
  std::uniform_real_distribution<double> az(0, 360), el(8, 70), off(-1.25, 1.25);
  std::uniform_int_distribution<int> tilt(1, 3), dir(0, 7);
  const PanelSpec spec;
  double worst = 0.0;
  for (int t = 0; t < o.shading_fixtures; ++t) {
    const SunVector sun = sun_from_angles(az(rng), el(rng));
    const auto make = [&](const Point2& at) {
      PanelConfig c;
      c.azimuth = 45.0 * dir(rng);
      c.tilt = 10.0 * tilt(rng);
      return panel_geometry(spec, c, at);
    };
    const auto caster = make({0, 0});
    const Point2 away = -Point2(sun.unit.x(), sun.unit.y()).normalized();
    const auto receiver = make(1.5 * away + Point2(off(rng), off(rng)));
    const double exact = shaded_fraction(caster, receiver, sun);
    const double mc = oracle::monte_carlo_shaded_fraction(corners(caster), corners(receiver), sun.unit, o.rays,
                                                          o.seed + 1000 + static_cast<std::uint64_t>(t));
    worst = std::max(worst, std::abs(exact - mc));
  }
  const bool ok = worst <= 0.02;
  report(out, ok, "shaded fraction vs Monte Carlo",
         std::to_string(o.shading_fixtures) + " fixtures" + fmt(", worst error %.4f", worst));
  return ok;
}

bool check_sampling(const ValidateOptions& o, std::ostream& out) {
  const Weather w = synthetic_weather(o.latitude, 0.0, 0.0);
  const auto samples = build_time_samples(o.latitude, 0.0, 0.0, w);
  const PanelOrientation flat{180.0, 0.0};
  const auto table = baseline_generation(std::span<const PanelOrientation>(&flat, 1), samples);
  const double estimate = table.G.sum();
  const double full = full_year_energy(flat, w, o.latitude, 0.0, 0.0);
  const double rel = std::abs(estimate / full - 1.0);
  const bool ok = rel <= 0.05;
  report(out, ok, "168-sample annual estimate", fmt("relative error %.4f at latitude %g", rel, o.latitude));
  return ok;
}

bool check_min_box(const ValidateOptions& o, std::ostream& out) {
  std::mt19937_64 rng(o.seed + 29);
  std::uniform_real_distribution<double> u(-5, 5);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    std::vector<Point2> pts(12);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const double area = min_rotated_box(std::span<const Point2>(pts)).area();
    const double swept = oracle::min_box_area_sweep(pts, 0.01);
    worst = std::max(worst, (area - swept) / swept);
  }
  const bool ok = worst <= 1e-3;
  report(out, ok, "minimum rotated box vs angle sweep", fmt("worst relative excess %.2e", worst));
  return ok;
}

}  // namespace

bool run_validation(const ValidateOptions& options, std::ostream& out) {
  bool ok = check_solvers(options, out);
  ok = check_shading(options, out) && ok;
  ok = check_sampling(options, out) && ok;
  ok = check_min_box(options, out) && ok;
  out << (ok ? "all checks passed" : "some checks failed") << "\n";
  return ok;
}

}  // namespace heliopack::cli
