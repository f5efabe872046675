#include <doctest.h>

#include "heliopack/error.hpp"
#include "heliopack/opt.hpp"
#include "opt_fixture.hpp"

#include <random>

using namespace heliopack;
using heliopack::testing::as_ints;
using heliopack::testing::Problem;

namespace {

oracle::Instance instance(int n, std::uint64_t seed, double edge_prob = 0.2, double shade_prob = 0.3, int k = 4) {
  std::mt19937_64 rng(seed);
  auto inst = oracle::random_instance(n, k, edge_prob, shade_prob, rng);
  heliopack::testing::round_to_float(inst);
  return inst;
}

Selection random_feasible(const ObjectiveContext& ctx, std::mt19937_64& rng) {
  Selection x(ctx.size(), 0);
  std::uniform_real_distribution<double> uni(0, 1);
  for (int i = 0; i < ctx.size(); ++i) {
    if (uni(rng) < 0.5) continue;
    bool ok = true;
    for (int j : ctx.graph->neighbors(i)) ok = ok && !x[j];
    if (ok) x[i] = 1;
  }
  return x;
}

oracle::Instance plain(int n, double gain, double cost = 450.0) {
  oracle::Instance inst;
  inst.n = n;
  inst.k = 1;
  inst.cost.assign(n, cost);
  inst.tariff = {1.0};
  inst.gen.assign(n, {gain + cost});
  inst.diag.assign(n, {0.0});
  inst.s.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(1, 0.0)));
  return inst;
}

}  // namespace

TEST_CASE("objective evaluation") {
  Problem one(plain(1, 450.0));
  CHECK(objective_unshaded({0}, one.ctx) == 0.0);
  CHECK(objective_unshaded({1}, one.ctx) == doctest::Approx(450.0));
  one.shadow.diagonal(0, 0) = 1.0;
  CHECK(objective_shaded({1}, one.ctx) == doctest::Approx(-450.0));

  // No shading terms: both objectives agree on random vectors.
  auto inst = instance(12, 3);
  for (auto& row : inst.s)
    for (auto& v : row) std::fill(v.begin(), v.end(), 0.0);
  for (auto& d : inst.diag) std::fill(d.begin(), d.end(), 0.0);
  Problem flat(inst);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    Selection x(12);
    for (auto& v : x) v = rng() & 1;
    CHECK(objective_shaded(x, flat.ctx) == doctest::Approx(objective_unshaded(x, flat.ctx)).epsilon(1e-12));
  }

  // Three panels with hand-built shading.
  oracle::Instance h = plain(3, 100.0, 10.0);
  h.k = 2;
  h.tariff = {1.0, 2.0};
  h.gen = {{40.0, 30.0}, {50.0, 10.0}, {20.0, 60.0}};
  h.diag = {{0.1, 0.0}, {0.0, 0.0}, {0.0, 0.25}};
  h.s.assign(3, std::vector<std::vector<double>>(3, std::vector<double>(2, 0.0)));
  h.s[0][1] = {0.5, 0.25};
  h.s[0][2] = {0.75, 0.0};
  h.s[2][0] = {0.0, 0.5};
  Problem hp(h);
  for (int mask = 0; mask < 8; ++mask) {
    const Selection x{static_cast<std::uint8_t>(mask & 1), static_cast<std::uint8_t>(mask >> 1 & 1),
                      static_cast<std::uint8_t>(mask >> 2 & 1)};
    CHECK(objective_shaded(x, hp.ctx) == doctest::Approx(oracle::evaluate(h, as_ints(x))).epsilon(1e-12));
  }
  // All three selected: panel 0 is capped at full shading in sample 0.
  CHECK(objective_shaded({1, 1, 1}, hp.ctx) ==
        doctest::Approx(-30 + 0 + 2 * 30 * (1 - 0.25) + 50 + 20 + 10 * 2 + 2 * 60 * (1 - 0.75)));
}

TEST_CASE("solution metrics") {
  Problem p(instance(14, 21));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const Solution s = make_solution(random_feasible(p.ctx, rng), p.ctx);
    CHECK(s.shading_loss >= 0.0);
    CHECK(s.shading_loss <= 1.0);
    CHECK(s.annual_energy <= s.unshaded_energy + 1e-9);
    CHECK(s.panel_count == static_cast<int>(s.ids().size()));
  }
}

TEST_CASE("adding a panel never lowers another panel's shading sum") {
  Problem p(instance(12, 8, 0.1, 0.6));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    Selection x = random_feasible(p.ctx, rng);
    const int j = static_cast<int>(rng() % 12);
    if (x[j]) continue;
    for (int i = 0; i < 12; ++i)
      for (int k = 0; k < p.ctx.samples(); ++k) {
        double before = p.shadow.diagonal(i, k), after = before;
        for (int c = 0; c < 12; ++c) {
          if (c == i) continue;
          if (x[c]) before += p.shadow.get(i, c, k);
          if (x[c] || c == j) after += p.shadow.get(i, c, k);
        }
        CHECK(after >= before);
      }
  }
}

TEST_CASE("incremental deltas match full evaluation") {
  Problem p(instance(18, 11, 0.0, 0.5, 6));
  std::mt19937_64 rng(4);
  LocalState state(p.ctx, Selection(18, 0));
  Selection x(18, 0);
  for (int t = 0; t < 1000; ++t) {
    const int j = static_cast<int>(rng() % 18);
    const double before = objective_shaded(x, p.ctx);
    const double predicted = state.delta(j);
    const double d = state.flip(j);
    CHECK(d == predicted);
    x[j] ^= 1;
    const double after = objective_shaded(x, p.ctx);
    CHECK(before + d == doctest::Approx(after).epsilon(1e-9));
    CHECK(state.value() == doctest::Approx(after).epsilon(1e-9));
  }
  CHECK(state.consistent());

  // Toggle off then on: exact inverse.
  const Selection saved = state.selection();
  for (int j = 0; j < 18; ++j) {
    const double a = state.flip(j);
    const double b = state.flip(j);
    CHECK(a == -b);
    CHECK(state.selection() == saved);
    CHECK(state.consistent());
  }

  Problem iso(plain(3, 270.0));
  LocalState s2(iso.ctx, Selection(3, 0));
  CHECK(s2.delta(1) == doctest::Approx(270.0));
  s2.flip(1);
  CHECK(s2.delta(1) == doctest::Approx(-270.0));
}

TEST_CASE("exact solver small cases") {
  Problem edgeless(plain(6, 10.0));
  const Solution all = solve_exact(edgeless.ctx);
  CHECK(all.panel_count == 6);

  oracle::Instance tri = plain(3, 0.0, 0.0);
  tri.gen = {{3.0}, {2.0}, {2.0}};
  tri.edges = {{0, 1}, {1, 2}, {0, 2}};
  Problem tp(tri);
  const Solution t = solve_exact(tp.ctx);
  CHECK(t.selected == Selection{1, 0, 0});
  CHECK(t.objective == doctest::Approx(3.0));

  Problem big(plain(31, 1.0));
  CHECK_THROWS_AS(solve_exact(big.ctx), InvalidInput);
  ExactOptions tight;
  tight.node_limit = 3;
  Problem hard(instance(14, 2));
  CHECK_THROWS_AS(solve_exact(hard.ctx, tight), SolverNotProven);
}

TEST_CASE("exact solver matches enumeration") {
  for (int t = 0; t < 100; ++t) {
    const auto inst = instance(8 + t % 8, 1000 + t, 0.15 + 0.01 * (t % 10), 0.3);
    Problem p(inst);
    const auto e = oracle::enumerate_independent_sets(inst);
    const Solution s = solve_exact(p.ctx);
    CHECK(s.objective == doctest::Approx(e.best).epsilon(1e-9));
    CHECK(oracle::evaluate(inst, as_ints(s.selected)) == doctest::Approx(e.best).epsilon(1e-9));
    CHECK(p.graph.is_independent(s.ids()));
  }
}

TEST_CASE("greedy seed") {
  Problem edgeless(plain(5, 3.0));
  CHECK(greedy_seed(edgeless.ctx).panel_count == 5);

  oracle::Instance two = plain(2, 0.0, 0.0);
  two.gen = {{5.0}, {3.0}};
  two.edges = {{0, 1}};
  Problem tp(two);
  CHECK(greedy_seed(tp.ctx).selected == Selection{1, 0});

  for (int t = 0; t < 40; ++t) {
    const auto inst = instance(12, 500 + t);
    Problem p(inst);
    const Solution g = greedy_seed(p.ctx);
    CHECK(p.graph.is_independent(g.ids()));
    CHECK(g.objective <= oracle::enumerate_independent_sets(inst).best + 1e-9);
  }
}

TEST_CASE("local search") {
  Problem p(instance(16, 77));
  const Solution seed = greedy_seed(p.ctx);
  LocalSearchOptions zero;
  zero.budget = 0;
  const Solution same = solve_local_search(p.ctx, {seed}, zero);
  CHECK(same.selected == seed.selected);

  LocalSearchOptions opt;
  const Solution a = solve_local_search(p.ctx, {seed}, opt);
  const Solution b = solve_local_search(p.ctx, {seed}, opt);
  CHECK(a.selected == b.selected);
  CHECK(a.objective == b.objective);

  for (int t = 0; t < 20; ++t) {
    const auto inst = instance(12 + t % 9, 9000 + t, 0.15, 0.4);
    Problem q(inst);
    const double best = oracle::enumerate_independent_sets(inst).best;
    const Solution empty = make_solution(Selection(q.ctx.size(), 0), q.ctx);
    const Solution s = solve_local_search(q.ctx, {empty, greedy_seed(q.ctx)}, opt);
    CHECK(q.graph.is_independent(s.ids()));
    CHECK(s.objective >= 0.99 * best - 1e-9);
    CHECK(s.objective >= greedy_seed(q.ctx).objective - 1e-9);
  }

  Selection bad(16, 0);
  bad[p.graph.edges().front().first] = 1;
  bad[p.graph.edges().front().second] = 1;
  CHECK_THROWS_AS(solve_local_search(p.ctx, {make_solution(bad, p.ctx)}, opt), InvalidInput);
}

namespace {

struct RoofProblem {
  std::vector<CandidatePanel> cands;
  ConflictGraph graph;
  ShadowMatrix shadow;
  TimeSampleSet samples;
  ObjectiveContext ctx;
  GridOptions grid;

  RoofProblem(double side, double latitude, bool shaded) {
    RoofPolygon roof;
    roof.exterior = {{0, 0}, {side, 0}, {side, side}, {0, side}};
    normalize(roof);
    cands = generate_candidates(roof, PanelSpec{}, grid);
    graph = build_conflict_graph(cands, grid);
    samples = build_time_samples(latitude, 0.0, 0.0, synthetic_weather(latitude, 0.0, 0.0));
    const auto orients = config_orientations(grid);
    const auto table = baseline_generation(orients, samples);
    if (shaded) {
      ShadowOptions so;
      so.skip_pairs = &graph;
      shadow = build_shadow_matrix(cands, samples, so);
    }
    ctx = ObjectiveContext(candidate_generation(cands, table), EconomicParams{}, shaded ? &shadow : nullptr, &graph);
  }
};

}  // namespace

TEST_CASE("parallel-row baseline") {
  RoofPolygon tiny;
  tiny.exterior = {{0, 0}, {1.5, 0}, {1.5, 1.5}, {0, 1.5}};
  const auto none = generate_candidates(tiny, PanelSpec{}, GridOptions{});
  ConflictGraph g(0, {});
  ObjectiveContext empty(Eigen::MatrixXd(0, 3), EconomicParams{}, nullptr, &g);
  CHECK(parallel_row_baseline(none, empty).panel_count == 0);

  RoofProblem open(10.0, 25.0, false);
  const auto layouts = row_layouts(open.cands, open.ctx);
  REQUIRE(!layouts.empty());
  const Solution base = parallel_row_baseline(open.cands, open.ctx);
  CHECK(open.graph.is_independent(base.ids()));
  const CandidatePanel& rep = open.cands[base.ids().front()];
  CHECK(rep.azimuth == 180.0);
  // Highest-value tilt for a single equator-facing panel at this latitude.
  double best_tilt = -1, best_gain = -1e300;
  for (const auto& c : open.cands)
    if (c.azimuth == 180.0 && open.ctx.unshaded_gain(c.id) > best_gain) {
      best_gain = open.ctx.unshaded_gain(c.id);
      best_tilt = c.tilt;
    }
  CHECK(rep.tilt == best_tilt);
  for (const auto& s : layouts) CHECK(s.objective <= base.objective);
  // Every selected panel of the baseline shares a configuration.
  for (int i : base.ids()) CHECK(open.cands[i].config == rep.config);

  LocalSearchOptions lo;
  lo.budget = 20000;
  const Solution ls = solve_local_search(open.ctx, {base, greedy_seed(open.ctx)}, lo);
  CHECK(ls.objective >= base.objective);
  CHECK(open.graph.is_independent(ls.ids()));
}
