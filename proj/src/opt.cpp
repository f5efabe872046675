#include "heliopack/opt.hpp"

#include "heliopack/error.hpp"
#include "heliopack/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace heliopack {

namespace {

// Shading sums are accumulated in fixed point so that toggling a caster on
// and off restores them bit for bit, independent of summation order.
constexpr double kFixedScale = 1099511627776.0;  // 2^40
constexpr std::int64_t kFixedOne = std::int64_t{1} << 40;

std::int64_t to_fixed(double f) { return std::llround(f * kFixedScale); }

double unshaded_fraction(std::int64_t shade) {
  return static_cast<double>(kFixedOne - std::min(shade, kFixedOne)) / kFixedScale;
}

void check_selection(const Selection& x, const ObjectiveContext& ctx) {
  if (static_cast<int>(x.size()) != ctx.size()) throw InvalidInput("selection length does not match the problem");
}

std::vector<int> positive_by_gain(const ObjectiveContext& ctx) {
  std::vector<int> order;
  for (int i = 0; i < ctx.size(); ++i)
    if (ctx.unshaded_gain(i) > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ctx.unshaded_gain(a) > ctx.unshaded_gain(b); });
  return order;
}

bool feasible(const Selection& x, const ObjectiveContext& ctx) {
  if (!ctx.graph) return true;
  for (const auto& [a, b] : ctx.graph->edges())
    if (x[a] && x[b]) return false;
  return true;
}

}  // namespace

void EconomicParams::validate(int num_samples) const {
  if (panel_cost < 0.0) throw InvalidInput("panel cost must be non-negative");
  if (tariff < 0.0) throw InvalidInput("tariff must be non-negative");
  if (!(lifetime_years > 0.0)) throw InvalidInput("lifetime must be positive");
  if (!tariff_by_sample.empty()) {
    if (static_cast<int>(tariff_by_sample.size()) != num_samples)
      throw InvalidInput("per-sample tariff length does not match the number of time samples");
    for (double t : tariff_by_sample)
      if (t < 0.0) throw InvalidInput("tariff must be non-negative");
  }
}

double EconomicParams::value_per_wh(int k) const {
  const double t = tariff_by_sample.empty() ? tariff : tariff_by_sample[k];
  return t * lifetime_years;
}

ObjectiveContext::ObjectiveContext(Eigen::MatrixXd gen, const EconomicParams& econ, const ShadowMatrix* s,
                                   const ConflictGraph* g)
    : generation(std::move(gen)), shadow(s), graph(g) {
  const int n = size(), k = samples();
  econ.validate(k);
  if (shadow && shadow->num_candidates() > 0 && (shadow->num_candidates() != n || shadow->num_samples() != k))
    throw InvalidInput("shadow matrix dimensions do not match the problem");
  if (graph && graph->num_nodes() != n) throw InvalidInput("conflict graph size does not match the problem");
  weight.resize(n, k);
  for (int t = 0; t < k; ++t) weight.col(t) = generation.col(t) * econ.value_per_wh(t);
  cost = Eigen::VectorXd::Constant(n, econ.panel_cost);
  unshaded_gain = weight.rowwise().sum() - cost;
}

Eigen::MatrixXd candidate_generation(const std::vector<CandidatePanel>& candidates, const GenerationTable& table) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(candidates.size()), table.G.cols());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].config < 0 || candidates[i].config >= table.G.rows())
      throw InvalidInput("candidate configuration outside the generation table");
    out.row(static_cast<Eigen::Index>(i)) = table.G.row(candidates[i].config);
  }
  return out;
}

std::vector<int> Solution::ids() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (selected[i]) out.push_back(static_cast<int>(i));
  return out;
}

double objective_unshaded(const Selection& x, const ObjectiveContext& ctx) {
  check_selection(x, ctx);
  double total = 0.0;
  for (int i = 0; i < ctx.size(); ++i)
    if (x[i]) total += ctx.unshaded_gain(i);
  return total;
}

namespace {

// Per-selected-panel shading sums in double precision.
Eigen::MatrixXd shade_sums(const Selection& x, const ObjectiveContext& ctx) {
  const ShadowMatrix& s = *ctx.shadow;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(ctx.size(), ctx.samples());
  for (int i = 0; i < ctx.size(); ++i) {
    if (!x[i]) continue;
    sums.row(i) = s.diagonal.row(i);
    for (const auto& e : s.by_receiver(i))
      if (x[e.other]) sums(i, e.k) += e.fraction;
  }
  return sums;
}

}  // namespace

double objective_shaded(const Selection& x, const ObjectiveContext& ctx) {
  check_selection(x, ctx);
  if (!ctx.shaded()) return objective_unshaded(x, ctx);
  const Eigen::MatrixXd sums = shade_sums(x, ctx);
  double total = 0.0;
  for (int i = 0; i < ctx.size(); ++i) {
    if (!x[i]) continue;
    double term = -ctx.cost(i);
    for (int k = 0; k < ctx.samples(); ++k) term += ctx.weight(i, k) * (1.0 - std::min(1.0, sums(i, k)));
    total += term;
  }
  return total;
}

Solution make_solution(Selection x, const ObjectiveContext& ctx) {
  check_selection(x, ctx);
  Solution s;
  s.objective = objective_shaded(x, ctx);
  Eigen::MatrixXd sums;
  if (ctx.shaded()) sums = shade_sums(x, ctx);
  for (int i = 0; i < ctx.size(); ++i) {
    if (!x[i]) continue;
    ++s.panel_count;
    for (int k = 0; k < ctx.samples(); ++k) {
      const double g = ctx.generation(i, k);
      s.unshaded_energy += g;
      s.annual_energy += ctx.shaded() ? g * (1.0 - std::min(1.0, sums(i, k))) : g;
    }
  }
  s.shading_loss = s.unshaded_energy > 0.0 ? std::clamp(1.0 - s.annual_energy / s.unshaded_energy, 0.0, 1.0) : 0.0;
  s.selected = std::move(x);
  return s;
}

LocalState::LocalState(const ObjectiveContext& ctx, Selection x) : ctx_(&ctx), x_(std::move(x)) {
  check_selection(x_, ctx);
  const int n = ctx.size(), K = ctx.samples();
  acc_.assign(static_cast<std::size_t>(n) * K, 0);
  if (ctx.shaded()) {
    const ShadowMatrix& s = *ctx.shadow;
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < K; ++k) acc_[static_cast<std::size_t>(i) * K + k] = to_fixed(s.diagonal(i, k));
      for (const auto& e : s.by_receiver(i))
        if (x_[e.other]) acc_[static_cast<std::size_t>(i) * K + e.k] += to_fixed(e.fraction);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!x_[i]) continue;
    double term = -ctx.cost(i);
    for (int k = 0; k < K; ++k) term += ctx.weight(i, k) * unshaded_fraction(acc_[static_cast<std::size_t>(i) * K + k]);
    value_ += term;
  }
}

std::int64_t LocalState::base_shade(int i, int k) const { return acc_[static_cast<std::size_t>(i) * ctx_->samples() + k]; }

double LocalState::contribution(int j) const {
  const int K = ctx_->samples();
  double c = -ctx_->cost(j);
  for (int k = 0; k < K; ++k) c += ctx_->weight(j, k) * unshaded_fraction(base_shade(j, k));
  if (!ctx_->shaded()) return c;
  const bool on = x_[j] != 0;
  for (const auto& e : ctx_->shadow->by_caster(j)) {
    const int i = static_cast<int>(e.other);
    if (!x_[i]) continue;
    const std::int64_t s = to_fixed(e.fraction);
    const std::int64_t without = base_shade(i, e.k) - (on ? s : 0);
    c -= ctx_->weight(i, e.k) * (unshaded_fraction(without) - unshaded_fraction(without + s));
  }
  return c;
}

double LocalState::delta(int j) const { return x_[j] ? -contribution(j) : contribution(j); }

double LocalState::flip(int j) {
  const double d = delta(j);
  const bool on = !x_[j];
  x_[j] = on ? 1 : 0;
  if (ctx_->shaded()) {
    const int K = ctx_->samples();
    for (const auto& e : ctx_->shadow->by_caster(j)) {
      const std::int64_t s = to_fixed(e.fraction);
      acc_[static_cast<std::size_t>(e.other) * K + e.k] += on ? s : -s;
    }
  }
  value_ += d;
  return d;
}

bool LocalState::consistent() const {
  const LocalState fresh(*ctx_, x_);
  return fresh.acc_ == acc_;
}

Solution solve_exact(const ObjectiveContext& ctx, const ExactOptions& options) {
  const int n = ctx.size();
  if (n > options.size_cap)
    throw InvalidInput("problem has " + std::to_string(n) + " candidates, above the exact-solver cap of " +
                       std::to_string(options.size_cap));
  // Panels without a positive unshaded gain can never improve a selection.
  const std::vector<int> order = positive_by_gain(ctx);
  const int m = static_cast<int>(order.size());
  LocalState state(ctx, Selection(n, 0));
  std::vector<int> blocked(n, 0);
  Selection best_x(n, 0);
  double best = 0.0;
  {
    const Solution g = greedy_seed(ctx);
    if (g.objective > best) {
      best = g.objective;
      best_x = g.selected;
    }
  }
  std::int64_t nodes = 0;

  auto neighbors = [&](int i) {
    return ctx.graph ? ctx.graph->neighbors(i) : std::span<const int>{};
  };
  auto recurse = [&](auto&& self, int p) -> void {
    if (++nodes > options.node_limit)
      throw SolverNotProven("branch and bound stopped after " + std::to_string(options.node_limit) +
                            " nodes without proving optimality");
    if (state.value() > best) {
      best = state.value();
      best_x = state.selection();
    }
    double bound = state.value();
    for (int q = p; q < m; ++q)
      if (!blocked[order[q]]) bound += ctx.unshaded_gain(order[q]);
    if (bound <= best) return;
    int q = p;
    while (q < m && blocked[order[q]]) ++q;
    if (q == m) return;
    const int i = order[q];
    state.flip(i);
    for (int j : neighbors(i)) ++blocked[j];
    self(self, q + 1);
    for (int j : neighbors(i)) --blocked[j];
    state.flip(i);
    blocked[i] += 1;
    self(self, q + 1);
    blocked[i] -= 1;
  };
  recurse(recurse, 0);
  return make_solution(best_x, ctx);
}

Solution greedy_seed(const ObjectiveContext& ctx) {
  LocalState state(ctx, Selection(ctx.size(), 0));
  std::vector<char> blocked(ctx.size(), 0);
  for (int i : positive_by_gain(ctx)) {
    if (blocked[i] || state.delta(i) <= 0.0) continue;
    state.flip(i);
    if (ctx.graph)
      for (int j : ctx.graph->neighbors(i)) blocked[j] = 1;
  }
  return make_solution(state.selection(), ctx);
}

namespace {

struct Move {
  int flips[3];
  int count = 0;
};

class Annealer {
 public:
  Annealer(const ObjectiveContext& ctx, const std::vector<int>& useful, Selection start, std::uint64_t seed)
      : ctx_(ctx), useful_(useful), state_(ctx, std::move(start)), rng_(seed), best_(state_.value()),
        best_x_(state_.selection()) {}

  void run(std::int64_t moves) {
    if (moves <= 0 || useful_.empty()) return;
    std::vector<double> sample;
    for (int s = 0; s < 1000; ++s) {
      Move mv;
      if (!propose(mv)) continue;
      sample.push_back(std::abs(apply(mv)));
      revert(mv);
    }
    double t0 = 0.0;
    if (!sample.empty()) {
      const std::size_t at = std::min(sample.size() - 1, sample.size() * 9 / 10);
      std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(at), sample.end());
      t0 = sample[at];
    }
    if (!(t0 > 0.0)) t0 = 1e-9;
    const double cooling = std::pow(1e-3, 1.0 / static_cast<double>(moves));
    double temp = t0;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::int64_t it = 0; it < moves; ++it, temp *= cooling) {
      Move mv;
      if (!propose(mv)) continue;
      const double d = apply(mv);
      if (d >= 0.0 || uni(rng_) < std::exp(d / temp)) {
        if (state_.value() > best_) {
          best_ = state_.value();
          best_x_ = state_.selection();
        }
      } else {
        revert(mv);
      }
    }
  }

  const Selection& best() const { return best_x_; }

 private:
  // Remove a selected panel, add a free one, or swap it in for at most two
  // conflicting selected neighbors.
  bool propose(Move& mv) {
    std::uniform_int_distribution<std::size_t> pick(0, useful_.size() - 1);
    const int j = useful_[pick(rng_)];
    mv.count = 0;
    if (!state_.selected(j)) {
      if (ctx_.graph)
        for (int i : ctx_.graph->neighbors(j)) {
          if (!state_.selected(i)) continue;
          if (mv.count == 2) return false;
          mv.flips[mv.count++] = i;
        }
    }
    mv.flips[mv.count++] = j;
    return true;
  }

  double apply(const Move& mv) {
    double d = 0.0;
    for (int t = 0; t < mv.count; ++t) d += state_.flip(mv.flips[t]);
    return d;
  }

  void revert(const Move& mv) {
    for (int t = mv.count - 1; t >= 0; --t) state_.flip(mv.flips[t]);
  }

  const ObjectiveContext& ctx_;
  const std::vector<int>& useful_;
  LocalState state_;
  std::mt19937_64 rng_;
  double best_;
  Selection best_x_;
};

}  // namespace

Solution solve_local_search(const ObjectiveContext& ctx, const std::vector<Solution>& seeds,
                            const LocalSearchOptions& options) {
  std::vector<Solution> starts;
  for (const auto& s : seeds) {
    check_selection(s.selected, ctx);
    if (!feasible(s.selected, ctx)) throw InvalidInput("local search seed violates the conflict graph");
    starts.push_back(make_solution(s.selected, ctx));
  }
  if (starts.empty()) starts.push_back(make_solution(Selection(ctx.size(), 0), ctx));
  std::stable_sort(starts.begin(), starts.end(),
                   [](const Solution& a, const Solution& b) { return a.objective > b.objective; });
  std::vector<Solution> unique;
  for (auto& s : starts) {
    if (static_cast<int>(unique.size()) >= std::max(1, options.max_starts)) break;
    if (std::none_of(unique.begin(), unique.end(), [&](const Solution& u) { return u.selected == s.selected; }))
      unique.push_back(std::move(s));
  }
  const Solution& best_seed = unique.front();
  if (options.budget <= 0) return best_seed;

  std::vector<int> useful;
  for (int i = 0; i < ctx.size(); ++i)
    if (ctx.unshaded_gain(i) > 0.0) useful.push_back(i);
  const auto runs = static_cast<std::int64_t>(unique.size());
  std::vector<Selection> results(unique.size());
  parallel_for(unique.size(), [&](std::size_t r) {
    std::int64_t moves = options.budget / runs + (static_cast<std::int64_t>(r) < options.budget % runs ? 1 : 0);
    Annealer a(ctx, useful, unique[r].selected, options.rng_seed + 0x9E3779B97F4A7C15ull * (r + 1));
    a.run(moves);
    results[r] = a.best();
  });
  Solution best = best_seed;
  for (auto& x : results) {
    Solution s = make_solution(std::move(x), ctx);
    if (s.objective > best.objective) best = std::move(s);
  }
  return best;
}

std::vector<Solution> row_layouts(const std::vector<CandidatePanel>& candidates, const ObjectiveContext& ctx) {
  if (static_cast<int>(candidates.size()) != ctx.size()) throw InvalidInput("candidate list does not match the problem");
  // Rows keyed by (config, grid row).
  std::map<int, std::map<int, std::vector<int>>> rows;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    rows[candidates[i].config][candidates[i].grid_row].push_back(static_cast<int>(i));
  std::set<std::tuple<int, int, int>> row_conflicts;  // (config, row a, row b), a <= b
  if (ctx.graph)
    for (const auto& [a, b] : ctx.graph->edges()) {
      if (candidates[a].config != candidates[b].config) continue;
      const int ra = candidates[a].grid_row, rb = candidates[b].grid_row;
      row_conflicts.emplace(candidates[a].config, std::min(ra, rb), std::max(ra, rb));
    }

  std::vector<Solution> out;
  for (const auto& [config, by_row] : rows) {
    std::vector<int> keys;
    for (const auto& [r, members] : by_row)
      if (!row_conflicts.count({config, r, r})) keys.push_back(r);
    if (keys.empty()) continue;
    auto conflict = [&](int a, int b) { return row_conflicts.count({config, std::min(a, b), std::max(a, b)}) > 0; };
    // Longest compatible chain by (panel count, unshaded value); conflicts
    // only reach a bounded number of neighboring rows, so checking the
    // previous chosen row suffices.
    using Score = std::pair<int, double>;
    const int m = static_cast<int>(keys.size());
    std::vector<Score> best(m);
    std::vector<int> prev(m, -1);
    auto score_of = [&](int r) {
      Score s{0, 0.0};
      for (int i : by_row.at(r)) {
        ++s.first;
        s.second += ctx.unshaded_gain(i);
      }
      return s;
    };
    for (int a = 0; a < m; ++a) {
      const Score own = score_of(keys[a]);
      best[a] = own;
      for (int p = 0; p < a; ++p) {
        if (conflict(keys[p], keys[a])) continue;
        const Score cand{best[p].first + own.first, best[p].second + own.second};
        if (cand > best[a]) {
          best[a] = cand;
          prev[a] = p;
        }
      }
    }
    int end = static_cast<int>(std::max_element(best.begin(), best.end()) - best.begin());
    Selection x(ctx.size(), 0);
    for (int a = end; a >= 0; a = prev[a])
      for (int i : by_row.at(keys[a])) x[i] = 1;
    if (!feasible(x, ctx)) continue;
    out.push_back(make_solution(std::move(x), ctx));
  }
  return out;
}

Solution parallel_row_baseline(const std::vector<CandidatePanel>& candidates, const ObjectiveContext& ctx) {
  Solution best = make_solution(Selection(ctx.size(), 0), ctx);
  bool any = false;
  for (auto& s : row_layouts(candidates, ctx))
    if (!any || s.objective > best.objective) {
      best = std::move(s);
      any = true;
    }
  return best;
}

Solution solve(const ObjectiveContext& ctx, const std::vector<CandidatePanel>* candidates,
               const std::vector<Solution>& extra_seeds, const SolverOptions& options) {
  if (ctx.size() <= options.exact.size_cap) return solve_exact(ctx, options.exact);
  std::vector<Solution> seeds = extra_seeds;
  seeds.push_back(greedy_seed(ctx));
  if (candidates)
    for (auto& s : row_layouts(*candidates, ctx)) seeds.push_back(std::move(s));
  return solve_local_search(ctx, seeds, options.local);
}

}  // namespace heliopack
