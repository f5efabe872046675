#include "heliopack/decomp.hpp"

#include "heliopack/error.hpp"
#include "heliopack/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace heliopack {

namespace {

void sample_ring(const Ring& ring, double spacing, int ring_id, VisibilityGraph& g) {
  const std::size_t n = ring.size();
  if (n < 2) return;
  std::vector<double> cum{0.0};
  for (std::size_t i = 0; i < n; ++i) cum.push_back(cum.back() + (ring[(i + 1) % n] - ring[i]).norm());
  const double perimeter = cum.back();
  if (!(perimeter > 0.0)) return;
  const int count = std::max(3, static_cast<int>(std::ceil(perimeter / spacing - 1e-9)));
  const double step = perimeter / count;
  std::size_t edge = 0;
  for (int s = 0; s < count; ++s) {
    const double at = s * step;
    while (edge + 1 < n && cum[edge + 1] <= at) ++edge;
    const double len = cum[edge + 1] - cum[edge];
    const double t = len > 0.0 ? (at - cum[edge]) / len : 0.0;
    g.nodes.push_back(ring[edge] + t * (ring[(edge + 1) % n] - ring[edge]));
    g.ring_of.push_back(ring_id);
  }
}

}  // namespace

VisibilityGraph build_visibility_graph(const RoofPolygon& roof, double spacing) {
  if (!(spacing > 0.0)) throw InvalidInput("visibility spacing must be positive");
  VisibilityGraph g;
  sample_ring(roof.exterior, spacing, 0, g);
  for (std::size_t h = 0; h < roof.holes.size(); ++h) sample_ring(roof.holes[h], spacing, static_cast<int>(h) + 1, g);
  const int n = static_cast<int>(g.nodes.size());
  if (n < 3) throw InvalidInput("roof boundary yields fewer than 3 visibility samples");
  std::vector<std::vector<std::pair<int, int>>> rows(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    for (int j = static_cast<int>(i) + 1; j < n; ++j)
      if (segment_visible(g.nodes[i], g.nodes[j], roof)) rows[i].emplace_back(static_cast<int>(i), j);
  });
  for (auto& r : rows) g.edges.insert(g.edges.end(), r.begin(), r.end());
  return g;
}

WalktrapResult walktrap_communities(int n, const std::vector<std::pair<int, int>>& edges, int walk_length) {
  if (n < 0 || walk_length < 1) throw InvalidInput("walktrap needs n >= 0 and walk length >= 1");
  WalktrapResult result;
  if (n == 0) return result;

  // Transition matrix with a unit self-loop per node.
  Eigen::MatrixXd adj = Eigen::MatrixXd::Identity(n, n);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw InvalidInput("walktrap edge out of range");
    adj(a, b) = 1.0;
    adj(b, a) = 1.0;
  }
  const Eigen::VectorXd degree = adj.rowwise().sum();
  Eigen::MatrixXd step = degree.cwiseInverse().asDiagonal() * adj;
  Eigen::MatrixXd walk = step;
  for (int t = 1; t < walk_length; ++t) walk = walk * step;
  // Rows scaled by D^{-1/2} so that r^2 is a squared Euclidean distance.
  walk = walk * degree.cwiseSqrt().cwiseInverse().asDiagonal();

  // Modularity on the graph without self-loops.
  std::vector<double> deg_plain(n, 0.0);
  for (const auto& [a, b] : edges) {
    deg_plain[a] += 1.0;
    deg_plain[b] += 1.0;
  }
  const double two_m = std::accumulate(deg_plain.begin(), deg_plain.end(), 0.0);

  const int max_id = 2 * n;
  std::vector<Eigen::VectorXd> prob(max_id);
  std::vector<int> size(max_id, 0);
  std::vector<double> a_frac(max_id, 0.0);
  std::vector<std::map<int, double>> link(max_id);  // community -> edge weight between them
  std::vector<std::vector<int>> members(max_id);
  std::vector<char> alive(max_id, 0);
  for (int i = 0; i < n; ++i) {
    prob[i] = walk.row(i).transpose();
    size[i] = 1;
    a_frac[i] = two_m > 0.0 ? deg_plain[i] / two_m : 0.0;
    members[i] = {i};
    alive[i] = 1;
  }
  for (const auto& [a, b] : edges) {
    link[a][b] += 1.0;
    link[b][a] += 1.0;
  }
  double q = 0.0;
  for (int i = 0; i < n; ++i) q -= a_frac[i] * a_frac[i];
  result.initial_modularity = q;

  auto sigma = [&](int c1, int c2) {
    const double s1 = size[c1], s2 = size[c2];
    return (s1 * s2 / (s1 + s2)) * (prob[c1] - prob[c2]).squaredNorm() / n;
  };
  std::set<std::tuple<double, int, int>> heap;
  std::map<std::pair<int, int>, double> ds;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (int i = 0; i < n; ++i)
    for (const auto& [j, w] : link[i])
      if (i < j) {
        const double d = sigma(i, j);
        ds[{i, j}] = d;
        heap.emplace(d, i, j);
      }

  double best_q = q;
  int best_cut = 0;
  int next = n;
  while (!heap.empty()) {
    const auto [d, c1, c2] = *heap.begin();
    heap.erase(heap.begin());
    ds.erase({c1, c2});
    const int c = next++;
    size[c] = size[c1] + size[c2];
    prob[c] = (size[c1] * prob[c1] + size[c2] * prob[c2]) / size[c];
    a_frac[c] = a_frac[c1] + a_frac[c2];
    const double between = link[c1].count(c2) ? link[c1][c2] : 0.0;
    q += two_m > 0.0 ? 2.0 * between / two_m - 2.0 * a_frac[c1] * a_frac[c2] : 0.0;
    members[c] = members[c1];
    members[c].insert(members[c].end(), members[c2].begin(), members[c2].end());
    std::sort(members[c].begin(), members[c].end());

    // Neighbours of the merged community, with updated distances.
    std::map<int, double> merged_links;
    for (int src : {c1, c2})
      for (const auto& [o, w] : link[src])
        if (o != c1 && o != c2) merged_links[o] += w;
    for (const auto& [o, w] : merged_links) {
      double nd;
      const auto k1 = ds.find(key(c1, o)), k2 = ds.find(key(c2, o));
      if (k1 != ds.end() && k2 != ds.end()) {
        // Lance-Williams style update when o touches both parts.
        const double s1 = size[c1], s2 = size[c2], so = size[o];
        nd = ((s1 + so) * k1->second + (s2 + so) * k2->second - so * d) / (s1 + s2 + so);
      } else {
        nd = sigma(c, o);
      }
      for (auto it : {k1, k2})
        if (it != ds.end()) {
          heap.erase({it->second, it->first.first, it->first.second});
          ds.erase(it);
        }
      ds[key(c, o)] = nd;
      heap.emplace(nd, std::min(c, o), std::max(c, o));
      link[o].erase(c1);
      link[o].erase(c2);
      link[o][c] = w;
    }
    link[c] = std::move(merged_links);
    link[c1].clear();
    link[c2].clear();
    alive[c1] = alive[c2] = 0;
    alive[c] = 1;
    prob[c1].resize(0);
    prob[c2].resize(0);
    result.merges.push_back({c1, c2, c, d, q});
    if (q > best_q + 1e-12) {
      best_q = q;
      best_cut = static_cast<int>(result.merges.size());
    }
  }

  // Replay the dendrogram up to the best cut.
  std::vector<std::vector<int>> parts(max_id);
  std::vector<char> live(max_id, 0);
  for (int i = 0; i < n; ++i) {
    parts[i] = {i};
    live[i] = 1;
  }
  for (int m = 0; m < best_cut; ++m) {
    const auto& mg = result.merges[m];
    parts[mg.merged] = parts[mg.a];
    parts[mg.merged].insert(parts[mg.merged].end(), parts[mg.b].begin(), parts[mg.b].end());
    live[mg.a] = live[mg.b] = 0;
    live[mg.merged] = 1;
  }
  for (int c = 0; c < max_id; ++c)
    if (live[c]) {
      std::sort(parts[c].begin(), parts[c].end());
      result.communities.push_back(parts[c]);
    }
  std::sort(result.communities.begin(), result.communities.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  result.best_cut = best_cut;
  return result;
}

Point2 footprint_centroid(const CandidatePanel& c) {
  return ring_centroid<double>(std::span<const Point2>(c.footprint));
}

std::pair<std::vector<int>, std::vector<int>> bisect_region(const std::vector<CandidatePanel>& candidates,
                                                            const std::vector<int>& members) {
  if (members.size() < 2) throw InvalidInput("bisect_region needs at least two candidates");
  std::vector<Point2> pts;
  for (int i : members) pts.push_back(footprint_centroid(candidates.at(static_cast<std::size_t>(i))));
  bool coincident = true;
  for (const auto& p : pts) coincident = coincident && (p - pts.front()).norm() <= 1e-9;
  if (coincident) throw InvalidInput("cannot bisect a region whose candidate centroids coincide");
  const OrientedBox box = min_rotated_box(std::span<const Point2>(pts));
  Point2 axis = box.long_axis();
  if (box.half_a < box.half_b) axis = box.short_axis();
  std::pair<std::vector<int>, std::vector<int>> out;
  for (std::size_t t = 0; t < members.size(); ++t)
    ((pts[t] - box.center).dot(axis) <= 1e-12 ? out.first : out.second).push_back(members[t]);
  return out;
}

RegionPartition partition_regions(const std::vector<CandidatePanel>& candidates, const std::vector<Point2>& nodes,
                                  const std::vector<std::vector<int>>& communities, int cap) {
  if (communities.empty()) throw InvalidInput("partition_regions needs at least one community");
  if (cap < 1) throw InvalidInput("region cap must be positive");
  const int n = static_cast<int>(candidates.size());
  std::vector<std::vector<int>> groups(communities.size());
  std::vector<int> owner(n, 0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const Point2 c = footprint_centroid(candidates[i]);
    double best = INFINITY;
    int best_k = 0;
    std::vector<double> d;
    for (std::size_t k = 0; k < communities.size(); ++k) {
      d.clear();
      for (int v : communities[k]) d.push_back((nodes.at(static_cast<std::size_t>(v)) - c).norm());
      if (d.empty()) continue;
      const std::size_t take = std::min<std::size_t>(5, d.size());
      std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
      const double mean = std::accumulate(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), 0.0) / take;
      if (mean < best) {
        best = mean;
        best_k = static_cast<int>(k);
      }
    }
    owner[i] = best_k;
  });
  for (int i = 0; i < n; ++i) groups[owner[i]].push_back(i);

  std::vector<std::vector<int>> regions;
  std::vector<std::vector<int>> pending;
  for (auto& g : groups)
    if (!g.empty()) pending.push_back(std::move(g));
  while (!pending.empty()) {
    std::vector<int> r = std::move(pending.back());
    pending.pop_back();
    if (static_cast<int>(r.size()) <= cap) {
      regions.push_back(std::move(r));
      continue;
    }
    auto [a, b] = bisect_region(candidates, r);
    pending.push_back(std::move(b));
    pending.push_back(std::move(a));
  }
  std::sort(regions.begin(), regions.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  RegionPartition out;
  out.region_of.assign(n, -1);
  for (std::size_t r = 0; r < regions.size(); ++r)
    for (int i : regions[r]) out.region_of[i] = static_cast<int>(r);
  out.regions = std::move(regions);
  return out;
}

SubProblem::SubProblem(const RoofProblem& problem, std::vector<int> ids, const std::vector<int>& placed)
    : ids_(std::move(ids)) {
  const auto& all = *problem.candidates;
  std::vector<int> local_of(all.size(), -1);
  for (std::size_t t = 0; t < ids_.size(); ++t) {
    const int g = ids_[t];
    if (g < 0 || g >= static_cast<int>(all.size()) || local_of[g] >= 0)
      throw InvalidInput("sub-problem ids must be distinct candidate ids");
    local_of[g] = static_cast<int>(t);
    local_.push_back(all[g]);
    local_.back().id = static_cast<int>(t);
  }
  std::vector<std::pair<int, int>> edges;
  if (problem.graph)
    for (std::size_t t = 0; t < ids_.size(); ++t)
      for (int o : problem.graph->neighbors(ids_[t]))
        if (local_of[o] > static_cast<int>(t)) edges.emplace_back(static_cast<int>(t), local_of[o]);
  graph_ = std::make_unique<ConflictGraph>(static_cast<int>(ids_.size()), std::move(edges));

  const int K = problem.samples->size();
  if (problem.shading) {
    ShadowOptions opts = problem.shadow;
    opts.skip_pairs = graph_.get();
    shadow_ = std::make_unique<ShadowMatrix>(build_shadow_matrix(local_, *problem.samples, opts));
    if (!placed.empty()) shadow_->diagonal = fixed_shading(all, placed, ids_, *problem.samples, problem.shadow);
  } else {
    shadow_ = std::make_unique<ShadowMatrix>(static_cast<int>(ids_.size()), K, std::vector<ShadowTriplet>{});
  }
  Eigen::MatrixXd gen(static_cast<Eigen::Index>(ids_.size()), K);
  for (std::size_t t = 0; t < ids_.size(); ++t) gen.row(static_cast<Eigen::Index>(t)) = problem.generation.row(ids_[t]);
  ctx_ = std::make_unique<ObjectiveContext>(std::move(gen), problem.econ, problem.shading ? shadow_.get() : nullptr,
                                            graph_.get());
}

Selection SubProblem::to_local(const Selection& global) const {
  Selection out(ids_.size(), 0);
  for (std::size_t t = 0; t < ids_.size(); ++t) out[t] = global.at(static_cast<std::size_t>(ids_[t]));
  return out;
}

void SubProblem::to_global(const Selection& local, Selection& global) const {
  for (std::size_t t = 0; t < ids_.size(); ++t) global.at(static_cast<std::size_t>(ids_[t])) = local[t];
}

Solution evaluate_selection(const RoofProblem& problem, const Selection& x) {
  if (static_cast<int>(x.size()) != problem.size()) throw InvalidInput("selection length does not match the problem");
  std::vector<int> ids;
  for (int i = 0; i < problem.size(); ++i)
    if (x[i]) ids.push_back(i);
  const SubProblem sub(problem, ids);
  Solution s = make_solution(Selection(ids.size(), 1), sub.context());
  s.selected = x;
  return s;
}

Solution roof_row_baseline(const RoofProblem& problem) {
  // Row choice does not depend on shading; evaluate each layout afterwards.
  ObjectiveContext plain(problem.generation, problem.econ, nullptr, problem.graph);
  const auto layouts = row_layouts(*problem.candidates, plain);
  std::vector<Solution> scored(layouts.size());
  for (std::size_t t = 0; t < layouts.size(); ++t) scored[t] = evaluate_selection(problem, layouts[t].selected);
  Solution best = evaluate_selection(problem, Selection(problem.size(), 0));
  bool any = false;
  for (auto& s : scored)
    if (!any || s.objective > best.objective) {
      best = std::move(s);
      any = true;
    }
  return best;
}

SequentialResult sequential_optimize(const RoofProblem& problem, const RegionPartition& partition,
                                     const SequentialOptions& options, const Selection& initial) {
  if (options.sweeps < 1) throw InvalidInput("sweeps must be at least 1");
  const int n = problem.size();
  if (static_cast<int>(partition.region_of.size()) != n) throw InvalidInput("partition does not cover the candidates");
  Selection x = initial.empty() ? Selection(n, 0) : initial;
  if (static_cast<int>(x.size()) != n) throw InvalidInput("initial selection length does not match the problem");
  if (problem.graph && !problem.graph->is_independent(Solution{x}.ids()))
    throw InvalidInput("initial selection violates the conflict graph");

  SequentialResult result;
  double current = evaluate_selection(problem, x).objective;
  for (int sweep = 0; sweep < options.sweeps; ++sweep)
    for (std::size_t r = 0; r < partition.regions.size(); ++r) {
      const auto& region = partition.regions[r];
      const Selection saved = x;
      std::vector<char> in_region(n, 0);
      for (int i : region) {
        in_region[i] = 1;
        x[i] = 0;
      }
      std::vector<int> placed;
      std::vector<char> frozen_conflict(n, 0);
      for (int j = 0; j < n; ++j)
        if (x[j]) {
          placed.push_back(j);
          if (problem.graph)
            for (int o : problem.graph->neighbors(j)) frozen_conflict[o] = 1;
        }
      std::vector<int> free;
      for (int i : region)
        if (!frozen_conflict[i]) free.push_back(i);

      SweepRecord rec{sweep, static_cast<int>(r), static_cast<int>(free.size()), current, current, false};
      if (!free.empty()) {
        const SubProblem sub(problem, free, placed);
        const Solution previous = make_solution(sub.to_local(saved), sub.context());
        SolverOptions solver = options.solver;
        solver.local.rng_seed = options.solver.local.rng_seed + 1000003ull * static_cast<std::uint64_t>(sweep) +
                                7919ull * static_cast<std::uint64_t>(r);
        const Solution local = solve(sub.context(), &sub.candidates(), {previous}, solver);
        sub.to_global(local.selected, x);
      }
      const double after = evaluate_selection(problem, x).objective;
      if (after < current - 1e-9 * std::max(1.0, std::abs(current))) {
        x = saved;
        rec.reverted = true;
        rec.objective_after = current;
      } else {
        current = after;
        rec.objective_after = after;
      }
      result.history.push_back(rec);
    }
  result.solution = evaluate_selection(problem, x);
  return result;
}

}  // namespace heliopack
