#pragma once

// Roof decomposition and the region-by-region sequential optimizer.

#include "heliopack/geom.hpp"
#include "heliopack/opt.hpp"

#include <memory>
#include <vector>

namespace heliopack {

struct VisibilityGraph {
  std::vector<Point2> nodes;
  std::vector<int> ring_of;  // 0 = exterior, h + 1 = hole h
  std::vector<std::pair<int, int>> edges;  // i < j, sorted
};

/// Samples every ring at uniform arc-length spacing (at most `spacing`,
/// at least 3 samples per ring) and connects mutually visible pairs.
VisibilityGraph build_visibility_graph(const RoofPolygon& roof, double spacing = 0.5);

struct WalktrapMerge {
  int a = 0;
  int b = 0;
  int merged = 0;  // new community id, numbered after the n singletons
  double delta_sigma = 0.0;
  double modularity = 0.0;  // after this merge
};

struct WalktrapResult {
  std::vector<std::vector<int>> communities;  // each sorted; ordered by first node
  std::vector<WalktrapMerge> merges;
  double initial_modularity = 0.0;
  int best_cut = 0;  // number of merges applied in the returned partition
};

/// Agglomerative random-walk clustering with exact t-step transition
/// probabilities (self-loops added), cut at maximum modularity.
WalktrapResult walktrap_communities(int num_nodes, const std::vector<std::pair<int, int>>& edges,
                                    int walk_length = 4);

struct RegionPartition {
  std::vector<int> region_of;              // candidate -> region
  std::vector<std::vector<int>> regions;   // processing order: descending size
};

Point2 footprint_centroid(const CandidatePanel& c);

/// Splits by the line through the centroid box center perpendicular to its
/// long axis; centroids on the line go to the first part.
std::pair<std::vector<int>, std::vector<int>> bisect_region(const std::vector<CandidatePanel>& candidates,
                                                            const std::vector<int>& members);

/// Assigns each candidate to the community whose nodes are nearest (mean of
/// the five smallest node distances), then bisects regions above `cap`.
RegionPartition partition_regions(const std::vector<CandidatePanel>& candidates, const std::vector<Point2>& nodes,
                                  const std::vector<std::vector<int>>& communities, int cap);

/// Whole-roof problem data without a global shadow matrix.
struct RoofProblem {
  const std::vector<CandidatePanel>* candidates = nullptr;
  const ConflictGraph* graph = nullptr;
  const TimeSampleSet* samples = nullptr;
  Eigen::MatrixXd generation;  // N x K
  EconomicParams econ;
  ShadowOptions shadow;  // skip_pairs is ignored; the sub-problem graph is used
  bool shading = true;

  int size() const { return static_cast<int>(candidates->size()); }
};

/// The problem restricted to `ids`, with a local conflict graph, a local
/// shadow matrix and fixed shading from `placed` on the diagonal.
class SubProblem {
 public:
  SubProblem(const RoofProblem& problem, std::vector<int> ids, const std::vector<int>& placed = {});

  const std::vector<int>& ids() const { return ids_; }
  const std::vector<CandidatePanel>& candidates() const { return local_; }
  const ObjectiveContext& context() const { return *ctx_; }
  const ShadowMatrix& shadow() const { return *shadow_; }

  Selection to_local(const Selection& global) const;
  void to_global(const Selection& local, Selection& global) const;

 private:
  std::vector<int> ids_;
  std::vector<CandidatePanel> local_;
  std::unique_ptr<ConflictGraph> graph_;
  std::unique_ptr<ShadowMatrix> shadow_;
  std::unique_ptr<ObjectiveContext> ctx_;
};

/// Objective and energies of a whole-roof selection, from the shadow terms
/// among the selected panels.
Solution evaluate_selection(const RoofProblem& problem, const Selection& x);

/// Best whole-roof parallel-row layout, each configuration evaluated with
/// shading among its own panels.
Solution roof_row_baseline(const RoofProblem& problem);

struct SequentialOptions {
  int sweeps = 2;
  SolverOptions solver;
};

struct SweepRecord {
  int sweep = 0;
  int region = 0;
  int candidates = 0;  // free candidates in the sub-problem
  double objective_before = 0.0;
  double objective_after = 0.0;
  bool reverted = false;
};

struct SequentialResult {
  Solution solution;
  std::vector<SweepRecord> history;
};

/// Region-by-region optimization over several sweeps. Each region is
/// cleared, its fixed shading recomputed from every panel placed elsewhere,
/// candidates conflicting with those panels removed, and the remainder
/// solved. A region result that lowers the whole-roof objective is reverted.
SequentialResult sequential_optimize(const RoofProblem& problem, const RegionPartition& partition,
                                     const SequentialOptions& options, const Selection& initial = {});

}  // namespace heliopack
