#pragma once

// Shading-aware objective and solvers for the weighted independent-set
// layout problem.

#include "heliopack/layout.hpp"
#include "heliopack/shade.hpp"
#include "heliopack/solar.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace heliopack {

struct EconomicParams {
  double panel_cost = 450.0;         // currency per panel
  double tariff = 8e-5;              // currency per Wh
  std::vector<double> tariff_by_sample;  // optional T(k); overrides `tariff` when nonempty
  double lifetime_years = 20.0;

  void validate(int num_samples) const;
  /// Lifetime value of one Wh of annual generation at sample k.
  double value_per_wh(int k) const;
};

/// Read-only problem data. Row i of `generation` is G_i(k) in annual Wh;
/// `weight` is the lifetime value T(k) * G_i(k).
struct ObjectiveContext {
  Eigen::MatrixXd generation;
  Eigen::MatrixXd weight;
  Eigen::VectorXd cost;
  Eigen::VectorXd unshaded_gain;  // sum_k weight(i, k) - cost(i)
  const ShadowMatrix* shadow = nullptr;  // null or empty: no shading
  const ConflictGraph* graph = nullptr;

  ObjectiveContext() = default;
  ObjectiveContext(Eigen::MatrixXd generation, const EconomicParams& econ, const ShadowMatrix* shadow,
                   const ConflictGraph* graph);

  int size() const { return static_cast<int>(generation.rows()); }
  int samples() const { return static_cast<int>(generation.cols()); }
  bool shaded() const { return shadow != nullptr && shadow->num_candidates() > 0; }
};

/// Per-candidate generation rows taken from the per-configuration table.
Eigen::MatrixXd candidate_generation(const std::vector<CandidatePanel>& candidates, const GenerationTable& table);

using Selection = std::vector<std::uint8_t>;

struct Solution {
  Selection selected;
  double objective = 0.0;
  double annual_energy = 0.0;    // Wh, with shading
  double unshaded_energy = 0.0;  // Wh, same selection without shading
  double shading_loss = 0.0;
  int panel_count = 0;
  double packing_density = 0.0;

  std::vector<int> ids() const;
};

double objective_unshaded(const Selection& x, const ObjectiveContext& ctx);
double objective_shaded(const Selection& x, const ObjectiveContext& ctx);

/// Fills objective (shaded when the context has shading), energies, loss
/// and count. Packing density is left for the caller.
Solution make_solution(Selection x, const ObjectiveContext& ctx);

/// Incremental evaluation state: the selection plus per-(i, k) accumulated
/// shading sums in fixed point, so toggles are exactly reversible.
class LocalState {
 public:
  LocalState(const ObjectiveContext& ctx, Selection x);

  const Selection& selection() const { return x_; }
  double value() const { return value_; }
  bool selected(int i) const { return x_[i] != 0; }

  /// Objective change from toggling candidate j, without applying it.
  double delta(int j) const;
  /// Toggles j, updates the accumulators and returns the change.
  double flip(int j);

  /// Recomputes the accumulators from scratch and compares; for tests.
  bool consistent() const;

 private:
  double contribution(int j) const;  // value(x with j) - value(x without j)
  std::int64_t base_shade(int i, int k) const;

  const ObjectiveContext* ctx_;
  Selection x_;
  std::vector<std::int64_t> acc_;  // N x K, row-major, selected casters only
  double value_ = 0.0;
};

struct ExactOptions {
  int size_cap = 30;
  std::int64_t node_limit = 20'000'000;
};

/// Branch and bound. Throws InvalidInput above the size cap and
/// SolverNotProven when the node limit is hit.
Solution solve_exact(const ObjectiveContext& ctx, const ExactOptions& options = {});

struct LocalSearchOptions {
  std::int64_t budget = 100'000;  // moves, split across starts
  std::uint64_t rng_seed = 1;
  int max_starts = 4;
};

/// Simulated annealing from the best few seeds. Never returns an objective
/// below the best seed.
Solution solve_local_search(const ObjectiveContext& ctx, const std::vector<Solution>& seeds,
                            const LocalSearchOptions& options = {});

/// Candidates by unshaded gain (ties by id), added when compatible and the
/// shaded change is positive.
Solution greedy_seed(const ObjectiveContext& ctx);

/// Best parallel-row layout for each configuration: whole grid rows, chosen
/// to maximize panel count with no conflict between chosen rows. Ties go to
/// the higher unshaded value. Empty configurations are omitted.
std::vector<Solution> row_layouts(const std::vector<CandidatePanel>& candidates, const ObjectiveContext& ctx);

/// The row layout with the highest objective, or an empty solution.
Solution parallel_row_baseline(const std::vector<CandidatePanel>& candidates, const ObjectiveContext& ctx);

struct SolverOptions {
  ExactOptions exact;
  LocalSearchOptions local;
};

/// Exact solve when the problem fits the cap, otherwise local search from
/// greedy, row layouts and `extra_seeds`.
Solution solve(const ObjectiveContext& ctx, const std::vector<CandidatePanel>* candidates,
               const std::vector<Solution>& extra_seeds, const SolverOptions& options);

}  // namespace heliopack
