#pragma once

// Roof-level problem assembled from a polygon, for solver-level tests.

#include "heliopack/decomp.hpp"

#include <memory>

namespace heliopack::testing {

inline RoofPolygon rect_roof(double w, double h, std::vector<Ring> holes = {}) {
  RoofPolygon r;
  r.exterior = {{0, 0}, {w, 0}, {w, h}, {0, h}};
  r.holes = std::move(holes);
  normalize(r);
  return r;
}

inline Ring square(double x, double y, double s) { return {{x, y}, {x + s, y}, {x + s, y + s}, {x, y + s}}; }

struct RoofSetup {
  RoofPolygon roof;
  GridOptions grid;
  std::vector<CandidatePanel> candidates;
  ConflictGraph graph;
  TimeSampleSet samples;
  RoofProblem problem;

  RoofSetup(RoofPolygon r, GridOptions g, double latitude, bool shading = true)
      : roof(std::move(r)), grid(std::move(g)) {
    candidates = generate_candidates(roof, PanelSpec{}, grid);
    graph = build_conflict_graph(candidates, grid);
    samples = build_time_samples(latitude, 0.0, 0.0, synthetic_weather(latitude, 0.0, 0.0));
    const auto table = baseline_generation(config_orientations(grid), samples);
    problem.candidates = &candidates;
    problem.graph = &graph;
    problem.samples = &samples;
    problem.generation = candidate_generation(candidates, table);
    problem.shading = shading;
  }
  RoofSetup(const RoofSetup&) = delete;
  RoofSetup& operator=(const RoofSetup&) = delete;

  std::vector<int> all_ids() const {
    std::vector<int> ids(candidates.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return ids;
  }
};

inline GridOptions south_grid(std::vector<double> tilts = {0, 20}) {
  GridOptions g;
  g.azimuths = {180};
  g.tilts = std::move(tilts);
  g.shifts = {{0, 0}};
  return g;
}

}  // namespace heliopack::testing
