#pragma once

// Candidate panel grids over azimuth/tilt/shift configurations and the
// pairwise conflict graph between candidates.

#include "heliopack/geom.hpp"
#include "heliopack/solar.hpp"

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace heliopack {

struct PanelSpec {
  double length = 1.6;  // along the tilt axis
  double width = 1.0;   // horizontal edge
  double rated_power = 300.0;
  double cost = 450.0;

  void validate() const;
};

struct GridOptions {
  std::vector<double> azimuths{0, 45, 90, 135, 180, 225, 270, 315};
  std::vector<double> tilts{0, 10, 20, 30};
  /// Offsets in half-panel units along (width axis, depth axis).
  std::vector<Eigen::Vector2d> shifts{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  double boundary_setback = 0.6;
  double obstacle_setback = 0.3;
  double access_clearance = 0.6;

  void validate() const;
  int num_configs() const { return static_cast<int>(azimuths.size() * tilts.size() * shifts.size()); }
};

/// One (azimuth, tilt, shift) triple. Index order: azimuth-major, then tilt,
/// then shift.
struct PanelConfig {
  int index = 0;
  double azimuth = 180.0;
  double tilt = 0.0;
  int shift = 0;

  PanelOrientation orientation() const { return {azimuth, tilt}; }
};

std::vector<PanelConfig> enumerate_configs(const GridOptions& opts);

/// Orientation per configuration, in configuration index order.
std::vector<PanelOrientation> config_orientations(const GridOptions& opts);

/// Corner order for footprint and corners3d: back-right, front-right,
/// front-left, back-left (counter-clockwise seen from above). The front edge
/// faces the azimuth and sits at height 0; the back edge is raised to
/// length * sin(tilt).
struct CandidatePanel {
  int id = 0;
  int config = 0;
  double azimuth = 180.0;
  double tilt = 0.0;
  int shift = 0;
  int grid_row = 0;  // along the depth axis
  int grid_col = 0;  // along the width axis
  Point2 anchor = Point2::Zero();
  std::array<Point2, 4> footprint;
  std::array<Point3, 4> corners3d;
  int region_id = -1;

  Point2 facing() const;  // horizontal unit vector toward the azimuth
  /// Strip of depth `clearance` in front of the low edge, same width.
  std::array<Point2, 4> access_zone(double clearance) const;
};

CandidatePanel panel_geometry(const PanelSpec& spec, const PanelConfig& config, const Point2& anchor);

/// Lays one grid per configuration over the setback-applied roof and keeps
/// the footprints fully inside it. Grid origin is the minimum projection of
/// the setback region on the grid axes, offset by the shift.
std::vector<CandidatePanel> generate_candidates(const RoofPolygon& roof, const PanelSpec& spec,
                                                const GridOptions& opts);

class ConflictGraph {
 public:
  ConflictGraph() = default;
  /// Edges are normalized (i < j), sorted and deduplicated.
  ConflictGraph(int num_nodes, std::vector<std::pair<int, int>> edges);

  int num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::span<const int> neighbors(int i) const {
    return {adj_.data() + offset_[i], static_cast<std::size_t>(offset_[i + 1] - offset_[i])};
  }
  bool adjacent(int i, int j) const;

  /// True when no two selected nodes share an edge.
  bool is_independent(const std::vector<int>& selected) const;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> offset_{0};
  std::vector<int> adj_;
};

/// Edge (i, j) when the footprints overlap with positive area or either
/// panel's access zone overlaps the other's footprint.
ConflictGraph build_conflict_graph(const std::vector<CandidatePanel>& candidates, const GridOptions& opts);

bool panels_conflict(const CandidatePanel& a, const CandidatePanel& b, double clearance);

}  // namespace heliopack
