#pragma once

// End-to-end runs: roof input, weather, candidates, shading, decomposition,
// optimization and the written artifacts. Also the rotation and latitude
// sweeps.

#include "heliopack/decomp.hpp"
#include "heliopack/raster.hpp"
#include "heliopack/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace heliopack {

struct PipelineConfig {
  std::filesystem::path polygon_input;
  std::filesystem::path raster_input;
  int roof_index = 0;  // which polygon of the input to optimize

  double latitude = 25.0;
  double longitude = 0.0;
  double utc_offset = 0.0;
  std::filesystem::path weather;
  bool synthetic_weather = false;
  int weather_year = 2019;
  SamplingScheme sampling;

  PanelSpec panel;
  GridOptions grid;
  EconomicParams econ;
  SolverOptions solver;

  int max_candidates_per_region = 600;
  int sweeps = 2;
  double visibility_spacing = 0.5;
  int walk_length = 4;

  bool shading = true;
  double cull_distance = 30.0;
  double min_elevation = 3.0;

  SegmentOptions segmentation;
  std::optional<double> raster_resolution;  // overrides the file's value
  std::optional<double> rotation;           // target long-axis angle, degrees

  std::filesystem::path output_dir = "heliopack_out";
  bool dump_problem = false;
  bool dump_regions = false;

  /// Exactly one input, paths present, option values in range. Throws
  /// ConfigError.
  void validate() const;
};

/// Reads a JSON config. Relative paths resolve against `base_dir`. Unknown
/// keys are rejected with ConfigError.
PipelineConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig read_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& config);

struct PipelineResult {
  RunReport report;
  RoofPolygon roof;  // as optimized, after any rotation
  std::vector<CandidatePanel> candidates;
  ConflictGraph graph;
  TimeSampleSet samples;
  RoofProblem problem;  // points into this result; do not copy the result
  RegionPartition partition;
  std::vector<std::vector<int>> communities;
  VisibilityGraph visibility;
  Solution solution;
  Solution row_baseline;
  std::vector<SweepRecord> history;
  std::vector<std::string> warnings;

  PipelineResult() = default;
  PipelineResult(const PipelineResult&) = delete;
  PipelineResult& operator=(const PipelineResult&) = delete;
};

/// Loads the roof(s) named by the config: polygons from file, or
/// segmentation of the raster.
std::vector<RoofPolygon> load_roofs(const PipelineConfig& config, std::vector<std::string>* warnings = nullptr);

/// Runs every stage without writing files. Errors carry a "[stage]" prefix.
/// The result is checked for independence, setback containment and energy
/// consistency before it is returned.
std::unique_ptr<PipelineResult> run_pipeline(const PipelineConfig& config, const std::string& label = "run");

/// solution.json, metrics.csv, metrics.json and layout.svg, plus the
/// optional problem and region dumps.
void write_artifacts(const PipelineConfig& config, const PipelineResult& result, const std::filesystem::path& dir);

/// Solution document: panels, metrics, config echo and sweep history.
std::string solution_json(const PipelineConfig& config, const PipelineResult& result);
/// Per-region problem data: ids, costs, generation, conflicts and shadow
/// entries.
std::string problem_json(const PipelineResult& result);
/// Visibility graph, communities and candidate-to-region assignment.
std::string regions_json(const PipelineResult& result);

struct SweepOptions {
  std::vector<double> angles{0.0, 22.5, 45.0, 67.5, 90.0};
  std::vector<double> latitudes;  // empty: the config latitude only
  bool both_modes = true;         // shaded and unshaded; false: config mode only
  bool azimuths16 = false;        // extra unshaded runs with 16 azimuths
};

/// One pipeline run per (latitude, angle, mode). Each run writes its
/// artifacts into a subdirectory named by its label; sweep.csv and
/// sweep.json collect the reports. Failed runs are recorded in the report's
/// error column.
std::vector<RunReport> rotation_sweep(const PipelineConfig& config, const SweepOptions& options);

}  // namespace heliopack
