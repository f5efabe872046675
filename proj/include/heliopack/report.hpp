#pragma once

// Run metrics (CSV/JSON) and SVG layout rendering.

#include "heliopack/layout.hpp"
#include "heliopack/opt.hpp"

#include <map>
#include <string>
#include <vector>

namespace heliopack {

struct RunReport {
  std::string label;
  double latitude = 0.0;
  double rotation = 0.0;  // target long-axis angle, degrees; 0 when not rotated
  std::string objective_mode = "shaded";
  int azimuth_options = 0;
  int candidates = 0;
  int regions = 0;
  int panel_count = 0;
  double annual_energy = 0.0;    // Wh, with shading, for either mode
  double unshaded_energy = 0.0;  // Wh
  double objective = 0.0;        // in the run's objective mode
  double shaded_objective = 0.0;
  double shading_loss = 0.0;
  double packing_density = 0.0;
  double roof_area = 0.0;  // m^2
  int row_baseline_panels = 0;
  double row_baseline_objective = 0.0;
  double row_baseline_energy = 0.0;
  double gap_vs_rows = 0.0;          // objective minus row-baseline objective
  double energy_gain_vs_rows = 0.0;  // annual energy / row-baseline energy - 1
  std::map<double, int> azimuth_histogram;
  std::map<double, int> tilt_histogram;
  std::string error;             // set when the run failed
  double runtime_seconds = 0.0;  // never written to the metric files
};

/// Fills the histograms with every configured option, including zeros.
void fill_histograms(RunReport& report, const std::vector<CandidatePanel>& candidates, const Selection& x,
                     const GridOptions& grid);

/// Six significant digits, "%.6g".
std::string format_number(double v);

/// Column order used by both exports.
const std::vector<std::string>& metric_columns();

/// One header row plus one row per report.
std::string metrics_csv(const std::vector<RunReport>& reports);
/// A JSON array of objects with the same keys and rounded values as the CSV;
/// histograms are objects keyed by the option value.
std::string metrics_json(const std::vector<RunReport>& reports);
std::vector<RunReport> reports_from_json(const std::string& text);

struct SvgOptions {
  double pixels_per_meter = 40.0;
  double margin = 1.0;  // m
};

/// Roof outline, obstacles in red, selected panel footprints colored by
/// azimuth with tilt labels, a legend and a 1 m scale bar.
std::string render_svg(const RoofPolygon& roof, const std::vector<CandidatePanel>& candidates, const Selection& x,
                       const SvgOptions& options = {});

}  // namespace heliopack
