#include "validate.hpp"

#include "heliopack/error.hpp"
#include "heliopack/pipeline.hpp"
#include "heliopack/polygon_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace heliopack;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNotProven = 3 };

// Flags shared by optimize and sweep. Every flag is optional and wins over
// the config file.
struct Overrides {
  std::string config;
  std::string polygon, raster, weather, out;
  std::optional<int> roof_index;
  std::optional<double> latitude, longitude, utc_offset, rotation, resolution;
  bool synthetic_weather = false;
  bool no_shading = false;
  std::optional<std::uint64_t> rng_seed;
  std::optional<std::int64_t> budget;
  std::optional<int> exact_cap, region_cap, sweeps;
  bool dump_problem = false, dump_regions = false;

  void add_to(CLI::App* app, bool with_rotation) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--polygon", polygon, "roof polygon file (JSON or GeoJSON)");
    app->add_option("--raster", raster, "roof image (PNG or TIFF)");
    app->add_option("--roof-index", roof_index, "which roof of the input to use");
    app->add_option("--resolution", resolution, "raster meters per pixel");
    app->add_option("--latitude", latitude, "site latitude, degrees");
    app->add_option("--longitude", longitude, "site longitude, degrees");
    app->add_option("--utc-offset", utc_offset, "standard time offset from UTC, hours");
    app->add_option("--weather", weather, "hourly weather CSV");
    app->add_flag("--synthetic-weather", synthetic_weather, "use a generated clear-sky year");
    app->add_flag("--no-shading", no_shading, "optimize without inter-panel shading");
    app->add_option("--rng-seed", rng_seed, "local search seed");
    app->add_option("--budget", budget, "local search moves per region");
    app->add_option("--exact-cap", exact_cap, "largest region solved exactly");
    app->add_option("--max-candidates-per-region", region_cap, "decomposition region size cap");
    app->add_option("--sweeps", sweeps, "sequential optimization sweeps");
    app->add_option("--out", out, "output directory");
    if (with_rotation) app->add_option("--rotation", rotation, "rotate the roof long axis to this angle, degrees");
    app->add_flag("--dump-problem", dump_problem, "write problem.json with per-region data");
    app->add_flag("--region-dump", dump_regions, "write regions.json with the decomposition");
  }

  PipelineConfig build() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : read_config(config);
    if (!polygon.empty()) {
      c.polygon_input = polygon;
      c.raster_input.clear();
    }
    if (!raster.empty()) {
      c.raster_input = raster;
      if (polygon.empty()) c.polygon_input.clear();
    }
    if (roof_index) c.roof_index = *roof_index;
    if (resolution) c.raster_resolution = resolution;
    if (latitude) c.latitude = *latitude;
    if (longitude) c.longitude = *longitude;
    if (utc_offset) c.utc_offset = *utc_offset;
    if (!weather.empty()) {
      c.weather = weather;
      c.synthetic_weather = false;
    }
    if (synthetic_weather) c.synthetic_weather = true;
    if (no_shading) c.shading = false;
    if (rng_seed) c.solver.local.rng_seed = *rng_seed;
    if (budget) c.solver.local.budget = *budget;
    if (exact_cap) c.solver.exact.size_cap = *exact_cap;
    if (region_cap) c.max_candidates_per_region = *region_cap;
    if (sweeps) c.sweeps = *sweeps;
    if (!out.empty()) c.output_dir = out;
    if (rotation) c.rotation = rotation;
    if (dump_problem) c.dump_problem = true;
    if (dump_regions) c.dump_regions = true;
    return c;
  }
};

int run_optimize(const Overrides& o) {
  const PipelineConfig config = o.build();
  const auto result = run_pipeline(config, "run");
  write_artifacts(config, *result, config.output_dir);
  for (const auto& w : result->warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto& r = result->report;
  std::printf("%d panels, %.6g Wh/yr, objective %.6g (%s), shading loss %.4f, gap vs rows %.6g\n", r.panel_count,
              r.annual_energy, r.objective, r.objective_mode.c_str(), r.shading_loss, r.gap_vs_rows);
  std::fprintf(stderr, "runtime %.2f s\n", r.runtime_seconds);
  return kOk;
}

int run_sweep(const Overrides& o, const SweepOptions& s) {
  const PipelineConfig config = o.build();
  config.validate();
  const auto reports = rotation_sweep(config, s);
  int failed = 0;
  for (const auto& r : reports) failed += r.error.empty() ? 0 : 1;
  std::printf("%zu runs, %d failed; results in %s\n", reports.size(), failed,
              (config.output_dir / "sweep.csv").string().c_str());
  return failed ? kData : kOk;
}

int run_segment(const std::string& config_path, const std::string& raster, std::optional<double> resolution,
                const std::string& out) {
  PipelineConfig c = config_path.empty() ? PipelineConfig{} : read_config(config_path);
  c.raster_input = raster;
  c.polygon_input.clear();
  if (resolution) c.raster_resolution = resolution;
  std::vector<std::string> warnings;
  const auto roofs = load_roofs(c, &warnings);
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  write_file_atomic(out, format_polygons(roofs));
  std::printf("%zu roof polygon(s) written to %s\n", roofs.size(), out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rooftop solar panel layout optimizer"};
  app.require_subcommand(1);

  Overrides opt_flags, sweep_flags;
  auto* optimize = app.add_subcommand("optimize", "optimize the panel layout of one roof");
  opt_flags.add_to(optimize, true);

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "rotation and latitude experiments");
  sweep_flags.add_to(sweep, false);
  sweep->add_option("--angles", sweep_opts.angles, "rotation angles in [0, 90]")->delimiter(',');
  sweep->add_option("--latitudes", sweep_opts.latitudes, "latitudes to repeat the sweep at")->delimiter(',');
  sweep->add_flag("--azimuths16", sweep_opts.azimuths16, "add unshaded runs with 16 azimuth options");
  bool single_mode = false;
  sweep->add_flag("--single-mode", single_mode, "only the configured objective mode");

  std::string seg_config, seg_raster, seg_out = "roofs.json";
  std::optional<double> seg_resolution;
  auto* segment = app.add_subcommand("segment", "extract roof polygons from an image");
  segment->add_option("--config", seg_config, "JSON config file (segmentation section)")->check(CLI::ExistingFile);
  segment->add_option("--raster", seg_raster, "roof image (PNG or TIFF)")->required()->check(CLI::ExistingFile);
  segment->add_option("--resolution", seg_resolution, "meters per pixel");
  segment->add_option("--out", seg_out, "output polygon file");

  cli::ValidateOptions val;
  auto* validate = app.add_subcommand("validate", "check the solvers and geometry against reference oracles");
  validate->add_option("--instances", val.solver_instances, "random solver instances");
  validate->add_option("--fixtures", val.shading_fixtures, "random shading fixtures");
  validate->add_option("--rays", val.rays, "Monte Carlo rays per fixture");
  validate->add_option("--latitude", val.latitude, "latitude for the time-sampling check");
  validate->add_option("--seed", val.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*optimize) return run_optimize(opt_flags);
    if (*sweep) {
      sweep_opts.both_modes = !single_mode;
      return run_sweep(sweep_flags, sweep_opts);
    }
    if (*segment) return run_segment(seg_config, seg_raster, seg_resolution, seg_out);
    if (*validate) return cli::run_validation(val, std::cout) ? kOk : kData;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const SolverNotProven& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNotProven;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
