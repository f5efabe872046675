#include "heliopack/pipeline.hpp"

#include "heliopack/error.hpp"
#include "heliopack/image_io.hpp"
#include "heliopack/polygon_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace heliopack {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tagged(const char* stage, const std::exception& e) { return std::string("[") + stage + "] " + e.what(); }

// Runs f and prefixes any library error with the stage name, keeping its type.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SolverNotProven& e) {
    throw SolverNotProven(tagged(name, e));
  } catch (const ConfigError& e) {
    throw ConfigError(tagged(name, e));
  } catch (const DataError& e) {
    throw DataError(tagged(name, e));
  } catch (const InvalidInput& e) {
    throw InvalidInput(tagged(name, e));
  } catch (const Error& e) {
    throw Error(tagged(name, e));
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key " + where + "." + key);
  }
}

template <class T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj[key].is_null()) out = obj[key].get<T>();
}

template <class T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key)) out = obj[key].is_null() ? std::nullopt : std::optional<T>(obj[key].get<T>());
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json ring_json(std::span<const Point2> ring) {
  json a = json::array();
  for (const auto& p : ring) a.push_back({p.x(), p.y()});
  return a;
}

Weather load_weather(const PipelineConfig& c) {
  if (c.synthetic_weather) return synthetic_weather(c.latitude, c.longitude, c.utc_offset, c.weather_year);
  return read_weather_csv(c.weather);
}

// Shaded energy of the selection summed directly from a fresh pairwise
// matrix over the selected panels, independent of the solver's bookkeeping.
double recomputed_energy(const RoofProblem& problem, const Selection& x) {
  std::vector<int> ids;
  std::vector<CandidatePanel> sel;
  for (int i = 0; i < problem.size(); ++i)
    if (x[i]) {
      ids.push_back(i);
      sel.push_back((*problem.candidates)[i]);
      sel.back().id = static_cast<int>(sel.size()) - 1;
    }
  const int K = problem.samples->size();
  Eigen::MatrixXd shade = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()), K);
  ShadowOptions opts = problem.shadow;
  opts.skip_pairs = nullptr;
  for (const auto& t : build_shadow_matrix(sel, *problem.samples, opts).triplets()) shade(t.receiver, t.k) += t.fraction;
  double e = 0.0;
  for (std::size_t t = 0; t < ids.size(); ++t)
    for (int k = 0; k < K; ++k)
      e += problem.generation(ids[t], k) * (1.0 - std::min(1.0, shade(static_cast<Eigen::Index>(t), k)));
  return e;
}

void check_result(const PipelineConfig& config, const PipelineResult& r) {
  const auto ids = r.solution.ids();
  if (!r.graph.is_independent(ids)) throw std::logic_error("final selection violates the conflict graph");
  const auto region = setback_region(r.roof, config.grid.boundary_setback, config.grid.obstacle_setback);
  for (int i : ids)
    if (!convex_inside(region, std::span<const Point2>(r.candidates[i].footprint)))
      throw std::logic_error("panel " + std::to_string(i) + " leaves the setback region");
  RoofProblem shaded = r.problem;
  shaded.shading = true;
  const double direct = recomputed_energy(shaded, r.solution.selected);
  const double reported = r.report.annual_energy;
  if (std::abs(direct - reported) > 1e-6 * std::max(1.0, std::abs(direct)))
    throw std::logic_error("reported energy " + format_number(reported) + " disagrees with recomputed " +
                           format_number(direct));
}

std::string run_label(double latitude, double angle, bool shaded, bool az16) {
  return "lat" + format_number(latitude) + "_rot" + format_number(angle) + (shaded ? "_shaded" : "_unshaded") +
         (az16 ? "_az16" : "");
}

}  // namespace

void PipelineConfig::validate() const {
  const bool has_poly = !polygon_input.empty(), has_raster = !raster_input.empty();
  if (has_poly == has_raster) throw ConfigError("exactly one of a polygon input and a raster input is required");
  const fs::path& in = has_poly ? polygon_input : raster_input;
  if (!fs::exists(in)) throw ConfigError("input file not found: " + in.string());
  if (!synthetic_weather) {
    if (weather.empty()) throw ConfigError("a weather file is required unless synthetic weather is selected");
    if (!fs::exists(weather)) throw ConfigError("weather file not found: " + weather.string());
  }
  if (!(latitude >= -90.0 && latitude <= 90.0)) throw ConfigError("latitude must be in [-90, 90]");
  if (!(longitude >= -180.0 && longitude <= 180.0)) throw ConfigError("longitude must be in [-180, 180]");
  if (!(std::abs(utc_offset) <= 14.0)) throw ConfigError("utc_offset must be within 14 hours");
  if (roof_index < 0) throw ConfigError("roof_index must be non-negative");
  if (max_candidates_per_region < 1) throw ConfigError("max_candidates_per_region must be positive");
  if (sweeps < 1) throw ConfigError("sweeps must be at least 1");
  if (!(visibility_spacing > 0.0)) throw ConfigError("visibility_spacing must be positive");
  if (walk_length < 1) throw ConfigError("walk_length must be at least 1");
  if (solver.exact.size_cap < 0 || solver.exact.node_limit < 1) throw ConfigError("invalid exact solver limits");
  if (solver.local.budget < 0 || solver.local.max_starts < 1) throw ConfigError("invalid local search settings");
  if (raster_resolution && !(*raster_resolution > 0.0)) throw ConfigError("raster resolution must be positive");
  try {
    panel.validate();
    grid.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig config_from_json(const std::string& text, const fs::path& base_dir) {
  PipelineConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j,
               {"input", "site", "weather", "panel", "grid", "economics", "solver", "decomposition", "shading",
                "segmentation", "rotation", "output"},
               "config");
    if (j.contains("input")) {
      const auto& s = j["input"];
      check_keys(s, {"polygons", "raster", "roof_index", "resolution"}, "input");
      c.polygon_input = resolve(base_dir, s.value("polygons", ""));
      c.raster_input = resolve(base_dir, s.value("raster", ""));
      read_opt(s, "roof_index", c.roof_index);
      read_opt(s, "resolution", c.raster_resolution);
    }
    if (j.contains("site")) {
      const auto& s = j["site"];
      check_keys(s, {"latitude", "longitude", "utc_offset"}, "site");
      read_opt(s, "latitude", c.latitude);
      read_opt(s, "longitude", c.longitude);
      read_opt(s, "utc_offset", c.utc_offset);
    }
    if (j.contains("weather")) {
      const auto& s = j["weather"];
      check_keys(s, {"path", "synthetic", "year", "day", "first_hour", "last_hour"}, "weather");
      c.weather = resolve(base_dir, s.value("path", ""));
      read_opt(s, "synthetic", c.synthetic_weather);
      read_opt(s, "year", c.weather_year);
      read_opt(s, "day", c.sampling.day);
      read_opt(s, "first_hour", c.sampling.first_hour);
      read_opt(s, "last_hour", c.sampling.last_hour);
    }
    if (j.contains("panel")) {
      const auto& s = j["panel"];
      check_keys(s, {"length", "width", "rated_power"}, "panel");
      read_opt(s, "length", c.panel.length);
      read_opt(s, "width", c.panel.width);
      read_opt(s, "rated_power", c.panel.rated_power);
    }
    if (j.contains("grid")) {
      const auto& s = j["grid"];
      check_keys(s, {"azimuths", "tilts", "shifts", "boundary_setback", "obstacle_setback", "access_clearance"},
                 "grid");
      read_opt(s, "azimuths", c.grid.azimuths);
      read_opt(s, "tilts", c.grid.tilts);
      if (s.contains("shifts")) {
        c.grid.shifts.clear();
        for (const auto& p : s["shifts"]) c.grid.shifts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      }
      read_opt(s, "boundary_setback", c.grid.boundary_setback);
      read_opt(s, "obstacle_setback", c.grid.obstacle_setback);
      read_opt(s, "access_clearance", c.grid.access_clearance);
    }
    if (j.contains("economics")) {
      const auto& s = j["economics"];
      check_keys(s, {"panel_cost", "tariff", "tariff_by_sample", "lifetime_years"}, "economics");
      read_opt(s, "panel_cost", c.econ.panel_cost);
      read_opt(s, "tariff", c.econ.tariff);
      read_opt(s, "tariff_by_sample", c.econ.tariff_by_sample);
      read_opt(s, "lifetime_years", c.econ.lifetime_years);
    }
    c.panel.cost = c.econ.panel_cost;
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      check_keys(s, {"exact_cap", "node_limit", "budget", "rng_seed", "max_starts"}, "solver");
      read_opt(s, "exact_cap", c.solver.exact.size_cap);
      read_opt(s, "node_limit", c.solver.exact.node_limit);
      read_opt(s, "budget", c.solver.local.budget);
      read_opt(s, "rng_seed", c.solver.local.rng_seed);
      read_opt(s, "max_starts", c.solver.local.max_starts);
    }
    if (j.contains("decomposition")) {
      const auto& s = j["decomposition"];
      check_keys(s, {"max_candidates_per_region", "sweeps", "visibility_spacing", "walk_length"}, "decomposition");
      read_opt(s, "max_candidates_per_region", c.max_candidates_per_region);
      read_opt(s, "sweeps", c.sweeps);
      read_opt(s, "visibility_spacing", c.visibility_spacing);
      read_opt(s, "walk_length", c.walk_length);
    }
    if (j.contains("shading")) {
      const auto& s = j["shading"];
      check_keys(s, {"enabled", "cull_distance", "min_elevation"}, "shading");
      read_opt(s, "enabled", c.shading);
      read_opt(s, "cull_distance", c.cull_distance);
      read_opt(s, "min_elevation", c.min_elevation);
    }
    if (j.contains("segmentation")) {
      const auto& s = j["segmentation"];
      check_keys(s,
                 {"kernel_radius", "threshold", "min_area", "max_elongation", "red_band", "nir_band", "ndvi_threshold",
                  "mask_shadows", "msi_lengths", "msi_threshold"},
                 "segmentation");
      auto& g = c.segmentation;
      read_opt(s, "kernel_radius", g.kernel_radius);
      read_opt(s, "threshold", g.threshold);
      read_opt(s, "min_area", g.min_area);
      read_opt(s, "max_elongation", g.max_elongation);
      read_opt(s, "red_band", g.red_band);
      read_opt(s, "nir_band", g.nir_band);
      read_opt(s, "ndvi_threshold", g.ndvi_threshold);
      read_opt(s, "mask_shadows", g.mask_shadows);
      read_opt(s, "msi_lengths", g.msi_lengths);
      read_opt(s, "msi_threshold", g.msi_threshold);
    }
    read_opt(j, "rotation", c.rotation);
    if (j.contains("output")) {
      const auto& s = j["output"];
      check_keys(s, {"dir", "dump_problem", "dump_regions"}, "output");
      if (s.contains("dir")) c.output_dir = resolve(base_dir, s["dir"].get<std::string>());
      read_opt(s, "dump_problem", c.dump_problem);
      read_opt(s, "dump_regions", c.dump_regions);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

PipelineConfig read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), path.parent_path());
}

std::string config_to_json(const PipelineConfig& c) {
  json shifts = json::array();
  for (const auto& s : c.grid.shifts) shifts.push_back({s.x(), s.y()});
  const auto& g = c.segmentation;
  json j = {
      {"input",
       {{"polygons", c.polygon_input.string()},
        {"raster", c.raster_input.string()},
        {"roof_index", c.roof_index},
        {"resolution", opt_json(c.raster_resolution)}}},
      {"site", {{"latitude", c.latitude}, {"longitude", c.longitude}, {"utc_offset", c.utc_offset}}},
      {"weather",
       {{"path", c.weather.string()},
        {"synthetic", c.synthetic_weather},
        {"year", c.weather_year},
        {"day", c.sampling.day},
        {"first_hour", c.sampling.first_hour},
        {"last_hour", c.sampling.last_hour}}},
      {"panel", {{"length", c.panel.length}, {"width", c.panel.width}, {"rated_power", c.panel.rated_power}}},
      {"grid",
       {{"azimuths", c.grid.azimuths},
        {"tilts", c.grid.tilts},
        {"shifts", shifts},
        {"boundary_setback", c.grid.boundary_setback},
        {"obstacle_setback", c.grid.obstacle_setback},
        {"access_clearance", c.grid.access_clearance}}},
      {"economics",
       {{"panel_cost", c.econ.panel_cost},
        {"tariff", c.econ.tariff},
        {"tariff_by_sample", c.econ.tariff_by_sample},
        {"lifetime_years", c.econ.lifetime_years}}},
      {"solver",
       {{"exact_cap", c.solver.exact.size_cap},
        {"node_limit", c.solver.exact.node_limit},
        {"budget", c.solver.local.budget},
        {"rng_seed", c.solver.local.rng_seed},
        {"max_starts", c.solver.local.max_starts}}},
      {"decomposition",
       {{"max_candidates_per_region", c.max_candidates_per_region},
        {"sweeps", c.sweeps},
        {"visibility_spacing", c.visibility_spacing},
        {"walk_length", c.walk_length}}},
      {"shading", {{"enabled", c.shading}, {"cull_distance", c.cull_distance}, {"min_elevation", c.min_elevation}}},
      {"segmentation",
       {{"kernel_radius", g.kernel_radius},
        {"threshold", opt_json(g.threshold)},
        {"min_area", g.min_area},
        {"max_elongation", g.max_elongation},
        {"red_band", opt_json(g.red_band)},
        {"nir_band", opt_json(g.nir_band)},
        {"ndvi_threshold", g.ndvi_threshold},
        {"mask_shadows", g.mask_shadows},
        {"msi_lengths", g.msi_lengths},
        {"msi_threshold", opt_json(g.msi_threshold)}}},
      {"rotation", opt_json(c.rotation)},
      {"output",
       {{"dir", c.output_dir.string()}, {"dump_problem", c.dump_problem}, {"dump_regions", c.dump_regions}}},
  };
  return j.dump(2) + "\n";
}

std::vector<RoofPolygon> load_roofs(const PipelineConfig& config, std::vector<std::string>* warnings) {
  if (!config.polygon_input.empty()) return stage("input", [&] { return read_polygons(config.polygon_input); });
  RasterImage image = stage("input", [&] { return read_raster(config.raster_input); });
  if (config.raster_resolution) image.resolution = *config.raster_resolution;
  return stage("raster", [&] { return segment_rooftops(image, config.segmentation, warnings); });
}

std::unique_ptr<PipelineResult> run_pipeline(const PipelineConfig& config, const std::string& label) {
  const auto start = std::chrono::steady_clock::now();
  stage("config", [&] { config.validate(); });
  auto out = std::make_unique<PipelineResult>();
  PipelineResult& r = *out;

  const auto roofs = load_roofs(config, &r.warnings);
  if (config.roof_index >= static_cast<int>(roofs.size()))
    throw DataError("[input] roof index " + std::to_string(config.roof_index) + " not present; the input has " +
                    std::to_string(roofs.size()) + " roof(s)");
  r.roof = stage("geom", [&] {
    RoofPolygon roof = roofs[config.roof_index];
    if (!(roof.area() > 0.0)) throw DataError("roof polygon has no area");
    return config.rotation ? rotate_roof(roof, *config.rotation) : roof;
  });

  r.samples = stage("solar", [&] {
    const Weather w = load_weather(config);
    for (const auto& msg : w.warnings) r.warnings.push_back(msg);
    auto samples = build_time_samples(config.latitude, config.longitude, config.utc_offset, w, config.sampling);
    config.econ.validate(samples.size());
    return samples;
  });

  stage("layout", [&] {
    PanelSpec spec = config.panel;
    spec.cost = config.econ.panel_cost;
    r.candidates = generate_candidates(r.roof, spec, config.grid);
    r.graph = build_conflict_graph(r.candidates, config.grid);
  });

  stage("solar", [&] {
    const auto table = baseline_generation(config_orientations(config.grid), r.samples, config.panel.rated_power);
    r.problem.candidates = &r.candidates;
    r.problem.graph = &r.graph;
    r.problem.samples = &r.samples;
    r.problem.generation = candidate_generation(r.candidates, table);
    r.problem.econ = config.econ;
    r.problem.shadow.cull_distance = config.cull_distance;
    r.problem.shadow.min_elevation = config.min_elevation;
    r.problem.shading = config.shading;
  });

  const int n = static_cast<int>(r.candidates.size());
  stage("decomp", [&] {
    if (n <= config.max_candidates_per_region) {
      r.partition.region_of.assign(n, 0);
      if (n > 0) {
        r.partition.regions.emplace_back(n);
        for (int i = 0; i < n; ++i) r.partition.regions[0][i] = i;
      }
      return;
    }
    r.visibility = build_visibility_graph(r.roof, config.visibility_spacing);
    r.communities = walktrap_communities(static_cast<int>(r.visibility.nodes.size()), r.visibility.edges,
                                         config.walk_length)
                        .communities;
    r.partition = partition_regions(r.candidates, r.visibility.nodes, r.communities, config.max_candidates_per_region);
  });
  for (int i = 0; i < n; ++i) r.candidates[i].region_id = r.partition.region_of[i];

  stage("opt", [&] {
    r.row_baseline = roof_row_baseline(r.problem);
    SequentialOptions seq;
    seq.sweeps = config.sweeps;
    seq.solver = config.solver;
    auto res = sequential_optimize(r.problem, r.partition, seq, r.row_baseline.selected);
    r.solution = std::move(res.solution);
    r.history = std::move(res.history);
  });

  // Report: energies always with shading, objective in the run's mode.
  RoofProblem shaded = r.problem;
  shaded.shading = true;
  const Solution eval = config.shading ? r.solution : stage("shade", [&] { return evaluate_selection(shaded, r.solution.selected); });
  const Solution base_eval =
      config.shading ? r.row_baseline : stage("shade", [&] { return evaluate_selection(shaded, r.row_baseline.selected); });
  const double roof_area = r.roof.area();
  const double panel_area = config.panel.length * config.panel.width;
  r.solution.packing_density = r.solution.panel_count * panel_area / roof_area;
  r.row_baseline.packing_density = r.row_baseline.panel_count * panel_area / roof_area;

  RunReport& rep = r.report;
  rep.label = label;
  rep.latitude = config.latitude;
  rep.rotation = config.rotation.value_or(0.0);
  rep.objective_mode = config.shading ? "shaded" : "unshaded";
  rep.azimuth_options = static_cast<int>(config.grid.azimuths.size());
  rep.candidates = n;
  rep.regions = static_cast<int>(r.partition.regions.size());
  rep.panel_count = r.solution.panel_count;
  rep.annual_energy = eval.annual_energy;
  rep.unshaded_energy = eval.unshaded_energy;
  rep.objective = r.solution.objective;
  rep.shaded_objective = eval.objective;
  rep.shading_loss = eval.shading_loss;
  rep.packing_density = r.solution.packing_density;
  rep.roof_area = roof_area;
  rep.row_baseline_panels = r.row_baseline.panel_count;
  rep.row_baseline_objective = r.row_baseline.objective;
  rep.row_baseline_energy = base_eval.annual_energy;
  rep.gap_vs_rows = r.solution.objective - r.row_baseline.objective;
  rep.energy_gain_vs_rows = base_eval.annual_energy > 0.0 ? eval.annual_energy / base_eval.annual_energy - 1.0 : 0.0;
  fill_histograms(rep, r.candidates, r.solution.selected, config.grid);

  check_result(config, r);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string solution_json(const PipelineConfig& config, const PipelineResult& r) {
  json panels = json::array();
  for (int i : r.solution.ids()) {
    const auto& c = r.candidates[i];
    panels.push_back({{"id", c.id},
                      {"config", c.config},
                      {"azimuth", c.azimuth},
                      {"tilt", c.tilt},
                      {"shift", c.shift},
                      {"grid_row", c.grid_row},
                      {"grid_col", c.grid_col},
                      {"region", c.region_id},
                      {"anchor", {c.anchor.x(), c.anchor.y()}},
                      {"footprint", ring_json(c.footprint)}});
  }
  json holes = json::array();
  for (const auto& h : r.roof.holes) holes.push_back(ring_json(h));
  json history = json::array();
  for (const auto& h : r.history)
    history.push_back({{"sweep", h.sweep},
                       {"region", h.region},
                       {"candidates", h.candidates},
                       {"objective_before", h.objective_before},
                       {"objective_after", h.objective_after},
                       {"reverted", h.reverted}});
  json doc = {
      {"label", r.report.label},
      {"objective_mode", r.report.objective_mode},
      {"metrics", json::parse(metrics_json({r.report})).at(0)},
      {"roof", {{"exterior", ring_json(r.roof.exterior)}, {"holes", holes}, {"area", r.roof.area()}}},
      {"panels", panels},
      {"row_baseline",
       {{"panel_count", r.row_baseline.panel_count},
        {"objective", r.row_baseline.objective},
        {"annual_energy", r.report.row_baseline_energy}}},
      {"history", history},
      {"warnings", r.warnings},
      {"config", json::parse(config_to_json(config))},
  };
  // Where the files went is not part of the result.
  doc["config"].erase("output");
  return doc.dump(2) + "\n";
}

std::string problem_json(const PipelineResult& r) {
  json regions = json::array();
  for (const auto& ids : r.partition.regions) {
    const SubProblem sub(r.problem, ids);
    const auto& ctx = sub.context();
    json gen = json::array();
    for (Eigen::Index i = 0; i < ctx.generation.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < ctx.generation.cols(); ++k) row.push_back(ctx.generation(i, k));
      gen.push_back(std::move(row));
    }
    json edges = json::array();
    for (const auto& [a, b] : ctx.graph->edges()) edges.push_back({a, b});
    json shadow = json::array();
    for (const auto& t : sub.shadow().triplets()) shadow.push_back({t.receiver, t.caster, t.k, t.fraction});
    regions.push_back({{"ids", ids},
                       {"cost", std::vector<double>(ctx.cost.data(), ctx.cost.data() + ctx.cost.size())},
                       {"generation_wh", gen},
                       {"conflicts", edges},
                       {"shadow", shadow}});
  }
  json samples = json::array();
  for (const auto& s : r.samples.samples)
    samples.push_back({{"k", s.k},
                       {"month", s.time.month},
                       {"day", s.time.day},
                       {"hour", s.time.hour},
                       {"sun_azimuth", s.sun.azimuth},
                       {"sun_elevation", s.sun.elevation}});
  std::vector<double> value(static_cast<std::size_t>(r.samples.size()));
  for (int k = 0; k < r.samples.size(); ++k) value[k] = r.problem.econ.value_per_wh(k);
  json doc = {{"candidates", r.candidates.size()},
              {"samples", samples},
              {"value_per_wh", value},
              {"shading", r.problem.shading},
              {"regions", regions}};
  return doc.dump() + "\n";
}

std::string regions_json(const PipelineResult& r) {
  json nodes = json::array();
  for (const auto& p : r.visibility.nodes) nodes.push_back({p.x(), p.y()});
  json edges = json::array();
  for (const auto& [a, b] : r.visibility.edges) edges.push_back({a, b});
  json doc = {{"nodes", nodes},
              {"ring_of", r.visibility.ring_of},
              {"edges", edges},
              {"communities", r.communities},
              {"region_of", r.partition.region_of},
              {"regions", r.partition.regions}};
  return doc.dump() + "\n";
}

void write_artifacts(const PipelineConfig& config, const PipelineResult& r, const fs::path& dir) {
  stage("output", [&] {
    fs::create_directories(dir);
    write_file_atomic(dir / "solution.json", solution_json(config, r));
    write_file_atomic(dir / "metrics.csv", metrics_csv({r.report}));
    write_file_atomic(dir / "metrics.json", metrics_json({r.report}));
    write_file_atomic(dir / "layout.svg", render_svg(r.roof, r.candidates, r.solution.selected));
    if (config.dump_problem) write_file_atomic(dir / "problem.json", problem_json(r));
    if (config.dump_regions) write_file_atomic(dir / "regions.json", regions_json(r));
  });
}

std::vector<RunReport> rotation_sweep(const PipelineConfig& config, const SweepOptions& options) {
  for (double a : options.angles)
    if (!(a >= 0.0 && a <= 90.0)) throw ConfigError("sweep angles must lie in [0, 90]");
  if (options.angles.empty()) throw ConfigError("sweep needs at least one angle");

  struct Run {
    double latitude;
    double angle;
    bool shaded;
    bool az16;
  };
  std::vector<Run> runs;
  const std::vector<double> lats = options.latitudes.empty() ? std::vector<double>{config.latitude} : options.latitudes;
  for (double lat : lats) {
    for (double a : options.angles) {
      if (options.both_modes || config.shading) runs.push_back({lat, a, true, false});
      if (options.both_modes || !config.shading) runs.push_back({lat, a, false, false});
    }
    if (options.azimuths16)
      for (double a : options.angles) runs.push_back({lat, a, false, true});
  }

  std::vector<RunReport> reports;
  for (const auto& run : runs) {
    PipelineConfig c = config;
    c.latitude = run.latitude;
    c.rotation = run.angle;
    c.shading = run.shaded;
    if (run.az16) {
      c.grid.azimuths.clear();
      for (int t = 0; t < 16; ++t) c.grid.azimuths.push_back(22.5 * t);
    }
    const std::string label = run_label(run.latitude, run.angle, run.shaded, run.az16);
    try {
      const auto result = run_pipeline(c, label);
      write_artifacts(c, *result, config.output_dir / label);
      std::fprintf(stderr, "%s: %d panels, %.1f s\n", label.c_str(), result->report.panel_count,
                   result->report.runtime_seconds);
      reports.push_back(result->report);
    } catch (const Error& e) {
      RunReport failed;
      failed.label = label;
      failed.latitude = run.latitude;
      failed.rotation = run.angle;
      failed.objective_mode = run.shaded ? "shaded" : "unshaded";
      failed.azimuth_options = static_cast<int>(c.grid.azimuths.size());
      failed.error = e.what();
      std::fprintf(stderr, "%s: failed: %s\n", label.c_str(), e.what());
      reports.push_back(std::move(failed));
    }
  }
  stage("output", [&] {
    write_file_atomic(config.output_dir / "sweep.csv", metrics_csv(reports));
    write_file_atomic(config.output_dir / "sweep.json", metrics_json(reports));
  });
  return reports;
}

}  // namespace heliopack
