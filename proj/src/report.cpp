#include "heliopack/report.hpp"

#include "heliopack/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace heliopack {

namespace {

using nlohmann::json;

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string histogram_text(const std::map<double, int>& h) {
  std::string out;
  for (const auto& [k, v] : h) {
    if (!out.empty()) out += ';';
    out += format_number(k) + ":" + std::to_string(v);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

// Field values in metric_columns() order, as text.
std::vector<std::string> row_fields(const RunReport& r) {
  return {r.label,
          format_number(r.latitude),
          format_number(r.rotation),
          r.objective_mode,
          std::to_string(r.azimuth_options),
          std::to_string(r.candidates),
          std::to_string(r.regions),
          std::to_string(r.panel_count),
          format_number(r.annual_energy),
          format_number(r.unshaded_energy),
          format_number(r.objective),
          format_number(r.shaded_objective),
          format_number(r.shading_loss),
          format_number(r.packing_density),
          format_number(r.roof_area),
          std::to_string(r.row_baseline_panels),
          format_number(r.row_baseline_objective),
          format_number(r.row_baseline_energy),
          format_number(r.gap_vs_rows),
          format_number(r.energy_gain_vs_rows),
          histogram_text(r.azimuth_histogram),
          histogram_text(r.tilt_histogram),
          r.error};
}

json histogram_json(const std::map<double, int>& h) {
  json o = json::object();
  for (const auto& [k, v] : h) o[format_number(k)] = v;
  return o;
}

std::map<double, int> histogram_from(const json& o) {
  std::map<double, int> h;
  for (const auto& [k, v] : o.items()) h[std::stod(k)] = v.get<int>();
  return h;
}

// Azimuth color: hue around the compass.
std::string azimuth_color(double az) {
  const double h = std::fmod(az, 360.0) / 60.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = 1, g = x; break;
    case 1: r = x, g = 1; break;
    case 2: g = 1, b = x; break;
    case 3: g = x, b = 1; break;
    case 4: r = x, b = 1; break;
    default: r = 1, b = x; break;
  }
  auto ch = [](double c) { return static_cast<int>(std::lround(60 + 160 * c)); };
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(r), ch(g), ch(b));
  return buf;
}

}  // namespace

void fill_histograms(RunReport& report, const std::vector<CandidatePanel>& candidates, const Selection& x,
                     const GridOptions& grid) {
  report.azimuth_histogram.clear();
  report.tilt_histogram.clear();
  for (double a : grid.azimuths) report.azimuth_histogram[a] = 0;
  for (double t : grid.tilts) report.tilt_histogram[t] = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (x.at(i)) {
      ++report.azimuth_histogram[candidates[i].azimuth];
      ++report.tilt_histogram[candidates[i].tilt];
    }
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{"label",
                                             "latitude",
                                             "rotation_deg",
                                             "objective_mode",
                                             "azimuth_options",
                                             "candidates",
                                             "regions",
                                             "panel_count",
                                             "annual_energy_wh",
                                             "unshaded_energy_wh",
                                             "objective",
                                             "shaded_objective",
                                             "shading_loss",
                                             "packing_density",
                                             "roof_area_m2",
                                             "row_baseline_panels",
                                             "row_baseline_objective",
                                             "row_baseline_energy_wh",
                                             "gap_vs_rows",
                                             "energy_gain_vs_rows",
                                             "azimuth_histogram",
                                             "tilt_histogram",
                                             "error"};
  return cols;
}

std::string metrics_csv(const std::vector<RunReport>& reports) {
  std::string out;
  const auto& cols = metric_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
  out += "\n";
  for (const auto& r : reports) {
    const auto f = row_fields(r);
    for (std::size_t c = 0; c < f.size(); ++c) out += (c ? "," : "") + csv_field(f[c]);
    out += "\n";
  }
  return out;
}

std::string metrics_json(const std::vector<RunReport>& reports) {
  json arr = json::array();
  const auto& cols = metric_columns();
  for (const auto& r : reports) {
    const auto f = row_fields(r);
    json o = json::object();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::string& key = cols[c];
      if (key == "label" || key == "objective_mode" || key == "error") {
        o[key] = f[c];
      } else if (key == "azimuth_histogram") {
        o[key] = histogram_json(r.azimuth_histogram);
      } else if (key == "tilt_histogram") {
        o[key] = histogram_json(r.tilt_histogram);
      } else if (key == "azimuth_options" || key == "candidates" || key == "regions" || key == "panel_count" ||
                 key == "row_baseline_panels") {
        o[key] = std::stoll(f[c]);
      } else {
        o[key] = std::stod(f[c]);
      }
    }
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::vector<RunReport> reports_from_json(const std::string& text) {
  std::vector<RunReport> out;
  try {
    for (const auto& o : json::parse(text)) {
      RunReport r;
      r.label = o.at("label").get<std::string>();
      r.latitude = o.at("latitude").get<double>();
      r.rotation = o.at("rotation_deg").get<double>();
      r.objective_mode = o.at("objective_mode").get<std::string>();
      r.azimuth_options = o.at("azimuth_options").get<int>();
      r.candidates = o.at("candidates").get<int>();
      r.regions = o.at("regions").get<int>();
      r.panel_count = o.at("panel_count").get<int>();
      r.annual_energy = o.at("annual_energy_wh").get<double>();
      r.unshaded_energy = o.at("unshaded_energy_wh").get<double>();
      r.objective = o.at("objective").get<double>();
      r.shaded_objective = o.at("shaded_objective").get<double>();
      r.shading_loss = o.at("shading_loss").get<double>();
      r.packing_density = o.at("packing_density").get<double>();
      r.roof_area = o.at("roof_area_m2").get<double>();
      r.row_baseline_panels = o.at("row_baseline_panels").get<int>();
      r.row_baseline_objective = o.at("row_baseline_objective").get<double>();
      r.row_baseline_energy = o.at("row_baseline_energy_wh").get<double>();
      r.gap_vs_rows = o.at("gap_vs_rows").get<double>();
      r.energy_gain_vs_rows = o.at("energy_gain_vs_rows").get<double>();
      r.azimuth_histogram = histogram_from(o.at("azimuth_histogram"));
      r.tilt_histogram = histogram_from(o.at("tilt_histogram"));
      r.error = o.at("error").get<std::string>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics JSON: ") + e.what());
  }
  return out;
}

std::string render_svg(const RoofPolygon& roof, const std::vector<CandidatePanel>& candidates, const Selection& x,
                       const SvgOptions& options) {
  Box2 box = bounds(std::span<const Point2>(roof.exterior));
  if (box.isEmpty()) box = Box2(Point2::Zero(), Point2::Zero());
  const double s = options.pixels_per_meter, m = options.margin;
  const double legend_h = 1.6;  // m of space below the roof for legend and scale bar
  const double width = (box.sizes().x() + 2 * m) * s;
  const double height = (box.sizes().y() + 2 * m + legend_h) * s;
  auto px = [&](const Point2& p) {
    return fixed3((p.x() - box.min().x() + m) * s) + "," + fixed3((box.max().y() - p.y() + m) * s);
  };
  auto points = [&](auto begin, auto end) {
    std::string out;
    for (auto it = begin; it != end; ++it) out += (out.empty() ? "" : " ") + px(*it);
    return out;
  };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed3(width) << "\" height=\"" << fixed3(height)
    << "\" viewBox=\"0 0 " << fixed3(width) << " " << fixed3(height) << "\">\n";
  o << "  <title>Rooftop panel layout</title>\n";
  o << "  <rect x=\"0\" y=\"0\" width=\"" << fixed3(width) << "\" height=\"" << fixed3(height)
    << "\" fill=\"#ffffff\"/>\n";
  if (!roof.exterior.empty())
    o << "  <polygon class=\"roof\" points=\"" << points(roof.exterior.begin(), roof.exterior.end())
      << "\" fill=\"#ece8df\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  for (const auto& h : roof.holes)
    o << "  <polygon class=\"obstacle\" points=\"" << points(h.begin(), h.end())
      << "\" fill=\"#d62728\" stroke=\"#8b0000\" stroke-width=\"1\"/>\n";

  std::set<double> used;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!x.at(i)) continue;
    const auto& c = candidates[i];
    used.insert(c.azimuth);
    o << "  <polygon class=\"panel\" points=\"" << points(c.footprint.begin(), c.footprint.end()) << "\" fill=\""
      << azimuth_color(c.azimuth) << "\" stroke=\"#222222\" stroke-width=\"0.8\"><title>panel " << c.id
      << " azimuth " << format_number(c.azimuth) << " tilt " << format_number(c.tilt) << "</title></polygon>\n";
    const Point2 ctr = ring_centroid<double>(std::span<const Point2>(c.footprint));
    const auto at = px(ctr);
    const auto comma = at.find(',');
    o << "  <text class=\"tilt\" x=\"" << at.substr(0, comma) << "\" y=\"" << at.substr(comma + 1)
      << "\" font-size=\"" << fixed3(0.3 * s) << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">"
      << format_number(c.tilt) << "</text>\n";
  }

  const double base_y = (box.sizes().y() + 2 * m) * s;
  o << "  <g class=\"legend\" font-size=\"" << fixed3(0.3 * s) << "\">\n";
  double lx = m * s;
  for (double az : used) {
    o << "    <rect x=\"" << fixed3(lx) << "\" y=\"" << fixed3(base_y) << "\" width=\"" << fixed3(0.3 * s)
      << "\" height=\"" << fixed3(0.3 * s) << "\" fill=\"" << azimuth_color(az) << "\"/>\n";
    o << "    <text x=\"" << fixed3(lx + 0.4 * s) << "\" y=\"" << fixed3(base_y + 0.25 * s) << "\">"
      << format_number(az) << "&#176;</text>\n";
    lx += 1.4 * s;
  }
  o << "  </g>\n";
  const double sy = base_y + 0.9 * s;
  o << "  <g class=\"scale-bar\">\n";
  o << "    <line x1=\"" << fixed3(m * s) << "\" y1=\"" << fixed3(sy) << "\" x2=\"" << fixed3(m * s + s) << "\" y2=\""
    << fixed3(sy) << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
  o << "    <text x=\"" << fixed3(m * s + 1.2 * s) << "\" y=\"" << fixed3(sy + 0.1 * s) << "\" font-size=\""
    << fixed3(0.3 * s) << "\">1 m</text>\n";
  o << "  </g>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace heliopack
