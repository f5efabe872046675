#include "heliopack/polygon_io.hpp"

#include "heliopack/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace heliopack {

namespace {

using nlohmann::json;

Ring parse_ring(const json& j) {
  if (!j.is_array()) throw DataError("polygon ring must be an array of [x, y] pairs");
  Ring ring;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() < 2 || !p[0].is_number() || !p[1].is_number())
      throw DataError("polygon vertex must be a numeric [x, y] pair");
    ring.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) throw DataError("polygon ring has fewer than 3 vertices");
  return ring;
}

RoofPolygon from_rings(const json& rings) {
  if (!rings.is_array() || rings.empty()) throw DataError("polygon needs at least an exterior ring");
  RoofPolygon r;
  r.exterior = parse_ring(rings[0]);
  for (std::size_t h = 1; h < rings.size(); ++h) r.holes.push_back(parse_ring(rings[h]));
  return r;
}

void parse_geojson(const json& j, std::vector<RoofPolygon>& out) {
  const std::string type = j.value("type", "");
  if (type == "FeatureCollection") {
    for (const auto& f : j.at("features")) parse_geojson(f, out);
  } else if (type == "Feature") {
    if (!j.contains("geometry") || j["geometry"].is_null()) return;
    parse_geojson(j["geometry"], out);
  } else if (type == "Polygon") {
    out.push_back(from_rings(j.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (const auto& p : j.at("coordinates")) out.push_back(from_rings(p));
  } else {
    throw DataError("unsupported polygon file: expected \"polygons\" or a GeoJSON polygon object");
  }
}

}  // namespace

std::vector<RoofPolygon> parse_polygons(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("polygon file is not valid JSON: ") + e.what());
  }
  std::vector<RoofPolygon> out;
  try {
    if (j.is_object() && j.contains("polygons")) {
      for (const auto& p : j.at("polygons")) {
        RoofPolygon r;
        r.exterior = parse_ring(p.at("exterior"));
        if (p.contains("holes"))
          for (const auto& h : p.at("holes")) r.holes.push_back(parse_ring(h));
        out.push_back(std::move(r));
      }
    } else if (j.is_object()) {
      parse_geojson(j, out);
    } else {
      throw DataError("polygon file must contain a JSON object");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed polygon file: ") + e.what());
  }
  for (auto& r : out) normalize(r);
  return out;
}

std::vector<RoofPolygon> read_polygons(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open polygon file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_polygons(ss.str());
}

std::string format_polygons(const std::vector<RoofPolygon>& polygons) {
  auto ring_json = [](const Ring& r) {
    json a = json::array();
    for (const auto& p : r) a.push_back({p.x(), p.y()});
    return a;
  };
  json list = json::array();
  for (const auto& r : polygons) {
    json holes = json::array();
    for (const auto& h : r.holes) holes.push_back(ring_json(h));
    list.push_back({{"exterior", ring_json(r.exterior)}, {"holes", holes}, {"area", r.area()}});
  }
  return json{{"polygons", list}}.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace heliopack
