#pragma once

// Roof polygon files and atomic file output.

#include "heliopack/geom.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace heliopack {

/// Reads planar roof polygons (meters). Accepts
///   {"polygons": [{"exterior": [[x, y], ...], "holes": [[[x, y], ...], ...]}]}
/// and GeoJSON Polygon, MultiPolygon, Feature and FeatureCollection objects.
/// Closing vertices are dropped and every polygon is normalized.
std::vector<RoofPolygon> read_polygons(const std::filesystem::path& path);
std::vector<RoofPolygon> parse_polygons(const std::string& text);

/// Serializes in the "polygons" form, with each polygon's area.
std::string format_polygons(const std::vector<RoofPolygon>& polygons);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace heliopack
