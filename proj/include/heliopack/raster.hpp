#pragma once

// Rooftop extraction from multi-band imagery: morphological gradient, hole
// filling, connected components, Feret filtering, NDVI and a simplified
// morphological shadow index, and contour vectorization.

#include "heliopack/geom.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace heliopack {

using Band = Eigen::ArrayXXf;  // rows = image rows (north at row 0)
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using Pixel = Eigen::Vector2i;  // (row, col)

struct RasterImage {
  std::vector<Band> bands;
  double resolution = 0.31;  // meters per pixel

  int height() const { return bands.empty() ? 0 : static_cast<int>(bands.front().rows()); }
  int width() const { return bands.empty() ? 0 : static_cast<int>(bands.front().cols()); }
  bool empty() const { return bands.empty() || bands.front().size() == 0; }

  /// Throws InvalidInput unless all bands share dimensions and resolution > 0.
  void validate() const;
};

/// Binary structuring element centred on (radius, radius).
struct StructuringKernel {
  Mask shape;
  int radius = 0;

  static StructuringKernel disk(int radius);
  /// Line of 2*(length/2)+1 pixels through the centre along (drow, dcol).
  static StructuringKernel line(int length, int drow, int dcol);

  std::vector<Pixel> offsets() const;
};

struct LabeledRegion {
  int label = 0;
  std::vector<Pixel> pixels;
  double area = 0.0;  // m^2
  double feret_max = 0.0;
  double feret_min = 0.0;
};

Band dilate(const Band& band, const StructuringKernel& kernel);
Band erode(const Band& band, const StructuringKernel& kernel);
Mask dilate(const Mask& mask, const StructuringKernel& kernel);
Mask erode(const Mask& mask, const StructuringKernel& kernel);

/// Per-band dilation minus erosion, then the per-pixel maximum over bands.
RasterImage morphological_gradient(const RasterImage& image, const StructuringKernel& kernel);

/// Otsu threshold over a 256-bin histogram of the band.
double otsu_threshold(const Band& band);

/// Binarizes (value > threshold) and fills every background pocket that is
/// not reachable from the image border through 8-connected background.
Mask threshold_and_fill(const RasterImage& gradient, double threshold);

/// 4-connected components of the foreground with area and Feret diameters.
std::vector<LabeledRegion> label_regions(const Mask& mask, double resolution);

/// Keeps regions with area >= min_area and Feret ratio <= max_elongation.
std::vector<LabeledRegion> filter_regions(const std::vector<LabeledRegion>& regions, double min_area,
                                          double max_elongation);

/// (NIR - Red) / (NIR + Red) > threshold; zero-denominator pixels excluded.
Mask ndvi_mask(const RasterImage& image, int red_band, int nir_band, double threshold);

/// Simplified morphological shadow index: black top-hat on the per-pixel
/// brightness (max over bands) with line elements at 0/45/90/135 degrees,
/// averaged over orientations and lengths, then thresholded.
Mask shadow_mask(const RasterImage& image, const std::vector<int>& kernel_lengths, double threshold);

/// Traces outer and inner contours, simplifies them (Douglas-Peucker, one
/// pixel tolerance) and scales to meters. Each polygon is shifted so its
/// bounding box starts at the origin.
std::vector<RoofPolygon> regions_to_polygons(const std::vector<LabeledRegion>& regions, double resolution,
                                             std::vector<std::string>* warnings = nullptr);

/// Douglas-Peucker simplification of a closed ring.
Ring simplify_ring(const Ring& ring, double tolerance);

struct SegmentOptions {
  int kernel_radius = 3;
  std::optional<double> threshold;  // Otsu when unset
  double min_area = 25.0;           // m^2
  double max_elongation = 4.0;
  std::optional<int> red_band;
  std::optional<int> nir_band;
  double ndvi_threshold = 0.2;
  bool mask_shadows = false;
  std::vector<int> msi_lengths{5, 9, 13};
  std::optional<double> msi_threshold;  // 15% of the brightness range when unset
};

/// Full rooftop extraction: gradient, fill, filter, obstacle and mask removal,
/// vectorization.
std::vector<RoofPolygon> segment_rooftops(const RasterImage& image, const SegmentOptions& options,
                                          std::vector<std::string>* warnings = nullptr);

}  // namespace heliopack
