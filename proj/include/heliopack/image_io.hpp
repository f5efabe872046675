#pragma once

#include "heliopack/raster.hpp"

#include <filesystem>

namespace heliopack {

/// Reads an 8/16-bit PNG or an uncompressed (strip or tile) TIFF. Samples
/// keep their integer values as floats; a PNG alpha channel is dropped.
/// Resolution comes from the TIFF pixel-scale tag when present, otherwise
/// the default of RasterImage. Throws DataError on unreadable input.
RasterImage read_raster(const std::filesystem::path& path);

/// Writes 1, 3 or 4 bands as grayscale, RGB or RGBA PNG. Values are clamped
/// to the bit depth's range and rounded.
void write_png(const std::filesystem::path& path, const RasterImage& image, int bit_depth = 8);

}  // namespace heliopack
