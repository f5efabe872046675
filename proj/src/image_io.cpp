#include "heliopack/image_io.hpp"

#include "heliopack/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>

namespace heliopack {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RasterImage read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialization failed");
  }
  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int depth = 0, channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_bit_depth(png, info) == 16) png_set_swap(png);
  png_read_update_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  data.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = data.data() + r * stride;
  png_read_image(png, rows.data());
  const bool has_alpha = (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) != 0;
  png_destroy_read_struct(&png, &info, nullptr);

  const int keep = has_alpha ? channels - 1 : channels;
  RasterImage img;
  for (int b = 0; b < keep; ++b) img.bands.emplace_back(Band::Zero(height, width));
  for (png_uint_32 r = 0; r < height; ++r)
    for (png_uint_32 c = 0; c < width; ++c)
      for (int b = 0; b < keep; ++b) {
        const std::size_t idx = static_cast<std::size_t>(c) * channels + b;
        float v;
        if (depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[r] + idx * 2, 2);
          v = s;
        } else {
          v = rows[r][idx];
        }
        img.bands[b](r, c) = v;
      }
  return img;
}

// --- TIFF subset ----------------------------------------------------------------

class TiffReader {
 public:
  explicit TiffReader(std::vector<std::uint8_t> bytes) : d_(std::move(bytes)) {
    if (d_.size() < 8) fail("file too short");
    if (d_[0] == 'I' && d_[1] == 'I') {
      little_ = true;
    } else if (d_[0] == 'M' && d_[1] == 'M') {
      little_ = false;
    } else {
      fail("bad byte-order mark");
    }
    if (u16(2) != 42) fail("not a classic TIFF");
  }

  RasterImage read() {
    const std::uint32_t ifd = u32(4);
    need(ifd, 2);
    const int count = u16(ifd);
    need(ifd + 2, static_cast<std::size_t>(count) * 12);
    for (int e = 0; e < count; ++e) {
      const std::size_t at = ifd + 2 + static_cast<std::size_t>(e) * 12;
      tags_[u16(at)] = at;
    }
    const auto width = scalar(256);
    const auto height = scalar(257);
    const auto spp = has(277) ? scalar(277) : 1;
    if (has(259) && scalar(259) != 1) fail("compressed TIFF is not supported");
    if (has(284) && scalar(284) != 1) fail("planar TIFF is not supported");
    if (has(339) && scalar(339) != 1) fail("only unsigned integer samples are supported");
    const auto bits = has(258) ? values(258) : std::vector<std::uint64_t>{1};
    const std::uint64_t depth = bits.front();
    if (depth != 8 && depth != 16) fail("only 8 or 16 bits per sample are supported");
    for (auto b : bits)
      if (b != depth) fail("mixed bit depths");
    if (width == 0 || height == 0 || spp == 0) fail("empty image");

    RasterImage img;
    for (std::uint64_t b = 0; b < spp; ++b) img.bands.emplace_back(Band::Zero(height, width));
    const std::size_t bps = depth / 8;
    const std::size_t pixel_bytes = bps * spp;
    auto put = [&](std::size_t at, std::uint64_t r, std::uint64_t c) {
      for (std::uint64_t b = 0; b < spp; ++b) {
        const std::size_t o = at + b * bps;
        img.bands[b](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            static_cast<float>(bps == 1 ? d_[o] : u16(o));
      }
    };

    if (has(322)) {
      const auto tw = scalar(322), th = scalar(323);
      const auto offsets = values(324);
      const std::uint64_t across = (width + tw - 1) / tw, down = (height + th - 1) / th;
      if (tw == 0 || th == 0 || offsets.size() < across * down) fail("tile table too short");
      for (std::uint64_t ty = 0; ty < down; ++ty)
        for (std::uint64_t tx = 0; tx < across; ++tx) {
          const std::uint64_t base = offsets[ty * across + tx];
          need(base, tw * th * pixel_bytes);
          for (std::uint64_t y = 0; y < th; ++y)
            for (std::uint64_t x = 0; x < tw; ++x) {
              const std::uint64_t r = ty * th + y, c = tx * tw + x;
              if (r < height && c < width) put(base + (y * tw + x) * pixel_bytes, r, c);
            }
        }
    } else {
      const auto offsets = values(273);
      const std::uint64_t per_strip = has(278) ? std::min<std::uint64_t>(scalar(278), height) : height;
      if (per_strip == 0 || offsets.size() < (height + per_strip - 1) / per_strip) fail("strip table too short");
      for (std::uint64_t r = 0; r < height; ++r) {
        const std::uint64_t strip = r / per_strip;
        const std::uint64_t row_at = offsets[strip] + (r % per_strip) * width * pixel_bytes;
        need(row_at, width * pixel_bytes);
        for (std::uint64_t c = 0; c < width; ++c) put(row_at + c * pixel_bytes, r, c);
      }
    }

    if (has(33550)) {
      const auto scale = doubles(33550);
      if (!scale.empty() && scale[0] > 0.0) img.resolution = scale[0];
    }
    return img;
  }

 private:
  [[noreturn]] static void fail(const std::string& why) { throw DataError("TIFF: " + why); }

  void need(std::uint64_t at, std::uint64_t len) const {
    if (at + len > d_.size()) fail("truncated data");
  }

  std::uint16_t u16(std::size_t at) const {
    need(at, 2);
    return little_ ? static_cast<std::uint16_t>(d_[at] | d_[at + 1] << 8)
                   : static_cast<std::uint16_t>(d_[at] << 8 | d_[at + 1]);
  }

  std::uint32_t u32(std::size_t at) const {
    need(at, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(d_[at + (little_ ? i : 3 - i)]) << (8 * i);
    return v;
  }

  std::uint64_t u64(std::size_t at) const {
    const std::uint64_t lo = u32(at + (little_ ? 0 : 4)), hi = u32(at + (little_ ? 4 : 0));
    return hi << 32 | lo;
  }

  bool has(int tag) const { return tags_.count(tag) > 0; }

  static std::size_t type_size(int type) {
    switch (type) {
      case 1: case 2: case 6: case 7: return 1;
      case 3: case 8: return 2;
      case 4: case 9: case 11: return 4;
      case 5: case 10: case 12: case 16: return 8;
      default: return 0;
    }
  }

  // Location of the value bytes of an entry.
  std::pair<std::size_t, std::size_t> payload(int tag, int& type) const {
    const auto it = tags_.find(tag);
    if (it == tags_.end()) fail("missing tag " + std::to_string(tag));
    const std::size_t at = it->second;
    type = u16(at + 2);
    const std::size_t count = u32(at + 4);
    const std::size_t size = type_size(type);
    if (size == 0) fail("unknown field type for tag " + std::to_string(tag));
    const std::size_t where = size * count <= 4 ? at + 8 : u32(at + 8);
    need(where, size * count);
    return {where, count};
  }

  std::vector<std::uint64_t> values(int tag) const {
    int type = 0;
    const auto [where, count] = payload(tag, type);
    std::vector<std::uint64_t> out(count);
    for (std::size_t k = 0; k < count; ++k) {
      switch (type) {
        case 1: out[k] = d_[where + k]; break;
        case 3: out[k] = u16(where + 2 * k); break;
        case 4: out[k] = u32(where + 4 * k); break;
        case 16: out[k] = u64(where + 8 * k); break;
        default: fail("tag " + std::to_string(tag) + " is not an integer field");
      }
    }
    return out;
  }

  std::uint64_t scalar(int tag) const {
    const auto v = values(tag);
    if (v.empty()) fail("empty tag " + std::to_string(tag));
    return v.front();
  }

  std::vector<double> doubles(int tag) const {
    int type = 0;
    const auto [where, count] = payload(tag, type);
    if (type != 12) fail("pixel scale must be DOUBLE");
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint64_t bits = u64(where + 8 * k);
      std::memcpy(&out[k], &bits, 8);
    }
    return out;
  }

  std::vector<std::uint8_t> d_;
  bool little_ = true;
  std::map<int, std::size_t> tags_;
};

}  // namespace

RasterImage read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> head(8, 0);
  in.read(reinterpret_cast<char*>(head.data()), 8);
  static const std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() == 8 && std::equal(head.begin(), head.end(), kPngSig)) {
    in.close();
    return read_png(path);
  }
  in.seekg(0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return TiffReader(std::move(bytes)).read();
}

void write_png(const std::filesystem::path& path, const RasterImage& image, int bit_depth) {
  image.validate();
  const int nb = static_cast<int>(image.bands.size());
  if (nb != 1 && nb != 3 && nb != 4) throw InvalidInput("PNG output needs 1, 3 or 4 bands");
  if (bit_depth != 8 && bit_depth != 16) throw InvalidInput("PNG bit depth must be 8 or 16");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot write " + path.string());
  const int w = image.width(), h = image.height();
  const int bps = bit_depth / 8;
  const double top = bit_depth == 8 ? 255.0 : 65535.0;
  std::vector<png_byte> data(static_cast<std::size_t>(w) * h * nb * bps);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int b = 0; b < nb; ++b) {
        const auto v = static_cast<unsigned>(std::lround(std::clamp<double>(image.bands[b](r, c), 0.0, top)));
        const std::size_t at = ((static_cast<std::size_t>(r) * w + c) * nb + b) * bps;
        if (bps == 1) {
          data[at] = static_cast<png_byte>(v);
        } else {
          data[at] = static_cast<png_byte>(v >> 8);  // PNG is big-endian
          data[at + 1] = static_cast<png_byte>(v & 0xff);
        }
      }
  std::vector<png_bytep> rows(h);
  for (int r = 0; r < h; ++r) rows[r] = data.data() + static_cast<std::size_t>(r) * w * nb * bps;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG write failed: " + path.string());
  }
  const int color = nb == 1 ? PNG_COLOR_TYPE_GRAY : nb == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA;
  png_init_io(png, file.get());
  png_set_IHDR(png, info, w, h, bit_depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace heliopack
