#include <doctest.h>

#include "heliopack/error.hpp"
#include "heliopack/image_io.hpp"
#include "heliopack/raster.hpp"
#include "oracles.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

using namespace heliopack;

namespace {

RasterImage single(const Band& b, double res = 0.31) {
  RasterImage img;
  img.bands.push_back(b);
  img.resolution = res;
  return img;
}

oracle::Grid to_grid(const Band& b) {
  oracle::Grid g(b.rows(), std::vector<double>(b.cols()));
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) g[r][c] = b(r, c);
  return g;
}

Mask rect_mask(int h, int w, int r0, int c0, int r1, int c1, Mask base = Mask()) {
  if (base.size() == 0) base = Mask::Zero(h, w);
  base.block(r0, c0, r1 - r0, c1 - c0).setConstant(1);
  return base;
}

double mask_area(const Mask& m, double res) { return m.cast<double>().sum() * res * res; }

// Little TIFF writer for reader tests: one IFD, chunky samples.
struct TiffSpec {
  bool little = true;
  int tile = 0;  // 0 = strips
  int rows_per_strip = 3;
  int depth = 8;
  double scale = 0.0;
};

std::vector<std::uint8_t> make_tiff(const std::vector<Band>& bands, const TiffSpec& spec) {
  const int h = static_cast<int>(bands[0].rows()), w = static_cast<int>(bands[0].cols());
  const int spp = static_cast<int>(bands.size()), bps = spec.depth / 8;
  std::vector<std::uint8_t> out;
  auto put16 = [&](std::vector<std::uint8_t>& v, std::size_t at, std::uint32_t x) {
    if (spec.little) {
      v[at] = x & 0xff;
      v[at + 1] = (x >> 8) & 0xff;
    } else {
      v[at] = (x >> 8) & 0xff;
      v[at + 1] = x & 0xff;
    }
  };
  auto put32 = [&](std::vector<std::uint8_t>& v, std::size_t at, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v[at + (spec.little ? i : 3 - i)] = (x >> (8 * i)) & 0xff;
  };
  auto sample = [&](std::vector<std::uint8_t>& v, int r, int c) {
    for (int b = 0; b < spp; ++b) {
      const auto x = (r < h && c < w) ? static_cast<std::uint32_t>(bands[b](r, c)) : 0u;
      const std::size_t at = v.size();
      v.resize(at + bps);
      if (bps == 1)
        v[at] = static_cast<std::uint8_t>(x);
      else
        put16(v, at, x);
    }
  };
  out.resize(8);
  out[0] = out[1] = spec.little ? 'I' : 'M';
  put16(out, 2, 42);
  std::vector<std::uint32_t> chunk_offsets, chunk_sizes;
  if (spec.tile) {
    for (int ty = 0; ty < (h + spec.tile - 1) / spec.tile; ++ty)
      for (int tx = 0; tx < (w + spec.tile - 1) / spec.tile; ++tx) {
        chunk_offsets.push_back(static_cast<std::uint32_t>(out.size()));
        for (int y = 0; y < spec.tile; ++y)
          for (int x = 0; x < spec.tile; ++x) sample(out, ty * spec.tile + y, tx * spec.tile + x);
        chunk_sizes.push_back(static_cast<std::uint32_t>(out.size() - chunk_offsets.back()));
      }
  } else {
    for (int r = 0; r < h; ++r) {
      if (r % spec.rows_per_strip == 0) chunk_offsets.push_back(static_cast<std::uint32_t>(out.size()));
      for (int c = 0; c < w; ++c) sample(out, r, c);
    }
  }
  // Out-of-line arrays.
  auto array32 = [&](const std::vector<std::uint32_t>& vals) {
    const auto at = static_cast<std::uint32_t>(out.size());
    out.resize(at + 4 * vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) put32(out, at + 4 * i, vals[i]);
    return at;
  };
  const std::uint32_t offsets_at = array32(chunk_offsets);
  std::uint32_t scale_at = 0;
  if (spec.scale > 0) {
    scale_at = static_cast<std::uint32_t>(out.size());
    for (double d : {spec.scale, spec.scale, 0.0}) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      const std::size_t at = out.size();
      out.resize(at + 8);
      put32(out, at + (spec.little ? 0 : 4), static_cast<std::uint32_t>(bits));
      put32(out, at + (spec.little ? 4 : 0), static_cast<std::uint32_t>(bits >> 32));
    }
  }
  std::uint32_t bits_at = 0;
  if (spp > 2) {
    bits_at = static_cast<std::uint32_t>(out.size());
    out.resize(bits_at + 2 * spp);
    for (int b = 0; b < spp; ++b) put16(out, bits_at + 2 * b, spec.depth);
  }
  struct Entry {
    int tag, type;
    std::uint32_t count, value;
  };
  std::vector<Entry> entries{{256, 4, 1, static_cast<std::uint32_t>(w)},
                             {257, 4, 1, static_cast<std::uint32_t>(h)},
                             {258, 3, static_cast<std::uint32_t>(spp),
                              spp > 2 ? bits_at : static_cast<std::uint32_t>(spec.depth)},
                             {259, 3, 1, 1},
                             {277, 3, 1, static_cast<std::uint32_t>(spp)}};
  const auto n_chunks = static_cast<std::uint32_t>(chunk_offsets.size());
  const std::uint32_t off_value = n_chunks == 1 ? chunk_offsets[0] : offsets_at;
  if (spec.tile) {
    entries.push_back({322, 3, 1, static_cast<std::uint32_t>(spec.tile)});
    entries.push_back({323, 3, 1, static_cast<std::uint32_t>(spec.tile)});
    entries.push_back({324, 4, n_chunks, off_value});
  } else {
    entries.push_back({273, 4, n_chunks, off_value});
    entries.push_back({278, 3, 1, static_cast<std::uint32_t>(spec.rows_per_strip)});
  }
  if (spec.scale > 0) entries.push_back({33550, 12, 3, scale_at});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.tag < b.tag; });
  const auto ifd = static_cast<std::uint32_t>(out.size());
  put32(out, 4, ifd);
  out.resize(ifd + 2 + 12 * entries.size() + 4, 0);
  put16(out, ifd, static_cast<std::uint32_t>(entries.size()));
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const std::size_t at = ifd + 2 + 12 * e;
    put16(out, at, entries[e].tag);
    put16(out, at + 2, entries[e].type);
    put32(out, at + 4, entries[e].count);
    if (entries[e].type == 3 && entries[e].count == 1)
      put16(out, at + 8, entries[e].value);
    else
      put32(out, at + 8, entries[e].value);
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("heliopack_test_" + name);
}

}  // namespace

TEST_CASE("gradient of a constant image is zero") {
  const auto g = morphological_gradient(single(Band::Constant(12, 9, 7.0f)), StructuringKernel::disk(3));
  CHECK(g.bands.size() == 1);
  CHECK(g.bands[0].abs().maxCoeff() == 0.0f);
}

TEST_CASE("gradient of a single bright pixel covers its kernel neighbourhood") {
  Band b = Band::Zero(9, 9);
  b(4, 4) = 10.0f;
  const auto g = morphological_gradient(single(b), StructuringKernel::disk(1));
  const auto ref = oracle::direct_gradient({to_grid(b)}, 1);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) {
      CHECK(g.bands[0](r, c) == doctest::Approx(ref[r][c]));
      const bool near = std::abs(r - 4) + std::abs(c - 4) <= 1;
      CHECK((g.bands[0](r, c) > 0) == near);
    }
}

TEST_CASE("gradient of a vertical step is a band of width two radii") {
  Band b = Band::Zero(15, 20);
  b.rightCols(10).setConstant(5.0f);
  const auto g = morphological_gradient(single(b), StructuringKernel::disk(3));
  const auto ref = oracle::direct_gradient({to_grid(b)}, 3);
  for (int c = 0; c < 20; ++c) {
    CHECK(g.bands[0](7, c) == doctest::Approx(ref[7][c]));
    CHECK((g.bands[0](7, c) > 0) == (c >= 7 && c <= 12));
  }
}

TEST_CASE("multi-band gradient is the per-pixel maximum over bands") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> uni(0.0f, 100.0f);
  RasterImage img;
  std::vector<oracle::Grid> grids;
  for (int b = 0; b < 3; ++b) {
    Band band(17, 13);
    for (Eigen::Index i = 0; i < band.size(); ++i) band(i) = uni(rng);
    img.bands.push_back(band);
    grids.push_back(to_grid(band));
  }
  const auto g = morphological_gradient(img, StructuringKernel::disk(2));
  const auto ref = oracle::direct_gradient(grids, 2);
  for (int r = 0; r < 17; ++r)
    for (int c = 0; c < 13; ++c) CHECK(g.bands[0](r, c) == doctest::Approx(ref[r][c]).epsilon(1e-5));
  CHECK(g.bands[0].minCoeff() >= 0.0f);
}

TEST_CASE("gradient rejects empty images and oversized kernels") {
  CHECK_THROWS_AS(morphological_gradient(RasterImage{}, StructuringKernel::disk(1)), InvalidInput);
  CHECK_THROWS_AS(morphological_gradient(single(Band::Zero(4, 4)), StructuringKernel::disk(3)), InvalidInput);
}

TEST_CASE("structuring kernels are symmetric") {
  for (int r : {0, 1, 3, 5}) {
    const auto k = StructuringKernel::disk(r);
    CHECK(k.shape.cast<int>().sum() > 0);
    CHECK((k.shape == k.shape.reverse()).all());
  }
  const auto line = StructuringKernel::line(5, 1, -1);
  CHECK(line.offsets().size() == 5);
  CHECK((line.shape == line.shape.reverse()).all());
}

TEST_CASE("threshold_and_fill closes rings") {
  Band ring = Band::Zero(20, 20);
  ring.block(4, 4, 10, 10).setConstant(1.0f);
  ring.block(6, 6, 6, 6).setConstant(0.0f);
  Mask filled = threshold_and_fill(single(ring), 0.5);
  CHECK(filled.block(4, 4, 10, 10).cast<int>().sum() == 100);
  CHECK(filled.cast<int>().sum() == 100);

  Band gap = ring;
  gap(4, 9) = 0.0f;
  gap(5, 9) = 0.0f;
  filled = threshold_and_fill(single(gap), 0.5);
  CHECK(filled.cast<int>().sum() == (gap > 0.5f).cast<int>().sum());

  Band nested = Band::Zero(30, 30);
  nested.block(2, 2, 26, 26).setConstant(1.0f);
  nested.block(4, 4, 22, 22).setConstant(0.0f);
  nested.block(10, 10, 10, 10).setConstant(1.0f);
  nested.block(12, 12, 6, 6).setConstant(0.0f);
  filled = threshold_and_fill(single(nested), 0.5);
  CHECK(filled.cast<int>().sum() == 26 * 26);
}

TEST_CASE("threshold_and_fill matches a border flood fill on random masks") {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution on(0.45);
  for (int trial = 0; trial < 20; ++trial) {
    Band b(25, 31);
    std::vector<std::vector<int>> m(25, std::vector<int>(31));
    for (int r = 0; r < 25; ++r)
      for (int c = 0; c < 31; ++c) {
        m[r][c] = on(rng) ? 1 : 0;
        b(r, c) = static_cast<float>(m[r][c]);
      }
    const Mask filled = threshold_and_fill(single(b), 0.5);
    const auto ref = oracle::border_fill(m);
    for (int r = 0; r < 25; ++r)
      for (int c = 0; c < 31; ++c) {
        CHECK(static_cast<int>(filled(r, c)) == ref[r][c]);
        if (m[r][c]) CHECK(filled(r, c) == 1);
      }
  }
}

TEST_CASE("label_regions uses 4-connectivity") {
  CHECK(label_regions(Mask::Zero(5, 5), 1.0).empty());
  Mask two = rect_mask(10, 10, 0, 0, 3, 3);
  two = rect_mask(10, 10, 5, 5, 9, 9, two);
  auto regions = label_regions(two, 0.5);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].area == doctest::Approx(9 * 0.25));
  CHECK(regions[1].area == doctest::Approx(16 * 0.25));

  Mask diag = rect_mask(6, 6, 0, 0, 2, 2);
  diag = rect_mask(6, 6, 2, 2, 4, 4, diag);
  CHECK(label_regions(diag, 1.0).size() == 2);
}

TEST_CASE("filter_regions drops small and elongated regions") {
  const double res = 0.25;
  // 2 m x 5 m car.
  auto car = label_regions(rect_mask(40, 40, 0, 0, 8, 20), res);
  CHECK(filter_regions(car, 25.0, 4.0).empty());
  // 10 m x 2 m strip: ratio is the diagonal over the width.
  auto strip = label_regions(rect_mask(20, 60, 2, 2, 10, 42), res);
  REQUIRE(strip.size() == 1);
  CHECK(strip[0].feret_max / strip[0].feret_min == doctest::Approx(std::sqrt(104.0) / 2.0).epsilon(0.02));
  CHECK(filter_regions(strip, 0.0, 4.0).empty());
  // 10 m x 10 m square.
  auto square = label_regions(rect_mask(50, 50, 5, 5, 45, 45), res);
  const auto kept = filter_regions(square, 25.0, 4.0);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].feret_max / kept[0].feret_min == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
  CHECK(filter_regions(kept, 25.0, 4.0).size() == kept.size());
  CHECK_THROWS_AS(filter_regions(kept, 1.0, 0.5), InvalidInput);
}

TEST_CASE("rasterized rectangles have the analytic Feret ratio") {
  for (auto [w, h] : {std::pair{12, 5}, {30, 7}, {9, 9}, {40, 22}}) {
    const auto regs = label_regions(rect_mask(h + 4, w + 4, 2, 2, 2 + h, 2 + w), 1.0);
    REQUIRE(regs.size() == 1);
    const double expect = std::sqrt(double(w * w + h * h)) / std::min(w, h);
    CHECK(regs[0].feret_max / regs[0].feret_min == doctest::Approx(expect).epsilon(0.02));
  }
}

TEST_CASE("ndvi_mask") {
  RasterImage img;
  img.bands = {Band::Constant(6, 6, 40.0f), Band::Constant(6, 6, 40.0f)};
  CHECK(ndvi_mask(img, 0, 1, 0.2).cast<int>().sum() == 0);
  img.bands[1] = Band::Constant(6, 6, 120.0f);
  CHECK(ndvi_mask(img, 0, 1, 0.2).cast<int>().sum() == 36);
  img.bands[0](0, 0) = 0.0f;
  img.bands[1](0, 0) = 0.0f;
  CHECK(ndvi_mask(img, 0, 1, 0.2)(0, 0) == 0);
  CHECK_THROWS_AS(ndvi_mask(img, 0, 3, 0.2), ConfigError);

  // Vegetation patch on a grey roof.
  RasterImage scene;
  Band red = Band::Constant(20, 20, 100.0f), nir = Band::Constant(20, 20, 110.0f);
  red.block(5, 8, 4, 6).setConstant(30.0f);
  nir.block(5, 8, 4, 6).setConstant(150.0f);
  scene.bands = {red, nir};
  const Mask veg = ndvi_mask(scene, 0, 1, 0.2);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) {
      const double v = (nir(r, c) - red(r, c)) / (nir(r, c) + red(r, c));
      CHECK((veg(r, c) == 1) == (v > 0.2));
    }
  CHECK(veg.cast<int>().sum() == 24);
}

TEST_CASE("shadow_mask flags dark stripes only") {
  CHECK(shadow_mask(single(Band::Constant(16, 16, 80.0f)), {7}, 5.0).cast<int>().sum() == 0);

  Band dark = Band::Constant(21, 21, 200.0f);
  dark.block(0, 9, 21, 2).setConstant(20.0f);
  const Mask m = shadow_mask(single(dark), {7}, 40.0);
  const auto ref = oracle::black_tophat_lines(to_grid(dark), 7);
  for (int r = 0; r < 21; ++r)
    for (int c = 0; c < 21; ++c) CHECK((m(r, c) == 1) == (ref[r][c] > 40.0));
  CHECK(m.col(9).cast<int>().sum() == 21);
  CHECK(m.col(10).cast<int>().sum() == 21);
  CHECK(m.col(3).cast<int>().sum() == 0);

  Band bright = Band::Constant(21, 21, 20.0f);
  bright.block(0, 9, 21, 2).setConstant(200.0f);
  CHECK(shadow_mask(single(bright), {7}, 40.0).cast<int>().sum() == 0);
}

TEST_CASE("regions_to_polygons scales squares and keeps obstacle holes") {
  auto regs = label_regions(rect_mask(30, 30, 5, 5, 25, 25), 0.31);
  auto polys = regions_to_polygons(regs, 0.31);
  REQUIRE(polys.size() == 1);
  const Box2 bb = bounds(polys[0].exterior);
  CHECK(bb.min().x() == doctest::Approx(0.0));
  CHECK(bb.sizes().x() == doctest::Approx(6.2));
  CHECK(bb.sizes().y() == doctest::Approx(6.2));
  CHECK(polys[0].holes.empty());
  CHECK(polys[0].exterior.size() == 4);

  Mask holed = rect_mask(30, 30, 5, 5, 25, 25);
  holed.block(10, 12, 4, 4).setConstant(0);
  polys = regions_to_polygons(label_regions(holed, 0.31), 0.31);
  REQUIRE(polys.size() == 1);
  REQUIRE(polys[0].holes.size() == 1);
  CHECK(std::abs(signed_area(polys[0].holes[0])) == doctest::Approx(16 * 0.31 * 0.31));
  CHECK(polys[0].area() == doctest::Approx(mask_area(holed, 0.31)));
}

TEST_CASE("polygon areas track mask areas on irregular blobs") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    // Union of random discs plus a few punched holes.
    Mask m = Mask::Zero(60, 60);
    for (int d = 0; d < 4; ++d) {
      const double cr = 20 + 20 * uni(rng), cc = 20 + 20 * uni(rng), rad = 8 + 8 * uni(rng);
      for (int r = 0; r < 60; ++r)
        for (int c = 0; c < 60; ++c)
          if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) m(r, c) = 1;
    }
    auto regs = label_regions(m, 0.5);
    auto big = std::max_element(regs.begin(), regs.end(),
                                [](const auto& a, const auto& b) { return a.pixels.size() < b.pixels.size(); });
    Mask only = Mask::Zero(60, 60);
    for (const auto& p : big->pixels) only(p.x(), p.y()) = 1;
    for (int h = 0; h < 2; ++h) {
      const auto& p = big->pixels[static_cast<std::size_t>(uni(rng) * big->pixels.size())];
      if (p.x() > 3 && p.y() > 3 && p.x() < 56 && p.y() < 56 && only.block(p.x() - 3, p.y() - 3, 7, 7).all())
        only.block(p.x() - 2, p.y() - 2, 4, 4).setConstant(0);
    }
    const auto regions = label_regions(only, 0.5);
    REQUIRE(regions.size() == 1);
    const auto polys = regions_to_polygons(regions, 0.5);
    REQUIRE(polys.size() == 1);
    CHECK(std::abs(polys[0].area() - regions[0].area) <= 0.05 * regions[0].area);
    for (const auto& h : polys[0].holes)
      for (const auto& p : h) CHECK(locate(p, polys[0].exterior) == Location::Inside);
  }
}

TEST_CASE("regions_to_polygons drops sub-pixel slivers") {
  std::vector<std::string> warnings;
  const auto polys = regions_to_polygons(label_regions(rect_mask(5, 20, 2, 1, 3, 19), 1.0), 1.0, &warnings);
  CHECK(polys.empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("segment_rooftops extracts a roof with an obstacle and drops clutter") {
  const double res = 0.31;
  Band b = Band::Constant(80, 100, 30.0f);
  b.block(10, 10, 40, 50).setConstant(200.0f);  // roof 12.4 m x 15.5 m
  b.block(25, 30, 6, 6).setConstant(60.0f);     // dark obstacle
  b.block(55, 70, 6, 14).setConstant(180.0f);   // car-sized patch
  b.block(72, 2, 4, 96).setConstant(150.0f);    // road strip
  RasterImage img = single(b, res);
  SegmentOptions opt;
  std::vector<std::string> warnings;
  const auto roofs = segment_rooftops(img, opt, &warnings);
  REQUIRE(roofs.size() == 1);
  const Box2 bb = bounds(roofs[0].exterior);
  CHECK(bb.sizes().x() == doctest::Approx(50 * res).epsilon(0.03));
  CHECK(bb.sizes().y() == doctest::Approx(40 * res).epsilon(0.03));
  REQUIRE(roofs[0].holes.size() == 1);
  const Box2 hb = bounds(roofs[0].holes[0]);
  CHECK(hb.sizes().x() == doctest::Approx(6 * res).epsilon(0.2));

  // Vegetation on the roof becomes a second hole.
  RasterImage rgbn;
  Band red = b, nir = b;
  red.block(38, 45, 5, 5).setConstant(20.0f);
  nir.block(38, 45, 5, 5).setConstant(180.0f);
  rgbn.bands = {red, nir};
  rgbn.resolution = res;
  opt.red_band = 0;
  opt.nir_band = 1;
  const auto veg = segment_rooftops(rgbn, opt);
  REQUIRE(veg.size() == 1);
  CHECK(veg[0].holes.size() == 2);
}

TEST_CASE("PNG round trip at 8 and 16 bits") {
  RasterImage img;
  for (int b = 0; b < 3; ++b) {
    Band band(7, 11);
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 11; ++c) band(r, c) = static_cast<float>((r * 31 + c * 7 + b * 50) % 256);
    img.bands.push_back(band);
  }
  const auto p8 = temp_file("rt8.png");
  write_png(p8, img, 8);
  const auto back = read_raster(p8);
  REQUIRE(back.bands.size() == 3);
  for (int b = 0; b < 3; ++b) CHECK((back.bands[b] == img.bands[b]).all());

  RasterImage wide = single(img.bands[0] * 250.0f);
  const auto p16 = temp_file("rt16.png");
  write_png(p16, wide, 16);
  const auto back16 = read_raster(p16);
  REQUIRE(back16.bands.size() == 1);
  CHECK((back16.bands[0] == wide.bands[0]).all());
  std::filesystem::remove(p8);
  std::filesystem::remove(p16);
}

TEST_CASE("TIFF reader handles strips, tiles, byte orders and pixel scale") {
  std::vector<Band> bands;
  for (int b = 0; b < 3; ++b) {
    Band band(9, 13);
    for (int r = 0; r < 9; ++r)
      for (int c = 0; c < 13; ++c) band(r, c) = static_cast<float>((r * 13 + c + 40 * b) % 250);
    bands.push_back(band);
  }
  int case_no = 0;
  for (TiffSpec spec : {TiffSpec{true, 0, 4, 8, 0.5}, TiffSpec{false, 0, 9, 16, 0.0}, TiffSpec{true, 16, 0, 8, 0.3},
                        TiffSpec{false, 16, 0, 16, 1.25}}) {
    CAPTURE(case_no);
    const auto path = temp_file("t" + std::to_string(case_no++) + ".tif");
    const auto bytes = make_tiff(bands, spec);
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                static_cast<std::streamsize>(bytes.size()));
    const auto img = read_raster(path);
    REQUIRE(img.bands.size() == 3);
    for (int b = 0; b < 3; ++b) CHECK((img.bands[b] == bands[b]).all());
    CHECK(img.resolution == doctest::Approx(spec.scale > 0 ? spec.scale : 0.31));
    std::filesystem::remove(path);
  }
  const auto bad = temp_file("bad.tif");
  std::ofstream(bad, std::ios::binary) << "II*\0garbage";
  CHECK_THROWS_AS(read_raster(bad), DataError);
  std::filesystem::remove(bad);
  CHECK_THROWS_AS(read_raster(temp_file("missing.png")), DataError);
}

