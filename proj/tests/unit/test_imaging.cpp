#include <doctest.h>
#include <png.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "isden/dataset.hpp"
#include "isden/errors.hpp"
#include "isden/image.hpp"
#include "isden/image_io.hpp"

using namespace isden;
namespace fs = std::filesystem;

namespace {

ImageBuffer ramp(int w, int h) {
  ImageBuffer img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = static_cast<double>((x * 7 + y * 13) % 256);
  return img;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("isden_test_imaging_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("patch grid offsets") {
  const PatchGrid single(8, 8, 8, 4);
  CHECK(single.count() == 1);
  const PatchGrid wide(9, 8, 8, 4);
  CHECK(wide.count() == 2);
  CHECK(wide.x_offsets() == std::vector<int>{0, 1});
  const PatchGrid g(20, 11, 5, 4);
  CHECK(g.x_offsets() == std::vector<int>{0, 4, 8, 12, 15});
  CHECK(g.y_offsets() == std::vector<int>{0, 4, 6});
  CHECK(g.x_of(6) == 4);
  CHECK(g.y_of(6) == 4);
  CHECK_THROWS_AS(PatchGrid(4, 8, 5, 1), DimensionError);
  CHECK_THROWS_AS(PatchGrid(8, 8, 5, 0), ParameterError);
  CHECK_THROWS_AS(PatchGrid(8, 8, 2, 3), ParameterError);
}

TEST_CASE("extract_patches reads row-major windows") {
  const ImageBuffer img = ramp(9, 8);
  const PatchGrid grid(9, 8, 8, 4);
  const PatchMatrix p = extract_patches(img, grid);
  REQUIRE(p.rows() == 2);
  REQUIRE(p.cols() == 64);
  CHECK(p(0, 0) == img(0, 0));
  CHECK(p(1, 0) == img(1, 0));
  CHECK(p(1, 63) == img(8, 7));
  CHECK(p(0, 8 * 3 + 2) == img(2, 3));
}

TEST_CASE("extract then reassemble is the identity") {
  const ImageBuffer img = ramp(23, 17);
  for (int side : {1, 3, 5, 8}) {
    for (int stride = 1; stride <= side; ++stride) {
      const PatchGrid grid(23, 17, side, stride);
      CHECK(reassemble(extract_patches(img, grid), grid) == img);
    }
  }
}

TEST_CASE("reassemble averages overlapping estimates") {
  const PatchGrid grid(3, 2, 2, 1);
  PatchMatrix p(grid.count(), 4);
  p.row(0).setConstant(10.0);
  p.row(1).setConstant(20.0);
  const ImageBuffer out = reassemble(p, grid);
  CHECK(out(0, 0) == 10.0);
  CHECK(out(1, 0) == 15.0);
  CHECK(out(2, 1) == 20.0);

  // Constant patches give the constant; output stays inside the range of inputs.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 300.0);
  const PatchGrid g2(16, 12, 5, 2);
  PatchMatrix q(g2.count(), g2.dim());
  for (Index i = 0; i < q.size(); ++i) q.data()[i] = u(rng);
  const ImageBuffer r = reassemble(q, g2);
  for (double v : r.data()) {
    CHECK(v >= q.minCoeff());
    CHECK(v <= q.maxCoeff());
  }
  CHECK(reassemble(PatchMatrix::Constant(g2.count(), g2.dim(), 42.0), g2) == ImageBuffer(16, 12, 42.0));
  CHECK_THROWS_AS(reassemble(PatchMatrix::Zero(3, g2.dim()), g2), DimensionError);
}

TEST_CASE("add_noise") {
  const ImageBuffer img(512, 512, 100.0);
  CHECK(add_noise(img, 0.0, 5) == img);
  const ImageBuffer noisy = add_noise(img, 20.0, 5);
  double sum = 0.0, sq = 0.0;
  for (double v : noisy.data()) {
    sum += v - 100.0;
    sq += (v - 100.0) * (v - 100.0);
  }
  const double n = static_cast<double>(noisy.pixel_count());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd - 20.0) < 0.02 * 20.0);
  CHECK(std::abs(sum / n) < 0.2);
  CHECK(add_noise(img, 20.0, 5) == noisy);
  CHECK(!(add_noise(img, 20.0, 6) == noisy));
  CHECK_THROWS_AS(add_noise(img, -1.0, 0), ParameterError);
}

TEST_CASE("psnr") {
  const ImageBuffer a = ramp(16, 16);
  CHECK(std::isinf(psnr(a, a)));
  ImageBuffer b = a;
  for (double& v : b.data()) v += 1.0;
  CHECK(psnr(a, b) == doctest::Approx(48.1308).epsilon(1e-5));
  CHECK(psnr(ImageBuffer(4, 4, 0.0), ImageBuffer(4, 4, 255.0)) == doctest::Approx(0.0));
  const ImageBuffer c = add_noise(a, 9.0, 1);
  CHECK(psnr(a, c) == psnr(c, a));
  ImageBuffer as = a, cs = c;
  for (double& v : as.data()) v += 17.0;
  for (double& v : cs.data()) v += 17.0;
  CHECK(psnr(as, cs) == doctest::Approx(psnr(a, c)).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(a, ImageBuffer(15, 16)), DimensionError);
}

TEST_CASE("quantize clamps and rounds half away from zero") {
  CHECK(quantize(-3.0) == 0);
  CHECK(quantize(300.0) == 255);
  CHECK(quantize(2.5) == 3);
  CHECK(quantize(2.49) == 2);
  CHECK(quantize(254.5) == 255);
}

TEST_CASE("PGM round trip") {
  const ImageBuffer img = ramp(13, 7);
  std::stringstream ss;
  write_pgm(img, ss);
  CHECK(ss.str().rfind("P5\n13 7\n255\n", 0) == 0);
  CHECK(read_pgm(ss) == img);
}

TEST_CASE("PGM header with comments and odd whitespace") {
  std::string data = "P5 # comment\n#another\n 3\t2\n# x\n255\n";
  data += std::string{'\x00', '\x01', '\x02', '\x7f', '\x80', '\xff'};
  std::istringstream in(data);
  const ImageBuffer img = read_pgm(in);
  CHECK(img.width() == 3);
  CHECK(img.height() == 2);
  CHECK(img.data() == std::vector<double>{0, 1, 2, 127, 128, 255});
}

TEST_CASE("PGM with a small maxval is rescaled") {
  std::string data = "P5\n2 1\n15\n";
  data += std::string{'\x00', '\x0f'};
  std::istringstream in(data);
  const ImageBuffer img = read_pgm(in);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(1, 0) == 255.0);
}

TEST_CASE("PGM errors") {
  std::istringstream deep("P5\n2 2\n65535\n" + std::string(8, '\0'));
  CHECK_THROWS_AS(read_pgm(deep), UnsupportedDepthError);
  std::istringstream ascii("P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(read_pgm(ascii), ImageFormatError);
  std::istringstream short_data("P5\n4 4\n255\n" + std::string(5, '\0'));
  CHECK_THROWS_AS(read_pgm(short_data), ImageFormatError);
  std::istringstream bad_dims("P5\n-3 4\n255\n");
  CHECK_THROWS_AS(read_pgm(bad_dims), ImageFormatError);
}

TEST_CASE("PNG import and format sniffing") {
  const fs::path dir = scratch_dir("png");
  const ImageBuffer img = ramp(11, 6);
  std::vector<png_byte> bytes;
  for (double v : img.data()) bytes.push_back(static_cast<png_byte>(v));

  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = 11;
  desc.height = 6;
  desc.format = PNG_FORMAT_GRAY;
  // Misleading extension: loading goes by signature.
  const fs::path path = dir / "ramp.pgm";
  REQUIRE(png_image_write_to_file(&desc, path.c_str(), 0, bytes.data(), 0, nullptr) != 0);
  CHECK(read_png(path) == img);
  CHECK(load_image(path) == img);

  desc = png_image{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = 2;
  desc.height = 1;
  desc.format = PNG_FORMAT_RGB;
  const std::vector<png_byte> rgb(6, 10);
  const fs::path colour = dir / "rgb.png";
  REQUIRE(png_image_write_to_file(&desc, colour.c_str(), 0, rgb.data(), 0, nullptr) != 0);
  CHECK_THROWS_AS(load_image(colour), ImageFormatError);

  std::ofstream(dir / "junk.png") << "not an image";
  CHECK_THROWS_AS(load_image(dir / "junk.png"), ImageFormatError);
  fs::remove_all(dir);
}

TEST_CASE("save_image writes quantized PGM") {
  const fs::path dir = scratch_dir("save");
  ImageBuffer img(3, 1);
  img.data() = {-4.0, 127.5, 999.0};
  save_image(img, dir / "out.pgm");
  CHECK(load_image(dir / "out.pgm").data() == std::vector<double>{0, 128, 255});
  CHECK(quantized(img) == load_image(dir / "out.pgm"));
  fs::remove_all(dir);
}

TEST_CASE("list_images skips and reports other files") {
  const fs::path dir = scratch_dir("list");
  save_image(ImageBuffer(4, 4, 1.0), dir / "b.pgm");
  save_image(ImageBuffer(4, 4, 2.0), dir / "a.PGM");
  std::ofstream(dir / "notes.txt") << "x";
  fs::create_directories(dir / "sub");
  std::ostringstream warnings;
  const auto files = list_images(dir, &warnings);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.PGM");
  CHECK(files[1].filename() == "b.pgm");
  CHECK(warnings.str().find("notes.txt") != std::string::npos);
  CHECK(list_images(dir / "missing").empty());
  CHECK(is_image_path("x.png"));
  CHECK(!is_image_path("x.jpg"));
  fs::remove_all(dir);
}

TEST_CASE("collect_patches stacks all images") {
  const std::vector<ImageBuffer> imgs{ramp(10, 10), ramp(12, 10)};
  const PatchMatrix p = collect_patches(imgs, 5, 5);
  CHECK(p.rows() == 4 + 6);
  CHECK(p.cols() == 25);
  CHECK(p.row(4) == extract_patches(imgs[1], PatchGrid(12, 10, 5, 5)).row(0));
}
