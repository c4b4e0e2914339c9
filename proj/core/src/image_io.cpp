#include "isden/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <vector>

#include "isden/errors.hpp"

namespace isden {

namespace {

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_header_int(std::istream& in, const char* field) {
  skip_space_and_comments(in);
  long v = 0;
  int digits = 0;
  while (std::isdigit(in.peek())) {
    v = v * 10 + (in.get() - '0');
    if (++digits > 9) throw ImageFormatError(std::string("PGM header: ") + field + " too large");
  }
  if (digits == 0) throw ImageFormatError(std::string("PGM header: missing ") + field);
  return v;
}

}  // namespace

ImageBuffer read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P') throw ImageFormatError("not a PGM file");
  if (magic[1] != '5') throw ImageFormatError(std::string("unsupported PNM variant P") + magic[1]);

  const long width = read_header_int(in, "width");
  const long height = read_header_int(in, "height");
  const long maxval = read_header_int(in, "maxval");
  if (width <= 0 || height <= 0) throw ImageFormatError("PGM header: empty image");
  if (maxval <= 0) throw ImageFormatError("PGM header: invalid maxval");
  if (maxval > 255) throw UnsupportedDepthError("PGM with maxval " + std::to_string(maxval) +
                                                " is not 8-bit");
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(in.get())) throw ImageFormatError("PGM header: missing raster separator");

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<unsigned char> raster(count);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) throw ImageFormatError("PGM raster is truncated");

  std::vector<double> data(count);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    if (raster[i] > maxval) throw ImageFormatError("PGM sample exceeds maxval");
    data[i] = maxval == 255 ? raster[i] : raster[i] * scale;
  }
  return ImageBuffer(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

void write_pgm(const ImageBuffer& img, std::ostream& out) {
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> raster(img.data().size());
  std::transform(img.data().begin(), img.data().end(), raster.begin(), quantize);
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw ImageFormatError("failed writing PGM data");
}

ImageBuffer read_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!file) throw ImageFormatError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageFormatError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw ImageFormatError("libpng initialization failed");

  // libpng reports errors by longjmp; translate after unwinding back here.
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    throw ImageFormatError("malformed PNG file " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (bit_depth != 8) {
    throw UnsupportedDepthError("PNG bit depth " + std::to_string(bit_depth) + " is not 8");
  }
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
    throw ImageFormatError("PNG is not grayscale: " + path.string());
  }
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  std::vector<double> data(pixels.begin(), pixels.end());
  return ImageBuffer(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open " + path.string());
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), sig.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0) {
    in.close();
    return read_png(path);
  }
  if (got >= 2 && sig[0] == 'P') {
    in.clear();
    in.seekg(0);
    return read_pgm(in);
  }
  throw ImageFormatError("unsupported image format: " + path.string());
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageFormatError("cannot open " + path.string() + " for writing");
  write_pgm(img, out);
}

bool is_image_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

}  // namespace isden
