#pragma once

#include <cstdint>
#include <vector>

#include "isden/types.hpp"

namespace isden {

// Grayscale image on the 0-255 scale, stored row-major as doubles. Values are
// not clamped until export.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, double fill = 0.0);
  ImageBuffer(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  Index pixel_count() const { return static_cast<Index>(width_) * height_; }

  double operator()(int x, int y) const { return data_[index(x, y)]; }
  double& operator()(int x, int y) { return data_[index(x, y)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Square patches of side `side` at offsets stride apart along each axis. The
// last offset on each axis is clamped to (extent - side) so every pixel is
// covered without padding. stride may not exceed side.
class PatchGrid {
 public:
  PatchGrid(int width, int height, int side, int stride);

  int side() const { return side_; }
  int stride() const { return stride_; }
  Index dim() const { return static_cast<Index>(side_) * side_; }
  int width() const { return width_; }
  int height() const { return height_; }

  const std::vector<int>& x_offsets() const { return xs_; }
  const std::vector<int>& y_offsets() const { return ys_; }
  Index count() const { return static_cast<Index>(xs_.size() * ys_.size()); }

  // Top-left corner of patch k (row-major over the offset grid).
  int x_of(Index k) const { return xs_[static_cast<std::size_t>(k) % xs_.size()]; }
  int y_of(Index k) const { return ys_[static_cast<std::size_t>(k) / xs_.size()]; }

 private:
  static std::vector<int> offsets(int extent, int side, int stride);

  int width_;
  int height_;
  int side_;
  int stride_;
  std::vector<int> xs_;
  std::vector<int> ys_;
};

// One row per grid patch, pixels in row-major order.
PatchMatrix extract_patches(const ImageBuffer& img, const PatchGrid& grid);

// Each pixel becomes the plain mean of every patch estimate covering it.
ImageBuffer reassemble(const Eigen::Ref<const PatchMatrix>& patches, const PatchGrid& grid);

// y = x + n with n ~ N(0, sigma^2) i.i.d. per pixel; not clipped.
ImageBuffer add_noise(const ImageBuffer& img, double sigma, std::uint64_t seed);

// 10 log10(255^2 / MSE); +infinity when the images are identical.
double psnr(const ImageBuffer& clean, const ImageBuffer& estimate);

double mean_squared_error(const ImageBuffer& a, const ImageBuffer& b);

// Clamp to [0, 255] and round half away from zero.
std::uint8_t quantize(double v);

ImageBuffer quantized(const ImageBuffer& img);

}  // namespace isden
