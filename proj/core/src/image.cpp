#include "isden/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "isden/errors.hpp"

namespace isden {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionError(std::string(what) + ": image sizes differ");
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, double fill)
    : ImageBuffer(width, height,
                  std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                          static_cast<std::size_t>(std::max(height, 0)),
                                      fill)) {}

ImageBuffer::ImageBuffer(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw DimensionError("ImageBuffer: negative size");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw DimensionError("ImageBuffer: data length does not match width x height");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ParameterError("ImageBuffer: non-finite pixel value");
  }
}

PatchGrid::PatchGrid(int width, int height, int side, int stride)
    : width_(width), height_(height), side_(side), stride_(stride) {
  if (side < 1 || stride < 1) throw ParameterError("PatchGrid: side and stride must be positive");
  // Wider steps would leave pixels that no patch covers.
  if (stride > side) throw ParameterError("PatchGrid: stride must not exceed the patch side");
  if (width < side || height < side) {
    throw DimensionError("image " + std::to_string(width) + "x" + std::to_string(height) +
                         " is smaller than the " + std::to_string(side) + "x" +
                         std::to_string(side) + " patch");
  }
  xs_ = offsets(width, side, stride);
  ys_ = offsets(height, side, stride);
}

std::vector<int> PatchGrid::offsets(int extent, int side, int stride) {
  std::vector<int> out;
  const int last = extent - side;
  for (int o = 0; o < last; o += stride) out.push_back(o);
  out.push_back(last);
  return out;
}

PatchMatrix extract_patches(const ImageBuffer& img, const PatchGrid& grid) {
  if (img.width() != grid.width() || img.height() != grid.height()) {
    throw DimensionError("extract_patches: grid was built for a different image size");
  }
  const int s = grid.side();
  PatchMatrix out(grid.count(), grid.dim());
  for (Index k = 0; k < grid.count(); ++k) {
    const int x0 = grid.x_of(k);
    const int y0 = grid.y_of(k);
    for (int dy = 0; dy < s; ++dy) {
      for (int dx = 0; dx < s; ++dx) out(k, dy * s + dx) = img(x0 + dx, y0 + dy);
    }
  }
  return out;
}

ImageBuffer reassemble(const Eigen::Ref<const PatchMatrix>& patches, const PatchGrid& grid) {
  if (patches.rows() != grid.count() || patches.cols() != grid.dim()) {
    throw DimensionError("reassemble: patch matrix is " + std::to_string(patches.rows()) + "x" +
                         std::to_string(patches.cols()) + ", grid expects " +
                         std::to_string(grid.count()) + "x" + std::to_string(grid.dim()));
  }
  const int s = grid.side();
  std::vector<double> sum(static_cast<std::size_t>(grid.width()) * grid.height(), 0.0);
  std::vector<int> hits(sum.size(), 0);
  for (Index k = 0; k < grid.count(); ++k) {
    const int x0 = grid.x_of(k);
    const int y0 = grid.y_of(k);
    for (int dy = 0; dy < s; ++dy) {
      for (int dx = 0; dx < s; ++dx) {
        const std::size_t at = static_cast<std::size_t>(y0 + dy) * grid.width() + (x0 + dx);
        sum[at] += patches(k, dy * s + dx);
        ++hits[at];
      }
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= hits[i];
  return ImageBuffer(grid.width(), grid.height(), std::move(sum));
}

ImageBuffer add_noise(const ImageBuffer& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ParameterError("add_noise: sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ImageBuffer out = img;
  for (double& v : out.data()) v += sigma * normal(rng);
  return out;
}

double mean_squared_error(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "mean_squared_error");
  if (a.pixel_count() == 0) throw DimensionError("mean_squared_error: empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixel_count());
}

double psnr(const ImageBuffer& clean, const ImageBuffer& estimate) {
  const double mse = mean_squared_error(clean, estimate);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 255.0)));
}

ImageBuffer quantized(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (double& v : out.data()) v = quantize(v);
  return out;
}

}  // namespace isden
