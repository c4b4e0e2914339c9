#include "isden/dataset.hpp"

#include <algorithm>

#include "isden/image_io.hpp"

namespace isden {

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               std::ostream* warnings) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (is_image_path(entry.path())) {
      out.push_back(entry.path());
    } else if (warnings) {
      *warnings << "warning: ignoring non-image file " << entry.path().string() << '\n';
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PatchMatrix collect_patches(const std::vector<ImageBuffer>& images, int side, int stride) {
  Index total = 0;
  std::vector<PatchGrid> grids;
  grids.reserve(images.size());
  for (const auto& img : images) {
    grids.emplace_back(img.width(), img.height(), side, stride);
    total += grids.back().count();
  }
  PatchMatrix out(total, static_cast<Index>(side) * side);
  Index row = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const PatchMatrix p = extract_patches(images[i], grids[i]);
    out.middleRows(row, p.rows()) = p;
    row += p.rows();
  }
  return out;
}

}  // namespace isden
