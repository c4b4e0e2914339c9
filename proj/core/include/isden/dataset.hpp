#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "isden/image.hpp"
#include "isden/types.hpp"

namespace isden {

// Image files (.pgm/.png) directly inside `dir`, sorted by name. Other files
// are skipped with a line on `warnings` when given. A missing directory
// yields an empty list.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir,
                                               std::ostream* warnings = nullptr);

// All grid patches of every image stacked into one matrix.
PatchMatrix collect_patches(const std::vector<ImageBuffer>& images, int side, int stride);

}  // namespace isden
