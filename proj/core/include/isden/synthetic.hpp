#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "isden/image.hpp"

namespace isden {

// Procedurally rendered "text" pages: rows of stroke glyphs from a fixed
// 26-glyph alphabet, anti-aliased, dark ink on a light background. Glyph
// height varies per page to mimic different font sizes.
struct TextImageOptions {
  int width = 128;
  int height = 128;
  double background = 235.0;
  double ink = 25.0;
  int min_glyph_height = 11;
  int max_glyph_height = 17;
};

ImageBuffer render_text_image(const TextImageOptions& options, std::uint64_t seed);

// Writes <root>/train/train_NN.pgm and <root>/test/test_NN.pgm.
void write_text_dataset(const std::filesystem::path& root, int n_train, int n_test,
                        std::uint64_t seed, const TextImageOptions& options = {});

}  // namespace isden
