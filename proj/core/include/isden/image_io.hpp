#pragma once

#include <filesystem>
#include <string>

#include "isden/image.hpp"

namespace isden {

// Binary PGM (P5), 8-bit. The header tolerates arbitrary whitespace and '#'
// comments. maxval > 255 raises UnsupportedDepthError; a smaller maxval is
// rescaled to 0-255.
ImageBuffer read_pgm(std::istream& in);
void write_pgm(const ImageBuffer& img, std::ostream& out);

// 8-bit grayscale PNG, import only.
ImageBuffer read_png(const std::filesystem::path& path);

// Dispatches on the file signature (P5 or PNG).
ImageBuffer load_image(const std::filesystem::path& path);

// Always writes PGM; values are clamped and rounded.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

// True for extensions load_image understands (.pgm, .png; case-insensitive).
bool is_image_path(const std::filesystem::path& path);

}  // namespace isden
