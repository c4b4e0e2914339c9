#include "isden/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "isden/image_io.hpp"

namespace isden {

namespace {

struct Segment {
  double x0, y0, x1, y1;
};

using Glyph = std::vector<Segment>;

// Unit box, y pointing down; 0 is the cap line, 1 the baseline.
const std::array<Glyph, 26>& alphabet() {
  static const std::array<Glyph, 26> glyphs = {{
      {{0, 1, .5, 0}, {.5, 0, 1, 1}, {.25, .55, .75, .55}},                             // A
      {{0, 0, 0, 1}, {0, 0, .7, 0}, {.7, 0, .9, .2}, {.9, .2, .7, .5}, {0, .5, .7, .5},
       {.7, .5, 1, .75}, {1, .75, .75, 1}, {.75, 1, 0, 1}},                               // B
      {{1, .1, .7, 0}, {.7, 0, .3, 0}, {.3, 0, 0, .3}, {0, .3, 0, .7}, {0, .7, .3, 1},
       {.3, 1, .7, 1}, {.7, 1, 1, .9}},                                                   // C
      {{0, 0, 0, 1}, {0, 0, .6, 0}, {.6, 0, 1, .35}, {1, .35, 1, .65}, {1, .65, .6, 1},
       {.6, 1, 0, 1}},                                                                    // D
      {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, .5, .7, .5}, {0, 1, 1, 1}},                        // E
      {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, .5, .7, .5}},                                      // F
      {{1, .1, .7, 0}, {.7, 0, .3, 0}, {.3, 0, 0, .3}, {0, .3, 0, .7}, {0, .7, .3, 1},
       {.3, 1, .8, 1}, {.8, 1, 1, .8}, {1, .8, 1, .55}, {1, .55, .55, .55}},              // G
      {{0, 0, 0, 1}, {1, 0, 1, 1}, {0, .5, 1, .5}},                                       // H
      {{.5, 0, .5, 1}, {.2, 0, .8, 0}, {.2, 1, .8, 1}},                                   // I
      {{.8, 0, .8, .75}, {.8, .75, .55, 1}, {.55, 1, .25, 1}, {.25, 1, 0, .75}},          // J
      {{0, 0, 0, 1}, {1, 0, 0, .6}, {.3, .4, 1, 1}},                                      // K
      {{0, 0, 0, 1}, {0, 1, 1, 1}},                                                       // L
      {{0, 1, 0, 0}, {0, 0, .5, .6}, {.5, .6, 1, 0}, {1, 0, 1, 1}},                       // M
      {{0, 1, 0, 0}, {0, 0, 1, 1}, {1, 1, 1, 0}},                                         // N
      {{.3, 0, .7, 0}, {.7, 0, 1, .3}, {1, .3, 1, .7}, {1, .7, .7, 1}, {.7, 1, .3, 1},
       {.3, 1, 0, .7}, {0, .7, 0, .3}, {0, .3, .3, 0}},                                   // O
      {{0, 1, 0, 0}, {0, 0, .75, 0}, {.75, 0, 1, .25}, {1, .25, .75, .5}, {.75, .5, 0, .5}},  // P
      {{.3, 0, .7, 0}, {.7, 0, 1, .3}, {1, .3, 1, .7}, {1, .7, .7, 1}, {.7, 1, .3, 1},
       {.3, 1, 0, .7}, {0, .7, 0, .3}, {0, .3, .3, 0}, {.6, .7, 1, 1.1}},                 // Q
      {{0, 1, 0, 0}, {0, 0, .75, 0}, {.75, 0, 1, .25}, {1, .25, .75, .5}, {.75, .5, 0, .5},
       {.4, .5, 1, 1}},                                                                   // R
      {{1, .1, .7, 0}, {.7, 0, .25, 0}, {.25, 0, 0, .25}, {0, .25, .25, .5}, {.25, .5, .75, .5},
       {.75, .5, 1, .75}, {1, .75, .75, 1}, {.75, 1, .3, 1}, {.3, 1, 0, .9}},             // S
      {{0, 0, 1, 0}, {.5, 0, .5, 1}},                                                     // T
      {{0, 0, 0, .75}, {0, .75, .25, 1}, {.25, 1, .75, 1}, {.75, 1, 1, .75}, {1, .75, 1, 0}},  // U
      {{0, 0, .5, 1}, {.5, 1, 1, 0}},                                                     // V
      {{0, 0, .25, 1}, {.25, 1, .5, .4}, {.5, .4, .75, 1}, {.75, 1, 1, 0}},               // W
      {{0, 0, 1, 1}, {1, 0, 0, 1}},                                                       // X
      {{0, 0, .5, .5}, {1, 0, .5, .5}, {.5, .5, .5, 1}},                                  // Y
      {{0, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 1}},                                         // Z
  }};
  return glyphs;
}

double segment_distance(double px, double py, const Segment& s) {
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - s.x0) * vx + (py - s.y0) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Max-composites one anti-aliased stroke into the coverage buffer.
void stamp(std::vector<double>& coverage, int width, int height, const Segment& s, double half_width) {
  const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - half_width - 1)));
  const int x_hi = std::min(width - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + half_width + 1)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - half_width - 1)));
  const int y_hi = std::min(height - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + half_width + 1)));
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double d = segment_distance(x + 0.5, y + 0.5, s);
      const double c = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
      double& slot = coverage[static_cast<std::size_t>(y) * width + x];
      slot = std::max(slot, c);
    }
  }
}

}  // namespace

ImageBuffer render_text_image(const TextImageOptions& options, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> glyph_height(options.min_glyph_height, options.max_glyph_height);
  std::uniform_int_distribution<int> pick(0, 25);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int w = options.width;
  const int h = options.height;
  std::vector<double> coverage(static_cast<std::size_t>(w) * h, 0.0);

  const double gh = glyph_height(rng);
  const double gw = 0.6 * gh;
  const double advance = gw + 0.3 * gh;
  const double line_step = 1.6 * gh;
  const double half_width = std::max(0.75, gh / 14.0);

  for (double top = 0.3 * gh + unit(rng) * 0.3 * gh; top + gh < h; top += line_step) {
    double x = 1.0 + unit(rng) * gw;
    while (x + gw < w - 1) {
      if (unit(rng) < 0.15) {  // word gap
        x += advance;
        continue;
      }
      for (const Segment& seg : alphabet()[static_cast<std::size_t>(pick(rng))]) {
        const Segment placed{x + seg.x0 * gw, top + seg.y0 * gh, x + seg.x1 * gw, top + seg.y1 * gh};
        stamp(coverage, w, h, placed, half_width);
      }
      x += advance;
    }
  }

  std::vector<double> data(coverage.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::round(options.background + (options.ink - options.background) * coverage[i]);
  }
  return ImageBuffer(w, h, std::move(data));
}

void write_text_dataset(const std::filesystem::path& root, int n_train, int n_test,
                        std::uint64_t seed, const TextImageOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "train");
  fs::create_directories(root / "test");
  char name[64];
  for (int i = 0; i < n_train; ++i) {
    std::snprintf(name, sizeof name, "train_%02d.pgm", i);
    save_image(render_text_image(options, seed * 1000003ULL + static_cast<std::uint64_t>(i)),
               root / "train" / name);
  }
  for (int i = 0; i < n_test; ++i) {
    std::snprintf(name, sizeof name, "test_%02d.pgm", i);
    save_image(render_text_image(options, seed * 1000003ULL + 500000ULL + static_cast<std::uint64_t>(i)),
               root / "test" / name);
  }
}

}  // namespace isden
