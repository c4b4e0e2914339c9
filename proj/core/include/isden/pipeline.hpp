#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isden/image.hpp"
#include "isden/prior.hpp"
#include "isden/snis.hpp"

namespace isden {

struct DenoiseConfig {
  // Prior learning.
  int num_clusters = 20;
  double beta = 0.9;
  int train_stride = 2;

  // Estimation.
  int n_samples = 500;
  double log_tau = kDefaultLogTau;
  int patch_side = 5;
  int stride = 1;
  double r = 0.5;  // boosting constant
  int passes = 2;
  std::uint64_t base_seed = 0;
  EstimateMode mode = EstimateMode::FullPatch;
  int workers = 0;  // 0 = hardware concurrency
  // Pass-two sigma never drops below this fraction of sigma.
  double sigma2_floor = 0.05;

  // Throws ParameterError.
  void validate() const;
};

struct PassDiagnostics {
  double sigma = 0.0;
  Index patches = 0;
  double mean_ess = 0.0;
  double fallback_rate = 0.0;
  std::vector<Index> cluster_histogram;
  std::optional<double> psnr;
  double wall_ms = 0.0;
};

struct PassResult {
  ImageBuffer image;
  PassDiagnostics diagnostics;
};

struct DenoiseReport {
  std::vector<PassDiagnostics> passes;
  std::optional<double> noisy_psnr;
  double wall_ms = 0.0;
};

struct DenoiseResult {
  ImageBuffer image;  // unclamped; quantized on export
  DenoiseReport report;
};

// Seed for pass k (0-based) derived from the configured base seed.
std::uint64_t pass_seed(std::uint64_t base_seed, int pass);

// One denoising sweep: every grid patch is assigned to a cluster, estimated
// from up to n_samples member patches of that cluster, and the estimates are
// averaged back into an image. Patch k draws with seed config.base_seed ^ k,
// so the result does not depend on the worker count.
//
// In central-pixel mode the grid uses stride 1 and each pixel takes the
// weighted average of its own coordinate in the patch that centers it (edge
// pixels use the nearest clamped patch).
PassResult denoise_pass(const ImageBuffer& noisy, const ClusterModel& model, double sigma,
                        const DenoiseConfig& config);

// x1 + r (y - x1), elementwise.
ImageBuffer boost(const ImageBuffer& noisy, const ImageBuffer& first_pass, double r);

// sqrt(max(sigma^2 - mean((y1 - x1)^2), (floor_frac sigma)^2))
double update_sigma(double sigma, const ImageBuffer& boosted, const ImageBuffer& first_pass,
                    double floor_frac = 0.05);

// Pass one at sigma; with passes == 2, boost, update sigma and denoise the
// boosted image again with pass_seed(base_seed, 1).
DenoiseResult denoise(const ImageBuffer& noisy, const ClusterModel& model, double sigma,
                      const DenoiseConfig& config,
                      const std::optional<ImageBuffer>& clean = std::nullopt);

}  // namespace isden
