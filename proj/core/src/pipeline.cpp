#include "isden/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "isden/errors.hpp"
#include "isden/parallel.hpp"

namespace isden {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct PatchOutcome {
  Index cluster = 0;
  double ess = 0.0;
  bool fallback = false;
};

}  // namespace

void DenoiseConfig::validate() const {
  if (n_samples < 1) throw ParameterError("n_samples must be at least 1");
  if (!(r >= 0.0 && r < 1.0)) throw ParameterError("boost constant r must lie in [0, 1)");
  if (passes != 1 && passes != 2) throw ParameterError("passes must be 1 or 2");
  if (patch_side < 1) throw ParameterError("patch_side must be positive");
  if (stride < 1 || train_stride < 1) throw ParameterError("stride must be positive");
  if (num_clusters < 1) throw ParameterError("num_clusters must be positive");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(sigma2_floor > 0.0 && sigma2_floor <= 1.0)) {
    throw ParameterError("sigma2_floor must lie in (0, 1]");
  }
  if (std::isnan(log_tau)) throw ParameterError("log_tau is NaN");
}

std::uint64_t pass_seed(std::uint64_t base_seed, int pass) {
  return pass == 0 ? base_seed : base_seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(pass));
}

PassResult denoise_pass(const ImageBuffer& noisy, const ClusterModel& model, double sigma,
                        const DenoiseConfig& config) {
  const auto started = Clock::now();
  config.validate();
  if (model.patch_side != config.patch_side) {
    throw ParameterError("model patch side " + std::to_string(model.patch_side) +
                         " differs from configured patch side " + std::to_string(config.patch_side));
  }
  const bool central = config.mode == EstimateMode::CentralPixel;
  const int side = config.patch_side;
  const PatchGrid grid(noisy.width(), noisy.height(), side, central ? 1 : config.stride);
  const PatchMatrix patches = extract_patches(noisy, grid);
  const ClusterAssigner assigner(model, sigma);
  const Index count = grid.count();

  std::vector<PatchOutcome> outcomes(static_cast<std::size_t>(count));
  PatchMatrix estimates;
  ImageBuffer central_out;
  if (central) {
    central_out = ImageBuffer(noisy.width(), noisy.height(), 0.0);
  } else {
    estimates.resize(count, grid.dim());
  }

  const int half = side / 2;
  const int max_x = noisy.width() - side;
  const int max_y = noisy.height() - side;

  parallel_for(static_cast<std::size_t>(count), config.workers, [&](std::size_t k) {
    const Index idx = static_cast<Index>(k);
    const Vector y = patches.row(idx).transpose();
    PatchOutcome& out = outcomes[k];
    out.cluster = assigner(y);
    const auto rows = draw_sample_indices(model, out.cluster, config.n_samples,
                                          config.base_seed ^ static_cast<std::uint64_t>(k));
    if (!central) {
      SnisResult res = snis_estimate(y, model.patch_store, rows, sigma, config.log_tau);
      estimates.row(idx) = res.estimate.transpose();
      out.ess = res.weights.ess;
      out.fallback = res.weights.fallback;
      return;
    }

    SnisResult res = snis_estimate(y, model.patch_store, rows, sigma, config.log_tau,
                                   EstimateMode::CentralPixel, central_index(side));
    out.ess = res.weights.ess;
    out.fallback = res.weights.fallback;
    const Vector w = normalized_weights(res.weights);
    // Pixel (px, py) belongs to the patch at (clamp(px - half), clamp(py - half)).
    const int x0 = grid.x_of(idx);
    const int y0 = grid.y_of(idx);
    const int dx_lo = x0 == 0 ? 0 : half, dx_hi = x0 == max_x ? side - 1 : half;
    const int dy_lo = y0 == 0 ? 0 : half, dy_hi = y0 == max_y ? side - 1 : half;
    for (int dy = dy_lo; dy <= dy_hi; ++dy) {
      for (int dx = dx_lo; dx <= dx_hi; ++dx) {
        const Index coord = static_cast<Index>(dy) * side + dx;
        double acc = 0.0;
        for (std::size_t j = 0; j < rows.size(); ++j) {
          if (res.weights.kept[j]) acc += w[static_cast<Index>(j)] * model.patch_store(rows[j], coord);
        }
        central_out(x0 + dx, y0 + dy) = acc;
      }
    }
  });

  PassResult result;
  result.image = central ? std::move(central_out) : reassemble(estimates, grid);

  PassDiagnostics& d = result.diagnostics;
  d.sigma = sigma;
  d.patches = count;
  d.cluster_histogram.assign(model.clusters.size(), 0);
  double ess_sum = 0.0;
  Index fallbacks = 0;
  for (const auto& o : outcomes) {
    ess_sum += o.ess;
    fallbacks += o.fallback ? 1 : 0;
    ++d.cluster_histogram[static_cast<std::size_t>(o.cluster)];
  }
  d.mean_ess = count > 0 ? ess_sum / static_cast<double>(count) : 0.0;
  d.fallback_rate = count > 0 ? static_cast<double>(fallbacks) / static_cast<double>(count) : 0.0;
  d.wall_ms = elapsed_ms(started);
  return result;
}

ImageBuffer boost(const ImageBuffer& noisy, const ImageBuffer& first_pass, double r) {
  if (noisy.width() != first_pass.width() || noisy.height() != first_pass.height()) {
    throw DimensionError("boost: image sizes differ");
  }
  ImageBuffer out = first_pass;
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    out.data()[i] = first_pass.data()[i] + r * (noisy.data()[i] - first_pass.data()[i]);
  }
  return out;
}

double update_sigma(double sigma, const ImageBuffer& boosted, const ImageBuffer& first_pass,
                    double floor_frac) {
  if (!(sigma > 0.0)) throw ParameterError("update_sigma: sigma must be positive");
  const double residual = mean_squared_error(boosted, first_pass);
  const double floor = floor_frac * sigma;
  return std::sqrt(std::max(sigma * sigma - residual, floor * floor));
}

DenoiseResult denoise(const ImageBuffer& noisy, const ClusterModel& model, double sigma,
                      const DenoiseConfig& config, const std::optional<ImageBuffer>& clean) {
  const auto started = Clock::now();
  config.validate();
  DenoiseResult result;
  if (clean) result.report.noisy_psnr = psnr(*clean, noisy);

  DenoiseConfig pass_config = config;
  pass_config.base_seed = pass_seed(config.base_seed, 0);
  PassResult first = denoise_pass(noisy, model, sigma, pass_config);
  if (clean) first.diagnostics.psnr = psnr(*clean, first.image);
  result.report.passes.push_back(first.diagnostics);

  if (config.passes == 1) {
    result.image = std::move(first.image);
  } else {
    const ImageBuffer boosted = boost(noisy, first.image, config.r);
    const double sigma2 = update_sigma(sigma, boosted, first.image, config.sigma2_floor);
    pass_config.base_seed = pass_seed(config.base_seed, 1);
    PassResult second = denoise_pass(boosted, model, sigma2, pass_config);
    if (clean) second.diagnostics.psnr = psnr(*clean, second.image);
    result.report.passes.push_back(second.diagnostics);
    result.image = std::move(second.image);
  }
  result.report.wall_ms = elapsed_ms(started);
  return result;
}

}  // namespace isden
