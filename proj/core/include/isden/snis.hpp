#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "isden/density.hpp"
#include "isden/prior.hpp"
#include "isden/types.hpp"

namespace isden {

// Hard threshold on the raw importance weights exp(-|y - z|^2 / (2 sigma^2)).
inline constexpr double kDefaultTau = 5e-60;
inline const double kDefaultLogTau = std::log(kDefaultTau);

struct NoiseModel {
  double sigma;

  explicit NoiseModel(double s);
  double variance() const { return sigma * sigma; }
};

struct WeightSet {
  Vector log_weights;           // raw, unshifted log w_j
  std::vector<std::uint8_t> kept;
  Index kept_count = 0;
  double ess = 0.0;             // 1 / sum(w_hat^2) over kept, normalized weights
  bool fallback = false;        // nothing cleared the threshold; argmax kept
};

enum class EstimateMode { FullPatch, CentralPixel };

struct SnisResult {
  // Full patch, or a single entry in central-pixel mode.
  Vector estimate;
  WeightSet weights;
};

// -|y - z|^2 / (2 sigma^2)
double log_weight(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& z, double sigma);

// kept_j <=> log_weights_j >= log_tau. When nothing survives, only the
// largest weight (lowest index on ties) is kept and `fallback` is set.
WeightSet threshold_weights(Vector log_weights, double log_tau);

// Self-normalized weights over the kept set (softmax with max subtraction);
// dropped entries are zero.
Vector normalized_weights(const WeightSet& weights);

// sum_j w_hat_j z_j over the rows of `samples`.
Vector weighted_average(const WeightSet& weights, const Eigen::Ref<const PatchMatrix>& samples);

// Self-normalized importance sampling estimate of E[x | y] from clean samples
// (one per row). In central-pixel mode only coordinate `center` is averaged.
SnisResult snis_estimate(const Eigen::Ref<const Vector>& y,
                         const Eigen::Ref<const PatchMatrix>& samples, double sigma,
                         double log_tau = kDefaultLogTau,
                         EstimateMode mode = EstimateMode::FullPatch, Index center = -1);

// Same, with the samples given as row indices into a patch store.
SnisResult snis_estimate(const Eigen::Ref<const Vector>& y, const PatchMatrix& store,
                         std::span<const Index> rows, double sigma,
                         double log_tau = kDefaultLogTau,
                         EstimateMode mode = EstimateMode::FullPatch, Index center = -1);

// Row-major index of the central pixel of a side x side patch.
inline Index central_index(int side) {
  return static_cast<Index>(side / 2) * side + side / 2;
}

// Maximum-likelihood cluster of a noisy patch under the Gaussian cluster
// approximations N(mean_m, cov_m + sigma^2 I). Factorizations are built once
// per (model, sigma).
class ClusterAssigner {
 public:
  ClusterAssigner(const ClusterModel& model, double sigma);

  // Lowest index wins ties.
  Index operator()(const Eigen::Ref<const Vector>& y) const;

  double log_density(Index cluster, const Eigen::Ref<const Vector>& y) const;

 private:
  std::vector<RidgedGaussian> densities_;
};

Index assign_patch(const Eigen::Ref<const Vector>& y, const ClusterModel& model, double sigma);

// Uniform draw without replacement from the members of `cluster`. When the
// cluster has no more than n members all of them are returned, in member
// order.
std::vector<Index> draw_sample_indices(const ClusterModel& model, Index cluster, Index n,
                                       std::uint64_t seed);

PatchMatrix draw_samples(const ClusterModel& model, Index cluster, Index n, std::uint64_t seed);

}  // namespace isden
