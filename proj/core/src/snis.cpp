#include "isden/snis.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "isden/errors.hpp"

namespace isden {

namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("noise standard deviation must be positive, got " + std::to_string(sigma));
  }
}

// Fills weights.kept / kept_count / fallback / ess from log_weights.
void apply_threshold(WeightSet& ws, double log_tau) {
  const Index n = ws.log_weights.size();
  ws.kept.assign(static_cast<std::size_t>(n), 0);
  ws.kept_count = 0;
  for (Index j = 0; j < n; ++j) {
    if (ws.log_weights[j] >= log_tau) {
      ws.kept[static_cast<std::size_t>(j)] = 1;
      ++ws.kept_count;
    }
  }
  ws.fallback = false;
  if (ws.kept_count == 0) {
    Index best = 0;
    for (Index j = 1; j < n; ++j) {
      if (ws.log_weights[j] > ws.log_weights[best]) best = j;
    }
    ws.kept[static_cast<std::size_t>(best)] = 1;
    ws.kept_count = 1;
    ws.fallback = true;
  }
  const Vector w = normalized_weights(ws);
  ws.ess = 1.0 / w.squaredNorm();
}

template <typename RowFn>
SnisResult estimate_impl(const Eigen::Ref<const Vector>& y, Index count, RowFn&& row,
                         double sigma, double log_tau, EstimateMode mode, Index center) {
  require_sigma(sigma);
  if (count == 0) throw EmptySampleError("snis_estimate: no samples");
  const Index p = y.size();
  if (mode == EstimateMode::CentralPixel) {
    if (center < 0) center = central_index(static_cast<int>(std::lround(std::sqrt(double(p)))));
    if (center >= p) throw DimensionError("snis_estimate: central index out of range");
  }

  WeightSet ws;
  ws.log_weights.resize(count);
  const double scale = -0.5 / (sigma * sigma);
  for (Index j = 0; j < count; ++j) {
    const auto z = row(j);
    if (z.size() != p) throw DimensionError("snis_estimate: sample dimension mismatch");
    ws.log_weights[j] = scale * (y - z.transpose()).squaredNorm();
  }
  apply_threshold(ws, log_tau);

  const Vector w = normalized_weights(ws);
  SnisResult result;
  if (mode == EstimateMode::FullPatch) {
    result.estimate = Vector::Zero(p);
    for (Index j = 0; j < count; ++j) {
      if (ws.kept[static_cast<std::size_t>(j)]) result.estimate += w[j] * row(j).transpose();
    }
  } else {
    double acc = 0.0;
    for (Index j = 0; j < count; ++j) {
      if (ws.kept[static_cast<std::size_t>(j)]) acc += w[j] * row(j)(center);
    }
    result.estimate = Vector::Constant(1, acc);
  }
  result.weights = std::move(ws);
  return result;
}

}  // namespace

NoiseModel::NoiseModel(double s) : sigma(s) { require_sigma(s); }

double log_weight(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& z, double sigma) {
  require_sigma(sigma);
  if (y.size() != z.size()) throw DimensionError("log_weight: patch lengths differ");
  return -(y - z).squaredNorm() / (2.0 * sigma * sigma);
}

WeightSet threshold_weights(Vector log_weights, double log_tau) {
  if (log_weights.size() == 0) throw EmptySampleError("threshold_weights: no weights");
  WeightSet ws;
  ws.log_weights = std::move(log_weights);
  apply_threshold(ws, log_tau);
  return ws;
}

Vector normalized_weights(const WeightSet& ws) {
  const Index n = ws.log_weights.size();
  double top = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < n; ++j) {
    if (ws.kept[static_cast<std::size_t>(j)]) top = std::max(top, ws.log_weights[j]);
  }
  Vector w = Vector::Zero(n);
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (!ws.kept[static_cast<std::size_t>(j)]) continue;
    w[j] = std::exp(ws.log_weights[j] - top);
    total += w[j];
  }
  return w / total;
}

Vector weighted_average(const WeightSet& ws, const Eigen::Ref<const PatchMatrix>& samples) {
  if (samples.rows() != ws.log_weights.size()) {
    throw DimensionError("weighted_average: weight count differs from sample count");
  }
  const Vector w = normalized_weights(ws);
  Vector out = Vector::Zero(samples.cols());
  for (Index j = 0; j < samples.rows(); ++j) {
    if (ws.kept[static_cast<std::size_t>(j)]) out += w[j] * samples.row(j).transpose();
  }
  return out;
}

SnisResult snis_estimate(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const PatchMatrix>& samples,
                         double sigma, double log_tau, EstimateMode mode, Index center) {
  return estimate_impl(
      y, samples.rows(), [&](Index j) { return samples.row(j); }, sigma, log_tau, mode, center);
}

SnisResult snis_estimate(const Eigen::Ref<const Vector>& y, const PatchMatrix& store,
                         std::span<const Index> rows, double sigma, double log_tau,
                         EstimateMode mode, Index center) {
  for (Index r : rows) {
    if (r < 0 || r >= store.rows()) throw DimensionError("snis_estimate: sample row out of range");
  }
  return estimate_impl(
      y, static_cast<Index>(rows.size()), [&](Index j) { return store.row(rows[static_cast<std::size_t>(j)]); },
      sigma, log_tau, mode, center);
}

ClusterAssigner::ClusterAssigner(const ClusterModel& model, double sigma) {
  require_sigma(sigma);
  densities_.reserve(model.clusters.size());
  for (const auto& c : model.clusters) densities_.emplace_back(c.gauss, sigma * sigma);
}

double ClusterAssigner::log_density(Index cluster, const Eigen::Ref<const Vector>& y) const {
  return densities_.at(static_cast<std::size_t>(cluster)).log_density(y);
}

Index ClusterAssigner::operator()(const Eigen::Ref<const Vector>& y) const {
  Index best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < densities_.size(); ++m) {
    const double ll = densities_[m].log_density(y);
    if (ll > best_ll) {
      best_ll = ll;
      best = static_cast<Index>(m);
    }
  }
  return best;
}

Index assign_patch(const Eigen::Ref<const Vector>& y, const ClusterModel& model, double sigma) {
  return ClusterAssigner(model, sigma)(y);
}

std::vector<Index> draw_sample_indices(const ClusterModel& model, Index cluster, Index n,
                                       std::uint64_t seed) {
  if (cluster < 0 || cluster >= model.num_clusters()) {
    throw ParameterError("draw_samples: no cluster " + std::to_string(cluster));
  }
  std::vector<Index> pool = model.clusters[static_cast<std::size_t>(cluster)].members;
  const Index size = static_cast<Index>(pool.size());
  if (n <= 0) return {};
  if (size <= n) return pool;

  // Partial Fisher-Yates: the first n slots become the draw.
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < n; ++i) {
    std::uniform_int_distribution<Index> pick(i, size - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(n));
  return pool;
}

PatchMatrix draw_samples(const ClusterModel& model, Index cluster, Index n, std::uint64_t seed) {
  const auto rows = draw_sample_indices(model, cluster, n, seed);
  PatchMatrix out(static_cast<Index>(rows.size()), model.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = model.patch_store.row(rows[i]);
  return out;
}

}  // namespace isden
