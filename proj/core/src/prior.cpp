#include "isden/prior.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "isden/errors.hpp"
#include "isden/parallel.hpp"

namespace isden {

namespace {

PatchMatrix gather_rows(const PatchMatrix& store, const std::vector<Index>& rows) {
  PatchMatrix out(static_cast<Index>(rows.size()), store.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = store.row(rows[i]);
  return out;
}

// Scatter used when every member of a cluster is the same patch.
constexpr double kDegenerateVariance = 1e-6;

GGParams fit_cluster(const PatchMatrix& members, double beta, const FitOptions& fit) {
  try {
    return fit_gg_fixed_point(members, beta, fit);
  } catch (const DegenerateScatterError&) {
    const Index p = members.cols();
    return GGParams(row_mean(members), kDegenerateVariance * Matrix::Identity(p, p), beta);
  }
}

std::vector<std::vector<Index>> members_from_labels(const std::vector<int>& labels, int m) {
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  }
  return members;
}

// Tops up clusters below min_size with the worst-scoring members of the
// current largest cluster. `score(cluster, rows)` returns one fit score per
// row (higher is better). Returns true when anything moved.
template <typename ScoreFn>
bool rebalance(std::vector<int>& labels, int m, Index min_size, ScoreFn&& score) {
  bool moved = false;
  for (int guard = 0; guard < m * m + 1; ++guard) {
    auto members = members_from_labels(labels, m);
    int starving = -1;
    for (int c = 0; c < m; ++c) {
      if (static_cast<Index>(members[c].size()) < min_size) {
        starving = c;
        break;
      }
    }
    if (starving < 0) return moved;

    int largest = 0;
    for (int c = 1; c < m; ++c) {
      if (members[c].size() > members[largest].size()) largest = c;
    }
    const auto& donor = members[largest];
    const Index donor_size = static_cast<Index>(donor.size());
    const Index deficit = min_size - static_cast<Index>(members[starving].size());
    const Index take = std::max(deficit, std::min(min_size, donor_size - min_size));
    if (take <= 0 || donor_size - take < 1) {
      throw InsufficientDataError("learn_prior: not enough patches to keep every cluster populated");
    }

    const Vector scores = score(largest, donor);
    std::vector<Index> order(donor.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores[a] < scores[b]; });
    for (Index k = 0; k < take; ++k) labels[static_cast<std::size_t>(donor[order[k]])] = starving;
    moved = true;
  }
  throw InsufficientDataError("learn_prior: cluster rebalancing did not settle");
}

}  // namespace

void ClusterModel::validate() const {
  const Index n = patch_store.rows();
  const Index p = patch_store.cols();
  if (patch_side <= 0 || static_cast<Index>(patch_side) * patch_side != p) {
    throw ParameterError("ClusterModel: patch_side does not match patch dimension");
  }
  if (!(beta > 0.0)) throw ParameterError("ClusterModel: beta must be positive");
  if (clusters.empty()) throw ParameterError("ClusterModel: no clusters");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Index total = 0;
  for (const auto& c : clusters) {
    if (c.gg.dim() != p || c.gauss.dim() != p) {
      throw ParameterError("ClusterModel: cluster dimension mismatch");
    }
    for (Index idx : c.members) {
      if (idx < 0 || idx >= n || seen[static_cast<std::size_t>(idx)]) {
        throw ParameterError("ClusterModel: member indices do not partition the patch store");
      }
      seen[static_cast<std::size_t>(idx)] = 1;
    }
    total += static_cast<Index>(c.members.size());
  }
  if (total != n) {
    throw ParameterError("ClusterModel: member indices do not cover the patch store");
  }
}

std::uint64_t hash_patches(const PatchMatrix& patches) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const unsigned char* bytes, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(patches.rows()),
                                 static_cast<std::uint64_t>(patches.cols())};
  for (std::uint64_t d : dims) {
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(d >> (8 * b));
    mix(buf, 8);
  }
  for (Index i = 0; i < patches.size(); ++i) {
    std::uint64_t bits;
    const double v = patches.data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    mix(buf, 8);
  }
  return h;
}

ClusterModel learn_prior(PatchMatrix patches, int patch_side, const LearnOptions& options) {
  const Index n = patches.rows();
  const Index p = patches.cols();
  const int m = options.num_clusters;
  if (patch_side <= 0 || static_cast<Index>(patch_side) * patch_side != p) {
    throw DimensionError("learn_prior: patch_side^2 must equal the patch dimension");
  }
  if (m < 1) throw ParameterError("learn_prior: need at least one cluster");
  if (!(options.beta > 0.0)) throw ParameterError("learn_prior: beta must be positive");
  if (n < static_cast<Index>(m) * (p + 1)) {
    throw InsufficientDataError("learn_prior: " + std::to_string(n) + " patches for " +
                                std::to_string(m) + " clusters of dimension " + std::to_string(p) +
                                " (need " + std::to_string(static_cast<Index>(m) * (p + 1)) + ")");
  }

  const auto started = std::chrono::system_clock::now();
  const Index min_size = p + 1;

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  {
    const auto init = init_kmeans(patches, m, options.seed, options.kmeans_iters);
    for (int c = 0; c < m; ++c) {
      for (Index i : init[c]) labels[static_cast<std::size_t>(i)] = c;
    }
    rebalance(labels, m, min_size, [&](int cluster, const std::vector<Index>& rows) {
      const PatchMatrix xs = gather_rows(patches, rows);
      const Vector centroid = row_mean(xs);
      (void)cluster;
      return Vector(-(xs.rowwise() - centroid.transpose()).rowwise().squaredNorm());
    });
  }

  std::vector<std::optional<GGParams>> params(static_cast<std::size_t>(m));
  auto refit = [&](const std::vector<int>& current) {
    const auto members = members_from_labels(current, m);
    parallel_for(static_cast<std::size_t>(m), options.workers, [&](std::size_t c) {
      params[c] = fit_cluster(gather_rows(patches, members[c]), options.beta, options.fit);
    }, 1);
  };

  // Per-cluster log densities of every patch; column c holds cluster c.
  Matrix loglik(n, m);
  auto assign = [&](std::vector<int>& next) {
    parallel_for(static_cast<std::size_t>(m), options.workers, [&](std::size_t c) {
      loglik.col(static_cast<Index>(c)) = gg_log_density_rows(patches, *params[c]);
    }, 1);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      total += loglik.row(i).maxCoeff(&best);
      next[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return total;
  };
  auto score_under_own = [&](int cluster, const std::vector<Index>& rows) {
    Vector s(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) s[static_cast<Index>(k)] = loglik(rows[k], cluster);
    return s;
  };

  refit(labels);
  TrainingMeta meta;
  std::uint32_t refits = 0;
  std::vector<int> next(labels.size());
  const double stop_count = options.stop_frac * static_cast<double>(n);

  for (;;) {
    meta.log_likelihood.push_back(assign(next));
    Index changed = 0;
    for (std::size_t i = 0; i < next.size(); ++i) changed += next[i] != labels[i];
    labels = next;
    const bool moved = rebalance(labels, m, min_size, score_under_own);
    const bool settled = static_cast<double>(changed) < stop_count;
    if (!moved && (settled || static_cast<int>(refits) >= options.max_outer_iters)) break;
    refit(labels);
    ++refits;
    if (moved && static_cast<int>(refits) > options.max_outer_iters) break;
  }

  ClusterModel model;
  model.patch_side = patch_side;
  model.beta = options.beta;
  const auto members = members_from_labels(labels, m);
  model.clusters.reserve(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    const PatchMatrix xs = gather_rows(patches, members[c]);
    const Vector mean = row_mean(xs);
    model.clusters.push_back(
        Cluster{*params[c], GaussianParams(mean, row_covariance(xs, mean)), members[c]});
  }
  meta.outer_iterations = refits;
  meta.dataset_hash = hash_patches(patches);
  if (options.record_timestamps) {
    meta.started_unix = std::chrono::duration_cast<std::chrono::seconds>(
                            started.time_since_epoch()).count();
    meta.finished_unix = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch()).count();
  }
  model.meta = std::move(meta);
  model.patch_store = std::move(patches);
  return model;
}

}  // namespace isden
