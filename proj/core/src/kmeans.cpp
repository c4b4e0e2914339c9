#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "isden/errors.hpp"
#include "isden/prior.hpp"

namespace isden {

namespace {

// Row-wise squared Euclidean distances from every patch to every centroid.
Matrix squared_distances(const PatchMatrix& xs, const Vector& x_norms, const Matrix& centroids) {
  Matrix d = -2.0 * (xs * centroids.transpose());
  const Vector c_norms = centroids.rowwise().squaredNorm();
  d.colwise() += x_norms;
  d.rowwise() += c_norms.transpose();
  return d.cwiseMax(0.0);
}

Matrix seed_plus_plus(const PatchMatrix& xs, int k, std::mt19937_64& rng) {
  const Index n = xs.rows();
  Matrix centroids(k, xs.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  centroids.row(0) = xs.row(pick(rng));
  Vector nearest = (xs.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centroids.row(c) = xs.row(chosen);
    nearest = nearest.cwiseMin((xs.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

}  // namespace

std::vector<std::vector<Index>> init_kmeans(const PatchMatrix& patches, int num_clusters,
                                            std::uint64_t seed, int max_iters) {
  const Index n = patches.rows();
  const Index p = patches.cols();
  if (num_clusters < 1) throw ParameterError("init_kmeans: need at least one cluster");
  if (n < static_cast<Index>(num_clusters) * (p + 1)) {
    throw InsufficientDataError("init_kmeans: " + std::to_string(n) + " patches cannot fill " +
                                std::to_string(num_clusters) + " clusters of dimension " +
                                std::to_string(p));
  }

  std::mt19937_64 rng(seed);
  Matrix centroids = seed_plus_plus(patches, num_clusters, rng);
  const Vector x_norms = patches.rowwise().squaredNorm();
  std::vector<int> labels(static_cast<std::size_t>(n), -1);

  for (int it = 0; it < std::max(max_iters, 1); ++it) {
    const Matrix dist = squared_distances(patches, x_norms, centroids);
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      dist.row(i).minCoeff(&best);
      if (labels[i] != static_cast<int>(best)) {
        labels[i] = static_cast<int>(best);
        changed = true;
      }
    }

    std::vector<Index> counts(num_clusters, 0);
    for (int l : labels) ++counts[l];
    centroids.setZero();
    for (Index i = 0; i < n; ++i) centroids.row(labels[i]) += patches.row(i);
    for (int c = 0; c < num_clusters; ++c) {
      if (counts[c] > 0) centroids.row(c) /= static_cast<double>(counts[c]);
    }

    for (int c = 0; c < num_clusters; ++c) {
      if (counts[c] > 0) continue;
      const int largest =
          static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (labels[i] != largest) continue;
        const double d = (patches.row(i) - centroids.row(largest)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      labels[far] = c;
      --counts[largest];
      counts[c] = 1;
      centroids.row(c) = patches.row(far);
      centroids.row(largest).setZero();
      for (Index i = 0; i < n; ++i) {
        if (labels[i] == largest) centroids.row(largest) += patches.row(i);
      }
      centroids.row(largest) /= static_cast<double>(counts[largest]);
      changed = true;
    }

    if (!changed) break;
  }

  std::vector<std::vector<Index>> members(num_clusters);
  for (Index i = 0; i < n; ++i) members[labels[i]].push_back(i);
  return members;
}

}  // namespace isden
