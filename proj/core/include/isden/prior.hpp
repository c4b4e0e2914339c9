#pragma once

#include <cstdint>
#include <vector>

#include "isden/density.hpp"
#include "isden/types.hpp"

namespace isden {

struct Cluster {
  GGParams gg;
  GaussianParams gauss;
  // Rows of ClusterModel::patch_store belonging to this cluster, ascending.
  std::vector<Index> members;
};

struct TrainingMeta {
  std::uint64_t dataset_hash = 0;
  std::uint32_t outer_iterations = 0;
  // Unix seconds; zero when the trainer was asked for a reproducible file.
  std::int64_t started_unix = 0;
  std::int64_t finished_unix = 0;
  // Hard-assignment log-likelihood sum_j max_m log p(x_j | theta_m), one
  // entry per assignment step.
  std::vector<double> log_likelihood;
};

// The learned class prior. The raw training patches are kept because
// denoising averages real clean patches, not draws from the fitted densities.
struct ClusterModel {
  std::vector<Cluster> clusters;
  PatchMatrix patch_store;
  int patch_side = 0;
  double beta = 0.0;
  TrainingMeta meta;

  Index dim() const { return patch_store.cols(); }
  Index num_clusters() const { return static_cast<Index>(clusters.size()); }

  // Checks the partition and size invariants; throws ParameterError.
  void validate() const;
};

// Lloyd's k-means under Euclidean distance with k-means++ seeding. Returns M
// member lists (ascending indices). An empty cluster is reseeded with the
// point of the largest cluster farthest from that cluster's centroid.
std::vector<std::vector<Index>> init_kmeans(const PatchMatrix& patches, int num_clusters,
                                            std::uint64_t seed, int max_iters = 100);

struct LearnOptions {
  int num_clusters = 20;
  double beta = 0.9;
  std::uint64_t seed = 0;
  int max_outer_iters = 30;
  double stop_frac = 1e-3;
  int kmeans_iters = 100;
  FitOptions fit;
  int workers = 0;
  // Off by default so that identical inputs produce identical models.
  bool record_timestamps = false;
};

// Hard maximum-likelihood clustering with generalized Gaussian clusters:
// alternate argmax assignment and per-cluster fixed-point refits until fewer
// than stop_frac of the patches change cluster. A cluster that drops below
// p+1 members takes over the worst-fitting patches of the largest cluster.
ClusterModel learn_prior(PatchMatrix patches, int patch_side, const LearnOptions& options);

// 64-bit FNV-1a over the dimensions and the raw bytes of the patch matrix.
std::uint64_t hash_patches(const PatchMatrix& patches);

}  // namespace isden
