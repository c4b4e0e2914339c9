#pragma once

#include <Eigen/Cholesky>

#include <cstdint>
#include <vector>

#include "isden/types.hpp"

namespace isden {

// Relative ridge added to every fitted scatter matrix: eps * trace(S)/p * I.
inline constexpr double kScatterRidge = 1e-6;

// Multivariate generalized Gaussian
//
//   p(x) = beta Gamma(p/2) / (pi^(p/2) Gamma(p/(2 beta)) 2^(p/(2 beta)) |S|^(1/2))
//          * exp(-1/2 ((x-mu)' S^-1 (x-mu))^beta)
//
// beta = 1 is the Gaussian, beta < 1 is heavier tailed. The Cholesky factor of
// the scatter matrix is computed once at construction and reused for every
// evaluation, so instances are immutable and cheap to share between threads.
class GGParams {
 public:
  // Validates and factorizes. Throws DimensionError on shape mismatch,
  // ParameterError when beta <= 0 or sigma is not symmetric positive definite.
  GGParams(Vector mu, Matrix sigma, double beta);

  const Vector& mu() const { return mu_; }
  const Matrix& sigma() const { return sigma_; }
  double beta() const { return beta_; }
  Index dim() const { return mu_.size(); }

  // log |sigma|
  double log_det() const { return log_det_; }

  // Everything in the log density except the -1/2 q^beta term.
  double log_normalizer() const { return log_norm_; }

  // (x - mu)' sigma^-1 (x - mu)
  double mahalanobis_sq(const Eigen::Ref<const Vector>& x) const;

  // Row-wise version over a patch matrix.
  Vector mahalanobis_sq_rows(const Eigen::Ref<const PatchMatrix>& xs) const;

  const Eigen::LLT<Matrix>& cholesky() const { return llt_; }

 private:
  Vector mu_;
  Matrix sigma_;
  double beta_;
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
  double log_norm_ = 0.0;
};

// Mean and (possibly only semi-definite) covariance of a cluster. Used for
// noisy-patch assignment, where the covariance is always evaluated with a
// ridge added.
class GaussianParams {
 public:
  GaussianParams(Vector mean, Matrix cov);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

// N(mean, cov + ridge I) with the factorization cached.
class RidgedGaussian {
 public:
  RidgedGaussian(const GaussianParams& params, double ridge);

  double log_density(const Eigen::Ref<const Vector>& x) const;
  Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Eigen::LLT<Matrix> llt_;
  double log_norm_ = 0.0;
};

double gg_log_density(const Eigen::Ref<const Vector>& x, const GGParams& params);

// Log density of every row of xs.
Vector gg_log_density_rows(const Eigen::Ref<const PatchMatrix>& xs, const GGParams& params);

// Sum of row log densities.
double gg_log_likelihood(const Eigen::Ref<const PatchMatrix>& xs, const GGParams& params);

// Standard normal log density under N(mean, cov + ridge I). Factorizes on
// every call; use RidgedGaussian for repeated evaluation.
double gaussian_log_density(const Eigen::Ref<const Vector>& x, const GaussianParams& params,
                            double ridge = 0.0);

struct FitOptions {
  int max_iters = 100;
  double tol = 1e-6;
  // Record the sample log-likelihood after every iterate (costs one extra
  // pass over the data per iteration).
  bool record_likelihood = false;
};

struct GGFit {
  GGParams params;
  int iterations = 0;
  bool converged = false;
  // Entry 0 is the regularized sample covariance start; entry k the k-th iterate.
  std::vector<double> log_likelihood;
};

// Sample mean and the (1/N) sample covariance of the rows.
Vector row_mean(const Eigen::Ref<const PatchMatrix>& xs);
Matrix row_covariance(const Eigen::Ref<const PatchMatrix>& xs, const Vector& mean);

// Adds kScatterRidge * trace/p * I in place.
void regularize_scatter(Matrix& scatter);

// Fixed-point maximum-likelihood scatter estimate with beta held fixed:
//
//   S_{t+1} = (beta / N) sum_i u_i^(beta-1) (x_i - mu)(x_i - mu)',
//   u_i = (x_i - mu)' S_t^-1 (x_i - mu),
//
// started from the sample covariance, mu the sample mean. Every iterate is
// regularized. Throws InsufficientDataError with fewer than p+1 rows and
// DegenerateScatterError when all rows coincide.
GGFit fit_gg_fixed_point_traced(const Eigen::Ref<const PatchMatrix>& samples, double beta,
                                const FitOptions& options = {});

GGParams fit_gg_fixed_point(const Eigen::Ref<const PatchMatrix>& samples, double beta,
                            const FitOptions& options = {});

// count i.i.d. draws, one per row: x = mu + R A u with A A' = sigma, u uniform
// on the sphere and R^(2 beta) ~ Gamma(p / (2 beta), 2).
PatchMatrix gg_sample(const GGParams& params, Index count, std::uint64_t seed);

}  // namespace isden
