#include "isden/density.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "isden/errors.hpp"

namespace isden {

namespace {

void require_square(const Matrix& m, Index p, const char* what) {
  if (m.rows() != p || m.cols() != p) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(p) + "x" +
                         std::to_string(p) + " matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
}

void require_dim(Index got, Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

double log_det_from(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::LLT<Matrix> factorize(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
    throw ParameterError(std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

double gaussian_log_norm(Index p, double log_det) {
  return -0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
}

Vector row_quad_forms(const Eigen::LLT<Matrix>& llt, const Vector& mu,
                      const Eigen::Ref<const PatchMatrix>& xs) {
  Matrix centered = (xs.rowwise() - mu.transpose()).transpose();
  llt.matrixL().solveInPlace(centered);
  return centered.colwise().squaredNorm().transpose();
}

}  // namespace

GGParams::GGParams(Vector mu, Matrix sigma, double beta)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), beta_(beta) {
  const Index p = mu_.size();
  if (p == 0) throw DimensionError("GGParams: zero-dimensional mean");
  require_square(sigma_, p, "GGParams");
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) {
    throw ParameterError("GGParams: beta must be positive, got " + std::to_string(beta_));
  }
  if (!mu_.allFinite() || !sigma_.allFinite()) {
    throw ParameterError("GGParams: non-finite parameters");
  }
  sigma_ = (0.5 * (sigma_ + sigma_.transpose())).eval();
  llt_ = factorize(sigma_, "GGParams");
  log_det_ = log_det_from(llt_);

  const double pd = static_cast<double>(p);
  const double shape = pd / (2.0 * beta_);
  log_norm_ = std::log(beta_) + std::lgamma(pd / 2.0) - (pd / 2.0) * std::log(std::numbers::pi) -
              std::lgamma(shape) - shape * std::log(2.0) - 0.5 * log_det_;
}

double GGParams::mahalanobis_sq(const Eigen::Ref<const Vector>& x) const {
  require_dim(x.size(), dim(), "mahalanobis_sq");
  Vector z = x - mu_;
  llt_.matrixL().solveInPlace(z);
  return z.squaredNorm();
}

Vector GGParams::mahalanobis_sq_rows(const Eigen::Ref<const PatchMatrix>& xs) const {
  require_dim(xs.cols(), dim(), "mahalanobis_sq_rows");
  return row_quad_forms(llt_, mu_, xs);
}

GaussianParams::GaussianParams(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0) throw DimensionError("GaussianParams: zero-dimensional mean");
  require_square(cov_, mean_.size(), "GaussianParams");
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw ParameterError("GaussianParams: non-finite parameters");
  }
  cov_ = (0.5 * (cov_ + cov_.transpose())).eval();
}

RidgedGaussian::RidgedGaussian(const GaussianParams& params, double ridge) : mean_(params.mean()) {
  if (!(ridge >= 0.0)) throw ParameterError("RidgedGaussian: negative ridge");
  Matrix cov = params.cov();
  cov.diagonal().array() += ridge;
  llt_ = factorize(cov, "gaussian covariance");
  log_norm_ = gaussian_log_norm(mean_.size(), log_det_from(llt_));
}

double RidgedGaussian::log_density(const Eigen::Ref<const Vector>& x) const {
  require_dim(x.size(), dim(), "gaussian_log_density");
  Vector z = x - mean_;
  llt_.matrixL().solveInPlace(z);
  return log_norm_ - 0.5 * z.squaredNorm();
}

double gg_log_density(const Eigen::Ref<const Vector>& x, const GGParams& params) {
  const double q = params.mahalanobis_sq(x);
  return params.log_normalizer() - 0.5 * std::pow(q, params.beta());
}

Vector gg_log_density_rows(const Eigen::Ref<const PatchMatrix>& xs, const GGParams& params) {
  Vector q = params.mahalanobis_sq_rows(xs);
  const double beta = params.beta();
  for (Index i = 0; i < q.size(); ++i) {
    q[i] = params.log_normalizer() - 0.5 * std::pow(q[i], beta);
  }
  return q;
}

double gg_log_likelihood(const Eigen::Ref<const PatchMatrix>& xs, const GGParams& params) {
  return gg_log_density_rows(xs, params).sum();
}

double gaussian_log_density(const Eigen::Ref<const Vector>& x, const GaussianParams& params,
                            double ridge) {
  return RidgedGaussian(params, ridge).log_density(x);
}

Vector row_mean(const Eigen::Ref<const PatchMatrix>& xs) {
  if (xs.rows() == 0) throw InsufficientDataError("row_mean: no rows");
  return xs.colwise().mean().transpose();
}

Matrix row_covariance(const Eigen::Ref<const PatchMatrix>& xs, const Vector& mean) {
  if (xs.rows() == 0) throw InsufficientDataError("row_covariance: no rows");
  require_dim(mean.size(), xs.cols(), "row_covariance");
  const Matrix centered = xs.rowwise() - mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(xs.rows());
  return 0.5 * (cov + cov.transpose());
}

void regularize_scatter(Matrix& scatter) {
  const double scale = scatter.trace() / static_cast<double>(scatter.rows());
  scatter.diagonal().array() += kScatterRidge * scale;
}

GGFit fit_gg_fixed_point_traced(const Eigen::Ref<const PatchMatrix>& samples, double beta,
                                const FitOptions& options) {
  const Index n = samples.rows();
  const Index p = samples.cols();
  if (!(beta > 0.0)) throw ParameterError("fit_gg_fixed_point: beta must be positive");
  if (p == 0) throw DimensionError("fit_gg_fixed_point: zero-dimensional samples");
  if (n < p + 1) {
    throw InsufficientDataError("fit_gg_fixed_point: need at least " + std::to_string(p + 1) +
                                " samples, got " + std::to_string(n));
  }

  const Vector mu = row_mean(samples);
  const Matrix centered = samples.rowwise() - mu.transpose();
  Matrix scatter = (centered.transpose() * centered) / static_cast<double>(n);
  scatter = (0.5 * (scatter + scatter.transpose())).eval();
  if (!(scatter.trace() > 0.0)) {
    throw DegenerateScatterError("fit_gg_fixed_point: all samples coincide");
  }
  regularize_scatter(scatter);

  GGFit fit{GGParams(mu, scatter, beta), 0, false, {}};
  if (options.record_likelihood) {
    fit.log_likelihood.push_back(gg_log_likelihood(samples, fit.params));
  }

  Matrix work(p, n);
  Vector weights(n);
  for (int it = 0; it < options.max_iters; ++it) {
    work = centered.transpose();
    fit.params.cholesky().matrixL().solveInPlace(work);
    for (Index i = 0; i < n; ++i) {
      const double u = work.col(i).squaredNorm();
      // A sample sitting exactly on the mean contributes a zero outer product.
      weights[i] = u > 0.0 ? std::pow(u, beta - 1.0) : 0.0;
    }
    Matrix next = (beta / static_cast<double>(n)) *
                  (centered.transpose() * weights.asDiagonal() * centered);
    next = (0.5 * (next + next.transpose())).eval();
    regularize_scatter(next);

    const double change = (next - fit.params.sigma()).norm() / fit.params.sigma().norm();
    fit.params = GGParams(mu, std::move(next), beta);
    fit.iterations = it + 1;
    if (options.record_likelihood) {
      fit.log_likelihood.push_back(gg_log_likelihood(samples, fit.params));
    }
    if (change < options.tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

GGParams fit_gg_fixed_point(const Eigen::Ref<const PatchMatrix>& samples, double beta,
                            const FitOptions& options) {
  FitOptions opts = options;
  opts.record_likelihood = false;
  return fit_gg_fixed_point_traced(samples, beta, opts).params;
}

PatchMatrix gg_sample(const GGParams& params, Index count, std::uint64_t seed) {
  const Index p = params.dim();
  PatchMatrix out(count, p);
  if (count == 0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> gamma(static_cast<double>(p) / (2.0 * params.beta()), 2.0);
  const Matrix lower = params.cholesky().matrixL().toDenseMatrix();

  Vector dir(p);
  for (Index i = 0; i < count; ++i) {
    double norm = 0.0;
    do {
      for (Index k = 0; k < p; ++k) dir[k] = normal(rng);
      norm = dir.norm();
    } while (norm == 0.0);
    dir /= norm;
    const double radius = std::pow(gamma(rng), 1.0 / (2.0 * params.beta()));
    out.row(i) = (params.mu() + radius * (lower * dir)).transpose();
  }
  return out;
}

}  // namespace isden
