#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isden/density.hpp"
#include "isden/errors.hpp"
#include "support/oracles.hpp"

using namespace isden;

namespace {

GGParams params_1d(double mu, double var, double beta) {
  return GGParams(Vector::Constant(1, mu), Matrix::Constant(1, 1, var), beta);
}

}  // namespace

TEST_CASE("gg_log_density at the origin of the 1-d standard case is the normal log density") {
  const double got = gg_log_density(Vector::Zero(1), params_1d(0.0, 1.0, 1.0));
  CHECK(got == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(got == doctest::Approx(-0.91894).epsilon(1e-5));
}

TEST_CASE("beta = 1 collapses the generalized Gaussian onto the Gaussian") {
  std::mt19937_64 rng(11);
  for (Index p : {1, 2, 4, 9}) {
    const Vector mu = oracle::random_vector(p, rng);
    const Matrix sigma = oracle::random_spd(p, rng);
    const GGParams gg(mu, sigma, 1.0);
    const GaussianParams gauss(mu, sigma);
    for (int i = 0; i < 100; ++i) {
      const Vector x = oracle::random_vector(p, rng, 2.0);
      CHECK(std::abs(gg_log_density(x, gg) - gaussian_log_density(x, gauss, 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("gg_log_density agrees with the closed-form density") {
  std::mt19937_64 rng(5);
  for (double beta : {0.5, 0.9, 1.7}) {
    const Vector mu = oracle::random_vector(3, rng);
    const Matrix sigma = oracle::random_spd(3, rng);
    const GGParams gg(mu, sigma, beta);
    for (int i = 0; i < 20; ++i) {
      const Vector x = oracle::random_vector(3, rng, 1.5);
      const double expected = std::log(oracle::gg_density_direct(x, mu, sigma, beta));
      CHECK(gg_log_density(x, gg) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("the 2-d generalized Gaussian with beta 0.9 integrates to one") {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.3, 0.3, 0.5;
  const GGParams gg(Vector::Zero(2), sigma, 0.9);
  const double scale = std::sqrt(sigma.eigenvalues().real().maxCoeff());
  const double total = oracle::integrate_2d(
      [&](const Vector& x) { return std::exp(gg_log_density(x, gg)); }, -10 * scale, 10 * scale, 800);
  CHECK(total == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("scaling the scatter shifts the log density by the closed-form amount") {
  std::mt19937_64 rng(21);
  const Index p = 4;
  const Vector mu = oracle::random_vector(p, rng);
  const Matrix sigma = oracle::random_spd(p, rng);
  for (double c : {0.25, 3.0}) {
    const GGParams a(mu, sigma, 0.9);
    const GGParams b(mu, c * sigma, 0.9);
    const Vector x = oracle::random_vector(p, rng);
    const double q = a.mahalanobis_sq(x);
    const double expected = -0.5 * p * std::log(c) + 0.5 * (std::pow(q, 0.9) - std::pow(q / c, 0.9));
    CHECK(gg_log_density(x, b) - gg_log_density(x, a) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("GGParams validates its inputs") {
  Matrix not_pd(2, 2);
  not_pd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(GGParams(Vector::Zero(2), not_pd, 0.9), ParameterError);
  CHECK_THROWS_AS(GGParams(Vector::Zero(2), Matrix::Identity(2, 2), 0.0), ParameterError);
  CHECK_THROWS_AS(GGParams(Vector::Zero(3), Matrix::Identity(2, 2), 1.0), DimensionError);
  const GGParams ok(Vector::Zero(2), Matrix::Identity(2, 2), 1.0);
  CHECK_THROWS_AS(gg_log_density(Vector::Zero(3), ok), DimensionError);

  Matrix lopsided(2, 2);
  lopsided << 2.0, 0.5, 0.4999999, 1.0;
  const GGParams sym(Vector::Zero(2), lopsided, 1.0);
  CHECK(sym.sigma()(0, 1) == sym.sigma()(1, 0));
}

TEST_CASE("gaussian_log_density examples") {
  const GaussianParams unit(Vector::Zero(1), Matrix::Identity(1, 1));
  CHECK(gaussian_log_density(Vector::Zero(1), unit) == doctest::Approx(-0.91894).epsilon(1e-5));

  const GaussianParams iso(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK(gaussian_log_density(Vector::Zero(2), iso, 3.0) ==
        doctest::Approx(-std::log(2.0 * std::numbers::pi * 4.0)).epsilon(1e-14));
  CHECK(gaussian_log_density(Vector::Zero(2), iso, 3.0) == doctest::Approx(-3.2242).epsilon(1e-4));

  std::mt19937_64 rng(3);
  const Vector mean = oracle::random_vector(4, rng);
  const Matrix cov = oracle::random_spd(4, rng);
  const GaussianParams g(mean, cov);
  const double at_mode = gaussian_log_density(mean, g, 0.5);
  for (int i = 0; i < 50; ++i) {
    const Vector x = mean + oracle::random_vector(4, rng);
    CHECK(gaussian_log_density(x, g, 0.5) < at_mode);
    Matrix ridged = cov;
    ridged.diagonal().array() += 0.5;
    CHECK(gaussian_log_density(x, g, 0.5) ==
          doctest::Approx(oracle::gaussian_log_density_direct(x, mean, ridged)).epsilon(1e-10));
  }
}

TEST_CASE("a singular covariance needs a ridge") {
  const GaussianParams flat(Vector::Zero(2), Matrix::Zero(2, 2));
  CHECK_THROWS_AS(gaussian_log_density(Vector::Zero(2), flat, 0.0), ParameterError);
  CHECK(std::isfinite(gaussian_log_density(Vector::Zero(2), flat, 1.0)));
}

TEST_CASE("fit with beta = 1 returns the (regularized) sample covariance") {
  const GGParams truth(Vector::Zero(4), Matrix::Identity(4, 4), 1.0);
  const PatchMatrix xs = gg_sample(truth, 2000, 17);
  const GGFit fit = fit_gg_fixed_point_traced(xs, 1.0);
  CHECK(fit.converged);

  const Vector mean = row_mean(xs);
  const Matrix raw = row_covariance(xs, mean);
  Matrix regularized = raw;
  regularize_scatter(regularized);
  CHECK((fit.params.sigma() - regularized).norm() / regularized.norm() < 1e-8);
  CHECK((fit.params.sigma() - raw).norm() / raw.norm() < 2e-6);
  CHECK((fit.params.mu() - mean).norm() == 0.0);
}

TEST_CASE("fit recovers a known generalized Gaussian") {
  std::mt19937_64 rng(99);
  const Vector mu = oracle::random_vector(4, rng, 3.0);
  const Matrix sigma = oracle::random_spd(4, rng);
  const GGParams truth(mu, sigma, 0.9);
  const PatchMatrix xs = gg_sample(truth, 10000, 4242);
  const GGParams fit = fit_gg_fixed_point(xs, 0.9);
  CHECK((fit.sigma() - sigma).norm() / sigma.norm() < 0.1);
  CHECK((fit.mu() - mu).norm() / mu.norm() < 0.05);
}

TEST_CASE("fixed-point iterations never decrease the likelihood") {
  std::mt19937_64 rng(7);
  for (double beta : {0.5, 0.9}) {
    const GGParams truth(oracle::random_vector(3, rng), oracle::random_spd(3, rng), beta);
    FitOptions opts;
    opts.record_likelihood = true;
    const GGFit fit = fit_gg_fixed_point_traced(gg_sample(truth, 3000, 31), beta, opts);
    REQUIRE(fit.log_likelihood.size() >= 2);
    for (std::size_t k = 1; k < fit.log_likelihood.size(); ++k) {
      const double slack = 1e-6 * std::abs(fit.log_likelihood[k - 1]);
      CHECK(fit.log_likelihood[k] >= fit.log_likelihood[k - 1] - slack);
    }
    CHECK(fit.log_likelihood.back() >= fit.log_likelihood.front());
  }
}

TEST_CASE("fit rejects too little or degenerate data") {
  PatchMatrix one(1, 1);
  one << 3.0;
  CHECK_THROWS_AS(fit_gg_fixed_point(one, 0.9), InsufficientDataError);

  PatchMatrix twins(2, 1);
  twins << 3.0, 3.0;
  CHECK_THROWS_AS(fit_gg_fixed_point(twins, 0.9), DegenerateScatterError);

  PatchMatrix few(3, 4);
  few.setRandom();
  CHECK_THROWS_AS(fit_gg_fixed_point(few, 0.9), InsufficientDataError);
}

TEST_CASE("gg_sample") {
  const GGParams iso(Vector::Zero(2), Matrix::Identity(2, 2), 1.0);
  CHECK(gg_sample(iso, 0, 1).rows() == 0);

  const PatchMatrix xs = gg_sample(iso, 100000, 2024);
  const Matrix cov = row_covariance(xs, row_mean(xs));
  CHECK((cov - Matrix::Identity(2, 2)).norm() / Matrix::Identity(2, 2).norm() < 0.05);

  CHECK(gg_sample(iso, 50, 9) == gg_sample(iso, 50, 9));
  CHECK(gg_sample(iso, 50, 9) != gg_sample(iso, 50, 10));
}

TEST_CASE("gg_sample matches the radial law of the generalized Gaussian") {
  // q^beta ~ Gamma(p / (2 beta), 2) has mean p / beta.
  const GGParams gg(Vector::Zero(3), Matrix::Identity(3, 3), 0.6);
  const PatchMatrix xs = gg_sample(gg, 50000, 77);
  const Vector q = gg.mahalanobis_sq_rows(xs);
  const double mean_qb = q.array().pow(0.6).mean();
  CHECK(mean_qb == doctest::Approx(3.0 / 0.6).epsilon(0.02));
}
