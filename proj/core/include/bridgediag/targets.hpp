#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bridgediag/draws.hpp"
#include "bridgediag/linalg.hpp"
#include "bridgediag/log_math.hpp"
#include "bridgediag/rng.hpp"

namespace bridgediag {

/// Mean and covariance of a posterior that is exactly Gaussian.
struct GaussianPosterior {
  Vector mean;
  Matrix cov;
};

/// An evaluable log unnormalized posterior log p(y|theta) + log p(theta) on
/// unconstrained R^d. Implementations return -inf outside the support and
/// never NaN.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual LogValue log_density(std::span<const double> theta) const = 0;

  /// One value per row. The default loops over log_density.
  virtual std::vector<LogValue> log_density_batch(const PointMatrix& thetas) const;

  /// Closed-form log marginal likelihood, if the model has one.
  virtual std::optional<LogValue> oracle_log_ml() const { return std::nullopt; }

  /// Set when the posterior is exactly Gaussian (enables the AR(1) sampler).
  virtual std::optional<GaussianPosterior> gaussian_posterior() const { return std::nullopt; }

  virtual bool has_exact_sampler() const { return false; }
  /// iid draws from the exact posterior, chains*iters rows filled in order.
  virtual PointMatrix sample_posterior(RngStream& rng, std::size_t n) const;

  /// Models holding per-instance state (a child process) return a fresh
  /// instance for each parallel worker; shareable models return nullptr.
  virtual std::unique_ptr<TargetModel> worker_instance() const { return nullptr; }
};

/// y_i ~ N(theta, sigma^2), theta ~ N(0, tau^2), sigma and tau known.
class ConjugateNormalModel final : public TargetModel {
 public:
  ConjugateNormalModel(std::size_t n, double sigma, double tau, double ybar, double ssq);
  static ConjugateNormalModel from_data(std::span<const double> y, double sigma, double tau);
  /// n observations y_i ~ N(true_mean, sigma^2) drawn from rng.
  static ConjugateNormalModel synthetic(RngStream& rng, std::size_t n, double sigma, double tau,
                                        double true_mean);

  std::size_t dim() const override { return 1; }
  std::string name() const override { return "conjugate-normal"; }
  LogValue log_density(std::span<const double> theta) const override;
  std::optional<LogValue> oracle_log_ml() const override;
  std::optional<GaussianPosterior> gaussian_posterior() const override;
  bool has_exact_sampler() const override { return true; }
  PointMatrix sample_posterior(RngStream& rng, std::size_t n) const override;

  std::size_t n() const { return n_; }
  double sigma() const { return sigma_; }
  double tau() const { return tau_; }
  double ybar() const { return ybar_; }
  double ssq() const { return ssq_; }

 private:
  std::size_t n_;
  double sigma_;
  double tau_;
  double ybar_;
  double ssq_;
};

/// y ~ N(X beta, sigma^2 I), beta ~ N(0, prior_sd^2 I), sigma known.
class ConjugateLinRegModel final : public TargetModel {
 public:
  ConjugateLinRegModel(Matrix x, Vector y, double sigma, double prior_sd);
  /// X = Z / sqrt(n k), beta_i ~ N(0, 1) with the last coefficient zero,
  /// y = X beta + eps / sqrt(n), eps ~ N(0, 2); sigma is the true noise sd.
  static ConjugateLinRegModel synthetic(RngStream& rng, std::size_t n, std::size_t k,
                                        double prior_sd = 1.0);

  std::size_t dim() const override { return static_cast<std::size_t>(x_.cols()); }
  std::string name() const override { return "conjugate-linreg"; }
  LogValue log_density(std::span<const double> theta) const override;
  std::vector<LogValue> log_density_batch(const PointMatrix& thetas) const override;
  std::optional<LogValue> oracle_log_ml() const override;
  std::optional<GaussianPosterior> gaussian_posterior() const override;
  bool has_exact_sampler() const override { return true; }
  PointMatrix sample_posterior(RngStream& rng, std::size_t n) const override;

  const Matrix& x() const { return x_; }
  const Vector& y() const { return y_; }
  double sigma() const { return sigma_; }
  double prior_sd() const { return prior_sd_; }

 private:
  Matrix x_;
  Vector y_;
  double sigma_;
  double prior_sd_;
  double yty_;
  Matrix xtx_;
  Vector xty_;
  GaussianPosterior posterior_;
  CholFactor posterior_chol_;
};

/// Unnormalized d-dimensional Student-t kernel exp(log_const) *
/// (1 + |theta|^2 / dof)^(-(dof + d) / 2) with identity scale. Heavier tails
/// relative to the fitted normal proposal as d grows.
class DifficultyDialModel final : public TargetModel {
 public:
  DifficultyDialModel(std::size_t dim, double dof, double log_const = 0.0);

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "difficulty-dial"; }
  LogValue log_density(std::span<const double> theta) const override;
  std::optional<LogValue> oracle_log_ml() const override;
  bool has_exact_sampler() const override { return true; }
  PointMatrix sample_posterior(RngStream& rng, std::size_t n) const override;

  double dof() const { return dof_; }
  double log_const() const { return log_const_; }

 private:
  std::size_t dim_;
  double dof_;
  double log_const_;
};

/// Wraps a model and adds a constant to its log density.
class OffsetModel final : public TargetModel {
 public:
  OffsetModel(std::shared_ptr<const TargetModel> base, double offset);

  std::size_t dim() const override { return base_->dim(); }
  std::string name() const override { return base_->name() + "+offset"; }
  LogValue log_density(std::span<const double> theta) const override;
  std::vector<LogValue> log_density_batch(const PointMatrix& thetas) const override;
  std::optional<LogValue> oracle_log_ml() const override;
  std::optional<GaussianPosterior> gaussian_posterior() const override {
    return base_->gaussian_posterior();
  }
  bool has_exact_sampler() const override { return base_->has_exact_sampler(); }
  PointMatrix sample_posterior(RngStream& rng, std::size_t n) const override {
    return base_->sample_posterior(rng, n);
  }
  std::unique_ptr<TargetModel> worker_instance() const override;

 private:
  std::shared_ptr<const TargetModel> base_;
  double offset_;
};

/// log_density with a dimension check.
LogValue log_unnorm_posterior(const TargetModel& model, std::span<const double> theta);

/// Batched evaluation with dimension and NaN checks (NaN names the row).
std::vector<LogValue> evaluate_batch(const TargetModel& model, const PointMatrix& thetas);

/// Throws "no analytic marginal" for models without one.
LogValue exact_log_marginal(const TargetModel& model);

/// chains x iters iid posterior draws. Throws "no exact sampler".
DrawsMatrix exact_posterior_sample(const TargetModel& model, RngStream& rng, std::size_t chains,
                                   std::size_t iters);

}  // namespace bridgediag
