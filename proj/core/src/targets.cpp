#include "bridgediag/targets.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_dim(const TargetModel& model, std::size_t got) {
  if (got != model.dim()) {
    std::ostringstream msg;
    msg << "dimension mismatch: model has dim " << model.dim() << ", point has " << got;
    throw Error(msg.str());
  }
}

}  // namespace

std::vector<LogValue> TargetModel::log_density_batch(const PointMatrix& thetas) const {
  std::vector<LogValue> out(static_cast<std::size_t>(thetas.rows()));
  for (Eigen::Index i = 0; i < thetas.rows(); ++i)
    out[static_cast<std::size_t>(i)] =
        log_density({thetas.row(i).data(), static_cast<std::size_t>(thetas.cols())});
  return out;
}

PointMatrix TargetModel::sample_posterior(RngStream&, std::size_t) const {
  throw Error("no exact sampler");
}

// ---------------------------------------------------------------------------

ConjugateNormalModel::ConjugateNormalModel(std::size_t n, double sigma, double tau, double ybar,
                                           double ssq)
    : n_(n), sigma_(sigma), tau_(tau), ybar_(ybar), ssq_(ssq) {
  if (n_ < 1) throw Error("conjugate-normal needs at least one observation");
  if (!(sigma_ > 0.0) || !(tau_ > 0.0)) throw Error("sigma and tau must be positive");
}

ConjugateNormalModel ConjugateNormalModel::from_data(std::span<const double> y, double sigma,
                                                     double tau) {
  if (y.empty()) throw Error("conjugate-normal needs at least one observation");
  double sum = 0.0;
  double ssq = 0.0;
  for (double v : y) {
    sum += v;
    ssq += v * v;
  }
  return ConjugateNormalModel(y.size(), sigma, tau, sum / static_cast<double>(y.size()), ssq);
}

ConjugateNormalModel ConjugateNormalModel::synthetic(RngStream& rng, std::size_t n, double sigma,
                                                     double tau, double true_mean) {
  std::vector<double> y(n);
  for (double& v : y) v = true_mean + sigma * rng.normal();
  return from_data(y, sigma, tau);
}

LogValue ConjugateNormalModel::log_density(std::span<const double> theta) const {
  require_dim(*this, theta.size());
  const double t = theta[0];
  const double n = static_cast<double>(n_);
  const double s2 = sigma_ * sigma_;
  const double resid_ssq = ssq_ - 2.0 * t * n * ybar_ + n * t * t;
  const double log_lik = -0.5 * n * (kLog2Pi + std::log(s2)) - 0.5 * resid_ssq / s2;
  const double log_prior = -0.5 * (kLog2Pi + std::log(tau_ * tau_)) - 0.5 * t * t / (tau_ * tau_);
  return log_lik + log_prior;
}

std::optional<LogValue> ConjugateNormalModel::oracle_log_ml() const {
  // y ~ N(0, sigma^2 I + tau^2 1 1^T)
  const double n = static_cast<double>(n_);
  const double s2 = sigma_ * sigma_;
  const double t2 = tau_ * tau_;
  const double quad = (ssq_ - t2 * n * n * ybar_ * ybar_ / (s2 + n * t2)) / s2;
  return -0.5 * n * kLog2Pi - 0.5 * n * std::log(s2) - 0.5 * std::log1p(n * t2 / s2) - 0.5 * quad;
}

std::optional<GaussianPosterior> ConjugateNormalModel::gaussian_posterior() const {
  const double n = static_cast<double>(n_);
  const double precision = n / (sigma_ * sigma_) + 1.0 / (tau_ * tau_);
  GaussianPosterior post{Vector(1), Matrix(1, 1)};
  post.mean(0) = (n * ybar_ / (sigma_ * sigma_)) / precision;
  post.cov(0, 0) = 1.0 / precision;
  return post;
}

PointMatrix ConjugateNormalModel::sample_posterior(RngStream& rng, std::size_t n) const {
  const auto post = *gaussian_posterior();
  const double sd = std::sqrt(post.cov(0, 0));
  PointMatrix out(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, 0) = post.mean(0) + sd * rng.normal();
  return out;
}

// ---------------------------------------------------------------------------

ConjugateLinRegModel::ConjugateLinRegModel(Matrix x, Vector y, double sigma, double prior_sd)
    : x_(std::move(x)), y_(std::move(y)), sigma_(sigma), prior_sd_(prior_sd) {
  if (x_.rows() != y_.size() || x_.rows() < 1 || x_.cols() < 1)
    throw Error("design matrix and response disagree in size");
  if (!(sigma_ > 0.0) || !(prior_sd_ > 0.0)) throw Error("sigma and prior_sd must be positive");
  yty_ = y_.squaredNorm();
  xtx_ = x_.transpose() * x_;
  xty_ = x_.transpose() * y_;
  const auto k = x_.cols();
  const Matrix precision =
      xtx_ / (sigma_ * sigma_) + Matrix::Identity(k, k) / (prior_sd_ * prior_sd_);
  Eigen::LLT<Matrix> llt(precision);
  posterior_.cov = llt.solve(Matrix::Identity(k, k));
  posterior_.cov = 0.5 * (posterior_.cov + posterior_.cov.transpose());
  posterior_.mean = posterior_.cov * xty_ / (sigma_ * sigma_);
  posterior_chol_ = cholesky_with_jitter(posterior_.cov);
}

ConjugateLinRegModel ConjugateLinRegModel::synthetic(RngStream& rng, std::size_t n, std::size_t k,
                                                     double prior_sd) {
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n * k));
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = scale * rng.normal();
  Vector beta(cols);
  for (Eigen::Index j = 0; j < cols; ++j) beta(j) = rng.normal();
  beta(cols - 1) = 0.0;
  const double noise_sd = std::sqrt(2.0) / std::sqrt(static_cast<double>(n));
  Vector y = x * beta;
  for (Eigen::Index i = 0; i < rows; ++i) y(i) += noise_sd * rng.normal();
  return ConjugateLinRegModel(std::move(x), std::move(y), noise_sd, prior_sd);
}

LogValue ConjugateLinRegModel::log_density(std::span<const double> theta) const {
  require_dim(*this, theta.size());
  const Eigen::Map<const Vector> beta(theta.data(), x_.cols());
  const double n = static_cast<double>(x_.rows());
  const double k = static_cast<double>(x_.cols());
  const double s2 = sigma_ * sigma_;
  const double p2 = prior_sd_ * prior_sd_;
  const double rss = (y_ - x_ * beta).squaredNorm();
  return -0.5 * n * (kLog2Pi + std::log(s2)) - 0.5 * rss / s2 - 0.5 * k * (kLog2Pi + std::log(p2)) -
         0.5 * beta.squaredNorm() / p2;
}

std::vector<LogValue> ConjugateLinRegModel::log_density_batch(const PointMatrix& thetas) const {
  require_dim(*this, static_cast<std::size_t>(thetas.cols()));
  const double n = static_cast<double>(x_.rows());
  const double k = static_cast<double>(x_.cols());
  const double s2 = sigma_ * sigma_;
  const double p2 = prior_sd_ * prior_sd_;
  const double constant = -0.5 * n * (kLog2Pi + std::log(s2)) - 0.5 * k * (kLog2Pi + std::log(p2));
  const Matrix resid = (-(x_ * thetas.transpose())).colwise() + y_;
  std::vector<LogValue> out(static_cast<std::size_t>(thetas.rows()));
  for (Eigen::Index i = 0; i < thetas.rows(); ++i)
    out[static_cast<std::size_t>(i)] =
        constant - 0.5 * resid.col(i).squaredNorm() / s2 - 0.5 * thetas.row(i).squaredNorm() / p2;
  return out;
}

std::optional<LogValue> ConjugateLinRegModel::oracle_log_ml() const {
  const auto n = x_.rows();
  Matrix cov = prior_sd_ * prior_sd_ * (x_ * x_.transpose());
  cov.diagonal().array() += sigma_ * sigma_;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw Error("marginal covariance is not positive definite");
  const Matrix lower = llt.matrixL();
  const Vector z = lower.triangularView<Eigen::Lower>().solve(y_);
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  return -0.5 * static_cast<double>(n) * kLog2Pi - 0.5 * log_det - 0.5 * z.squaredNorm();
}

std::optional<GaussianPosterior> ConjugateLinRegModel::gaussian_posterior() const {
  return posterior_;
}

PointMatrix ConjugateLinRegModel::sample_posterior(RngStream& rng, std::size_t n) const {
  return mvn_sample(rng, posterior_.mean, posterior_chol_, static_cast<Eigen::Index>(n));
}

// ---------------------------------------------------------------------------

DifficultyDialModel::DifficultyDialModel(std::size_t dim, double dof, double log_const)
    : dim_(dim), dof_(dof), log_const_(log_const) {
  if (dim_ < 1) throw Error("difficulty-dial needs dim >= 1");
  if (!(dof_ > 2.0)) throw Error("difficulty-dial needs dof > 2");
}

LogValue DifficultyDialModel::log_density(std::span<const double> theta) const {
  require_dim(*this, theta.size());
  double scale = 0.0;
  for (double v : theta) scale = std::max(scale, std::abs(v));
  if (!std::isfinite(scale)) return kNegInf;
  double r2 = 0.0;
  for (double v : theta) r2 += v * v;
  // Far out in the tail r2 overflows; use log(r2 / dof) there.
  const double log_kernel =
      std::isfinite(r2) ? std::log1p(r2 / dof_) : [&] {
        double scaled = 0.0;
        for (double v : theta) scaled += (v / scale) * (v / scale);
        return 2.0 * std::log(scale) + std::log(scaled) - std::log(dof_);
      }();
  return log_const_ - 0.5 * (dof_ + static_cast<double>(dim_)) * log_kernel;
}

std::optional<LogValue> DifficultyDialModel::oracle_log_ml() const {
  const double d = static_cast<double>(dim_);
  return log_const_ + std::lgamma(0.5 * dof_) + 0.5 * d * std::log(dof_ * std::numbers::pi) -
         std::lgamma(0.5 * (dof_ + d));
}

PointMatrix DifficultyDialModel::sample_posterior(RngStream& rng, std::size_t n) const {
  PointMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim_));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) = rng.normal();
    const double w = rng.chi_square(dof_) / dof_;
    out.row(i) /= std::sqrt(w);
  }
  return out;
}

// ---------------------------------------------------------------------------

OffsetModel::OffsetModel(std::shared_ptr<const TargetModel> base, double offset)
    : base_(std::move(base)), offset_(offset) {
  if (!base_) throw Error("offset model needs a base model");
}

LogValue OffsetModel::log_density(std::span<const double> theta) const {
  return base_->log_density(theta) + offset_;
}

std::vector<LogValue> OffsetModel::log_density_batch(const PointMatrix& thetas) const {
  auto out = base_->log_density_batch(thetas);
  for (double& v : out) v += offset_;
  return out;
}

std::optional<LogValue> OffsetModel::oracle_log_ml() const {
  auto base = base_->oracle_log_ml();
  if (base) *base += offset_;
  return base;
}

std::unique_ptr<TargetModel> OffsetModel::worker_instance() const {
  auto inner = base_->worker_instance();
  if (!inner) return nullptr;
  return std::make_unique<OffsetModel>(std::shared_ptr<const TargetModel>(std::move(inner)), offset_);
}

// ---------------------------------------------------------------------------

LogValue log_unnorm_posterior(const TargetModel& model, std::span<const double> theta) {
  require_dim(model, theta.size());
  const LogValue v = model.log_density(theta);
  if (std::isnan(v)) throw Error("evaluator returned NaN");
  return v;
}

std::vector<LogValue> evaluate_batch(const TargetModel& model, const PointMatrix& thetas) {
  require_dim(model, static_cast<std::size_t>(thetas.cols()));
  auto out = model.log_density_batch(thetas);
  if (out.size() != static_cast<std::size_t>(thetas.rows()))
    throw Error("evaluator returned the wrong number of log densities");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isnan(out[i])) throw Error("evaluator returned NaN at draw " + std::to_string(i));
    if (out[i] == std::numeric_limits<double>::infinity())
      throw Error("evaluator returned +inf at draw " + std::to_string(i));
  }
  return out;
}

LogValue exact_log_marginal(const TargetModel& model) {
  const auto v = model.oracle_log_ml();
  if (!v) throw Error("no analytic marginal");
  return *v;
}

DrawsMatrix exact_posterior_sample(const TargetModel& model, RngStream& rng, std::size_t chains,
                                   std::size_t iters) {
  if (!model.has_exact_sampler()) throw Error("no exact sampler");
  return DrawsMatrix::from_points(model.sample_posterior(rng, chains * iters), chains);
}

}  // namespace bridgediag
