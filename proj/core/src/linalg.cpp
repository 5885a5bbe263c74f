#include "bridgediag/linalg.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <optional>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

std::optional<Matrix> try_llt(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix lower = llt.matrixL();
  for (Eigen::Index i = 0; i < lower.rows(); ++i)
    if (!(lower(i, i) > 0.0) || !std::isfinite(lower(i, i))) return std::nullopt;
  return lower;
}

void check_dims(std::size_t x_dim, const Vector& mean, const CholFactor& chol) {
  if (static_cast<Eigen::Index>(x_dim) != mean.size() || mean.size() != chol.dim())
    throw Error("dimension mismatch");
}

}  // namespace

double CholFactor::log_det() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

CholFactor cholesky_with_jitter(const Matrix& m, const JitterPolicy& policy) {
  if (m.rows() != m.cols() || m.rows() == 0) throw Error("covariance must be square and non-empty");
  if (!m.allFinite()) throw Error("degenerate covariance");
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(scale, 1e-300))
    throw Error("matrix is not symmetric");

  if (auto lower = try_llt(m)) return CholFactor{std::move(*lower), 0.0};

  const auto d = static_cast<double>(m.rows());
  const double mean_diag = m.trace() / d;
  for (double eps = policy.first; eps <= policy.last * (1.0 + 1e-9); eps *= policy.growth) {
    const double jitter = eps * mean_diag;
    if (!(jitter > 0.0)) break;
    Matrix jittered = m;
    jittered.diagonal().array() += jitter;
    if (auto lower = try_llt(jittered)) return CholFactor{std::move(*lower), jitter};
  }
  throw Error("degenerate covariance");
}

LogValue mvn_logpdf(std::span<const double> x, const Vector& mean, const CholFactor& chol) {
  check_dims(x.size(), mean, chol);
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Vector z = chol.lower.triangularView<Eigen::Lower>().solve(xv - mean);
  const double d = static_cast<double>(mean.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * chol.log_det() - 0.5 * z.squaredNorm();
}

std::vector<LogValue> mvn_logpdf_rows(const PointMatrix& points, const Vector& mean,
                                      const CholFactor& chol) {
  check_dims(static_cast<std::size_t>(points.cols()), mean, chol);
  const double d = static_cast<double>(mean.size());
  const double constant = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * chol.log_det();
  Matrix centered = (points.rowwise() - mean.transpose()).transpose();
  chol.lower.triangularView<Eigen::Lower>().solveInPlace(centered);
  std::vector<LogValue> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out[static_cast<std::size_t>(i)] = constant - 0.5 * centered.col(i).squaredNorm();
  return out;
}

PointMatrix mvn_sample(RngStream& rng, const Vector& mean, const CholFactor& chol,
                       Eigen::Index n) {
  if (mean.size() != chol.dim()) throw Error("dimension mismatch");
  if (n < 1) throw Error("sample count must be positive");
  const Eigen::Index d = mean.size();
  Matrix z(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) z(k, i) = rng.normal();
  const Matrix shifted = (chol.lower.triangularView<Eigen::Lower>() * z).colwise() + mean;
  return shifted.transpose();
}

}  // namespace bridgediag
