#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "bridgediag/log_math.hpp"
#include "bridgediag/rng.hpp"

namespace bridgediag {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// n x d batch of points, one point per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Escalating diagonal jitter, as multiples of trace(m)/d.
struct JitterPolicy {
  double first = 1e-8;
  double last = 1e-4;
  double growth = 10.0;
};

struct CholFactor {
  Matrix lower;
  double jitter_applied = 0.0;

  Eigen::Index dim() const { return lower.rows(); }
  /// log det(lower * lower^T)
  double log_det() const;
};

/// Cholesky factorization. If the plain factorization fails, adds
/// eps * trace(m)/d * I for eps in {first, first*growth, ..., last} and
/// records the jitter that succeeded. Throws "degenerate covariance" when
/// even the last step fails, and rejects asymmetric input.
CholFactor cholesky_with_jitter(const Matrix& m, const JitterPolicy& policy = {});

/// Log density of N(mean, lower * lower^T) at x, including the normalizer.
LogValue mvn_logpdf(std::span<const double> x, const Vector& mean, const CholFactor& chol);

/// Batched mvn_logpdf over the rows of points.
std::vector<LogValue> mvn_logpdf_rows(const PointMatrix& points, const Vector& mean,
                                      const CholFactor& chol);

/// n draws of mean + lower * z, filled row by row from rng.
PointMatrix mvn_sample(RngStream& rng, const Vector& mean, const CholFactor& chol,
                       Eigen::Index n);

}  // namespace bridgediag
