#include "bridgediag/proposal.hpp"

#include <cmath>
#include <numbers>

#include "bridgediag/error.hpp"

namespace bridgediag {

Proposal make_proposal(Vector mean, CholFactor chol) {
  if (mean.size() != chol.dim()) throw Error("dimension mismatch");
  const double d = static_cast<double>(mean.size());
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * chol.log_det();
  return Proposal{std::move(mean), std::move(chol), log_norm};
}

Proposal fit_mvn_proposal(const DrawsMatrix& fit_half, const JitterPolicy& jitter) {
  const std::size_t n = fit_half.size();
  if (n <= fit_half.dim()) throw Error("insufficient draws for covariance");
  const PointMatrix points = fit_half.pooled();
  const Vector mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  return make_proposal(mean, cholesky_with_jitter(cov, jitter));
}

ProposalSample sample_proposal(RngStream& rng, const Proposal& proposal, std::size_t count) {
  if (count < 2) throw Error("proposal sample size must be at least 2");
  ProposalSample out;
  out.points = mvn_sample(rng, proposal.mean, proposal.chol, static_cast<Eigen::Index>(count));
  out.log_g = log_g_at(proposal, out.points);
  return out;
}

std::vector<LogValue> log_g_at(const Proposal& proposal, const PointMatrix& points) {
  return mvn_logpdf_rows(points, proposal.mean, proposal.chol);
}

}  // namespace bridgediag
