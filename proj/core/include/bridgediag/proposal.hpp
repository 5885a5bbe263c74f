#pragma once

#include <vector>

#include "bridgediag/draws.hpp"
#include "bridgediag/linalg.hpp"

namespace bridgediag {

/// Normalized multivariate normal proposal g(theta).
struct Proposal {
  Vector mean;
  CholFactor chol;
  double log_norm_const = 0.0;  // -d/2 log(2 pi) - 1/2 log det(cov)

  Eigen::Index dim() const { return mean.size(); }
};

Proposal make_proposal(Vector mean, CholFactor chol);

/// Pooled mean and (n-1)-denominator covariance of the fit-half draws,
/// factorized with jitter. Needs more pooled draws than dimensions.
Proposal fit_mvn_proposal(const DrawsMatrix& fit_half, const JitterPolicy& jitter = {});

struct ProposalSample {
  PointMatrix points;
  std::vector<LogValue> log_g;
};

ProposalSample sample_proposal(RngStream& rng, const Proposal& proposal, std::size_t count);

std::vector<LogValue> log_g_at(const Proposal& proposal, const PointMatrix& points);

}  // namespace bridgediag
