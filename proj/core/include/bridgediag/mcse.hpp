#pragma once

#include <span>

#include "bridgediag/bridge.hpp"
#include "bridgediag/log_math.hpp"

namespace bridgediag {

struct McseReport {
  double rel_var_num = 0.0;  // Var(N_i) / (S2 * mean(N)^2)
  double rel_var_den = 0.0;  // Var(D_j) / (ESS_D * mean(D)^2)
  double ess_den = 0.0;
  double mcse_log = 0.0;         // sqrt(log1p(rel_var_num + rel_var_den))
  double mcse_rel_linear = 0.0;  // MCSE(p) / p = sqrt(rel_var_num + rel_var_den)
};

/// Sample variance (S-1 denominator) of exp(log_terms) divided by
/// n_eff * mean^2, computed after shifting by the largest term. Zero for
/// constant terms. Needs at least two finite entries.
double relative_term_variance(std::span<const LogValue> log_terms, double n_eff);

/// Delta-method MCSE of p and log p. The numerator uses n_eff = S2 (iid
/// proposal draws); the denominator uses the multi-chain ESS of its terms
/// over result.chain_layout. The two means are independent, so no
/// covariance term enters.
McseReport mcse_of_bridge(const BridgeResult& result);

}  // namespace bridgediag
