#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "bridgediag/bridge.hpp"
#include "bridgediag/log_math.hpp"

namespace bridgediag {

struct GpdFit {
  double khat = 0.0;       // > 0 heavy tail, < 0 bounded tail
  double sigma_hat = 0.0;
  std::size_t tail_count = 0;
  double threshold_u = 0.0;  // on the max-shifted linear scale for khat_of_terms
  bool degenerate = false;   // constant tail; khat set to the -1 limit
};

/// floor(min(0.2 S, 3 sqrt(S))). Throws "too few draws for tail fit" for S < 25.
std::size_t default_tail_count(std::size_t sample_size);

/// Zhang & Stephens (2009) profile-posterior-mean fit of a generalized Pareto
/// to non-negative excesses, with the grid of 30 + floor(sqrt(M)) points and
/// the weakly informative shrinkage of khat toward 0.5 used by the standard
/// Pareto-k diagnostic. Needs at least 5 excesses.
GpdFit fit_gpd_excesses(std::span<const double> excesses);

/// Tail fit of the linear-scale terms exp(log_terms). Takes the M largest
/// terms (M = tail_count or default_tail_count(S), S counting -inf terms
/// too), sets u to the M-th largest and fits the excesses over u.
/// Invariant to adding a constant to all log terms.
GpdFit khat_of_terms(std::span<const LogValue> log_terms,
                     std::optional<std::size_t> tail_count = std::nullopt);

struct KhatReport {
  GpdFit numerator;
  GpdFit denominator;
};

KhatReport khat_report(const BridgeResult& result,
                       std::optional<std::size_t> tail_count = std::nullopt);

/// "good" (k < 0.5), "suspect" (0.5 <= k < 0.7) or "bad" (k >= 0.7).
std::string pareto_label(double khat);

}  // namespace bridgediag
