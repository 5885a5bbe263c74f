#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bridgediag/draws.hpp"
#include "bridgediag/log_math.hpp"
#include "bridgediag/proposal.hpp"
#include "bridgediag/rng.hpp"
#include "bridgediag/targets.hpp"

namespace bridgediag {

/// log l1 at the posterior draws and log l2 at the proposal draws, where
/// l = unnormalized posterior / proposal density.
struct LogRatios {
  std::vector<LogValue> log_l1;
  std::vector<LogValue> log_l2;
};

struct BridgeConfig {
  double tol = 1e-10;
  int max_iter = 1000;
  /// Proposal draw count; defaults to the estimation-half size.
  std::optional<std::size_t> s2;
  JitterPolicy jitter;
};

/// How the denominator terms map back onto chains: term index c*iters + t
/// came from chain c, iteration t of the estimation half.
struct ChainLayout {
  std::size_t chains = 1;
  std::size_t iters = 0;
  friend bool operator==(const ChainLayout&, const ChainLayout&) = default;
};

struct BridgeResult {
  LogValue log_ml = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Numerator terms l2 / (s1 l2 + s2 p), one per proposal draw.
  std::vector<LogValue> log_f2;
  /// Denominator terms 1 / (s1 l1 + s2 p), one per posterior draw.
  std::vector<LogValue> log_f1;
  ChainLayout chain_layout;

  std::size_t s1_count() const { return log_f1.size(); }
  std::size_t s2_count() const { return log_f2.size(); }
};

LogRatios compute_log_ratios(const TargetModel& model, const Proposal& proposal,
                             const PointMatrix& posterior_points, const PointMatrix& proposal_points,
                             const std::vector<LogValue>& proposal_log_g);

/// Fixed-point iteration for the optimal bridge function, started from
/// p = 1 and carried out on ratios shifted by the median finite log l1.
/// Non-convergence within max_iter is reported, not thrown.
BridgeResult bridge_iterate(const LogRatios& ratios, const BridgeConfig& config = {},
                            ChainLayout layout = {});

struct EstimateOutput {
  BridgeResult result;
  Proposal proposal;
  HalfSplit split;
};

/// Split -> fit proposal -> sample proposal -> ratios -> iterate.
EstimateOutput estimate_log_ml(const TargetModel& model, const DrawsMatrix& draws,
                               const BridgeConfig& config, RngStream& rng);

}  // namespace bridgediag
