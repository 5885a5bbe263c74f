#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bridgediag/bridge.hpp"
#include "bridgediag/pareto.hpp"
#include "bridgediag/rng.hpp"
#include "bridgediag/samplers.hpp"

namespace bridgediag {

struct ReshuffleConfig {
  std::size_t replicates = 50;
  /// Defaults to ceil(sqrt(T)).
  std::optional<std::size_t> block_len;
  BridgeConfig bridge;
  std::size_t workers = 1;
};

struct ReplicateOutcome {
  std::size_t replicate = 0;  // 1-based; also the replicate's stream id
  LogValue log_ml = 0.0;
  bool converged = false;
  int iterations = 0;
  bool failed = false;
  std::string error;
};

struct ReshuffleReport {
  std::vector<ReplicateOutcome> replicates;  // all R, ordered by replicate
  std::vector<LogValue> estimates;           // successful replicates only
  double sd_log = 0.0;
  std::optional<GpdFit> khat_estimates;  // absent when too few replicates
  bool khat_low_confidence = true;
  std::size_t n_nonconverged = 0;
  std::size_t n_failed = 0;
  std::size_t block_len = 0;
  std::size_t replicate_count = 0;
};

/// Sample standard deviation (n - 1 denominator).
double sample_sd(const std::vector<double>& xs);

/// Tail count used for k-hat over R replicate estimates: max(5, default_tail_count(R)).
std::size_t replicate_tail_count(std::size_t replicates);

/// For r = 1..R: block-reshuffle the draws with stream root.derive(r), then
/// run the full estimate_log_ml pipeline on the same stream. Replicates that
/// throw are recorded and excluded; more than 20% failures throws
/// "reshuffle unstable".
ReshuffleReport reshuffle_estimates(const TargetModel& model, const DrawsMatrix& draws,
                                    const ReshuffleConfig& config, const RngStream& root);

struct MultiRunResult {
  double sd_log = 0.0;
  std::vector<LogValue> estimates;
  std::vector<double> mcse_log;
  std::vector<bool> converged;
};

/// Brute-force reference: fresh draws per repeat (stream root.derive(i)),
/// full pipeline, standard deviation of the log estimates.
MultiRunResult multi_run_sd(const TargetModel& model, const SamplerSpec& sampler,
                            std::size_t repeats, const BridgeConfig& config, const RngStream& root,
                            std::size_t workers = 1);

}  // namespace bridgediag
