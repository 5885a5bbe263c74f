#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bridgediag/bridge.hpp"
#include "bridgediag/experiments.hpp"
#include "bridgediag/mcse.hpp"
#include "bridgediag/pareto.hpp"
#include "bridgediag/proposal.hpp"
#include "bridgediag/reshuffle.hpp"

namespace bridgediag {

// Log values that may be -inf are written as the string "-inf".
nlohmann::json log_value_to_json(LogValue v);
LogValue log_value_from_json(const nlohmann::json& j);

/// {"mean": [...], "lower": [row-major lower-triangular entries], "jitter": x}
nlohmann::json proposal_to_json(const Proposal& proposal);
Proposal proposal_from_json(const nlohmann::json& j);

nlohmann::json bridge_result_to_json(const BridgeResult& result);
BridgeResult bridge_result_from_json(const nlohmann::json& j);

nlohmann::json mcse_to_json(const McseReport& report);
nlohmann::json gpd_fit_to_json(const GpdFit& fit);

struct ResultContext {
  std::optional<std::uint64_t> seed;
  std::optional<double> jitter_applied;
};

/// The stable result schema: log_ml, mcse_log, mcse_rel_linear,
/// khat_numerator, khat_denominator, ess_denominator, iterations, converged,
/// S1, S2, tail_count_used, jitter_applied, seed, plus labels and notes.
nlohmann::json result_json(const BridgeResult& result, const McseReport& mcse,
                           const KhatReport& khat, const ResultContext& context);

nlohmann::json reshuffle_report_to_json(const ReshuffleReport& report);

}  // namespace bridgediag
