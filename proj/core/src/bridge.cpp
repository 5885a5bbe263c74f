#include "bridgediag/bridge.hpp"

#include <algorithm>
#include <cmath>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

struct Weights {
  double log_s1;
  double log_s2;
};

Weights mixture_weights(std::size_t n1, std::size_t n2) {
  const double total = static_cast<double>(n1 + n2);
  return {std::log(static_cast<double>(n1) / total), std::log(static_cast<double>(n2) / total)};
}

// log( l2 / (s1 l2 + s2 r) ) with l2 = exp(b); b = -inf gives the limit -inf.
double log_num_term(double b, double log_r, const Weights& w) {
  if (b == kNegInf) return kNegInf;
  return b - log_add_exp(w.log_s1 + b, w.log_s2 + log_r);
}

// log( 1 / (s1 l1 + s2 r) ); a = -inf gives the limit -log(s2 r).
double log_den_term(double a, double log_r, const Weights& w) {
  return -log_add_exp(w.log_s1 + a, w.log_s2 + log_r);
}

}  // namespace

LogRatios compute_log_ratios(const TargetModel& model, const Proposal& proposal,
                             const PointMatrix& posterior_points, const PointMatrix& proposal_points,
                             const std::vector<LogValue>& proposal_log_g) {
  if (static_cast<std::size_t>(proposal.dim()) != model.dim() ||
      static_cast<std::size_t>(posterior_points.cols()) != model.dim() ||
      static_cast<std::size_t>(proposal_points.cols()) != model.dim())
    throw Error("dimension mismatch");
  if (proposal_log_g.size() != static_cast<std::size_t>(proposal_points.rows()))
    throw Error("proposal log densities do not match proposal draws");

  LogRatios out;
  const auto post_target = evaluate_batch(model, posterior_points);
  const auto post_g = log_g_at(proposal, posterior_points);
  out.log_l1.resize(post_target.size());
  for (std::size_t j = 0; j < post_target.size(); ++j) out.log_l1[j] = post_target[j] - post_g[j];

  const auto prop_target = evaluate_batch(model, proposal_points);
  out.log_l2.resize(prop_target.size());
  for (std::size_t i = 0; i < prop_target.size(); ++i)
    out.log_l2[i] = prop_target[i] - proposal_log_g[i];
  return out;
}

BridgeResult bridge_iterate(const LogRatios& ratios, const BridgeConfig& config,
                            ChainLayout layout) {
  const auto& l1 = ratios.log_l1;
  const auto& l2 = ratios.log_l2;
  if (l1.empty() || l2.empty()) throw Error("empty ratio vectors");
  for (double v : l1)
    if (std::isnan(v) || v == -kNegInf) throw Error("invalid log ratio");
  for (double v : l2)
    if (std::isnan(v) || v == -kNegInf) throw Error("invalid log ratio");
  if (std::none_of(l2.begin(), l2.end(), [](double v) { return std::isfinite(v); }))
    throw Error("proposal disjoint from target");
  if (std::none_of(l1.begin(), l1.end(), [](double v) { return std::isfinite(v); }))
    throw Error("posterior draws outside target support");
  if (!(config.tol > 0.0) || config.max_iter < 1) throw Error("invalid bridge configuration");

  const Weights w = mixture_weights(l1.size(), l2.size());
  const double shift = median_finite(l1);
  std::vector<double> a(l1.size());
  std::vector<double> b(l2.size());
  for (std::size_t j = 0; j < l1.size(); ++j) a[j] = l1[j] - shift;
  for (std::size_t i = 0; i < l2.size(); ++i) b[i] = l2[i] - shift;

  std::vector<double> num(b.size());
  std::vector<double> den(a.size());
  auto update = [&](double log_r) {
    for (std::size_t i = 0; i < b.size(); ++i) num[i] = log_num_term(b[i], log_r, w);
    for (std::size_t j = 0; j < a.size(); ++j) den[j] = log_den_term(a[j], log_r, w);
    return log_mean_exp(num) - log_mean_exp(den);
  };

  BridgeResult result;
  double log_r = -shift;  // p = 1 on the unshifted scale
  for (int it = 1; it <= config.max_iter; ++it) {
    const double next = update(log_r);
    if (!std::isfinite(next)) throw Error("bridge iteration produced a non-finite estimate");
    const double rel_change = std::abs(std::expm1(log_r - next));
    log_r = next;
    result.iterations = it;
    if (rel_change < config.tol) {
      result.converged = true;
      break;
    }
  }

  result.log_ml = log_r + shift;
  result.log_f2.resize(b.size());
  result.log_f1.resize(a.size());
  for (std::size_t i = 0; i < b.size(); ++i) result.log_f2[i] = log_num_term(b[i], log_r, w);
  // On the unshifted scale the denominator terms scale by exp(-shift).
  for (std::size_t j = 0; j < a.size(); ++j) result.log_f1[j] = log_den_term(a[j], log_r, w) - shift;
  if (layout.iters == 0) layout = {1, a.size()};
  if (layout.chains * layout.iters != a.size()) throw Error("chain layout does not match terms");
  result.chain_layout = layout;
  return result;
}

EstimateOutput estimate_log_ml(const TargetModel& model, const DrawsMatrix& draws,
                               const BridgeConfig& config, RngStream& rng) {
  if (draws.dim() != model.dim()) throw Error("dimension mismatch between draws and model");
  HalfSplit split = split_halves(draws);
  Proposal proposal = fit_mvn_proposal(split.fit_half, config.jitter);
  const std::size_t s1 = split.estimation_half.size();
  const std::size_t s2 = config.s2.value_or(s1);
  const ProposalSample sample = sample_proposal(rng, proposal, s2);
  const LogRatios ratios =
      compute_log_ratios(model, proposal, split.estimation_half.pooled(), sample.points, sample.log_g);
  BridgeResult result = bridge_iterate(
      ratios, config, {split.estimation_half.chains(), split.estimation_half.iters()});
  return {std::move(result), std::move(proposal), std::move(split)};
}

}  // namespace bridgediag
