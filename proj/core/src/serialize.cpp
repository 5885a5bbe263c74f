#include "bridgediag/serialize.hpp"

#include <cmath>

#include "bridgediag/error.hpp"

namespace bridgediag {

using nlohmann::json;

json log_value_to_json(LogValue v) {
  if (v == kNegInf) return "-inf";
  if (!std::isfinite(v)) throw Error("cannot serialize non-finite log value");
  return v;
}

LogValue log_value_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "-inf") return kNegInf;
    throw Error("invalid log value '" + j.get<std::string>() + "'");
  }
  if (!j.is_number()) throw Error("invalid log value");
  return j.get<double>();
}

json proposal_to_json(const Proposal& p) {
  json mean = json::array();
  for (Eigen::Index i = 0; i < p.dim(); ++i) mean.push_back(p.mean(i));
  json lower = json::array();
  for (Eigen::Index i = 0; i < p.dim(); ++i)
    for (Eigen::Index k = 0; k <= i; ++k) lower.push_back(p.chol.lower(i, k));
  return {{"mean", mean}, {"lower", lower}, {"jitter", p.chol.jitter_applied}};
}

Proposal proposal_from_json(const json& j) {
  try {
    const auto mean_v = j.at("mean").get<std::vector<double>>();
    const auto lower_v = j.at("lower").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(mean_v.size());
    if (lower_v.size() != mean_v.size() * (mean_v.size() + 1) / 2)
      throw Error("proposal: lower-triangle size does not match the mean");
    Vector mean = Eigen::Map<const Vector>(mean_v.data(), d);
    CholFactor chol;
    chol.lower = Matrix::Zero(d, d);
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index k = 0; k <= i; ++k) chol.lower(i, k) = lower_v[pos++];
    chol.jitter_applied = j.value("jitter", 0.0);
    return make_proposal(std::move(mean), std::move(chol));
  } catch (const json::exception& e) {
    throw Error(std::string("proposal: ") + e.what());
  }
}

namespace {

json log_vector(const std::vector<LogValue>& xs) {
  json a = json::array();
  for (double v : xs) a.push_back(log_value_to_json(v));
  return a;
}

std::vector<LogValue> log_vector_from(const json& j) {
  std::vector<LogValue> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(log_value_from_json(v));
  return out;
}

}  // namespace

json bridge_result_to_json(const BridgeResult& r) {
  return {{"log_ml", r.log_ml},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"chains", r.chain_layout.chains},
          {"iters", r.chain_layout.iters},
          {"log_f2", log_vector(r.log_f2)},
          {"log_f1", log_vector(r.log_f1)}};
}

BridgeResult bridge_result_from_json(const json& j) {
  try {
    BridgeResult r;
    r.log_ml = j.at("log_ml").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.chain_layout.chains = j.at("chains").get<std::size_t>();
    r.chain_layout.iters = j.at("iters").get<std::size_t>();
    r.log_f2 = log_vector_from(j.at("log_f2"));
    r.log_f1 = log_vector_from(j.at("log_f1"));
    if (r.chain_layout.chains * r.chain_layout.iters != r.log_f1.size())
      throw Error("bridge result: chain layout does not match the denominator terms");
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("bridge result: ") + e.what());
  }
}

json mcse_to_json(const McseReport& m) {
  return {{"rel_var_num", m.rel_var_num},
          {"rel_var_den", m.rel_var_den},
          {"ess_den", m.ess_den},
          {"mcse_log", m.mcse_log},
          {"mcse_rel_linear", m.mcse_rel_linear}};
}

json gpd_fit_to_json(const GpdFit& f) {
  return {{"khat", f.khat},
          {"sigma_hat", f.sigma_hat},
          {"tail_count", f.tail_count},
          {"threshold_u", f.threshold_u},
          {"degenerate", f.degenerate},
          {"label", pareto_label(f.khat)}};
}

json result_json(const BridgeResult& result, const McseReport& mcse, const KhatReport& khat,
                 const ResultContext& ctx) {
  json j;
  j["log_ml"] = result.log_ml;
  j["mcse_log"] = mcse.mcse_log;
  j["mcse_rel_linear"] = mcse.mcse_rel_linear;
  j["khat_numerator"] = khat.numerator.khat;
  j["khat_denominator"] = khat.denominator.khat;
  j["ess_denominator"] = mcse.ess_den;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["S1"] = result.s1_count();
  j["S2"] = result.s2_count();
  j["tail_count_used"] = khat.denominator.tail_count;
  j["tail_count_numerator"] = khat.numerator.tail_count;
  j["jitter_applied"] = ctx.jitter_applied ? json(*ctx.jitter_applied) : json(nullptr);
  j["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
  j["rel_var_num"] = mcse.rel_var_num;
  j["rel_var_den"] = mcse.rel_var_den;
  j["khat_numerator_label"] = pareto_label(khat.numerator.khat);
  j["khat_denominator_label"] = pareto_label(khat.denominator.khat);
  j["tail_count_note"] = tail_count_note(result.s1_count());
  return j;
}

json reshuffle_report_to_json(const ReshuffleReport& r) {
  json j;
  j["R"] = r.replicate_count;
  j["block_len"] = r.block_len;
  j["sd_log"] = r.sd_log;
  j["n_estimates"] = r.estimates.size();
  j["n_nonconverged"] = r.n_nonconverged;
  j["n_failed"] = r.n_failed;
  j["khat_estimates"] = r.khat_estimates ? gpd_fit_to_json(*r.khat_estimates) : json(nullptr);
  j["khat_low_confidence"] = r.khat_low_confidence;
  json failures = json::array();
  for (const auto& o : r.replicates)
    if (o.failed) failures.push_back({{"replicate", o.replicate}, {"error", o.error}});
  j["failures"] = failures;
  return j;
}

}  // namespace bridgediag
