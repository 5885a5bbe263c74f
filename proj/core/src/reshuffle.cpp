#include "bridgediag/reshuffle.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "bridgediag/error.hpp"
#include "bridgediag/mcse.hpp"
#include "bridgediag/parallel.hpp"

namespace bridgediag {

namespace {

// One model per worker: models backed by external processes hand out a
// fresh instance, in-process models are shared.
class WorkerModels {
 public:
  WorkerModels(const TargetModel& model, std::size_t workers) : base_(model) {
    instances_.resize(workers);
    for (auto& inst : instances_) inst = model.worker_instance();
  }
  const TargetModel& get(std::size_t worker) const {
    const auto& inst = instances_.at(worker);
    return inst ? *inst : base_;
  }

 private:
  const TargetModel& base_;
  std::vector<std::unique_ptr<TargetModel>> instances_;
};

std::size_t effective_workers(std::size_t requested, std::size_t jobs) {
  return std::max<std::size_t>(1, std::min(requested, jobs));
}

}  // namespace

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error("standard deviation needs at least two values");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::size_t replicate_tail_count(std::size_t replicates) {
  if (replicates < 25) return 5;
  return std::max<std::size_t>(5, default_tail_count(replicates));
}

ReshuffleReport reshuffle_estimates(const TargetModel& model, const DrawsMatrix& draws,
                                    const ReshuffleConfig& config, const RngStream& root) {
  const std::size_t R = config.replicates;
  if (R < 2) throw Error("reshuffle needs at least two replicates");
  const std::size_t block_len = config.block_len.value_or(default_block_len(draws.iters()));
  const BlockPlan plan = make_block_plan(draws, block_len);

  ReshuffleReport report;
  report.block_len = block_len;
  report.replicate_count = R;
  report.replicates.resize(R);

  const std::size_t workers = effective_workers(config.workers, R);
  WorkerModels models(model, workers);
  parallel_for(R, workers, [&](std::size_t i, std::size_t worker) {
    ReplicateOutcome& out = report.replicates[i];
    out.replicate = i + 1;
    RngStream rng = root.derive(out.replicate);
    try {
      const DrawsMatrix shuffled = block_reshuffle(rng, draws, plan);
      const EstimateOutput est = estimate_log_ml(models.get(worker), shuffled, config.bridge, rng);
      out.log_ml = est.result.log_ml;
      out.converged = est.result.converged;
      out.iterations = est.result.iterations;
    } catch (const Error& e) {
      out.failed = true;
      out.error = e.what();
    }
  });

  for (const auto& out : report.replicates) {
    if (out.failed) {
      ++report.n_failed;
      continue;
    }
    if (!out.converged) ++report.n_nonconverged;
    report.estimates.push_back(out.log_ml);
  }
  if (5 * report.n_failed > R)
    throw Error("reshuffle unstable: " + std::to_string(report.n_failed) + " of " +
                std::to_string(R) + " replicates failed");
  if (report.estimates.size() < 2) throw Error("reshuffle unstable: fewer than two estimates");

  report.sd_log = sample_sd(report.estimates);
  const std::size_t tail = replicate_tail_count(report.estimates.size());
  if (report.estimates.size() >= 6 && tail < report.estimates.size()) {
    report.khat_estimates = khat_of_terms(report.estimates, tail);
    report.khat_low_confidence = report.estimates.size() < 100;
  }
  return report;
}

MultiRunResult multi_run_sd(const TargetModel& model, const SamplerSpec& sampler,
                            std::size_t repeats, const BridgeConfig& config, const RngStream& root,
                            std::size_t workers) {
  if (repeats < 2) throw Error("multi-run needs at least two repeats");
  MultiRunResult res;
  res.estimates.resize(repeats);
  res.mcse_log.resize(repeats);
  std::vector<char> converged(repeats, 0);

  workers = effective_workers(workers, repeats);
  WorkerModels models(model, workers);
  parallel_for(repeats, workers, [&](std::size_t i, std::size_t worker) {
    const TargetModel& m = models.get(worker);
    RngStream rng = root.derive(i + 1);
    const DrawsMatrix draws = run_sampler(m, sampler, rng);
    const EstimateOutput est = estimate_log_ml(m, draws, config, rng);
    res.estimates[i] = est.result.log_ml;
    res.mcse_log[i] = mcse_of_bridge(est.result).mcse_log;
    converged[i] = est.result.converged ? 1 : 0;
  });
  res.converged.assign(converged.begin(), converged.end());
  res.sd_log = sample_sd(res.estimates);
  return res;
}

}  // namespace bridgediag
