#include "bridgediag/mcse.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bridgediag/error.hpp"
#include "bridgediag/ess.hpp"

namespace bridgediag {
namespace {

std::size_t count_finite(std::span<const LogValue> xs) {
  return static_cast<std::size_t>(
      std::count_if(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); }));
}

bool all_equal(std::span<const LogValue> xs) {
  return std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs.front(); });
}

}  // namespace

double relative_term_variance(std::span<const LogValue> log_terms, double n_eff) {
  if (count_finite(log_terms) < 2) throw Error("need at least two finite terms");
  if (!(n_eff >= 1.0)) throw Error("effective sample size must be at least 1");
  if (all_equal(log_terms)) return 0.0;

  const double max = *std::max_element(log_terms.begin(), log_terms.end());
  const auto s = static_cast<double>(log_terms.size());
  double mean = 0.0;
  for (double v : log_terms) mean += std::exp(v - max);
  mean /= s;
  double ss = 0.0;
  for (double v : log_terms) {
    const double dev = std::exp(v - max) - mean;
    ss += dev * dev;
  }
  const double sample_var = ss / (s - 1.0);
  return sample_var / (mean * mean) / n_eff;
}

McseReport mcse_of_bridge(const BridgeResult& result) {
  McseReport report;
  report.rel_var_num =
      relative_term_variance(result.log_f2, static_cast<double>(result.log_f2.size()));

  const auto& f1 = result.log_f1;
  if (count_finite(f1) < 2) throw Error("need at least two finite terms");
  if (all_equal(f1)) {
    report.ess_den = static_cast<double>(f1.size());
    report.rel_var_den = 0.0;
  } else {
    const double max = *std::max_element(f1.begin(), f1.end());
    std::vector<double> linear(f1.size());
    for (std::size_t j = 0; j < f1.size(); ++j) linear[j] = std::exp(f1[j] - max);
    const ChainLayout layout = result.chain_layout;
    report.ess_den = ess_mean(ScalarChains(layout.chains, layout.iters, std::move(linear)));
    report.rel_var_den = relative_term_variance(f1, report.ess_den);
  }

  const double total = report.rel_var_num + report.rel_var_den;
  report.mcse_rel_linear = std::sqrt(total);
  report.mcse_log = std::sqrt(std::log1p(total));
  return report;
}

}  // namespace bridgediag
