#include "bridgediag/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

constexpr int kMinGridPoints = 30;
constexpr double kPriorShape = 3.0;
// Weakly informative prior: khat is shrunk toward 0.5 with weight 10.
constexpr double kPriorWeight = 10.0;
constexpr double kPriorCentre = 0.5;

double mean_log1p_scaled(double theta, const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += std::log1p(-theta * v);
  return s / static_cast<double>(x.size());
}

}  // namespace

std::size_t default_tail_count(std::size_t sample_size) {
  if (sample_size < 25) throw Error("too few draws for tail fit");
  const double s = static_cast<double>(sample_size);
  return static_cast<std::size_t>(std::floor(std::min(0.2 * s, 3.0 * std::sqrt(s))));
}

GpdFit fit_gpd_excesses(std::span<const double> excesses) {
  if (excesses.size() < 5) throw Error("need at least 5 excesses for a tail fit");
  std::vector<double> x(excesses.begin(), excesses.end());
  for (double v : x)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("excesses must be finite and non-negative");
  std::sort(x.begin(), x.end());

  GpdFit fit;
  fit.tail_count = x.size();
  const std::size_t n = x.size();
  const double xmax = x.back();
  const double xstar = x[static_cast<std::size_t>(std::floor(static_cast<double>(n) / 4.0 + 0.5)) - 1];
  if (xmax <= 0.0 || x.front() == xmax || xstar <= 0.0) {
    fit.khat = -1.0;
    fit.sigma_hat = std::max(xmax, std::numeric_limits<double>::min());
    fit.degenerate = true;
    return fit;
  }

  const std::size_t grid = kMinGridPoints + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  std::vector<double> theta(grid);
  std::vector<double> log_lik(grid);
  const double nd = static_cast<double>(n);
  for (std::size_t j = 0; j < grid; ++j) {
    const double jj = static_cast<double>(j + 1);
    theta[j] = 1.0 / xmax + (1.0 - std::sqrt(static_cast<double>(grid) / (jj - 0.5))) / kPriorShape / xstar;
    const double k = mean_log1p_scaled(theta[j], x);
    log_lik[j] = nd * (std::log(-theta[j] / k) - k - 1.0);
  }
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    double denom = 0.0;
    for (std::size_t i = 0; i < grid; ++i) denom += std::exp(log_lik[i] - log_lik[j]);
    theta_hat += theta[j] / denom;
  }
  double k = mean_log1p_scaled(theta_hat, x);
  fit.sigma_hat = -k / theta_hat;
  k = k * nd / (nd + kPriorWeight) + kPriorWeight * kPriorCentre / (nd + kPriorWeight);
  fit.khat = std::isnan(k) ? std::numeric_limits<double>::infinity() : k;
  return fit;
}

GpdFit khat_of_terms(std::span<const LogValue> log_terms, std::optional<std::size_t> tail_count) {
  std::vector<double> finite;
  finite.reserve(log_terms.size());
  for (double v : log_terms) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw Error("invalid log term");
    if (std::isfinite(v)) finite.push_back(v);
  }
  const std::size_t m = tail_count ? *tail_count : default_tail_count(log_terms.size());
  if (m < 5) throw Error("tail count must be at least 5");
  if (finite.size() < m) throw Error("too few finite terms for tail fit");

  const double max = *std::max_element(finite.begin(), finite.end());
  std::vector<double> z(finite.size());
  for (std::size_t i = 0; i < finite.size(); ++i) z[i] = std::exp(finite[i] - max);
  std::partial_sort(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m), z.end(), std::greater<>());
  const double u = z[m - 1];
  std::vector<double> excess(m);
  for (std::size_t i = 0; i < m; ++i) excess[i] = z[i] - u;

  GpdFit fit = fit_gpd_excesses(excess);
  fit.tail_count = m;
  fit.threshold_u = u;
  return fit;
}

KhatReport khat_report(const BridgeResult& result, std::optional<std::size_t> tail_count) {
  return {khat_of_terms(result.log_f2, tail_count), khat_of_terms(result.log_f1, tail_count)};
}

std::string pareto_label(double khat) {
  if (khat < 0.5) return "good";
  if (khat < 0.7) return "suspect";
  return "bad";
}

}  // namespace bridgediag
