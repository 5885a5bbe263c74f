#include "bridgediag/ess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "bridgediag/error.hpp"

namespace bridgediag {
namespace {

// Above this length the FFT path is cheaper than the O(T^2) sum.
constexpr std::size_t kFftThreshold = 256;

void fft_in_place(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

std::vector<double> centered(std::span<const double> series) {
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] - mean;
  return out;
}

std::vector<double> autocov_direct(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> gamma(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double sum = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) sum += x[t] * x[t + lag];
    gamma[lag] = sum / static_cast<double>(n);
  }
  return gamma;
}

std::vector<double> autocov_fft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t padded = 1;
  while (padded < 2 * n) padded <<= 1;
  std::vector<std::complex<double>> buf(padded);
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
  fft_in_place(buf, false);
  for (auto& c : buf) c = std::norm(c);
  fft_in_place(buf, true);
  std::vector<double> gamma(n);
  for (std::size_t lag = 0; lag < n; ++lag) gamma[lag] = buf[lag].real() / static_cast<double>(n);
  return gamma;
}

}  // namespace

ScalarChains::ScalarChains(std::size_t chains, std::size_t iters, std::vector<double> values)
    : chains_(chains), iters_(iters), values_(std::move(values)) {
  if (chains_ < 1) throw Error("need at least one chain");
  if (iters_ < 4) throw Error("too few iterations");
  if (values_.size() != chains_ * iters_) throw Error("chain values do not match shape");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error("non-finite value in chains");
}

Autocovariance autocovariance(std::span<const double> series, AutocovMethod method) {
  if (series.size() < 4) throw Error("too few iterations");
  const auto x = centered(series);
  const bool constant = std::all_of(series.begin(), series.end(),
                                    [&](double v) { return v == series.front(); });
  if (constant) return {std::vector<double>(series.size(), 0.0), true};
  if (method == AutocovMethod::kAuto)
    method = series.size() > kFftThreshold ? AutocovMethod::kFft : AutocovMethod::kDirect;
  return {method == AutocovMethod::kFft ? autocov_fft(x) : autocov_direct(x), false};
}

double ess_mean(const ScalarChains& x, AutocovMethod method) {
  const std::size_t chains = x.chains();
  const std::size_t n = x.iters();
  const double nd = static_cast<double>(n);

  std::vector<std::vector<double>> acov(chains);
  std::vector<double> chain_mean(chains, 0.0);
  bool all_constant = true;
  for (std::size_t c = 0; c < chains; ++c) {
    auto ac = autocovariance(x.chain(c), method);
    all_constant = all_constant && ac.constant;
    acov[c] = std::move(ac.gamma);
    for (double v : x.chain(c)) chain_mean[c] += v;
    chain_mean[c] /= nd;
  }
  if (all_constant) {
    const bool equal_means = std::all_of(chain_mean.begin(), chain_mean.end(),
                                         [&](double m) { return m == chain_mean.front(); });
    if (equal_means) throw Error("zero variance");
  }

  auto mean_acov = [&](std::size_t lag) {
    double s = 0.0;
    for (const auto& a : acov) s += a[lag];
    return s / static_cast<double>(chains);
  };

  const double mean_var = mean_acov(0) * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (chains > 1) {
    double grand = 0.0;
    for (double m : chain_mean) grand += m;
    grand /= static_cast<double>(chains);
    double between = 0.0;
    for (double m : chain_mean) between += (m - grand) * (m - grand);
    var_plus += between / static_cast<double>(chains - 1);
  }

  // Paired autocorrelation sums until the first non-positive pair.
  std::vector<double> rho(n, 0.0);
  std::size_t t = 0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov(1)) / var_plus;
  rho[0] = rho_even;
  rho[1] = rho_odd;
  while (t + 5 < n && !std::isnan(rho_even + rho_odd) && rho_even + rho_odd > 0.0) {
    t += 2;
    rho_even = 1.0 - (mean_var - mean_acov(t)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov(t + 1)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[t] = rho_even;
      rho[t + 1] = rho_odd;
    }
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho[max_t] = rho_even;

  // Initial monotone sequence.
  t = 0;
  while (t + 4 <= max_t) {
    t += 2;
    if (rho[t] + rho[t + 1] > rho[t - 2] + rho[t - 1]) {
      rho[t] = 0.5 * (rho[t - 2] + rho[t - 1]);
      rho[t + 1] = rho[t];
    }
  }

  const double total = static_cast<double>(chains) * nd;
  double tau = -1.0 + rho[max_t];
  for (std::size_t i = 0; i < max_t; ++i) tau += 2.0 * rho[i];
  tau = std::max(tau, 1.0 / std::log10(total));
  const double ess = total / tau;
  return std::clamp(ess, 1.0, total * std::log10(total));
}

}  // namespace bridgediag
