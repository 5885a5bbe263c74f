#pragma once

#include <span>
#include <vector>

namespace bridgediag {

/// C chains of equal length T (T >= 4), e.g. bridge denominator terms grouped
/// by the chain their draw came from.
class ScalarChains {
 public:
  ScalarChains(std::size_t chains, std::size_t iters, std::vector<double> values);

  std::size_t chains() const noexcept { return chains_; }
  std::size_t iters() const noexcept { return iters_; }
  std::span<const double> chain(std::size_t c) const {
    return {values_.data() + c * iters_, iters_};
  }

 private:
  std::size_t chains_;
  std::size_t iters_;
  std::vector<double> values_;
};

enum class AutocovMethod { kAuto, kDirect, kFft };

struct Autocovariance {
  std::vector<double> gamma;  // lags 0..T-1, 1/T normalized
  bool constant = false;      // input had zero variance; gamma is all zeros
};

Autocovariance autocovariance(std::span<const double> series,
                              AutocovMethod method = AutocovMethod::kAuto);

/// Multi-chain effective sample size for the mean (no rank normalization),
/// with Geyer's initial monotone positive sequence truncation. The result is
/// clipped to [1, S * log10(S)], S = C * T. Throws "zero variance" if every
/// chain is constant.
double ess_mean(const ScalarChains& x, AutocovMethod method = AutocovMethod::kAuto);

}  // namespace bridgediag
