#include "bridgediag/log_math.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bridgediag/error.hpp"

namespace bridgediag {

LogValue log_sum_exp(std::span<const LogValue> xs) {
  if (xs.empty()) throw Error("empty sequence");
  if (std::any_of(xs.begin(), xs.end(), [](double x) { return std::isnan(x); }))
    throw Error("NaN in log-space sequence");
  const double max = *std::max_element(xs.begin(), xs.end());
  if (max == kNegInf) return kNegInf;
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - max);
  return max + std::log(sum);
}

LogValue log_mean_exp(std::span<const LogValue> xs) {
  return log_sum_exp(xs) - std::log(static_cast<double>(xs.size()));
}

LogValue log_add_exp(LogValue a, LogValue b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double median_finite(std::span<const double> xs) {
  std::vector<double> finite;
  finite.reserve(xs.size());
  for (double x : xs)
    if (std::isfinite(x)) finite.push_back(x);
  if (finite.empty()) throw Error("no finite values");
  const std::size_t n = finite.size();
  const auto mid = finite.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(finite.begin(), mid, finite.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(finite.begin(), mid);
  return lower + 0.5 * (upper - lower);
}

}  // namespace bridgediag
