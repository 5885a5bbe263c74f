#pragma once

#include <limits>
#include <span>

namespace bridgediag {

/// Log of a non-negative quantity. -inf encodes zero; NaN is never valid.
using LogValue = double;

inline constexpr LogValue kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(xs))) with max-shift. Throws Error("empty sequence").
LogValue log_sum_exp(std::span<const LogValue> xs);

/// log(mean(exp(xs))).
LogValue log_mean_exp(std::span<const LogValue> xs);

/// log(exp(a) + exp(b)).
LogValue log_add_exp(LogValue a, LogValue b);

/// Median of the finite entries; throws if there are none.
double median_finite(std::span<const double> xs);

}  // namespace bridgediag
