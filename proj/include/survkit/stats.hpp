// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstddef>
#include <span>

namespace survkit {

struct RankSumResult {
  double u_statistic = 0.0;   // Mann-Whitney U for the first sample
  double p_value = 1.0;       // two-sided
  bool exact = false;         // true when the exact null distribution was used
};

/// Exact two-sided test via the Mann-Whitney U count recurrence. Requires
/// tie-free pooled data; throws input_error otherwise or on an empty sample.
RankSumResult wilcoxon_exact(std::span<const double> a, std::span<const double> b);

/// Normal approximation with midranks for ties, the tie-corrected variance
/// and a 0.5 continuity correction. Degenerate variance yields p = 1.
RankSumResult wilcoxon_normal(std::span<const double> a, std::span<const double> b);

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test. Uses the exact null
/// distribution when the smaller sample has at most `exact_limit` elements
/// and the pooled values are tie-free, the normal approximation otherwise.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                std::size_t exact_limit = 8);

struct QuantileSummary {
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

/// Median and central 95% interval with linear interpolation between order
/// statistics. Throws input_error on an empty input.
QuantileSummary quantile_summary(std::span<const double> values);

/// Single interpolated quantile, p in [0, 1].
double quantile(std::span<const double> values, double p);

}  // namespace survkit
