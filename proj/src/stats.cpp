// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "survkit/common.hpp"

namespace survkit {

namespace {

void check_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw input_error("rank-sum test requires two non-empty samples");
  }
  for (double v : a) {
    if (!std::isfinite(v)) throw input_error("rank-sum sample contains a non-finite value");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw input_error("rank-sum sample contains a non-finite value");
  }
}

bool pooled_has_ties(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

// Coefficients of the Gaussian binomial [m+n choose m]_q: entry u is the
// number of tie-free arrangements whose U statistic equals u. Built by
// repeated exact polynomial multiply by (1 - q^{n+i}) and divide by (1 - q^i).
std::vector<double> u_null_counts(std::size_t m, std::size_t n) {
  if (m > n) std::swap(m, n);  // the distribution is symmetric in the roles
  std::vector<double> c{1.0};
  for (std::size_t i = 1; i <= m; ++i) {
    std::vector<double> prod(c.size() + n + i, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      prod[k] += c[k];
      prod[k + n + i] -= c[k];
    }
    std::vector<double> quot(c.size() + n, 0.0);
    for (std::size_t k = 0; k < quot.size(); ++k) {
      quot[k] = prod[k] + (k >= i ? quot[k - i] : 0.0);
    }
    c = std::move(quot);
  }
  return c;
}

struct RankedPool {
  std::vector<double> ranks_a;   // midranks of the first sample
  double tie_term = 0.0;         // sum over tie groups of (t^3 - t)
};

RankedPool midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n_total = a.size() + b.size();
  std::vector<std::pair<double, bool>> pooled;  // value, belongs-to-a
  pooled.reserve(n_total);
  for (double v : a) pooled.emplace_back(v, true);
  for (double v : b) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  RankedPool out;
  out.ranks_a.reserve(a.size());
  std::size_t i = 0;
  while (i < n_total) {
    std::size_t j = i;
    while (j < n_total && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    out.tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) out.ranks_a.push_back(rank);
    }
    i = j;
  }
  return out;
}

}  // namespace

RankSumResult wilcoxon_exact(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  if (pooled_has_ties(a, b)) {
    throw input_error("exact rank-sum test requires tie-free data");
  }
  std::uint64_t u = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) ++u;
    }
  }
  const auto counts = u_null_counts(a.size(), b.size());
  double total = 0.0;
  for (double c : counts) total += c;
  double below = 0.0;  // P(U <= u)
  for (std::size_t k = 0; k <= u; ++k) below += counts[k];
  double above = 0.0;  // P(U >= u)
  for (std::size_t k = u; k < counts.size(); ++k) above += counts[k];

  RankSumResult r;
  r.u_statistic = static_cast<double>(u);
  r.p_value = std::min(1.0, 2.0 * std::min(below, above) / total);
  r.exact = true;
  return r;
}

RankSumResult wilcoxon_normal(std::span<const double> a, std::span<const double> b) {
  check_samples(a, b);
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  const double n_total = m + n;

  const auto pool = midranks(a, b);
  double rank_sum = 0.0;
  for (double r : pool.ranks_a) rank_sum += r;
  const double u = rank_sum - m * (m + 1.0) / 2.0;

  const double mean = m * n / 2.0;
  const double var =
      m * n / 12.0 * (n_total + 1.0 - pool.tie_term / (n_total * (n_total - 1.0)));

  RankSumResult r;
  r.u_statistic = u;
  r.exact = false;
  if (var <= 0.0) {
    r.p_value = 1.0;  // every pooled value identical
    return r;
  }
  const double z = std::max(0.0, (std::abs(u - mean) - 0.5) / std::sqrt(var));
  r.p_value = std::erfc(z / std::sqrt(2.0));
  return r;
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                std::size_t exact_limit) {
  check_samples(a, b);
  if (std::min(a.size(), b.size()) <= exact_limit && !pooled_has_ties(a, b)) {
    return wilcoxon_exact(a, b);
  }
  return wilcoxon_normal(a, b);
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw input_error("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw input_error("quantile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw input_error("quantile input contains a non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantileSummary quantile_summary(std::span<const double> values) {
  QuantileSummary s;
  s.median = quantile(values, 0.5);
  s.q025 = quantile(values, 0.025);
  s.q975 = quantile(values, 0.975);
  return s;
}

}  // namespace survkit
