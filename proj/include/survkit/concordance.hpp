// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace survkit {

/// Comparability conventions. Tied event times are incomparable (Somers' d)
/// and two censored subjects are never comparable; the one case left open by
/// the usual definitions, an event and a censoring recorded at the same time,
/// is comparable by default (the event is assumed to precede the censoring).
struct PairRules {
  bool equal_time_event_censored_comparable = true;
};

enum class PairClass { EventEvent, EventCensored, NotComparable };

/// Classifies one subject pair from (time, event) alone.
PairClass classify_pair(double time_i, bool event_i, double time_j,
                        bool event_j, const PairRules& rules = {});

/// Ordered/discordant/tied tallies split by pair class. All half-credit
/// arithmetic downstream stays in integers (2*N+ + N=) until the final
/// division.
struct PairCounts {
  std::uint64_t n_plus_ee = 0;
  std::uint64_t n_minus_ee = 0;
  std::uint64_t n_tie_ee = 0;
  std::uint64_t n_plus_ec = 0;
  std::uint64_t n_minus_ec = 0;
  std::uint64_t n_tie_ec = 0;
  std::uint64_t n_ee = 0;  // total comparable event-event pairs
  std::uint64_t n_ec = 0;  // total comparable event-censored pairs

  bool operator==(const PairCounts&) const = default;
};

/// Brute-force double loop over all unordered pairs. The reference
/// implementation: O(n^2), used as the oracle for the fast path.
PairCounts count_pairs_exact(std::span<const double> times,
                             std::span<const std::uint8_t> events,
                             std::span<const double> predictions,
                             const PairRules& rules = {});

/// Sorted sweep with a Fenwick tree over prediction ranks, O(n log n).
/// Bit-identical to count_pairs_exact on every input.
PairCounts count_pairs_fast(std::span<const double> times,
                            std::span<const std::uint8_t> events,
                            std::span<const double> predictions,
                            const PairRules& rules = {});

/// The concordance index split into its event-event and event-censored
/// parts. `ci` is the weighted harmonic mean of `ci_ee` and `ci_ec` with
/// weight `alpha`; `alpha_star` is the value a balanced predictor attains
/// and depends only on the data.
struct CIndexDecomposition {
  double ci = 0.0;
  std::optional<double> ci_ee;  // absent when no event-event pairs
  std::optional<double> ci_ec;  // absent when no event-censored pairs
  double alpha = 0.0;
  double alpha_star = 0.0;
  double alpha_deviation = 0.0;  // alpha - alpha_star
};

CIndexDecomposition decompose(const PairCounts& counts);

/// |1/ci - alpha/ci_ee - (1-alpha)/ci_ec|. Throws numeric_error on
/// degenerate inputs (a class absent or a zero sub-index) instead of
/// reporting a silent zero.
double verify_identity(const CIndexDecomposition& d);

/// All comparable pairs as (later, earlier) index pairs, oriented by
/// reference time: the first member has the later time (for equal-time
/// event-censored pairs, the censored subject). Feeds the ranking loss.
std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs(
    std::span<const double> times, std::span<const std::uint8_t> events,
    const PairRules& rules = {});

}  // namespace survkit
