// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/concordance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survkit/common.hpp"
#include "survkit/fenwick.hpp"

namespace survkit {

PairClass classify_pair(double time_i, bool event_i, double time_j,
                        bool event_j, const PairRules& rules) {
  if (event_i && event_j)
    return time_i == time_j ? PairClass::NotComparable : PairClass::EventEvent;
  if (!event_i && !event_j) return PairClass::NotComparable;

  const double event_time = event_i ? time_i : time_j;
  const double censor_time = event_i ? time_j : time_i;
  if (event_time < censor_time) return PairClass::EventCensored;
  if (event_time == censor_time)
    return rules.equal_time_event_censored_comparable
               ? PairClass::EventCensored
               : PairClass::NotComparable;
  return PairClass::NotComparable;
}

namespace {

void validate_inputs(std::span<const double> times, std::span<const std::uint8_t> events,
                     std::span<const double> predictions) {
  if (times.size() != events.size() || times.size() != predictions.size())
    throw input_error("pair counting: times, events, predictions lengths differ");
  for (double t : times)
    if (!std::isfinite(t)) throw input_error("pair counting: non-finite time");
  for (double p : predictions)
    if (!std::isfinite(p)) throw input_error("pair counting: non-finite prediction");
}

void check_nonempty(const PairCounts& counts) {
  if (counts.n_ee + counts.n_ec == 0)
    throw input_error("pair counting: no comparable pairs");
}

// Tallies one comparable pair given the predictions of the reference-earlier
// and reference-later subjects.
void tally(std::uint64_t& plus, std::uint64_t& minus, std::uint64_t& tie,
           double pred_early, double pred_late) {
  if (pred_early < pred_late)
    ++plus;
  else if (pred_early > pred_late)
    ++minus;
  else
    ++tie;
}

}  // namespace

PairCounts count_pairs_exact(std::span<const double> times,
                             std::span<const std::uint8_t> events,
                             std::span<const double> predictions,
                             const PairRules& rules) {
  validate_inputs(times, events, predictions);
  PairCounts c;
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairClass cls = classify_pair(times[i], events[i], times[j], events[j], rules);
      if (cls == PairClass::NotComparable) continue;
      std::size_t early, late;
      if (cls == PairClass::EventEvent) {
        early = times[i] < times[j] ? i : j;
      } else {
        // Comparable ec pair: the event member has the earlier (or equal)
        // reference time.
        early = events[i] ? i : j;
      }
      late = early == i ? j : i;
      if (cls == PairClass::EventEvent) {
        ++c.n_ee;
        tally(c.n_plus_ee, c.n_minus_ee, c.n_tie_ee, predictions[early], predictions[late]);
      } else {
        ++c.n_ec;
        tally(c.n_plus_ec, c.n_minus_ec, c.n_tie_ec, predictions[early], predictions[late]);
      }
    }
  }
  check_nonempty(c);
  return c;
}

PairCounts count_pairs_fast(std::span<const double> times,
                            std::span<const std::uint8_t> events,
                            std::span<const double> predictions,
                            const PairRules& rules) {
  validate_inputs(times, events, predictions);
  const std::size_t n = times.size();

  // Dense prediction ranks; equal predictions (exact float equality) share a rank.
  std::vector<double> sorted_preds(predictions.begin(), predictions.end());
  std::sort(sorted_preds.begin(), sorted_preds.end());
  sorted_preds.erase(std::unique(sorted_preds.begin(), sorted_preds.end()),
                     sorted_preds.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i)
    rank[i] = static_cast<std::size_t>(
        std::lower_bound(sorted_preds.begin(), sorted_preds.end(), predictions[i]) -
        sorted_preds.begin());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  FenwickCounter prior_events(sorted_preds.size());
  PairCounts c;
  std::vector<double> group_event_preds;

  std::size_t i = 0;
  while (i < n) {
    const double u = times[order[i]];
    std::size_t group_end = i;
    while (group_end < n && times[order[group_end]] == u) ++group_end;

    // Pairs against events with strictly earlier reference time.
    for (std::size_t k = i; k < group_end; ++k) {
      const std::size_t m = order[k];
      const std::uint64_t below = prior_events.count_below(rank[m]);
      const std::uint64_t at = prior_events.count_at(rank[m]);
      const std::uint64_t above = prior_events.total() - below - at;
      if (events[m]) {
        c.n_ee += prior_events.total();
        c.n_plus_ee += below;   // earlier event predicted earlier
        c.n_tie_ee += at;
        c.n_minus_ee += above;
      } else {
        c.n_ec += prior_events.total();
        c.n_plus_ec += below;
        c.n_tie_ec += at;
        c.n_minus_ec += above;
      }
    }

    // Equal-time event-vs-censored pairs inside the group.
    if (rules.equal_time_event_censored_comparable) {
      group_event_preds.clear();
      for (std::size_t k = i; k < group_end; ++k)
        if (events[order[k]]) group_event_preds.push_back(predictions[order[k]]);
      if (!group_event_preds.empty()) {
        std::sort(group_event_preds.begin(), group_event_preds.end());
        for (std::size_t k = i; k < group_end; ++k) {
          const std::size_t m = order[k];
          if (events[m]) continue;
          const auto lo = std::lower_bound(group_event_preds.begin(),
                                           group_event_preds.end(), predictions[m]);
          const auto hi = std::upper_bound(lo, group_event_preds.end(), predictions[m]);
          const auto below = static_cast<std::uint64_t>(lo - group_event_preds.begin());
          const auto at = static_cast<std::uint64_t>(hi - lo);
          c.n_ec += group_event_preds.size();
          c.n_plus_ec += below;
          c.n_tie_ec += at;
          c.n_minus_ec += group_event_preds.size() - below - at;
        }
      }
    }

    for (std::size_t k = i; k < group_end; ++k)
      if (events[order[k]]) prior_events.add(rank[order[k]]);
    i = group_end;
  }
  check_nonempty(c);
  return c;
}

CIndexDecomposition decompose(const PairCounts& c) {
  if (c.n_ee + c.n_ec == 0) throw input_error("decompose: zero comparable pairs");
  if (c.n_plus_ee + c.n_minus_ee + c.n_tie_ee != c.n_ee ||
      c.n_plus_ec + c.n_minus_ec + c.n_tie_ec != c.n_ec)
    throw input_error("decompose: inconsistent pair counts");

  // Doubled numerators keep the half-credit tie accounting in integers.
  const std::uint64_t num2_ee = 2 * c.n_plus_ee + c.n_tie_ee;
  const std::uint64_t num2_ec = 2 * c.n_plus_ec + c.n_tie_ec;

  CIndexDecomposition d;
  d.ci = static_cast<double>(num2_ee + num2_ec) /
         static_cast<double>(2 * (c.n_ee + c.n_ec));
  if (c.n_ee > 0)
    d.ci_ee = static_cast<double>(num2_ee) / static_cast<double>(2 * c.n_ee);
  if (c.n_ec > 0)
    d.ci_ec = static_cast<double>(num2_ec) / static_cast<double>(2 * c.n_ec);

  d.alpha_star = static_cast<double>(c.n_ee) / static_cast<double>(c.n_ee + c.n_ec);

  if (c.n_ec == 0) {
    d.alpha = 1.0;
  } else if (c.n_ee == 0) {
    d.alpha = 0.0;
  } else if (num2_ee + num2_ec == 0) {
    // No correctly ordered pair to condition on; treat the predictor as
    // balanced.
    d.alpha = d.alpha_star;
  } else {
    d.alpha = static_cast<double>(num2_ee) / static_cast<double>(num2_ee + num2_ec);
  }
  d.alpha_deviation = d.alpha - d.alpha_star;
  return d;
}

double verify_identity(const CIndexDecomposition& d) {
  if (!d.ci_ee.has_value() || !d.ci_ec.has_value())
    throw numeric_error("verify_identity: a pair class is empty");
  if (*d.ci_ee <= 0.0 || *d.ci_ec <= 0.0 || d.ci <= 0.0)
    throw numeric_error("verify_identity: zero sub-index");
  return std::abs(1.0 / d.ci - d.alpha / *d.ci_ee - (1.0 - d.alpha) / *d.ci_ec);
}

std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs(
    std::span<const double> times, std::span<const std::uint8_t> events,
    const PairRules& rules) {
  if (times.size() != events.size())
    throw input_error("comparable_pairs: times and events lengths differ");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairClass cls = classify_pair(times[i], events[i], times[j], events[j], rules);
      if (cls == PairClass::NotComparable) continue;
      std::size_t early;
      if (cls == PairClass::EventEvent) {
        early = times[i] < times[j] ? i : j;
      } else {
        early = events[i] ? i : j;
      }
      const std::size_t late = early == i ? j : i;
      pairs.emplace_back(late, early);
    }
  }
  return pairs;
}

}  // namespace survkit
