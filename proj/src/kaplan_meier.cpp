// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/kaplan_meier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "survkit/common.hpp"

namespace survkit {

StepSurvival km_estimate(std::span<const double> times,
                         std::span<const std::uint8_t> events) {
  if (times.size() != events.size())
    throw input_error("km_estimate: times and events lengths differ");
  if (times.empty()) throw input_error("km_estimate: empty input");
  for (double t : times)
    if (!std::isfinite(t) || t < 0)
      throw input_error("km_estimate: times must be finite and nonnegative");

  const std::size_t n = times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  StepSurvival curve;
  double surv = 1.0;
  std::size_t at_risk = n;
  std::size_t i = 0;
  while (i < n) {
    const double u = times[order[i]];
    std::size_t group = 0;
    std::size_t deaths = 0;
    while (i + group < n && times[order[i + group]] == u) {
      if (events[order[i + group]]) ++deaths;
      ++group;
    }
    if (deaths > 0) {
      surv *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      curve.times.push_back(u);
      curve.probs.push_back(surv);
    }
    at_risk -= group;  // events and censorings both leave after time u
    i += group;
  }
  return curve;
}

double km_eval(const StepSurvival& curve, double t) {
  if (t < 0) throw input_error("km_eval: t must be nonnegative");
  auto it = std::upper_bound(curve.times.begin(), curve.times.end(), t);
  if (it == curve.times.begin()) return 1.0;
  return curve.probs[static_cast<std::size_t>(it - curve.times.begin()) - 1];
}

std::string km_to_csv(const StepSurvival& curve) {
  std::ostringstream out;
  out << "time,survival\n";
  for (std::size_t k = 0; k < curve.times.size(); ++k)
    out << format_double(curve.times[k]) << ',' << format_double(curve.probs[k])
        << '\n';
  return out.str();
}

}  // namespace survkit
