// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace survkit {

/// Right-continuous step function S(t). `probs[k]` is the survival value
/// after `times[k]`; S(t) = 1 for t before the first entry.
struct StepSurvival {
  std::vector<double> times;  // strictly increasing, nonnegative
  std::vector<double> probs;  // nonincreasing, in [0, 1]
};

/// Product-limit estimate from possibly censored observations.
/// Events and censorings recorded at the same time are resolved events-first:
/// a subject censored at t is still at risk for events at t.
StepSurvival km_estimate(std::span<const double> times,
                         std::span<const std::uint8_t> events);

/// Step lookup, right-continuous: at a jump time the value after the jump.
double km_eval(const StepSurvival& curve, double t);

/// Two-column CSV (time, survival) for plotting.
std::string km_to_csv(const StepSurvival& curve);

}  // namespace survkit
