// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <utility>

#include "survkit/common.hpp"

namespace survkit {

namespace {

constexpr std::uint64_t kSizeSalt = 0x73697a65;
constexpr std::uint64_t kCensorSalt = 0x63656e73;
constexpr std::uint64_t kDropSalt = 0x64726f70;

void check_fraction(double target, const char* op) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw input_error(std::string(op) + ": target must be in (0, 1]");
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_by_status(
    const SurvivalDataset& data) {
  std::vector<std::size_t> events;
  std::vector<std::size_t> censored;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data.records()[i].event ? events : censored).push_back(i);
  }
  return {std::move(events), std::move(censored)};
}

/// First `keep` entries of a seeded permutation of `pool`.
std::vector<std::size_t> sample_without_replacement(const std::vector<std::size_t>& pool,
                                                    std::size_t keep,
                                                    rng::Engine& eng) {
  const auto perm = rng::shuffled_indices(pool.size(), eng);
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) out.push_back(pool[perm[k]]);
  return out;
}

std::uint64_t spec_salt(const ExperimentSpec& spec) {
  return rng::mix(rng::mix(static_cast<std::uint64_t>(spec.kind),
                           std::bit_cast<std::uint64_t>(spec.target)),
                  spec.seed);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SizeOnly: return "size_only";
    case ExperimentKind::CensoringOnly: return "censoring_only";
    case ExperimentKind::SizeAndCensoring: return "size_and_censoring";
  }
  throw input_error("unknown experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "size_only") return ExperimentKind::SizeOnly;
  if (name == "censoring_only") return ExperimentKind::CensoringOnly;
  if (name == "size_and_censoring") return ExperimentKind::SizeAndCensoring;
  throw input_error("unknown experiment kind '" + name +
                    "' (expected size_only, censoring_only or size_and_censoring)");
}

std::vector<std::size_t> size_only_indices(const SurvivalDataset& data,
                                           std::size_t target_size,
                                           std::uint64_t seed) {
  const std::size_t n = data.size();
  if (target_size == 0) throw input_error("size_only: target size must be >= 1");
  if (target_size > n) throw input_error("size_only: target size exceeds the dataset");

  auto [events, censored] = split_by_status(data);
  // integer product first so the stratum arithmetic is exact
  std::size_t e_keep = round_half_up(
      static_cast<double>(target_size * events.size()) / static_cast<double>(n));
  e_keep = std::min({e_keep, events.size(), target_size});
  if (target_size > censored.size()) {
    e_keep = std::max(e_keep, target_size - censored.size());
  }
  const std::size_t c_keep = target_size - e_keep;

  auto eng = rng::make_engine(rng::mix(seed, kSizeSalt));
  std::vector<std::size_t> kept = sample_without_replacement(events, e_keep, eng);
  const auto kept_censored = sample_without_replacement(censored, c_keep, eng);
  kept.insert(kept.end(), kept_censored.begin(), kept_censored.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

SurvivalDataset size_only(const SurvivalDataset& data, std::size_t target_size,
                          std::uint64_t seed) {
  return data.subset(size_only_indices(data, target_size, seed));
}

SurvivalDataset censoring_only(const SurvivalDataset& data,
                               double target_event_frac, std::uint64_t seed) {
  check_fraction(target_event_frac, "censoring_only");
  if (data.empty()) throw input_error("censoring_only: empty dataset");

  const std::size_t events_keep =
      round_half_up(target_event_frac * static_cast<double>(data.size()));
  const std::size_t e_avail = data.event_count();
  if (events_keep > e_avail) {
    throw input_error("censoring_only: target event fraction exceeds the current fraction");
  }
  const std::size_t surplus = e_avail - events_keep;

  auto [events, censored] = split_by_status(data);
  auto eng = rng::make_engine(rng::mix(seed, kCensorSalt));
  // first `surplus` of one fixed permutation: lower targets flip supersets
  const auto flips = sample_without_replacement(events, surplus, eng);

  std::vector<SurvivalRecord> records = data.records();
  for (std::size_t i : flips) records[i].event = false;
  return SurvivalDataset(data.schema(), std::move(records));
}

std::vector<std::size_t> size_and_censoring_indices(const SurvivalDataset& data,
                                                    double target_event_frac,
                                                    std::uint64_t seed,
                                                    double identity_tol) {
  check_fraction(target_event_frac, "size_and_censoring");
  if (data.empty()) throw input_error("size_and_censoring: empty dataset");
  if (!(identity_tol >= 0.0)) {
    throw input_error("size_and_censoring: identity tolerance must be >= 0");
  }

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const double current = data.event_fraction();
  if (std::abs(target_event_frac - current) <= identity_tol) return all;
  if (target_event_frac > current) {
    throw input_error(
        "size_and_censoring: target event fraction exceeds the current fraction");
  }

  auto [events, censored] = split_by_status(data);
  if (censored.empty()) {
    throw input_error(
        "size_and_censoring: no censored rows, only the current fraction is reachable");
  }
  // e / (e + c) = target with c fixed
  std::size_t e_keep = round_half_up(target_event_frac *
                                     static_cast<double>(censored.size()) /
                                     (1.0 - target_event_frac));
  e_keep = std::min(e_keep, events.size());

  auto eng = rng::make_engine(rng::mix(seed, kDropSalt));
  std::vector<std::size_t> kept = sample_without_replacement(events, e_keep, eng);
  kept.insert(kept.end(), censored.begin(), censored.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

SurvivalDataset size_and_censoring(const SurvivalDataset& data,
                                   double target_event_frac, std::uint64_t seed,
                                   double identity_tol) {
  return data.subset(
      size_and_censoring_indices(data, target_event_frac, seed, identity_tol));
}

ExperimentCell apply_experiment(const SurvivalDataset& data, const ExperimentSpec& spec) {
  check_fraction(spec.target, "experiment");
  switch (spec.kind) {
    case ExperimentKind::SizeOnly: {
      const std::size_t target_size =
          round_half_up(spec.target * static_cast<double>(data.size()));
      auto idx = size_only_indices(data, target_size, spec.seed);
      auto subset = data.subset(idx);
      return {std::move(subset), std::move(idx)};
    }
    case ExperimentKind::CensoringOnly: {
      auto flipped = censoring_only(data, spec.target, spec.seed);
      std::vector<std::size_t> idx(data.size());
      std::iota(idx.begin(), idx.end(), 0);
      return {std::move(flipped), std::move(idx)};
    }
    case ExperimentKind::SizeAndCensoring: {
      auto idx = size_and_censoring_indices(data, spec.target, spec.seed);
      auto subset = data.subset(idx);
      return {std::move(subset), std::move(idx)};
    }
  }
  throw input_error("unknown experiment kind");
}

GridPredictor predictor_from_values(std::string name,
                                    std::vector<double> base_predictions) {
  GridPredictor p;
  p.name = std::move(name);
  p.predict = [values = std::move(base_predictions)](
                  const SurvivalDataset&, std::span<const std::size_t> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= values.size()) {
        throw input_error("prediction vector is shorter than the base dataset");
      }
      out.push_back(values[r]);
    }
    return out;
  };
  return p;
}

GridPredictor predictor_recorded_time(std::string name) {
  GridPredictor p;
  p.name = std::move(name);
  p.predict = [](const SurvivalDataset& cell, std::span<const std::size_t>) {
    return cell.times();
  };
  return p;
}

GridPredictor predictor_constant(std::string name, double value) {
  GridPredictor p;
  p.name = std::move(name);
  p.predict = [value](const SurvivalDataset& cell, std::span<const std::size_t>) {
    return std::vector<double>(cell.size(), value);
  };
  return p;
}

GridResult run_experiment_grid(const SurvivalDataset& data,
                               std::span<const ExperimentSpec> specs,
                               std::span<const GridPredictor> predictors,
                               std::size_t folds, std::uint64_t seed) {
  if (data.empty()) throw input_error("experiment grid: empty dataset");
  if (specs.empty()) throw input_error("experiment grid: no experiment specs");
  if (predictors.empty()) throw input_error("experiment grid: no predictors");
  if (folds == 0) throw input_error("experiment grid: folds must be >= 1");
  for (const auto& p : predictors) {
    if (!p.predict) throw input_error("experiment grid: predictor '" + p.name +
                                      "' has no prediction function");
  }

  struct Acc {
    std::vector<double> ci, ci_ee, ci_ec, alpha, alpha_star, alpha_deviation;
    bool ee_every_fold = true;
    bool ec_every_fold = true;
  };

  GridResult out;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const ExperimentSpec& spec = specs[si];
    std::vector<Acc> accs(predictors.size());

    for (std::size_t fold = 0; fold < folds; ++fold) {
      ExperimentSpec cell_spec = spec;
      cell_spec.seed = rng::mix(rng::mix(seed, spec_salt(spec)), fold);
      const ExperimentCell cell = apply_experiment(data, cell_spec);
      const auto times = cell.data.times();
      const auto events = cell.data.events();

      for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
        const auto preds = predictors[pi].predict(cell.data, cell.base_rows);
        if (preds.size() != cell.data.size()) {
          throw input_error("predictor '" + predictors[pi].name +
                            "' returned the wrong number of predictions");
        }
        GridCell row;
        row.spec_index = si;
        row.kind = spec.kind;
        row.target = spec.target;
        row.predictor = predictors[pi].name;
        row.fold = fold;
        row.n_rows = cell.data.size();
        row.n_events = cell.data.event_count();
        row.event_fraction = cell.data.event_fraction();
        row.counts = count_pairs_fast(times, events, preds);
        row.decomposition = decompose(row.counts);
        auto& acc = accs[pi];
        acc.ci.push_back(row.decomposition.ci);
        acc.alpha.push_back(row.decomposition.alpha);
        acc.alpha_star.push_back(row.decomposition.alpha_star);
        acc.alpha_deviation.push_back(row.decomposition.alpha_deviation);
        if (row.decomposition.ci_ee) acc.ci_ee.push_back(*row.decomposition.ci_ee);
        else acc.ee_every_fold = false;
        if (row.decomposition.ci_ec) acc.ci_ec.push_back(*row.decomposition.ci_ec);
        else acc.ec_every_fold = false;
        out.cells.push_back(std::move(row));
      }
    }

    for (std::size_t pi = 0; pi < predictors.size(); ++pi) {
      const auto& acc = accs[pi];
      GridSummary s;
      s.spec_index = si;
      s.kind = spec.kind;
      s.target = spec.target;
      s.predictor = predictors[pi].name;
      s.folds = folds;
      s.ci = quantile_summary(acc.ci);
      if (acc.ee_every_fold) s.ci_ee = quantile_summary(acc.ci_ee);
      if (acc.ec_every_fold) s.ci_ec = quantile_summary(acc.ci_ec);
      s.alpha = quantile_summary(acc.alpha);
      s.alpha_star = quantile_summary(acc.alpha_star);
      s.alpha_deviation = quantile_summary(acc.alpha_deviation);
      out.summaries.push_back(std::move(s));
    }
  }
  return out;
}

ComparisonSummary compare_models(std::span<const ModelFoldValues> models,
                                 double significance) {
  if (models.size() < 2) throw input_error("compare: need at least two models");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw input_error("compare: significance level must be in (0, 1)");
  }
  const std::size_t folds = models.front().ci.size();
  if (folds == 0) throw input_error("compare: no fold values");
  for (const auto& m : models) {
    if (m.ci.size() != folds || m.ci_ee.size() != folds || m.ci_ec.size() != folds ||
        m.alpha_deviation.size() != folds) {
      throw input_error("compare: model '" + m.name + "' has misaligned fold counts");
    }
  }

  struct Metric {
    const char* name;
    bool higher_better;
    std::vector<double> (*extract)(const ModelFoldValues&);
  };
  const Metric metrics[] = {
      {"ci", true, [](const ModelFoldValues& m) { return m.ci; }},
      {"ci_ee", true, [](const ModelFoldValues& m) { return m.ci_ee; }},
      {"ci_ec", true, [](const ModelFoldValues& m) { return m.ci_ec; }},
      {"abs_alpha_deviation", false,
       [](const ModelFoldValues& m) {
         std::vector<double> v = m.alpha_deviation;
         for (double& x : v) x = std::abs(x);
         return v;
       }},
  };

  ComparisonSummary out;
  out.significance = significance;
  for (const auto& m : models) {
    out.tallies.push_back({m.name, 0, 0, 0});
    for (const auto& metric : metrics) {
      out.per_model.push_back({m.name, metric.name, quantile_summary(metric.extract(m))});
    }
  }
  const auto tally_of = [&out](const std::string& name) -> ComparisonSummary::Tally& {
    for (auto& t : out.tallies) {
      if (t.model == name) return t;
    }
    throw input_error("compare: unknown model '" + name + "'");
  };

  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = i + 1; j < models.size(); ++j) {
      for (const auto& metric : metrics) {
        const auto va = metric.extract(models[i]);
        const auto vb = metric.extract(models[j]);
        PairwiseComparison c;
        c.model_a = models[i].name;
        c.model_b = models[j].name;
        c.metric = metric.name;
        c.median_a = quantile(va, 0.5);
        c.median_b = quantile(vb, 0.5);
        c.p_value = wilcoxon_rank_sum(va, vb).p_value;
        c.significant = c.p_value < significance;
        const bool a_better = metric.higher_better ? c.median_a > c.median_b
                                                   : c.median_a < c.median_b;
        const bool b_better = metric.higher_better ? c.median_b > c.median_a
                                                   : c.median_b < c.median_a;
        if (c.significant && a_better) {
          c.outcome = "win";
          tally_of(c.model_a).wins++;
          tally_of(c.model_b).losses++;
        } else if (c.significant && b_better) {
          c.outcome = "lose";
          tally_of(c.model_a).losses++;
          tally_of(c.model_b).wins++;
        } else {
          c.outcome = "draw";
          tally_of(c.model_a).draws++;
          tally_of(c.model_b).draws++;
        }
        out.pairwise.push_back(std::move(c));
      }
    }
  }
  return out;
}

}  // namespace survkit
