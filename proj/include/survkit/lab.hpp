// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survkit/concordance.hpp"
#include "survkit/dataset.hpp"
#include "survkit/stats.hpp"

namespace survkit {

enum class ExperimentKind { SizeOnly, CensoringOnly, SizeAndCensoring };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// One grid axis point. `target` is a size fraction for SizeOnly and a target
/// event fraction for the censoring experiments, in (0, 1].
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::SizeOnly;
  double target = 1.0;
  std::uint64_t seed = 0;
};

/// Random subsample of `target_size` rows stratified by event status, so the
/// event fraction is preserved to within rounding (the event count is clamped
/// by what either stratum can supply). Returns sorted kept-row indices.
std::vector<std::size_t> size_only_indices(const SurvivalDataset& data,
                                           std::size_t target_size,
                                           std::uint64_t seed);
SurvivalDataset size_only(const SurvivalDataset& data, std::size_t target_size,
                          std::uint64_t seed);

/// Keeps every row and every time value; flips surplus event indicators to
/// censored (the recorded time becomes the censoring time) until
/// round(target * n) events remain. For a fixed input and seed, lower targets
/// flip supersets of the rows flipped at higher targets.
SurvivalDataset censoring_only(const SurvivalDataset& data,
                               double target_event_frac, std::uint64_t seed);

/// Keeps the censored rows untouched and drops events uniformly at random
/// until the event fraction reaches the target. A target within
/// `identity_tol` of the current fraction means "keep the censoring level":
/// the dataset passes through unchanged. Returns sorted kept-row indices.
std::vector<std::size_t> size_and_censoring_indices(const SurvivalDataset& data,
                                                    double target_event_frac,
                                                    std::uint64_t seed,
                                                    double identity_tol = 0.005);
SurvivalDataset size_and_censoring(const SurvivalDataset& data,
                                   double target_event_frac, std::uint64_t seed,
                                   double identity_tol = 0.005);

/// A manipulated dataset plus, for each of its rows, the row index in the
/// base dataset (so externally supplied per-row predictions can follow).
struct ExperimentCell {
  SurvivalDataset data;
  std::vector<std::size_t> base_rows;
};

ExperimentCell apply_experiment(const SurvivalDataset& data, const ExperimentSpec& spec);

/// Named prediction source for grid runs: given a manipulated dataset and the
/// base-row index of each of its rows, produce one prediction per row
/// (higher = later predicted event).
struct GridPredictor {
  std::string name;
  std::function<std::vector<double>(const SurvivalDataset&, std::span<const std::size_t>)>
      predict;
};

/// Per-row predictions aligned with the base dataset, subset per cell.
GridPredictor predictor_from_values(std::string name, std::vector<double> base_predictions);
/// Predicts each subject's recorded time (the oracle on fully observed bases).
GridPredictor predictor_recorded_time(std::string name);
GridPredictor predictor_constant(std::string name, double value);

struct GridCell {
  std::size_t spec_index = 0;
  ExperimentKind kind = ExperimentKind::SizeOnly;
  double target = 0.0;
  std::string predictor;
  std::size_t fold = 0;
  std::size_t n_rows = 0;
  std::size_t n_events = 0;
  double event_fraction = 0.0;
  PairCounts counts;
  CIndexDecomposition decomposition;
};

/// Fold quantiles for one (spec, predictor) grid line. Sub-index summaries
/// are present only when every fold had that pair class.
struct GridSummary {
  std::size_t spec_index = 0;
  ExperimentKind kind = ExperimentKind::SizeOnly;
  double target = 0.0;
  std::string predictor;
  std::size_t folds = 0;
  QuantileSummary ci;
  std::optional<QuantileSummary> ci_ee;
  std::optional<QuantileSummary> ci_ec;
  QuantileSummary alpha;
  QuantileSummary alpha_star;
  QuantileSummary alpha_deviation;
};

struct GridResult {
  std::vector<GridCell> cells;         // one per spec x predictor x fold
  std::vector<GridSummary> summaries;  // one per spec x predictor
};

/// Applies every spec `folds` times (cell seeds derived from the grid seed,
/// the spec contents and the fold number, so results are order-independent),
/// scores every predictor on every cell and aggregates fold quantiles.
GridResult run_experiment_grid(const SurvivalDataset& data,
                               std::span<const ExperimentSpec> specs,
                               std::span<const GridPredictor> predictors,
                               std::size_t folds, std::uint64_t seed);

/// Fold-level metric values for one model, aligned across models.
struct ModelFoldValues {
  std::string name;
  std::vector<double> ci;
  std::vector<double> ci_ee;
  std::vector<double> ci_ec;
  std::vector<double> alpha_deviation;
};

struct PairwiseComparison {
  std::string model_a;
  std::string model_b;
  std::string metric;
  double median_a = 0.0;
  double median_b = 0.0;
  double p_value = 1.0;
  bool significant = false;
  std::string outcome;  // "win" / "lose" / "draw" from model_a's side
};

struct ComparisonSummary {
  struct MetricQuantiles {
    std::string model;
    std::string metric;
    QuantileSummary q;
  };
  struct Tally {
    std::string model;
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t draws = 0;
  };
  std::vector<MetricQuantiles> per_model;
  std::vector<PairwiseComparison> pairwise;
  std::vector<Tally> tallies;
  double significance = 0.05;
};

/// Pairwise two-sided rank-sum tests on the fold values of ci, ci_ee, ci_ec
/// and |alpha_deviation| (the first three higher-better, the last
/// lower-better). A significant p decides win/lose by median, otherwise draw.
ComparisonSummary compare_models(std::span<const ModelFoldValues> models,
                                 double significance = 0.05);

}  // namespace survkit
