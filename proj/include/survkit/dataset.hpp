// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace survkit {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;

  bool operator==(const ColumnSpec&) const = default;
};

/// One covariate cell. Interpretation follows the column kind; an empty CSV
/// cell is recorded as missing.
struct Cell {
  bool missing = true;
  double number = 0.0;
  std::string category;

  static Cell num(double v) { return Cell{false, v, {}}; }
  static Cell cat(std::string v) { return Cell{false, 0.0, std::move(v)}; }
};

/// The (x, t, delta) triple: observed time, event indicator (false = right
/// censored), covariates matching the dataset schema.
struct SurvivalRecord {
  double time = 0.0;
  bool event = false;
  std::vector<Cell> covariates;
};

class SurvivalDataset {
 public:
  SurvivalDataset() = default;
  SurvivalDataset(std::vector<ColumnSpec> schema, std::vector<SurvivalRecord> records);

  const std::vector<ColumnSpec>& schema() const { return schema_; }
  const std::vector<SurvivalRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<double> times() const;
  std::vector<std::uint8_t> events() const;
  std::size_t event_count() const;
  double event_fraction() const;

  /// Row-major numeric covariate matrix. Requires an all-numeric schema with
  /// no missing cells (i.e. a preprocessed dataset).
  std::vector<std::vector<double>> numeric_matrix() const;

  SurvivalDataset subset(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<ColumnSpec> schema_;
  std::vector<SurvivalRecord> records_;
};

/// Per-column statistics fitted on a training split only. Numeric columns:
/// median imputation, then standardization with the mean/std of the imputed
/// training column (population std, 1.0 fallback for zero variance).
/// Categorical columns: mode imputation and a sorted category list for
/// one-hot encoding. The target transform is t' = (t / scale)^p with scale =
/// the maximum observed time in training.
struct PreprocessPlan {
  struct NumericStats {
    double mean = 0.0;
    double stddev = 1.0;
    double median = 0.0;
  };
  struct CategoricalStats {
    std::vector<std::string> categories;  // sorted, training-distinct
    std::string mode;
  };

  std::vector<ColumnSpec> schema;  // schema the plan was fitted on
  std::map<std::string, NumericStats> numeric;
  std::map<std::string, CategoricalStats> categorical;
  double time_scale = 1.0;
  double time_power = 0.5;

  double transform_time(double t) const;
  double inverse_transform_time(double t_prime) const;
};

/// Reads a survival dataset from CSV. Header row required; `time_col` must
/// parse as a nonnegative decimal and `event_col` as {0,1,true,false}
/// (case-insensitive). Remaining columns become covariates; a column is
/// numeric when every non-missing cell parses as a decimal. Empty cells are
/// missing.
SurvivalDataset load_csv(const std::string& path, const std::string& time_col,
                         const std::string& event_col);

/// Same parser over an in-memory buffer (`origin` only labels error messages).
SurvivalDataset parse_csv(const std::string& content, const std::string& time_col,
                          const std::string& event_col,
                          const std::string& origin = "<memory>");

PreprocessPlan fit_preprocess(const SurvivalDataset& train, double time_power = 0.5);

/// Standardizes numerics, one-hot encodes categoricals (unseen categories map
/// to an all-zero block), imputes missing cells, and power-transforms the
/// target. Output schema: numeric columns first as fitted, then one-hot
/// blocks named "col=category".
SurvivalDataset apply_preprocess(const PreprocessPlan& plan, const SurvivalDataset& data);

/// Seed-deterministic holdout split; |test| = round(frac * n), half up.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_holdout_indices(
    std::size_t n, double frac, std::uint64_t seed);

std::pair<SurvivalDataset, SurvivalDataset> split_holdout(const SurvivalDataset& data,
                                                          double frac,
                                                          std::uint64_t seed);

/// Independent random (subtrain, validation) splits of the same pool, one per
/// fold. |subtrain| = round(train_frac * n).
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
resample_folds(std::size_t pool_size, std::size_t n_folds, double train_frac,
               std::uint64_t seed);

}  // namespace survkit
