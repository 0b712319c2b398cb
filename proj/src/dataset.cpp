// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "survkit/common.hpp"

namespace survkit {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_event(const std::string& raw, bool& out) {
  const std::string s = lowercase(raw);
  if (s == "1" || s == "true") {
    out = true;
    return true;
  }
  if (s == "0" || s == "false") {
    out = false;
    return true;
  }
  return false;
}

double column_median(std::vector<double> values) {
  if (values.empty()) return 0.0;  // all-missing column fallback
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

SurvivalDataset::SurvivalDataset(std::vector<ColumnSpec> schema,
                                 std::vector<SurvivalRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const auto& rec = records_[r];
    if (!std::isfinite(rec.time) || rec.time < 0)
      throw input_error("record " + std::to_string(r) +
                        ": time must be finite and nonnegative");
    if (rec.covariates.size() != schema_.size())
      throw input_error("record " + std::to_string(r) +
                        ": covariate count does not match schema");
  }
}

std::vector<double> SurvivalDataset::times() const {
  std::vector<double> out(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) out[i] = records_[i].time;
  return out;
}

std::vector<std::uint8_t> SurvivalDataset::events() const {
  std::vector<std::uint8_t> out(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) out[i] = records_[i].event;
  return out;
}

std::size_t SurvivalDataset::event_count() const {
  std::size_t c = 0;
  for (const auto& r : records_) c += r.event ? 1 : 0;
  return c;
}

double SurvivalDataset::event_fraction() const {
  if (records_.empty()) return 0.0;
  return static_cast<double>(event_count()) / static_cast<double>(records_.size());
}

std::vector<std::vector<double>> SurvivalDataset::numeric_matrix() const {
  std::vector<std::vector<double>> out(records_.size());
  for (std::size_t c = 0; c < schema_.size(); ++c)
    if (schema_[c].kind != ColumnKind::Numeric)
      throw input_error("numeric_matrix: column '" + schema_[c].name +
                        "' is categorical; preprocess first");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    out[i].reserve(schema_.size());
    for (std::size_t c = 0; c < schema_.size(); ++c) {
      const Cell& cell = records_[i].covariates[c];
      if (cell.missing)
        throw input_error("numeric_matrix: missing cell in row " +
                          std::to_string(i) + "; preprocess first");
      out[i].push_back(cell.number);
    }
  }
  return out;
}

SurvivalDataset SurvivalDataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<SurvivalRecord> recs;
  recs.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= records_.size()) throw input_error("subset: index out of range");
    recs.push_back(records_[idx]);
  }
  return SurvivalDataset(schema_, std::move(recs));
}

double PreprocessPlan::transform_time(double t) const {
  return std::pow(t / time_scale, time_power);
}

double PreprocessPlan::inverse_transform_time(double t_prime) const {
  return std::pow(t_prime, 1.0 / time_power) * time_scale;
}

SurvivalDataset parse_csv(const std::string& content, const std::string& time_col,
                          const std::string& event_col, const std::string& origin) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line))
    throw input_error(origin + ": empty file (header row required)");
  const std::vector<std::string> header = split_line(line);

  std::size_t time_idx = header.size(), event_idx = header.size();
  std::vector<std::size_t> covariate_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == time_col)
      time_idx = c;
    else if (header[c] == event_col)
      event_idx = c;
    else
      covariate_cols.push_back(c);
  }
  if (time_idx == header.size())
    throw input_error(origin + ": time column '" + time_col + "' not found");
  if (event_idx == header.size())
    throw input_error(origin + ": event column '" + event_col + "' not found");

  // Raw rows first; column kinds are decided after the whole file is read.
  std::vector<std::vector<std::string>> raw_rows;
  std::size_t row_no = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw input_error(origin + ": row " + std::to_string(row_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    raw_rows.push_back(std::move(cells));
  }

  std::vector<ColumnSpec> schema;
  schema.reserve(covariate_cols.size());
  for (std::size_t c : covariate_cols) {
    bool numeric = true;
    for (const auto& row : raw_rows) {
      const std::string& cell = row[c];
      double tmp;
      if (!cell.empty() && !parse_number(cell, tmp)) {
        numeric = false;
        break;
      }
    }
    schema.push_back({header[c], numeric ? ColumnKind::Numeric : ColumnKind::Categorical});
  }

  std::vector<SurvivalRecord> records;
  records.reserve(raw_rows.size());
  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    const auto& row = raw_rows[r];
    const std::string row_label = std::to_string(r + 2);  // 1-based incl. header
    SurvivalRecord rec;
    if (!parse_number(row[time_idx], rec.time))
      throw input_error(origin + ": row " + row_label + ": time '" +
                        row[time_idx] + "' is not a decimal");
    if (!std::isfinite(rec.time) || rec.time < 0)
      throw input_error(origin + ": row " + row_label + ": negative or non-finite time");
    if (!parse_event(row[event_idx], rec.event))
      throw input_error(origin + ": row " + row_label + ": event '" +
                        row[event_idx] + "' not in {0,1,true,false}");
    rec.covariates.reserve(covariate_cols.size());
    for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
      const std::string& cell = row[covariate_cols[k]];
      if (cell.empty()) {
        rec.covariates.push_back(Cell{});
      } else if (schema[k].kind == ColumnKind::Numeric) {
        double v;
        parse_number(cell, v);
        rec.covariates.push_back(Cell::num(v));
      } else {
        rec.covariates.push_back(Cell::cat(cell));
      }
    }
    records.push_back(std::move(rec));
  }
  return SurvivalDataset(std::move(schema), std::move(records));
}

SurvivalDataset load_csv(const std::string& path, const std::string& time_col,
                         const std::string& event_col) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), time_col, event_col, path);
}

PreprocessPlan fit_preprocess(const SurvivalDataset& train, double time_power) {
  if (train.empty()) throw input_error("fit_preprocess: empty training set");
  if (time_power <= 0) throw input_error("fit_preprocess: time power must be positive");

  PreprocessPlan plan;
  plan.schema = train.schema();
  plan.time_power = time_power;

  double max_time = 0.0;
  for (const auto& rec : train.records()) max_time = std::max(max_time, rec.time);
  plan.time_scale = max_time > 0 ? max_time : 1.0;

  for (std::size_t c = 0; c < plan.schema.size(); ++c) {
    const ColumnSpec& col = plan.schema[c];
    if (col.kind == ColumnKind::Numeric) {
      std::vector<double> present;
      for (const auto& rec : train.records())
        if (!rec.covariates[c].missing) present.push_back(rec.covariates[c].number);
      PreprocessPlan::NumericStats stats;
      stats.median = column_median(present);
      // Mean/std over the imputed column, so fit+apply on the training split
      // standardizes every column exactly.
      const double n = static_cast<double>(train.size());
      double sum = 0.0;
      for (const auto& rec : train.records())
        sum += rec.covariates[c].missing ? stats.median : rec.covariates[c].number;
      stats.mean = sum / n;
      double ss = 0.0;
      for (const auto& rec : train.records()) {
        const double v = rec.covariates[c].missing ? stats.median : rec.covariates[c].number;
        ss += (v - stats.mean) * (v - stats.mean);
      }
      const double var = ss / n;  // population variance
      stats.stddev = var > 0 ? std::sqrt(var) : 1.0;
      plan.numeric[col.name] = stats;
    } else {
      PreprocessPlan::CategoricalStats stats;
      std::map<std::string, std::size_t> freq;
      for (const auto& rec : train.records())
        if (!rec.covariates[c].missing) ++freq[rec.covariates[c].category];
      stats.categories.reserve(freq.size());
      for (const auto& [cat, count] : freq) stats.categories.push_back(cat);
      std::size_t best = 0;
      for (const auto& [cat, count] : freq) {
        if (count > best) {
          best = count;
          stats.mode = cat;  // ties resolve to the lexicographically smallest
        }
      }
      plan.categorical[col.name] = stats;
    }
  }
  return plan;
}

SurvivalDataset apply_preprocess(const PreprocessPlan& plan, const SurvivalDataset& data) {
  if (data.schema() != plan.schema)
    throw input_error("apply_preprocess: dataset schema does not match plan");

  std::vector<ColumnSpec> out_schema;
  for (const auto& col : plan.schema) {
    if (col.kind == ColumnKind::Numeric) {
      out_schema.push_back({col.name, ColumnKind::Numeric});
    } else {
      for (const auto& cat : plan.categorical.at(col.name).categories)
        out_schema.push_back({col.name + "=" + cat, ColumnKind::Numeric});
    }
  }

  std::vector<SurvivalRecord> out_records;
  out_records.reserve(data.size());
  for (const auto& rec : data.records()) {
    SurvivalRecord out;
    out.time = plan.transform_time(rec.time);
    out.event = rec.event;
    out.covariates.reserve(out_schema.size());
    for (std::size_t c = 0; c < plan.schema.size(); ++c) {
      const ColumnSpec& col = plan.schema[c];
      const Cell& cell = rec.covariates[c];
      if (col.kind == ColumnKind::Numeric) {
        const auto& stats = plan.numeric.at(col.name);
        const double raw = cell.missing ? stats.median : cell.number;
        out.covariates.push_back(Cell::num((raw - stats.mean) / stats.stddev));
      } else {
        const auto& stats = plan.categorical.at(col.name);
        const std::string& value = cell.missing ? stats.mode : cell.category;
        for (const auto& cat : stats.categories)
          out.covariates.push_back(Cell::num(cat == value ? 1.0 : 0.0));
        // unseen categories leave the whole block at zero
      }
    }
    out_records.push_back(std::move(out));
  }
  return SurvivalDataset(std::move(out_schema), std::move(out_records));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_holdout_indices(
    std::size_t n, double frac, std::uint64_t seed) {
  if (frac <= 0 || frac >= 1) throw input_error("split_holdout: frac must be in (0,1)");
  auto eng = rng::make_engine(seed);
  std::vector<std::size_t> idx = rng::shuffled_indices(n, eng);
  const std::size_t test_size = round_half_up(frac * static_cast<double>(n));
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<long>(test_size));
  std::vector<std::size_t> train(idx.begin() + static_cast<long>(test_size), idx.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {train, test};
}

std::pair<SurvivalDataset, SurvivalDataset> split_holdout(const SurvivalDataset& data,
                                                          double frac,
                                                          std::uint64_t seed) {
  auto [train_idx, test_idx] = split_holdout_indices(data.size(), frac, seed);
  return {data.subset(train_idx), data.subset(test_idx)};
}

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
resample_folds(std::size_t pool_size, std::size_t n_folds, double train_frac,
               std::uint64_t seed) {
  if (n_folds < 1) throw input_error("resample_folds: n_folds must be >= 1");
  if (train_frac <= 0 || train_frac >= 1)
    throw input_error("resample_folds: train_frac must be in (0,1)");
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
  folds.reserve(n_folds);
  const std::size_t subtrain_size =
      round_half_up(train_frac * static_cast<double>(pool_size));
  for (std::size_t k = 0; k < n_folds; ++k) {
    auto eng = rng::make_engine(rng::mix(seed, k));
    std::vector<std::size_t> idx = rng::shuffled_indices(pool_size, eng);
    std::vector<std::size_t> sub(idx.begin(), idx.begin() + static_cast<long>(subtrain_size));
    std::vector<std::size_t> val(idx.begin() + static_cast<long>(subtrain_size), idx.end());
    std::sort(sub.begin(), sub.end());
    std::sort(val.begin(), val.end());
    folds.emplace_back(std::move(sub), std::move(val));
  }
  return folds;
}

}  // namespace survkit
