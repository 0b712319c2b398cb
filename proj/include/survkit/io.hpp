// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "survkit/concordance.hpp"
#include "survkit/lab.hpp"

namespace survkit {

std::string read_text_file(const std::string& path);

/// Writes to a sibling temp file, then renames over the target, so readers
/// never observe a half-written file.
void write_text_file_atomic(const std::string& path, const std::string& content);

/// Prediction files hold one decimal per line (shortest form that round-trips
/// to the same double, so rereading reproduces the values bit-for-bit).
std::vector<double> read_prediction_file(const std::string& path);
std::string format_prediction_lines(std::span<const double> values);
void write_prediction_file(const std::string& path, std::span<const double> values);

/// One CSV row per spec x predictor x fold. Columns:
/// experiment,target,predictor,fold,n_rows,n_events,event_fraction,
/// n_ee,n_ec,n_plus_ee,n_minus_ee,n_tie_ee,n_plus_ec,n_minus_ec,n_tie_ec,
/// ci,ci_ee,ci_ec,alpha,alpha_star,alpha_deviation
/// (ci_ee / ci_ec left empty when the pair class is absent).
std::string grid_cells_csv(const GridResult& grid);

nlohmann::json quantiles_to_json(const QuantileSummary& q);
nlohmann::json grid_summary_to_json(const GridResult& grid);
nlohmann::json comparison_to_json(const ComparisonSummary& cmp);

/// Flat decomposition report: the eight pair tallies plus the index fields;
/// absent sub-indices and a non-computable identity residual appear as null.
nlohmann::json decomposition_report_json(const PairCounts& counts,
                                         const CIndexDecomposition& dec,
                                         std::optional<double> identity_residual);

/// Reads fold-level metric values from a CSV with header columns
/// ci, ci_ee, ci_ec, alpha_deviation (extra columns ignored).
ModelFoldValues read_fold_metrics(const std::string& path, const std::string& model_name);

}  // namespace survkit
