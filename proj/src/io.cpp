// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "survkit/common.hpp"

namespace survkit {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  out.push_back(cell);
  return out;
}

double parse_double_cell(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() ||
      !std::isfinite(v)) {
    throw input_error(where + ": '" + cell + "' is not a finite decimal");
  }
  return v;
}

void check_csv_safe(const std::string& name) {
  if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos) {
    throw input_error("name '" + name + "' cannot appear in CSV output");
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw input_error("failed while reading '" + path + "'");
  return std::move(buf).str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw input_error("failed while writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw input_error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::vector<double> read_prediction_file(const std::string& path) {
  const std::string content = read_text_file(path);
  std::vector<double> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (!line.empty()) {
      out.push_back(
          parse_double_cell(line, path + " line " + std::to_string(line_no)));
    } else if (end < content.size()) {
      throw input_error(path + " line " + std::to_string(line_no) + ": empty line");
    }
    if (end == content.size()) break;
    start = end + 1;
  }
  if (out.empty()) throw input_error(path + ": no predictions found");
  return out;
}

std::string format_prediction_lines(std::span<const double> values) {
  std::string out;
  for (double v : values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

void write_prediction_file(const std::string& path, std::span<const double> values) {
  write_text_file_atomic(path, format_prediction_lines(values));
}

std::string grid_cells_csv(const GridResult& grid) {
  std::string out =
      "experiment,target,predictor,fold,n_rows,n_events,event_fraction,"
      "n_ee,n_ec,n_plus_ee,n_minus_ee,n_tie_ee,n_plus_ec,n_minus_ec,n_tie_ec,"
      "ci,ci_ee,ci_ec,alpha,alpha_star,alpha_deviation\n";
  for (const auto& c : grid.cells) {
    check_csv_safe(c.predictor);
    out += to_string(c.kind);
    out += ',' + format_double(c.target);
    out += ',' + c.predictor;
    out += ',' + std::to_string(c.fold);
    out += ',' + std::to_string(c.n_rows);
    out += ',' + std::to_string(c.n_events);
    out += ',' + format_double(c.event_fraction);
    out += ',' + std::to_string(c.counts.n_ee);
    out += ',' + std::to_string(c.counts.n_ec);
    out += ',' + std::to_string(c.counts.n_plus_ee);
    out += ',' + std::to_string(c.counts.n_minus_ee);
    out += ',' + std::to_string(c.counts.n_tie_ee);
    out += ',' + std::to_string(c.counts.n_plus_ec);
    out += ',' + std::to_string(c.counts.n_minus_ec);
    out += ',' + std::to_string(c.counts.n_tie_ec);
    out += ',' + format_double(c.decomposition.ci);
    out += ',';
    if (c.decomposition.ci_ee) out += format_double(*c.decomposition.ci_ee);
    out += ',';
    if (c.decomposition.ci_ec) out += format_double(*c.decomposition.ci_ec);
    out += ',' + format_double(c.decomposition.alpha);
    out += ',' + format_double(c.decomposition.alpha_star);
    out += ',' + format_double(c.decomposition.alpha_deviation);
    out += '\n';
  }
  return out;
}

nlohmann::json quantiles_to_json(const QuantileSummary& q) {
  return {{"median", q.median}, {"q025", q.q025}, {"q975", q.q975}};
}

nlohmann::json grid_summary_to_json(const GridResult& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : grid.summaries) {
    nlohmann::json row;
    row["experiment"] = to_string(s.kind);
    row["target"] = s.target;
    row["predictor"] = s.predictor;
    row["folds"] = s.folds;
    row["ci"] = quantiles_to_json(s.ci);
    row["ci_ee"] = s.ci_ee ? quantiles_to_json(*s.ci_ee) : nlohmann::json();
    row["ci_ec"] = s.ci_ec ? quantiles_to_json(*s.ci_ec) : nlohmann::json();
    row["alpha"] = quantiles_to_json(s.alpha);
    row["alpha_star"] = quantiles_to_json(s.alpha_star);
    row["alpha_deviation"] = quantiles_to_json(s.alpha_deviation);
    rows.push_back(std::move(row));
  }
  return {{"summaries", std::move(rows)}};
}

nlohmann::json comparison_to_json(const ComparisonSummary& cmp) {
  nlohmann::json per_model = nlohmann::json::array();
  for (const auto& m : cmp.per_model) {
    nlohmann::json row = quantiles_to_json(m.q);
    row["model"] = m.model;
    row["metric"] = m.metric;
    per_model.push_back(std::move(row));
  }
  nlohmann::json pairwise = nlohmann::json::array();
  for (const auto& p : cmp.pairwise) {
    pairwise.push_back({{"model_a", p.model_a},
                        {"model_b", p.model_b},
                        {"metric", p.metric},
                        {"median_a", p.median_a},
                        {"median_b", p.median_b},
                        {"p_value", p.p_value},
                        {"significant", p.significant},
                        {"outcome", p.outcome}});
  }
  nlohmann::json tallies = nlohmann::json::array();
  for (const auto& t : cmp.tallies) {
    tallies.push_back({{"model", t.model},
                       {"wins", t.wins},
                       {"losses", t.losses},
                       {"draws", t.draws}});
  }
  return {{"significance", cmp.significance},
          {"per_model", std::move(per_model)},
          {"pairwise", std::move(pairwise)},
          {"tallies", std::move(tallies)}};
}

nlohmann::json decomposition_report_json(const PairCounts& counts,
                                         const CIndexDecomposition& dec,
                                         std::optional<double> identity_residual) {
  nlohmann::json j;
  j["n_ee"] = counts.n_ee;
  j["n_ec"] = counts.n_ec;
  j["n_plus_ee"] = counts.n_plus_ee;
  j["n_minus_ee"] = counts.n_minus_ee;
  j["n_tie_ee"] = counts.n_tie_ee;
  j["n_plus_ec"] = counts.n_plus_ec;
  j["n_minus_ec"] = counts.n_minus_ec;
  j["n_tie_ec"] = counts.n_tie_ec;
  j["ci"] = dec.ci;
  j["ci_ee"] = dec.ci_ee ? nlohmann::json(*dec.ci_ee) : nlohmann::json();
  j["ci_ec"] = dec.ci_ec ? nlohmann::json(*dec.ci_ec) : nlohmann::json();
  j["alpha"] = dec.alpha;
  j["alpha_star"] = dec.alpha_star;
  j["alpha_deviation"] = dec.alpha_deviation;
  j["identity_residual"] =
      identity_residual ? nlohmann::json(*identity_residual) : nlohmann::json();
  return j;
}

ModelFoldValues read_fold_metrics(const std::string& path, const std::string& model_name) {
  const std::string content = read_text_file(path);
  std::istringstream in(content);
  std::string header;
  if (!std::getline(in, header)) throw input_error(path + ": empty file");
  const auto cols = split_csv_line(header);
  const auto col_index = [&cols, &path](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == name) return i;
    }
    throw input_error(path + ": missing column '" + name + "'");
  };
  const std::size_t i_ci = col_index("ci");
  const std::size_t i_ee = col_index("ci_ee");
  const std::size_t i_ec = col_index("ci_ec");
  const std::size_t i_dev = col_index("alpha_deviation");

  ModelFoldValues out;
  out.name = model_name;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols.size()) {
      throw input_error(path + " line " + std::to_string(line_no) +
                        ": wrong number of columns");
    }
    const std::string where = path + " line " + std::to_string(line_no);
    out.ci.push_back(parse_double_cell(cells[i_ci], where));
    out.ci_ee.push_back(parse_double_cell(cells[i_ee], where));
    out.ci_ec.push_back(parse_double_cell(cells[i_ec], where));
    out.alpha_deviation.push_back(parse_double_cell(cells[i_dev], where));
  }
  if (out.ci.empty()) throw input_error(path + ": no fold rows");
  return out;
}

}  // namespace survkit
