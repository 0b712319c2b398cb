// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.
//
// Command-line front end: decompose, train, lab, compare, km.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "survkit/common.hpp"
#include "survkit/concordance.hpp"
#include "survkit/dataset.hpp"
#include "survkit/io.hpp"
#include "survkit/kaplan_meier.hpp"
#include "survkit/lab.hpp"
#include "survkit/surved.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace survkit;

constexpr std::uint64_t kSplitSalt = 0x73706c69;
constexpr std::uint64_t kPredictSalt = 0x70726564;

/// Accepts both flat key=value files (the stock reader) and a flat JSON
/// object whose keys are long option names.
class FlexibleConfig : public CLI::ConfigBase {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::ostringstream buffer;
    buffer << input.rdbuf();
    const std::string text = std::move(buffer).str();
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return from_json(text);
    std::istringstream replay(text);
    return CLI::ConfigBase::from_config(replay);
  }

 private:
  static std::vector<CLI::ConfigItem> from_json(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw CLI::ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config file must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      if (value.is_array()) {
        for (const auto& el : value) {
          item.inputs.push_back(el.is_string() ? el.get<std::string>() : el.dump());
        }
      } else {
        item.inputs.push_back(value.is_string() ? value.get<std::string>()
                                                : value.dump());
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

void attach_config(CLI::App* cmd) {
  cmd->config_formatter(std::make_shared<FlexibleConfig>());
  cmd->set_config("--config", "", "config file, flat key=value or JSON (flags win)");
}

void emit_report(const json& report, const std::string& output_path) {
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!output_path.empty()) write_text_file_atomic(output_path, text);
}

std::string time_event_csv(const SurvivalDataset& data) {
  std::string out = "time,event\n";
  for (const auto& rec : data.records()) {
    out += format_double(rec.time);
    out += rec.event ? ",1\n" : ",0\n";
  }
  return out;
}

std::pair<std::string, std::string> split_name_path(const std::string& spec,
                                                    const char* flag) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw input_error(std::string(flag) + " expects NAME=PATH, got '" + spec + "'");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

// ---------------------------------------------------------------- decompose

struct DecomposeOpts {
  std::string data_path;
  std::string time_col = "time";
  std::string event_col = "event";
  std::string predictions_path;
  std::string pairs_mode = "fast";
  bool equal_time_ec_incomparable = false;
  std::string output;
};

int run_decompose(const DecomposeOpts& o) {
  const SurvivalDataset ds = load_csv(o.data_path, o.time_col, o.event_col);
  const auto preds = read_prediction_file(o.predictions_path);
  if (preds.size() != ds.size()) {
    throw input_error("prediction count (" + std::to_string(preds.size()) +
                      ") does not match dataset rows (" + std::to_string(ds.size()) + ")");
  }
  const PairRules rules{!o.equal_time_ec_incomparable};
  const auto times = ds.times();
  const auto events = ds.events();
  const PairCounts counts = o.pairs_mode == "exact"
                                ? count_pairs_exact(times, events, preds, rules)
                                : count_pairs_fast(times, events, preds, rules);
  const CIndexDecomposition dec = decompose(counts);
  std::optional<double> residual;
  try {
    residual = verify_identity(dec);
  } catch (const numeric_error&) {
    // a pair class is absent or a sub-index is zero: reported as null
  }
  json report = decomposition_report_json(counts, dec, residual);
  report["config"] = {{"data", o.data_path},
                      {"time_col", o.time_col},
                      {"event_col", o.event_col},
                      {"predictions", o.predictions_path},
                      {"pairs_mode", o.pairs_mode},
                      {"equal_time_event_censored_comparable",
                       !o.equal_time_ec_incomparable},
                      {"n_rows", ds.size()}};
  emit_report(report, o.output);
  return 0;
}

// ----------------------------------------------------------------------- km

struct KmOpts {
  std::string data_path;
  std::string time_col = "time";
  std::string event_col = "event";
  std::string output;
};

int run_km(const KmOpts& o) {
  const SurvivalDataset ds = load_csv(o.data_path, o.time_col, o.event_col);
  const StepSurvival curve = km_estimate(ds.times(), ds.events());
  const std::string csv = km_to_csv(curve);
  if (o.output.empty()) {
    std::cout << csv;
    return 0;
  }
  write_text_file_atomic(o.output, csv);
  json report;
  report["config"] = {{"data", o.data_path},
                      {"time_col", o.time_col},
                      {"event_col", o.event_col},
                      {"output", o.output},
                      {"n_rows", ds.size()}};
  report["steps"] = curve.times.size();
  report["final_survival"] = curve.probs.empty() ? 1.0 : curve.probs.back();
  emit_report(report, "");
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainOpts {
  std::string data_path;
  std::string time_col = "time";
  std::string event_col = "event";
  std::string out_dir;
  double val_frac = 0.3;
  double time_power = 0.5;
  std::uint64_t seed = 1;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  std::size_t patience = 20;
  std::size_t latent_dim = 4;
  std::size_t n_samples = 200;
  std::vector<std::size_t> hidden = {32, 32};
  double learning_rate = 0.05;
  double momentum = 0.0;
  double lambda_e = 1.0;
  double lambda_c = 1.0;
  double lambda_kl = 1.0;
  double lambda_lb = 1.0;
};

json train_config_echo(const TrainOpts& o, std::size_t input_dim) {
  return {{"data", o.data_path},
          {"time_col", o.time_col},
          {"event_col", o.event_col},
          {"out_dir", o.out_dir},
          {"val_frac", o.val_frac},
          {"time_power", o.time_power},
          {"seed", o.seed},
          {"epochs", o.epochs},
          {"batch_size", o.batch_size},
          {"patience", o.patience},
          {"latent_dim", o.latent_dim},
          {"n_samples", o.n_samples},
          {"hidden", o.hidden},
          {"learning_rate", o.learning_rate},
          {"momentum", o.momentum},
          {"lambda_e", o.lambda_e},
          {"lambda_c", o.lambda_c},
          {"lambda_kl", o.lambda_kl},
          {"lambda_lb", o.lambda_lb},
          {"input_dim", input_dim}};
}

int run_train(const TrainOpts& o) {
  if (o.out_dir.empty()) throw input_error("train: --out-dir is required");
  const SurvivalDataset ds = load_csv(o.data_path, o.time_col, o.event_col);
  const auto [train_ds, val_ds] =
      split_holdout(ds, o.val_frac, rng::mix(o.seed, kSplitSalt));
  const PreprocessPlan plan = fit_preprocess(train_ds, o.time_power);
  const SurvivalDataset train_p = apply_preprocess(plan, train_ds);
  const SurvivalDataset val_p = apply_preprocess(plan, val_ds);

  ModelConfig cfg;
  cfg.input_dim = train_p.schema().size();
  cfg.hidden_widths = o.hidden;
  cfg.latent_dim = o.latent_dim;
  cfg.n_samples = o.n_samples;
  cfg.weights = {o.lambda_e, o.lambda_c, o.lambda_kl, o.lambda_lb};
  cfg.learning_rate = o.learning_rate;
  cfg.momentum = o.momentum;
  cfg.batch_size = o.batch_size;
  cfg.max_epochs = o.epochs;
  cfg.patience = o.patience;
  cfg.seed = o.seed;

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw input_error("cannot create '" + o.out_dir + "': " + ec.message());
  const auto out_path = [&o](const char* name) {
    return (fs::path(o.out_dir) / name).string();
  };

  SurvedModel model(cfg);
  FitResult fr;
  if (o.epochs > 0) {
    try {
      fr = fit(model, make_model_data(train_p), make_model_data(val_p));
    } catch (const numeric_error& e) {
      const std::string dump_path = out_path("diagnostic_dump.json");
      write_text_file_atomic(dump_path, model.to_json());
      std::cerr << "training aborted (" << e.what() << "); last finite model state in "
                << dump_path << "\n";
      throw;
    }
  }

  write_text_file_atomic(out_path("checkpoint.json"), model.to_json());

  std::string log;
  for (const auto& rec : fr.history) {
    const json line = {{"epoch", rec.epoch},          {"l_e", rec.train.l_e},
                       {"l_c", rec.train.l_c},        {"l_kl", rec.train.l_kl},
                       {"c_lb", rec.train.c_lb},      {"total", rec.train.total},
                       {"val_ci", rec.val_ci}};
    log += line.dump();
    log += '\n';
  }
  write_text_file_atomic(out_path("log.jsonl"), log);

  // validation predictions in original time units
  const ModelData vdata = make_model_data(val_p);
  auto peng = rng::make_engine(rng::mix(cfg.seed, kPredictSalt));
  std::vector<double> preds = model.predict_expected(vdata.x, cfg.n_samples, peng);
  for (double& p : preds) p = plan.inverse_transform_time(p);
  write_prediction_file(out_path("predictions.txt"), preds);
  write_text_file_atomic(out_path("validation.csv"), time_event_csv(val_ds));

  const PairCounts counts = count_pairs_fast(val_ds.times(), val_ds.events(), preds);
  const CIndexDecomposition dec = decompose(counts);
  std::optional<double> residual;
  try {
    residual = verify_identity(dec);
  } catch (const numeric_error&) {
  }

  json report;
  report["config"] = train_config_echo(o, cfg.input_dim);
  report["files"] = {{"checkpoint", out_path("checkpoint.json")},
                     {"predictions", out_path("predictions.txt")},
                     {"validation", out_path("validation.csv")},
                     {"log", out_path("log.jsonl")}};
  report["epochs_run"] = fr.history.size();
  report["best_epoch"] = fr.best_epoch;
  report["stopped_early"] = fr.stopped_early;
  report["validation"] = decomposition_report_json(counts, dec, residual);
  emit_report(report, "");
  return 0;
}

// ---------------------------------------------------------------------- lab

struct LabOpts {
  std::string data_path;
  std::string time_col = "time";
  std::string event_col = "event";
  std::string out_dir;
  std::string experiment = "size_and_censoring";
  std::vector<double> targets;
  std::size_t folds = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> prediction_specs;
  bool with_recorded_time = false;
  std::vector<double> constants;
};

int run_lab(const LabOpts& o) {
  if (o.out_dir.empty()) throw input_error("lab: --out-dir is required");
  if (o.targets.empty()) throw input_error("lab: at least one --targets value is required");
  const SurvivalDataset ds = load_csv(o.data_path, o.time_col, o.event_col);

  const ExperimentKind kind = experiment_kind_from_string(o.experiment);
  std::vector<ExperimentSpec> specs;
  for (double t : o.targets) specs.push_back({kind, t, 0});

  std::vector<GridPredictor> predictors;
  for (const auto& spec : o.prediction_specs) {
    const auto [name, path] = split_name_path(spec, "--predictions");
    auto values = read_prediction_file(path);
    if (values.size() != ds.size()) {
      throw input_error("prediction file '" + path + "' has " +
                        std::to_string(values.size()) + " rows, dataset has " +
                        std::to_string(ds.size()));
    }
    predictors.push_back(predictor_from_values(name, std::move(values)));
  }
  if (o.with_recorded_time) predictors.push_back(predictor_recorded_time("recorded_time"));
  for (double c : o.constants) {
    predictors.push_back(predictor_constant("constant_" + format_double(c), c));
  }
  if (predictors.empty()) predictors.push_back(predictor_recorded_time("recorded_time"));

  const GridResult grid = run_experiment_grid(ds, specs, predictors, o.folds, o.seed);

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw input_error("cannot create '" + o.out_dir + "': " + ec.message());
  const std::string csv_path = (fs::path(o.out_dir) / "grid.csv").string();
  const std::string summary_path = (fs::path(o.out_dir) / "summary.json").string();
  write_text_file_atomic(csv_path, grid_cells_csv(grid));

  json summary = grid_summary_to_json(grid);
  std::vector<std::string> predictor_names;
  for (const auto& p : predictors) predictor_names.push_back(p.name);
  summary["config"] = {{"data", o.data_path},
                       {"time_col", o.time_col},
                       {"event_col", o.event_col},
                       {"out_dir", o.out_dir},
                       {"experiment", o.experiment},
                       {"targets", o.targets},
                       {"folds", o.folds},
                       {"seed", o.seed},
                       {"predictors", predictor_names},
                       {"n_rows", ds.size()}};
  summary["files"] = {{"grid", csv_path}, {"summary", summary_path}};
  const std::string text = summary.dump(2) + "\n";
  write_text_file_atomic(summary_path, text);
  std::cout << text;
  return 0;
}

// ------------------------------------------------------------------ compare

struct CompareOpts {
  std::vector<std::string> fold_specs;
  double significance = 0.05;
  std::string output;
};

int run_compare(const CompareOpts& o) {
  if (o.fold_specs.size() < 2) {
    throw input_error("compare: need at least two --folds NAME=PATH arguments");
  }
  std::vector<ModelFoldValues> models;
  for (const auto& spec : o.fold_specs) {
    const auto [name, path] = split_name_path(spec, "--folds");
    for (const auto& m : models) {
      if (m.name == name) throw input_error("compare: duplicate model name '" + name + "'");
    }
    models.push_back(read_fold_metrics(path, name));
  }
  const ComparisonSummary cmp = compare_models(models, o.significance);
  json report = comparison_to_json(cmp);
  report["config"] = {{"folds", o.fold_specs}, {"significance", o.significance}};
  emit_report(report, o.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survival model evaluation toolkit"};
  app.require_subcommand(1);

  DecomposeOpts dopt;
  auto* cmd_decompose =
      app.add_subcommand("decompose", "split a prediction file's concordance index "
                                      "into its event-event and event-censored parts");
  cmd_decompose->add_option("--data", dopt.data_path, "survival CSV")->required();
  cmd_decompose->add_option("--time-col", dopt.time_col, "time column")
      ->capture_default_str();
  cmd_decompose->add_option("--event-col", dopt.event_col, "event indicator column")
      ->capture_default_str();
  cmd_decompose
      ->add_option("--predictions", dopt.predictions_path, "one prediction per line")
      ->required();
  cmd_decompose->add_option("--pairs-mode", dopt.pairs_mode, "pair counting path")
      ->check(CLI::IsMember({"fast", "exact"}))
      ->capture_default_str();
  cmd_decompose->add_flag("--equal-time-ec-incomparable",
                          dopt.equal_time_ec_incomparable,
                          "treat an event and a censoring at the same time as "
                          "incomparable instead of event-first");
  cmd_decompose->add_option("--output", dopt.output, "also write the report here");
  attach_config(cmd_decompose);

  KmOpts kopt;
  auto* cmd_km = app.add_subcommand("km", "product-limit survival curve as CSV");
  cmd_km->add_option("--data", kopt.data_path, "survival CSV")->required();
  cmd_km->add_option("--time-col", kopt.time_col, "time column")->capture_default_str();
  cmd_km->add_option("--event-col", kopt.event_col, "event indicator column")
      ->capture_default_str();
  cmd_km->add_option("--output", kopt.output, "write the curve here instead of stdout");
  attach_config(cmd_km);

  TrainOpts topt;
  auto* cmd_train = app.add_subcommand(
      "train", "fit the variational event-time model on a holdout split");
  cmd_train->add_option("--data", topt.data_path, "survival CSV")->required();
  cmd_train->add_option("--time-col", topt.time_col, "time column")->capture_default_str();
  cmd_train->add_option("--event-col", topt.event_col, "event indicator column")
      ->capture_default_str();
  cmd_train->add_option("--out-dir", topt.out_dir, "output directory")->required();
  cmd_train->add_option("--val-frac", topt.val_frac, "holdout fraction for validation")
      ->capture_default_str();
  cmd_train->add_option("--time-power", topt.time_power, "target transform exponent")
      ->capture_default_str();
  cmd_train->add_option("--seed", topt.seed, "random seed")->capture_default_str();
  cmd_train->add_option("--epochs", topt.epochs, "maximum epochs")->capture_default_str();
  cmd_train->add_option("--batch-size", topt.batch_size, "mini-batch size")
      ->capture_default_str();
  cmd_train->add_option("--patience", topt.patience, "early-stopping patience")
      ->capture_default_str();
  cmd_train->add_option("--latent-dim", topt.latent_dim, "latent dimension")
      ->capture_default_str();
  cmd_train->add_option("--n-samples", topt.n_samples, "latent draws per prediction")
      ->capture_default_str();
  cmd_train->add_option("--hidden", topt.hidden, "hidden layer widths")
      ->delimiter(',')
      ->capture_default_str();
  cmd_train->add_option("--learning-rate", topt.learning_rate, "SGD step size")
      ->capture_default_str();
  cmd_train->add_option("--momentum", topt.momentum, "SGD momentum in [0,1)")
      ->capture_default_str();
  cmd_train->add_option("--lambda-e", topt.lambda_e, "event-error weight")
      ->capture_default_str();
  cmd_train->add_option("--lambda-c", topt.lambda_c, "censoring-hinge weight")
      ->capture_default_str();
  cmd_train->add_option("--lambda-kl", topt.lambda_kl, "latent-regularizer weight")
      ->capture_default_str();
  cmd_train->add_option("--lambda-lb", topt.lambda_lb, "ranking-bound weight")
      ->capture_default_str();
  attach_config(cmd_train);

  LabOpts lopt;
  auto* cmd_lab = app.add_subcommand(
      "lab", "size/censoring experiment grid over a dataset");
  cmd_lab->add_option("--data", lopt.data_path, "survival CSV")->required();
  cmd_lab->add_option("--time-col", lopt.time_col, "time column")->capture_default_str();
  cmd_lab->add_option("--event-col", lopt.event_col, "event indicator column")
      ->capture_default_str();
  cmd_lab->add_option("--out-dir", lopt.out_dir, "output directory")->required();
  cmd_lab->add_option("--experiment", lopt.experiment,
                      "size_only, censoring_only or size_and_censoring")
      ->capture_default_str();
  cmd_lab->add_option("--targets", lopt.targets,
                      "grid targets (size or event fractions in (0,1])")
      ->delimiter(',');
  cmd_lab->add_option("--folds", lopt.folds, "repetitions per grid point")
      ->capture_default_str();
  cmd_lab->add_option("--seed", lopt.seed, "random seed")->capture_default_str();
  cmd_lab->add_option("--predictions", lopt.prediction_specs,
                      "NAME=PATH prediction file aligned with the base dataset "
                      "(repeatable)");
  cmd_lab->add_flag("--with-recorded-time", lopt.with_recorded_time,
                    "score the recorded-time oracle predictor");
  cmd_lab->add_option("--with-constant", lopt.constants,
                      "score a constant predictor with this value (repeatable)");
  attach_config(cmd_lab);

  CompareOpts copt;
  auto* cmd_compare = app.add_subcommand(
      "compare", "pairwise rank-sum comparison of fold metric files");
  cmd_compare->add_option("--folds", copt.fold_specs,
                          "NAME=PATH fold metrics CSV (repeat for each model)");
  cmd_compare->add_option("--significance", copt.significance, "significance level")
      ->capture_default_str();
  cmd_compare->add_option("--output", copt.output, "also write the report here");
  attach_config(cmd_compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cmd_decompose->parsed()) return run_decompose(dopt);
    if (cmd_km->parsed()) return run_km(kopt);
    if (cmd_train->parsed()) return run_train(topt);
    if (cmd_lab->parsed()) return run_lab(lopt);
    if (cmd_compare->parsed()) return run_compare(copt);
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
