// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/surved.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "json.hpp"

#include "survkit/concordance.hpp"

namespace survkit {

namespace {

// Stream tags keeping initialization, shuffling, reparameterization noise and
// validation sampling on independent deterministic substreams of the seed.
constexpr std::uint64_t kInitSalt = 0x696e6974;
constexpr std::uint64_t kShuffleSalt = 0x73687566;
constexpr std::uint64_t kNoiseSalt = 0x6e6f6973;
constexpr std::uint64_t kValSalt = 0x76616c;
constexpr int kCheckpointVersion = 1;

void glorot_fill(Eigen::MatrixXd& w, rng::Engine& eng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  double* p = w.data();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    p[i] = (2.0 * rng::uniform01(eng) - 1.0) * limit;
  }
}

void append(std::vector<double>& out, const double* p, std::size_t n) {
  out.insert(out.end(), p, p + n);
}

void check_nonneg_finite(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw input_error(std::string("model config: ") + name +
                      " must be finite and >= 0");
  }
}

void check_model_batch(const ModelConfig& cfg, const ModelData& batch,
                       const Eigen::MatrixXd& eps) {
  if (batch.size() == 0) throw input_error("model batch is empty");
  if (batch.x.rows() != static_cast<Eigen::Index>(batch.size()) ||
      batch.event.size() != batch.size()) {
    throw input_error("model batch fields disagree on row count");
  }
  if (batch.x.cols() != static_cast<Eigen::Index>(cfg.input_dim)) {
    throw input_error("model batch covariate dimension does not match the config");
  }
  if (!batch.x.allFinite()) throw input_error("model batch has non-finite covariates");
  for (double t : batch.time) {
    if (!std::isfinite(t)) throw input_error("model batch has non-finite times");
  }
  if (eps.rows() != batch.x.rows() ||
      eps.cols() != static_cast<Eigen::Index>(cfg.latent_dim)) {
    throw input_error("noise matrix shape does not match the batch");
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0) throw input_error("model config: input_dim must be >= 1");
  for (std::size_t w : hidden_widths) {
    if (w == 0) throw input_error("model config: hidden widths must be >= 1");
  }
  if (latent_dim == 0) throw input_error("model config: latent_dim must be >= 1");
  if (n_samples == 0) throw input_error("model config: n_samples must be >= 1");
  if (batch_size == 0) throw input_error("model config: batch_size must be >= 1");
  if (patience == 0) throw input_error("model config: patience must be >= 1");
  check_nonneg_finite(learning_rate, "learning_rate");
  if (!std::isfinite(momentum) || momentum < 0.0 || momentum >= 1.0) {
    throw input_error("model config: momentum must be in [0, 1)");
  }
  if (dropout != 0.0) {
    throw input_error("model config: dropout is a reserved knob and must be 0");
  }
  check_nonneg_finite(weights.lambda_e, "lambda_e");
  check_nonneg_finite(weights.lambda_c, "lambda_c");
  check_nonneg_finite(weights.lambda_kl, "lambda_kl");
  check_nonneg_finite(weights.lambda_lb, "lambda_lb");
}

ModelData ModelData::rows(std::span<const std::size_t> indices) const {
  ModelData out;
  out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
  out.time.reserve(indices.size());
  out.event.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= size()) throw input_error("row index out of range");
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(i));
    out.time.push_back(time[i]);
    out.event.push_back(event[i]);
  }
  return out;
}

ModelData make_model_data(const SurvivalDataset& data) {
  const auto rows = data.numeric_matrix();
  ModelData out;
  out.time = data.times();
  out.event = data.events();
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  out.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

SurvedModel::SurvedModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  auto eng = rng::make_engine(rng::mix(config_.seed, kInitSalt));
  std::size_t fan_in = config_.input_dim;
  for (std::size_t width : config_.hidden_widths) {
    Dense layer;
    layer.w.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(fan_in));
    glorot_fill(layer.w, eng);
    layer.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width));
    hidden_.push_back(std::move(layer));
    fan_in = width;
  }
  const auto latent = static_cast<Eigen::Index>(config_.latent_dim);
  mu_head_.w.resize(latent, static_cast<Eigen::Index>(fan_in));
  glorot_fill(mu_head_.w, eng);
  mu_head_.b = Eigen::VectorXd::Zero(latent);
  log_var_head_.w.resize(latent, static_cast<Eigen::Index>(fan_in));
  glorot_fill(log_var_head_.w, eng);
  log_var_head_.b = Eigen::VectorXd::Zero(latent);
  decoder_.w.resize(1, latent);
  glorot_fill(decoder_.w, eng);
  decoder_.b = Eigen::VectorXd::Zero(1);
  velocity_.assign(parameter_count(), 0.0);
}

GaussianLatent SurvedModel::encode(std::span<const double> x) const {
  if (x.size() != config_.input_dim) {
    throw input_error("encode: covariate vector has the wrong dimension");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw input_error("encode: non-finite covariate");
  }
  Eigen::RowVectorXd a(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) a(static_cast<Eigen::Index>(i)) = x[i];
  for (const auto& layer : hidden_) {
    a = ((a * layer.w.transpose()) + layer.b.transpose()).array().tanh();
  }
  const Eigen::RowVectorXd mu = (a * mu_head_.w.transpose()) + mu_head_.b.transpose();
  const Eigen::RowVectorXd lv =
      (a * log_var_head_.w.transpose()) + log_var_head_.b.transpose();
  GaussianLatent out;
  out.mu.assign(mu.data(), mu.data() + mu.size());
  out.log_var.assign(lv.data(), lv.data() + lv.size());
  return out;
}

std::vector<double> SurvedModel::reparameterize(const GaussianLatent& latent,
                                                std::span<const double> eps) {
  if (latent.mu.size() != latent.log_var.size() || eps.size() != latent.mu.size()) {
    throw input_error("reparameterize: dimension mismatch");
  }
  std::vector<double> z(eps.size());
  for (std::size_t d = 0; d < z.size(); ++d) {
    z[d] = latent.mu[d] + std::exp(0.5 * latent.log_var[d]) * eps[d];
  }
  return z;
}

double SurvedModel::decode(std::span<const double> z) const {
  if (z.size() != config_.latent_dim) {
    throw input_error("decode: latent vector has the wrong dimension");
  }
  double out = decoder_.b(0);
  for (std::size_t d = 0; d < z.size(); ++d) {
    out += decoder_.w(0, static_cast<Eigen::Index>(d)) * z[d];
  }
  return out;
}

std::vector<double> SurvedModel::sample_event_times(std::span<const double> x,
                                                    std::size_t n,
                                                    rng::Engine& eng) const {
  if (n == 0) throw input_error("sample_event_times: n must be >= 1");
  const GaussianLatent latent = encode(x);
  std::vector<double> eps(config_.latent_dim);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& e : eps) e = rng::gaussian(eng);
    out.push_back(std::max(0.0, decode(reparameterize(latent, eps))));
  }
  return out;
}

double SurvedModel::expected_event_time(std::span<const double> x, std::size_t n,
                                        rng::Engine& eng) const {
  const auto samples = sample_event_times(x, n, eng);
  const bool constant =
      std::all_of(samples.begin(), samples.end(),
                  [&](double v) { return v == samples.front(); });
  if (constant) return samples.front();  // exact for degenerate latent variance
  const double sum = std::accumulate(samples.begin(), samples.end(), 0.0);
  return sum / static_cast<double>(samples.size());
}

StepSurvival SurvedModel::survival_function(std::span<const double> x, std::size_t n,
                                            rng::Engine& eng) const {
  const auto samples = sample_event_times(x, n, eng);
  const std::vector<std::uint8_t> all_events(samples.size(), 1);
  return km_estimate(samples, all_events);
}

std::vector<double> SurvedModel::predict_expected(const Eigen::MatrixXd& x,
                                                  std::size_t n,
                                                  rng::Engine& eng) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = x(r, c);
    }
    out.push_back(expected_event_time(row, n, eng));
  }
  return out;
}

SurvedModel::Forward SurvedModel::forward(const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& eps) const {
  Forward f;
  f.acts.reserve(hidden_.size() + 1);
  f.acts.push_back(x);
  for (const auto& layer : hidden_) {
    f.acts.push_back(((f.acts.back() * layer.w.transpose()).rowwise() +
                      layer.b.transpose())
                         .array()
                         .tanh()
                         .matrix());
  }
  const Eigen::MatrixXd& h = f.acts.back();
  f.mu = (h * mu_head_.w.transpose()).rowwise() + mu_head_.b.transpose();
  f.log_var = (h * log_var_head_.w.transpose()).rowwise() + log_var_head_.b.transpose();
  f.z = (f.mu.array() + (0.5 * f.log_var.array()).exp() * eps.array()).matrix();
  f.pred = f.z * decoder_.w.transpose();
  f.pred.array() += decoder_.b(0);
  return f;
}

LossBreakdown SurvedModel::batch_loss(const ModelData& batch,
                                      const Eigen::MatrixXd& eps) const {
  check_model_batch(config_, batch, eps);
  const Forward f = forward(batch.x, eps);
  std::vector<double> pred(f.pred.data(), f.pred.data() + f.pred.size());
  std::vector<GaussianLatent> latents(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    latents[r].mu.assign(f.mu.row(i).begin(), f.mu.row(i).end());
    latents[r].log_var.assign(f.log_var.row(i).begin(), f.log_var.row(i).end());
  }
  const auto pairs = comparable_pairs(batch.time, batch.event);
  return compute_losses(config_.weights, pred, batch.time, batch.event, latents, pairs);
}

LossBreakdown SurvedModel::backward(const ModelData& batch, const Forward& f,
                                    const Eigen::MatrixXd& eps,
                                    std::vector<double>& grad) const {
  const auto n_rows = static_cast<Eigen::Index>(batch.size());
  const auto latent = static_cast<Eigen::Index>(config_.latent_dim);

  std::vector<double> pred(f.pred.data(), f.pred.data() + f.pred.size());
  std::vector<GaussianLatent> latents(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    latents[r].mu.assign(f.mu.row(i).begin(), f.mu.row(i).end());
    latents[r].log_var.assign(f.log_var.row(i).begin(), f.log_var.row(i).end());
  }
  const auto pairs = comparable_pairs(batch.time, batch.event);
  const LossBreakdown lb =
      compute_losses(config_.weights, pred, batch.time, batch.event, latents, pairs);
  const LossGradients lg =
      loss_gradients(config_.weights, pred, batch.time, batch.event, latents, pairs);

  const Eigen::Map<const Eigen::VectorXd> dpred(lg.d_pred.data(),
                                                static_cast<Eigen::Index>(lg.d_pred.size()));
  Eigen::MatrixXd dmu_kl(n_rows, latent);
  Eigen::MatrixXd dlv_kl(n_rows, latent);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    for (Eigen::Index d = 0; d < latent; ++d) {
      dmu_kl(r, d) = lg.d_latent[static_cast<std::size_t>(r)].mu[static_cast<std::size_t>(d)];
      dlv_kl(r, d) =
          lg.d_latent[static_cast<std::size_t>(r)].log_var[static_cast<std::size_t>(d)];
    }
  }

  const Eigen::VectorXd dw_dec = f.z.transpose() * dpred;
  const double db_dec = dpred.sum();
  const Eigen::MatrixXd dz = dpred * decoder_.w;

  const Eigen::ArrayXXd sigma = (0.5 * f.log_var.array()).exp();
  const Eigen::MatrixXd dmu = dz + dmu_kl;
  const Eigen::MatrixXd dlv =
      (dz.array() * eps.array() * sigma * 0.5).matrix() + dlv_kl;

  const Eigen::MatrixXd& h = f.acts.back();
  const Eigen::MatrixXd dw_mu = dmu.transpose() * h;
  const Eigen::VectorXd db_mu = dmu.colwise().sum().transpose();
  const Eigen::MatrixXd dw_lv = dlv.transpose() * h;
  const Eigen::VectorXd db_lv = dlv.colwise().sum().transpose();

  std::vector<Eigen::MatrixXd> dw_hidden(hidden_.size());
  std::vector<Eigen::VectorXd> db_hidden(hidden_.size());
  Eigen::MatrixXd da = dmu * mu_head_.w + dlv * log_var_head_.w;
  for (std::size_t l = hidden_.size(); l-- > 0;) {
    const Eigen::MatrixXd dzl =
        (da.array() * (1.0 - f.acts[l + 1].array().square())).matrix();
    dw_hidden[l] = dzl.transpose() * f.acts[l];
    db_hidden[l] = dzl.colwise().sum().transpose();
    if (l > 0) da = dzl * hidden_[l].w;
  }

  grad.clear();
  grad.reserve(parameter_count());
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    append(grad, dw_hidden[l].data(), static_cast<std::size_t>(dw_hidden[l].size()));
    append(grad, db_hidden[l].data(), static_cast<std::size_t>(db_hidden[l].size()));
  }
  append(grad, dw_mu.data(), static_cast<std::size_t>(dw_mu.size()));
  append(grad, db_mu.data(), static_cast<std::size_t>(db_mu.size()));
  append(grad, dw_lv.data(), static_cast<std::size_t>(dw_lv.size()));
  append(grad, db_lv.data(), static_cast<std::size_t>(db_lv.size()));
  append(grad, dw_dec.data(), static_cast<std::size_t>(dw_dec.size()));
  grad.push_back(db_dec);
  return lb;
}

std::pair<LossBreakdown, std::vector<double>> SurvedModel::batch_gradients(
    const ModelData& batch, const Eigen::MatrixXd& eps) const {
  check_model_batch(config_, batch, eps);
  const Forward f = forward(batch.x, eps);
  std::vector<double> grad;
  const LossBreakdown lb = backward(batch, f, eps, grad);
  return {lb, std::move(grad)};
}

Eigen::MatrixXd SurvedModel::draw_eps(std::size_t n_rows, rng::Engine& eng) const {
  Eigen::MatrixXd eps(static_cast<Eigen::Index>(n_rows),
                      static_cast<Eigen::Index>(config_.latent_dim));
  // subject-major draw order so batch composition alone fixes the noise
  for (Eigen::Index r = 0; r < eps.rows(); ++r) {
    for (Eigen::Index c = 0; c < eps.cols(); ++c) {
      eps(r, c) = rng::gaussian(eng);
    }
  }
  return eps;
}

LossBreakdown SurvedModel::train_step(const ModelData& batch, rng::Engine& eng) {
  const Eigen::MatrixXd eps = draw_eps(batch.size(), eng);
  auto [lb, grad] = batch_gradients(batch, eps);
  if (!std::isfinite(lb.total)) {
    throw numeric_error("training loss became non-finite");
  }
  auto params = parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = config_.momentum * velocity_[i] - config_.learning_rate * grad[i];
    params[i] += velocity_[i];
  }
  for (double p : params) {
    if (!std::isfinite(p)) {
      throw numeric_error("model parameters became non-finite after an update");
    }
  }
  set_parameters(params);
  return lb;
}

std::size_t SurvedModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : hidden_) {
    n += static_cast<std::size_t>(layer.w.size() + layer.b.size());
  }
  n += static_cast<std::size_t>(mu_head_.w.size() + mu_head_.b.size());
  n += static_cast<std::size_t>(log_var_head_.w.size() + log_var_head_.b.size());
  n += static_cast<std::size_t>(decoder_.w.size() + decoder_.b.size());
  return n;
}

std::vector<double> SurvedModel::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : hidden_) {
    append(out, layer.w.data(), static_cast<std::size_t>(layer.w.size()));
    append(out, layer.b.data(), static_cast<std::size_t>(layer.b.size()));
  }
  append(out, mu_head_.w.data(), static_cast<std::size_t>(mu_head_.w.size()));
  append(out, mu_head_.b.data(), static_cast<std::size_t>(mu_head_.b.size()));
  append(out, log_var_head_.w.data(), static_cast<std::size_t>(log_var_head_.w.size()));
  append(out, log_var_head_.b.data(), static_cast<std::size_t>(log_var_head_.b.size()));
  append(out, decoder_.w.data(), static_cast<std::size_t>(decoder_.w.size()));
  append(out, decoder_.b.data(), static_cast<std::size_t>(decoder_.b.size()));
  return out;
}

void SurvedModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw input_error("parameter vector length does not match the model");
  }
  for (double v : flat) {
    if (!std::isfinite(v)) throw input_error("parameter vector has non-finite entries");
  }
  const double* p = flat.data();
  const auto take = [&p](Eigen::MatrixXd& m) {
    std::copy(p, p + m.size(), m.data());
    p += m.size();
  };
  const auto take_vec = [&p](Eigen::VectorXd& v) {
    std::copy(p, p + v.size(), v.data());
    p += v.size();
  };
  for (auto& layer : hidden_) {
    take(layer.w);
    take_vec(layer.b);
  }
  take(mu_head_.w);
  take_vec(mu_head_.b);
  take(log_var_head_.w);
  take_vec(log_var_head_.b);
  take(decoder_.w);
  take_vec(decoder_.b);
}

std::string SurvedModel::to_json() const {
  nlohmann::json cfg;
  cfg["input_dim"] = config_.input_dim;
  cfg["hidden_widths"] = config_.hidden_widths;
  cfg["latent_dim"] = config_.latent_dim;
  cfg["n_samples"] = config_.n_samples;
  cfg["learning_rate"] = config_.learning_rate;
  cfg["momentum"] = config_.momentum;
  cfg["batch_size"] = config_.batch_size;
  cfg["max_epochs"] = config_.max_epochs;
  cfg["patience"] = config_.patience;
  cfg["dropout"] = config_.dropout;
  cfg["seed"] = config_.seed;
  cfg["loss_weights"] = {{"lambda_e", config_.weights.lambda_e},
                         {"lambda_c", config_.weights.lambda_c},
                         {"lambda_kl", config_.weights.lambda_kl},
                         {"lambda_lb", config_.weights.lambda_lb}};
  nlohmann::json j;
  j["format"] = "survkit-model";
  j["format_version"] = kCheckpointVersion;
  j["config"] = cfg;
  j["parameters"] = parameters();
  return j.dump(2) + "\n";
}

SurvedModel SurvedModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "survkit-model") {
      throw input_error("checkpoint format field is not 'survkit-model'");
    }
    if (j.at("format_version").get<int>() != kCheckpointVersion) {
      throw input_error("unsupported checkpoint format_version");
    }
    const auto& c = j.at("config");
    ModelConfig cfg;
    cfg.input_dim = c.at("input_dim").get<std::size_t>();
    cfg.hidden_widths = c.at("hidden_widths").get<std::vector<std::size_t>>();
    cfg.latent_dim = c.at("latent_dim").get<std::size_t>();
    cfg.n_samples = c.at("n_samples").get<std::size_t>();
    cfg.learning_rate = c.at("learning_rate").get<double>();
    cfg.momentum = c.at("momentum").get<double>();
    cfg.batch_size = c.at("batch_size").get<std::size_t>();
    cfg.max_epochs = c.at("max_epochs").get<std::size_t>();
    cfg.patience = c.at("patience").get<std::size_t>();
    cfg.dropout = c.at("dropout").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    const auto& w = c.at("loss_weights");
    cfg.weights.lambda_e = w.at("lambda_e").get<double>();
    cfg.weights.lambda_c = w.at("lambda_c").get<double>();
    cfg.weights.lambda_kl = w.at("lambda_kl").get<double>();
    cfg.weights.lambda_lb = w.at("lambda_lb").get<double>();
    SurvedModel model(cfg);
    const auto params = j.at("parameters").get<std::vector<double>>();
    if (params.size() != model.parameter_count()) {
      throw input_error("checkpoint parameter count does not match its config");
    }
    model.set_parameters(params);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("checkpoint is missing fields: ") + e.what());
  }
}

FitResult fit(SurvedModel& model, const ModelData& train, const ModelData& val) {
  const ModelConfig& cfg = model.config();
  if (train.size() == 0 || val.size() == 0) {
    throw input_error("fit: training and validation sets must be nonempty");
  }
  if (train.x.cols() != static_cast<Eigen::Index>(cfg.input_dim) ||
      val.x.cols() != static_cast<Eigen::Index>(cfg.input_dim)) {
    throw input_error("fit: covariate dimension does not match the model");
  }
  if (comparable_pairs(val.time, val.event).empty()) {
    throw input_error("fit: validation set has no comparable pairs");
  }

  FitResult out;
  std::vector<double> best = model.parameters();
  double best_ci = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto shuffle_eng =
        rng::make_engine(rng::mix(rng::mix(cfg.seed, kShuffleSalt), epoch));
    auto noise_eng = rng::make_engine(rng::mix(rng::mix(cfg.seed, kNoiseSalt), epoch));
    const auto order = rng::shuffled_indices(train.size(), shuffle_eng);

    LossBreakdown mean{};
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const LossBreakdown lb = model.train_step(train.rows(idx), noise_eng);
      mean.l_e += lb.l_e;
      mean.l_c += lb.l_c;
      mean.l_kl += lb.l_kl;
      mean.c_lb += lb.c_lb;
      mean.total += lb.total;
      mean.event_rows_present = mean.event_rows_present || lb.event_rows_present;
      mean.censored_rows_present = mean.censored_rows_present || lb.censored_rows_present;
      ++n_batches;
    }
    const double inv = 1.0 / static_cast<double>(n_batches);
    mean.l_e *= inv;
    mean.l_c *= inv;
    mean.l_kl *= inv;
    mean.c_lb *= inv;
    mean.total *= inv;

    auto val_eng = rng::make_engine(rng::mix(rng::mix(cfg.seed, kValSalt), epoch));
    const auto preds = model.predict_expected(val.x, cfg.n_samples, val_eng);
    for (double p : preds) {
      if (!std::isfinite(p)) {
        throw numeric_error("validation predictions became non-finite");
      }
    }
    const double ci = decompose(count_pairs_fast(val.time, val.event, preds)).ci;

    out.history.push_back({epoch, mean, ci});
    if (ci > best_ci) {
      best_ci = ci;
      best = model.parameters();
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      out.stopped_early = true;
      break;
    }
  }
  model.set_parameters(best);
  out.best_val_ci = best_ci;
  return out;
}

}  // namespace survkit
