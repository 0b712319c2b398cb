// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "survkit/common.hpp"
#include "survkit/dataset.hpp"
#include "survkit/kaplan_meier.hpp"
#include "survkit/losses.hpp"

namespace survkit {

struct ModelConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths{32, 32};  // tanh layers
  std::size_t latent_dim = 4;
  std::size_t n_samples = 200;  // latent draws per subject at inference
  LossWeights weights{};
  double learning_rate = 0.05;
  double momentum = 0.0;  // 0 = plain SGD
  std::size_t batch_size = 64;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;  // epochs without validation improvement
  double dropout = 0.0;       // reserved knob; only 0 is accepted
  std::uint64_t seed = 1;

  void validate() const;  // throws input_error
};

/// Covariates as a dense matrix (one row per subject) plus the survival
/// outcome. Times fed to training are expected on the transformed scale.
struct ModelData {
  Eigen::MatrixXd x;
  std::vector<double> time;
  std::vector<std::uint8_t> event;

  std::size_t size() const { return time.size(); }
  ModelData rows(std::span<const std::size_t> indices) const;
};

/// Requires an all-numeric dataset (i.e. after apply_preprocess).
ModelData make_model_data(const SurvivalDataset& data);

/// Variational encoder-decoder for event times: tanh encoder to a diagonal
/// Gaussian latent, reparameterized sampling, single linear decoder to a
/// scalar time. Training uses one latent draw per subject per step and
/// hand-derived backpropagation; sampled times are clamped at 0 at inference
/// only (training sees the raw linear output).
class SurvedModel {
 public:
  explicit SurvedModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  GaussianLatent encode(std::span<const double> x) const;
  static std::vector<double> reparameterize(const GaussianLatent& latent,
                                            std::span<const double> eps);
  double decode(std::span<const double> z) const;

  std::vector<double> sample_event_times(std::span<const double> x, std::size_t n,
                                         rng::Engine& eng) const;

  /// Mean of sample_event_times; when every draw decodes to the same value
  /// (e.g. zero latent variance) that value is returned without summing.
  double expected_event_time(std::span<const double> x, std::size_t n,
                             rng::Engine& eng) const;

  /// Product-limit curve over the n sampled times, all treated as events:
  /// one minus the empirical CDF of the model's time distribution at x.
  StepSurvival survival_function(std::span<const double> x, std::size_t n,
                                 rng::Engine& eng) const;

  /// expected_event_time for every row, sharing one noise stream.
  std::vector<double> predict_expected(const Eigen::MatrixXd& x, std::size_t n,
                                       rng::Engine& eng) const;

  /// One SGD (or momentum) update from a single reparameterized draw per
  /// subject. Throws numeric_error when the loss or any parameter leaves the
  /// finite range; the model state is left as-is for diagnostics.
  LossBreakdown train_step(const ModelData& batch, rng::Engine& eng);

  /// Forward loss with caller-supplied noise (one row per subject), exposed
  /// so gradient checks can freeze the stochastic path.
  LossBreakdown batch_loss(const ModelData& batch, const Eigen::MatrixXd& eps) const;

  /// Loss plus d(total)/d(parameter) in flat parameter order.
  std::pair<LossBreakdown, std::vector<double>> batch_gradients(
      const ModelData& batch, const Eigen::MatrixXd& eps) const;

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  /// Versioned checkpoint: config plus the flat parameter array.
  std::string to_json() const;
  static SurvedModel from_json(const std::string& text);

 private:
  struct Dense {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
  };

  struct Forward {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, then tanh layers
    Eigen::MatrixXd mu;
    Eigen::MatrixXd log_var;
    Eigen::MatrixXd z;
    Eigen::VectorXd pred;
  };

  Forward forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& eps) const;
  LossBreakdown backward(const ModelData& batch, const Forward& f,
                         const Eigen::MatrixXd& eps, std::vector<double>& grad) const;
  Eigen::MatrixXd draw_eps(std::size_t n_rows, rng::Engine& eng) const;

  ModelConfig config_;
  std::vector<Dense> hidden_;
  Dense mu_head_;
  Dense log_var_head_;
  Dense decoder_;  // 1 x latent_dim
  std::vector<double> velocity_;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown train;    // per-batch mean
  double val_ci = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_ci = 0.0;
  bool stopped_early = false;
};

/// Epoch loop with shuffled mini-batches. After each epoch the validation
/// C-index of expected-time predictions is computed; the best-scoring weights
/// are kept and training stops after `patience` epochs without improvement.
/// Fully deterministic per (data, config, seed).
FitResult fit(SurvedModel& model, const ModelData& train, const ModelData& val);

}  // namespace survkit
