// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace survkit {

struct LossWeights {
  double lambda_e = 1.0;
  double lambda_c = 1.0;
  double lambda_kl = 1.0;
  double lambda_lb = 1.0;
};

/// Diagonal Gaussian posterior parameters for one subject.
struct GaussianLatent {
  std::vector<double> mu;
  std::vector<double> log_var;
};

struct LossBreakdown {
  double l_e = 0.0;
  double l_c = 0.0;
  double l_kl = 0.0;
  double c_lb = 0.0;
  double total = 0.0;
  bool event_rows_present = false;
  bool censored_rows_present = false;
};

/// Mean absolute error over event rows. A batch without events contributes 0
/// (flagged in LossBreakdown at the call site).
double l_event(std::span<const double> pred, std::span<const double> true_t,
               std::span<const std::uint8_t> is_event);

/// Mean hinge penalty max(0, t - pred) over censored rows: predicting before
/// the censoring time is penalized, predicting after it is not.
double l_censored(std::span<const double> pred, std::span<const double> true_t,
                  std::span<const std::uint8_t> is_event);

/// Mean KL(N(mu, diag(exp(log_var))) || N(0, I)) over the batch, closed form
/// 0.5 * sum(mu^2 + exp(log_var) - 1 - log_var).
double kl_std_normal(std::span<const GaussianLatent> latents);

/// Differentiable concordance lower bound: mean over comparable pairs of
/// 1 + log2(sigmoid(pred_late - pred_early)). Pairs are (later, earlier) by
/// reference time. The sigmoid is evaluated in log space.
double c_lb(std::span<const double> pred,
            std::span<const std::pair<std::size_t, std::size_t>> pairs);

LossBreakdown total_loss(const LossWeights& weights, double le, double lc,
                         double lkl, double clb, bool events_present = true,
                         bool censored_present = true);

/// Convenience: all four terms plus the weighted total for one batch.
LossBreakdown compute_losses(const LossWeights& weights, std::span<const double> pred,
                             std::span<const double> true_t,
                             std::span<const std::uint8_t> is_event,
                             std::span<const GaussianLatent> latents,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// Gradients of the weighted total loss with respect to the model outputs:
/// every prediction entry and every latent (mu, log_var) entry. Kinks
/// (|.| at zero, hinge boundary) take subgradient 0.
struct LossGradients {
  std::vector<double> d_pred;
  std::vector<GaussianLatent> d_latent;  // same shapes as the inputs
};

LossGradients loss_gradients(const LossWeights& weights, std::span<const double> pred,
                             std::span<const double> true_t,
                             std::span<const std::uint8_t> is_event,
                             std::span<const GaussianLatent> latents,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs);

// Unweighted per-term gradients, exposed for finite-difference checks.
std::vector<double> l_event_gradient(std::span<const double> pred,
                                     std::span<const double> true_t,
                                     std::span<const std::uint8_t> is_event);
std::vector<double> l_censored_gradient(std::span<const double> pred,
                                        std::span<const double> true_t,
                                        std::span<const std::uint8_t> is_event);
std::vector<GaussianLatent> kl_std_normal_gradient(std::span<const GaussianLatent> latents);
std::vector<double> c_lb_gradient(
    std::span<const double> pred,
    std::span<const std::pair<std::size_t, std::size_t>> pairs);

}  // namespace survkit
