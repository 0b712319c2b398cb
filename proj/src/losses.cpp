// Copyright 2026 survkit contributors
//
// Licensed under the Apache License, Version 2.0
// <https://www.apache.org/licenses/LICENSE-2.0>.

#include "survkit/losses.hpp"

#include <cmath>
#include <cstddef>

#include "survkit/common.hpp"

namespace survkit {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_batch(std::span<const double> pred, std::span<const double> true_t,
                 std::span<const std::uint8_t> is_event) {
  if (pred.size() != true_t.size() || pred.size() != is_event.size()) {
    throw input_error("loss inputs disagree on batch size");
  }
}

double log_sigmoid(double d) {
  if (d >= 0.0) return -std::log1p(std::exp(-d));
  return d - std::log1p(std::exp(d));
}

double sigmoid(double d) {
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

}  // namespace

double l_event(std::span<const double> pred, std::span<const double> true_t,
               std::span<const std::uint8_t> is_event) {
  check_batch(pred, true_t, is_event);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!is_event[i]) continue;
    sum += std::abs(true_t[i] - pred[i]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double l_censored(std::span<const double> pred, std::span<const double> true_t,
                  std::span<const std::uint8_t> is_event) {
  check_batch(pred, true_t, is_event);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (is_event[i]) continue;
    sum += std::max(0.0, true_t[i] - pred[i]);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double kl_std_normal(std::span<const GaussianLatent> latents) {
  if (latents.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& lat : latents) {
    if (lat.mu.size() != lat.log_var.size()) {
      throw input_error("latent mu and log_var disagree on dimension");
    }
    double subject = 0.0;
    for (std::size_t d = 0; d < lat.mu.size(); ++d) {
      subject += lat.mu[d] * lat.mu[d] + std::exp(lat.log_var[d]) - 1.0 -
                 lat.log_var[d];
    }
    sum += 0.5 * subject;
  }
  return sum / static_cast<double>(latents.size());
}

double c_lb(std::span<const double> pred,
            std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [late, early] : pairs) {
    if (late >= pred.size() || early >= pred.size()) {
      throw input_error("pair index out of range");
    }
    sum += 1.0 + log_sigmoid(pred[late] - pred[early]) / kLn2;
  }
  return sum / static_cast<double>(pairs.size());
}

LossBreakdown total_loss(const LossWeights& weights, double le, double lc,
                         double lkl, double clb, bool events_present,
                         bool censored_present) {
  LossBreakdown out;
  out.l_e = le;
  out.l_c = lc;
  out.l_kl = lkl;
  out.c_lb = clb;
  out.event_rows_present = events_present;
  out.censored_rows_present = censored_present;
  out.total = weights.lambda_e * le + weights.lambda_c * lc +
              weights.lambda_kl * lkl - weights.lambda_lb * clb;
  return out;
}

LossBreakdown compute_losses(const LossWeights& weights, std::span<const double> pred,
                             std::span<const double> true_t,
                             std::span<const std::uint8_t> is_event,
                             std::span<const GaussianLatent> latents,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  check_batch(pred, true_t, is_event);
  bool any_event = false;
  bool any_censored = false;
  for (bool e : is_event) (e ? any_event : any_censored) = true;
  return total_loss(weights, l_event(pred, true_t, is_event),
                    l_censored(pred, true_t, is_event), kl_std_normal(latents),
                    c_lb(pred, pairs), any_event, any_censored);
}

std::vector<double> l_event_gradient(std::span<const double> pred,
                                     std::span<const double> true_t,
                                     std::span<const std::uint8_t> is_event) {
  check_batch(pred, true_t, is_event);
  std::vector<double> grad(pred.size(), 0.0);
  std::size_t n = 0;
  for (bool e : is_event) n += e ? 1 : 0;
  if (n == 0) return grad;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!is_event[i]) continue;
    const double r = pred[i] - true_t[i];
    // subgradient 0 exactly at the kink
    if (r > 0.0) grad[i] = inv;
    else if (r < 0.0) grad[i] = -inv;
  }
  return grad;
}

std::vector<double> l_censored_gradient(std::span<const double> pred,
                                        std::span<const double> true_t,
                                        std::span<const std::uint8_t> is_event) {
  check_batch(pred, true_t, is_event);
  std::vector<double> grad(pred.size(), 0.0);
  std::size_t n = 0;
  for (bool e : is_event) n += e ? 0 : 1;
  if (n == 0) return grad;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (is_event[i]) continue;
    if (true_t[i] - pred[i] > 0.0) grad[i] = -inv;
  }
  return grad;
}

std::vector<GaussianLatent> kl_std_normal_gradient(
    std::span<const GaussianLatent> latents) {
  std::vector<GaussianLatent> grads(latents.size());
  if (latents.empty()) return grads;
  const double inv = 1.0 / static_cast<double>(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const auto& lat = latents[i];
    grads[i].mu.resize(lat.mu.size());
    grads[i].log_var.resize(lat.log_var.size());
    for (std::size_t d = 0; d < lat.mu.size(); ++d) {
      grads[i].mu[d] = lat.mu[d] * inv;
      grads[i].log_var[d] = 0.5 * (std::exp(lat.log_var[d]) - 1.0) * inv;
    }
  }
  return grads;
}

std::vector<double> c_lb_gradient(
    std::span<const double> pred,
    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<double> grad(pred.size(), 0.0);
  if (pairs.empty()) return grad;
  const double inv = 1.0 / (static_cast<double>(pairs.size()) * kLn2);
  for (const auto& [late, early] : pairs) {
    if (late >= pred.size() || early >= pred.size()) {
      throw input_error("pair index out of range");
    }
    // d/dd log2(sigmoid(d)) = (1 - sigmoid(d)) / ln 2
    const double g = (1.0 - sigmoid(pred[late] - pred[early])) * inv;
    grad[late] += g;
    grad[early] -= g;
  }
  return grad;
}

LossGradients loss_gradients(const LossWeights& weights, std::span<const double> pred,
                             std::span<const double> true_t,
                             std::span<const std::uint8_t> is_event,
                             std::span<const GaussianLatent> latents,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  LossGradients out;
  out.d_pred.assign(pred.size(), 0.0);

  const auto ge = l_event_gradient(pred, true_t, is_event);
  const auto gc = l_censored_gradient(pred, true_t, is_event);
  const auto glb = c_lb_gradient(pred, pairs);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.d_pred[i] = weights.lambda_e * ge[i] + weights.lambda_c * gc[i] -
                    weights.lambda_lb * glb[i];
  }

  out.d_latent = kl_std_normal_gradient(latents);
  for (auto& lat : out.d_latent) {
    for (auto& v : lat.mu) v *= weights.lambda_kl;
    for (auto& v : lat.log_var) v *= weights.lambda_kl;
  }
  return out;
}

}  // namespace survkit
