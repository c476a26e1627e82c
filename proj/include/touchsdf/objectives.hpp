// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "touchsdf/grid.hpp"
#include "touchsdf/touch.hpp"

namespace touchsdf {

/// Scalar objective and, when requested, its gradient w.r.t. the predicted
/// grid values (R^3, z-major). Kinks get subgradient 0.
struct LossValue {
  double value = 0.0;
  std::vector<double> grad;
};

struct WarmupSchedule {
  double target = 1.0;  // lambda_NI after the ramp
  int steps = 1000;     // W
};

struct LossWeights {
  double l1 = 1.0;
  double eik = 0.1;
  double normal = 0.1;
  double kl = 1e-4;
  double ni = 1.0;
  double contact = 1.0;
  double tau = 0.1;
  WarmupSchedule ni_warmup;

  /// Throws kInvalidArgument on negative weights or tau <= 0.
  void validate() const;
};

// Config keys: lambda_l1, lambda_eik, lambda_n, lambda_kl, lambda_ni,
// lambda_c, tau, ni_warmup_steps. Missing keys keep their defaults; unknown
// keys are rejected.
void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);

struct LossReport {
  std::vector<std::pair<std::string, double>> terms;  // unweighted
  double total = 0.0;
  std::vector<double> grad;  // d total / d S_hat, empty when not requested

  double term(const std::string& name) const;
  nlohmann::json to_json() const;
};

LossValue l1_loss(const SdfGrid& s_hat, const SdfGrid& s, bool with_grad = true);

/// Guard inside the gradient normalization of the eikonal and normal terms.
inline constexpr double kGradientGuard = 1e-12;

LossValue eikonal_loss(const SdfGrid& s_hat, bool with_grad = true);

/// Narrow band used by normal_loss: |S| < 2h.
LossValue normal_loss(const SdfGrid& s_hat, const SdfGrid& s, bool with_grad = true);

struct KlValue {
  double value = 0.0;
  std::vector<double> grad_mu;
  std::vector<double> grad_logvar;
};
KlValue kl_loss(const std::vector<double>& mu, const std::vector<double>& logvar);

LossReport vae_objective(const SdfGrid& s_hat, const SdfGrid& s, const std::vector<double>& mu,
                         const std::vector<double>& logvar, const LossWeights& w, bool with_grad = true);

/// psi_tau(s) = tau * tanh(relu(s) / tau)
double saturate(double s, double tau);
/// d psi_tau / ds (0 for s <= 0).
double saturate_derivative(double s, double tau);

/// 3D hand-volume mask, 1 where psi_tau(-S_h) > 0, i.e. S_h < 0.
std::vector<std::uint8_t> hand_volume_mask(const SdfGrid& s_h);

LossValue ni_loss(const SdfGrid& s_o_hat, const SdfGrid& s_h, double tau, bool with_grad = true);
LossValue contact_loss(const SdfGrid& s_o_hat, const std::vector<std::uint8_t>& contact, bool with_grad = true);

/// (1 - t)^2; throws kInvalidArgument outside [0, 1].
double time_weight(double t);

struct PhysicsEnergy {
  double energy = 0.0;
  double ni = 0.0;
  double contact = 0.0;
  std::vector<double> grad;
};
PhysicsEnergy physics_energy(const SdfGrid& s_o_hat, const SdfGrid& s_h, const TouchTensor& touch, double lambda_ni,
                             double lambda_c, double tau, bool with_grad = true);

/// Linear ramp 0 -> target over `steps`, then constant.
double warmup(const WarmupSchedule& schedule, int step);

/// sum_b w(t_b) l_b / max(eps, sum_b w(t_b))
double time_weighted_mean(const std::vector<double>& losses, const std::vector<double>& times);

}  // namespace touchsdf
