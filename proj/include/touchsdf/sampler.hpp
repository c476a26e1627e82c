// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "json.hpp"
#include "touchsdf/flow.hpp"
#include "touchsdf/touch.hpp"

namespace touchsdf {

struct SamplerConfig {
  int steps = 50;          // Euler steps; the grid has steps + 1 times
  double t_end = 1e-3;
  std::vector<double> time_grid;  // optional explicit grid, overrides steps/t_end
  double beta = 0.9;
  double eta = 2.0;
  double trust_ratio = 2.0;
  double lambda_ni = 30.0;  // penetration is a hard constraint; contacts are noisy evidence
  double lambda_c = 1.0;
  double tau = 0.1;
  bool guidance = true;
  bool projection = true;
  std::uint64_t seed = 0;

  /// Uniform grid 1 -> t_end unless time_grid is set.
  std::vector<double> times() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const SamplerConfig& c);
void from_json(const nlohmann::json& j, SamplerConfig& c);

inline constexpr double kGuidanceNormEps = 1e-8;

/// x0_hat = [(1 - sigma_min) x_t - s(t) v] / [s(t) + (1 - sigma_min)(1 - t)]
Latent clean_estimate(const Latent& x_t, const Latent& v, double t, double sigma_min);

/// Hand volume and touch tensor the physics energy is evaluated against.
struct PhysicsContext {
  const SdfGrid* hand = nullptr;
  const TouchTensor* touch = nullptr;
};

struct GuidanceValue {
  double energy = 0.0;
  double ni = 0.0;
  double contact = 0.0;
  Latent grad;  // d E(decode(x0_hat(x, v))) / d x with v held fixed
};

GuidanceValue guidance_gradient(const Latent& x, const Latent& v, double t, double sigma_min, const LinearCodec& codec,
                                const PhysicsContext& ctx, const SamplerConfig& cfg);

struct ControlState {
  Latent theta;
  Latent last_grad;
};

/// EMA of the normalized guidance gradient, trust-region clip against the
/// velocity norm and the optional half-space projection.
ControlState stabilize(const Latent& g, const Latent& v, const ControlState& state, const SamplerConfig& cfg);

struct TrajectoryRow {
  int k = 0;
  double t = 0.0;
  double energy = 0.0;
  double ni = 0.0;
  double contact = 0.0;
  double theta_norm = 0.0;
  double v_norm = 0.0;
};
nlohmann::json to_json(const TrajectoryRow& row);

struct SampleResult {
  Latent latent;  // clean estimate at the last time
  Latent state;   // raw Euler state at the last time
  SdfGrid grid;   // decode(latent)
  std::vector<TrajectoryRow> log;
};

/// Euler integration x_{k+1} = x_k - dt_k (v_k + theta_k) from x ~ N(0, I)
/// at t = 1. Energies are logged whenever a context is given; theta stays
/// zero when guidance is off.
SampleResult sample(const VelocityField& field, const LinearCodec& codec, const PhysicsContext& ctx,
                    const SamplerConfig& cfg);

}  // namespace touchsdf
