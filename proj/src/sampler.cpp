// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/sampler.hpp"

#include <cmath>

#include "touchsdf/error.hpp"
#include "touchsdf/objectives.hpp"
#include "touchsdf/transform.hpp"

namespace touchsdf {

std::vector<double> SamplerConfig::times() const {
  if (!time_grid.empty()) return time_grid;
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[k] = 1.0 + (t_end - 1.0) * static_cast<double>(k) / steps;
  t.back() = t_end;
  return t;
}

void SamplerConfig::validate() const {
  if (time_grid.empty()) {
    require(steps >= 1, ErrorCode::kInvalidArgument, "sampler needs at least one step");
    require(t_end >= 0.0 && t_end < 1.0, ErrorCode::kInvalidArgument, "t_end must lie in [0, 1)");
  } else {
    require(time_grid.size() >= 2, ErrorCode::kInvalidArgument, "time grid needs two or more points");
    require(time_grid.front() <= 1.0 && time_grid.back() >= 0.0, ErrorCode::kInvalidArgument,
            "time grid must lie in [0, 1]");
    for (std::size_t k = 0; k + 1 < time_grid.size(); ++k)
      require(time_grid[k] > time_grid[k + 1], ErrorCode::kInvalidArgument, "time grid must be strictly decreasing");
  }
  require(beta > 0.0 && beta < 1.0, ErrorCode::kInvalidArgument, "beta must lie in (0, 1)");
  require(eta > 0.0, ErrorCode::kInvalidArgument, "eta must be > 0");
  require(trust_ratio >= 0.0, ErrorCode::kInvalidArgument, "trust ratio must be >= 0");
  require(lambda_ni >= 0.0 && lambda_c >= 0.0 && tau > 0.0, ErrorCode::kInvalidArgument,
          "guidance weights must be >= 0 and tau > 0");
}

void to_json(nlohmann::json& j, const SamplerConfig& c) {
  j = nlohmann::json{{"steps", c.steps},         {"t_end", c.t_end},         {"beta", c.beta},
                     {"eta", c.eta},             {"trust_ratio", c.trust_ratio}, {"lambda_ni", c.lambda_ni},
                     {"lambda_c", c.lambda_c},   {"tau", c.tau},             {"guidance", c.guidance},
                     {"projection", c.projection}, {"seed", c.seed}};
  if (!c.time_grid.empty()) j["time_grid"] = c.time_grid;
}

void from_json(const nlohmann::json& j, SamplerConfig& c) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "sampler config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "steps") c.steps = value.get<int>();
    else if (key == "t_end") c.t_end = value.get<double>();
    else if (key == "time_grid") c.time_grid = value.get<std::vector<double>>();
    else if (key == "beta") c.beta = value.get<double>();
    else if (key == "eta") c.eta = value.get<double>();
    else if (key == "trust_ratio") c.trust_ratio = value.get<double>();
    else if (key == "lambda_ni") c.lambda_ni = value.get<double>();
    else if (key == "lambda_c") c.lambda_c = value.get<double>();
    else if (key == "tau") c.tau = value.get<double>();
    else if (key == "guidance") c.guidance = value.get<bool>();
    else if (key == "projection") c.projection = value.get<bool>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else fail(ErrorCode::kInvalidArgument, "unknown sampler config key: " + key);
  }
  c.validate();
}

Latent clean_estimate(const Latent& x_t, const Latent& v, double t, double sigma_min) {
  require(x_t.size() == v.size(), ErrorCode::kInvalidArgument, "clean_estimate: dimension mismatch");
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidArgument, "clean_estimate: t must lie in [0, 1]");
  require(sigma_min >= 0.0 && sigma_min < 1.0, ErrorCode::kInvalidArgument, "clean_estimate: sigma_min must lie in [0, 1)");
  // the denominator simplifies to 1 on the valid range; kept in the general form
  const double s = noise_scale(t, sigma_min);
  const double den = s + (1.0 - sigma_min) * (1.0 - t);
  require(den > 1e-12, ErrorCode::kNumeric, "clean_estimate: degenerate denominator");
  return ((1.0 - sigma_min) * x_t - s * v) / den;
}

GuidanceValue guidance_gradient(const Latent& x, const Latent& v, double t, double sigma_min, const LinearCodec& codec,
                                const PhysicsContext& ctx, const SamplerConfig& cfg) {
  GuidanceValue out;
  out.grad = Latent::Zero(x.size());
  if (!ctx.hand) return out;
  const Latent x0_hat = clean_estimate(x, v, t, sigma_min);
  const SdfGrid g = decode(codec, x0_hat);
  TouchTensor empty;
  const TouchTensor* touch = ctx.touch;
  if (!touch) {
    empty = build_touch_tensor({}, codec.resolution);
    touch = &empty;
  }
  const PhysicsEnergy e = physics_energy(g, *ctx.hand, *touch, cfg.lambda_ni, cfg.lambda_c, cfg.tau);
  out.energy = e.energy;
  out.ni = e.ni;
  out.contact = e.contact;
  const double s = noise_scale(t, sigma_min);
  const double den = s + (1.0 - sigma_min) * (1.0 - t);
  out.grad = ((1.0 - sigma_min) / den) * pull_back(codec, e.grad);
  return out;
}

ControlState stabilize(const Latent& g, const Latent& v, const ControlState& state, const SamplerConfig& cfg) {
  require(g.allFinite() && v.allFinite(), ErrorCode::kNumeric, "stabilize: non-finite input");
  ControlState out;
  out.last_grad = g;
  const Latent g_hat = g / std::max(g.norm(), kGuidanceNormEps);
  const Latent prev = state.theta.size() == g.size() ? state.theta : Latent::Zero(g.size());
  out.theta = cfg.beta * prev + cfg.eta * g_hat;
  const double cap = cfg.trust_ratio * v.norm();
  const double n = out.theta.norm();
  if (n > cap) out.theta *= n > 0.0 ? cap / n : 0.0;
  if (cfg.projection) {
    const double along = out.theta.dot(g_hat);
    if (along < 0.0) out.theta -= along * g_hat;
  }
  return out;
}

nlohmann::json to_json(const TrajectoryRow& row) {
  return {{"k", row.k},           {"t", row.t},         {"E", row.energy},           {"ni", row.ni},
          {"c", row.contact},     {"theta_norm", row.theta_norm}, {"v_norm", row.v_norm}};
}

SampleResult sample(const VelocityField& field, const LinearCodec& codec, const PhysicsContext& ctx,
                    const SamplerConfig& cfg) {
  cfg.validate();
  const int k = field.dim();
  require(codec.dim() == k, ErrorCode::kInvalidArgument, "sampler: codec and velocity field dimensions differ");
  const std::vector<double> ts = cfg.times();
  const double sm = field.sigma_min();

  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Latent x(k);
  for (int d = 0; d < k; ++d) x(d) = gauss(rng);

  SampleResult res;
  ControlState control{Latent::Zero(k), Latent::Zero(k)};
  for (std::size_t step = 0; step < ts.size(); ++step) {
    const double t = ts[step];
    const Latent v = field.velocity(x, t);
    if (!v.allFinite() || !x.allFinite())
      fail(ErrorCode::kNumeric, "sampler: non-finite state at step " + std::to_string(step));
    GuidanceValue gv = guidance_gradient(x, v, t, sm, codec, ctx, cfg);
    const bool last = step + 1 == ts.size();
    if (cfg.guidance && ctx.hand) control = stabilize(gv.grad, v, control, cfg);
    res.log.push_back({static_cast<int>(step), t, gv.energy, gv.ni, gv.contact, control.theta.norm(), v.norm()});
    if (last) {
      res.state = x;
      res.latent = clean_estimate(x, v, t, sm);
      break;
    }
    const double dt = t - ts[step + 1];
    x = x - dt * (v + control.theta);
  }
  if (!res.latent.allFinite()) fail(ErrorCode::kNumeric, "sampler: non-finite final latent");
  res.grid = decode(codec, res.latent);
  return res;
}

}  // namespace touchsdf
