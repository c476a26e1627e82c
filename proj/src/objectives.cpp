// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/objectives.hpp"

#include <cmath>

#include "touchsdf/error.hpp"

namespace touchsdf {

void LossWeights::validate() const {
  for (double v : {l1, eik, normal, kl, ni, contact, ni_warmup.target})
    require(v >= 0.0 && std::isfinite(v), ErrorCode::kInvalidArgument, "loss weights must be finite and >= 0");
  require(tau > 0.0, ErrorCode::kInvalidArgument, "tau must be > 0");
  require(ni_warmup.steps >= 0, ErrorCode::kInvalidArgument, "warmup steps must be >= 0");
}

void to_json(nlohmann::json& j, const LossWeights& w) {
  j = nlohmann::json{{"lambda_l1", w.l1},   {"lambda_eik", w.eik}, {"lambda_n", w.normal},
                     {"lambda_kl", w.kl},   {"lambda_ni", w.ni},   {"lambda_c", w.contact},
                     {"tau", w.tau},        {"ni_warmup_steps", w.ni_warmup.steps}};
}

void from_json(const nlohmann::json& j, LossWeights& w) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "loss weights must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda_l1") w.l1 = value.get<double>();
    else if (key == "lambda_eik") w.eik = value.get<double>();
    else if (key == "lambda_n") w.normal = value.get<double>();
    else if (key == "lambda_kl") w.kl = value.get<double>();
    else if (key == "lambda_ni") w.ni = value.get<double>();
    else if (key == "lambda_c") w.contact = value.get<double>();
    else if (key == "tau") w.tau = value.get<double>();
    else if (key == "ni_warmup_steps") w.ni_warmup.steps = value.get<int>();
    else fail(ErrorCode::kInvalidArgument, "unknown loss weight key: " + key);
  }
  w.ni_warmup.target = w.ni;
  w.validate();
}

double LossReport::term(const std::string& name) const {
  for (const auto& [k, v] : terms)
    if (k == name) return v;
  fail(ErrorCode::kInvalidArgument, "no loss term named " + name);
}

nlohmann::json LossReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : terms) j[k] = v;
  j["total"] = total;
  return j;
}

namespace {

double sign_or_zero(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct Strides {
  std::size_t s[3];
};

Strides strides_of(const SdfGrid& g) {
  const std::size_t r = static_cast<std::size_t>(g.resolution());
  return {{1, r, r * r}};
}

bool is_interior(const SdfGrid& g, std::size_t n) {
  const int r = g.resolution();
  const int i = static_cast<int>(n % r), j = static_cast<int>((n / r) % r), k = static_cast<int>(n / (static_cast<std::size_t>(r) * r));
  return i > 0 && j > 0 && k > 0 && i < r - 1 && j < r - 1 && k < r - 1;
}

Vec3 central_gradient(const SdfGrid& g, std::size_t n, const Strides& st, double inv2h) {
  return {(g[n + st.s[0]] - g[n - st.s[0]]) * inv2h, (g[n + st.s[1]] - g[n - st.s[1]]) * inv2h,
          (g[n + st.s[2]] - g[n - st.s[2]]) * inv2h};
}

// Adds the stencil adjoint of d/d(gradient at n) into grad.
void scatter_gradient(std::vector<double>& grad, std::size_t n, const Vec3& dg, const Strides& st, double inv2h) {
  for (int a = 0; a < 3; ++a) {
    grad[n + st.s[a]] += dg[a] * inv2h;
    grad[n - st.s[a]] -= dg[a] * inv2h;
  }
}

}  // namespace

LossValue l1_loss(const SdfGrid& s_hat, const SdfGrid& s, bool with_grad) {
  require_same_resolution(s_hat, s, "l1_loss");
  LossValue out;
  const double inv = 1.0 / static_cast<double>(s.size());
  if (with_grad) out.grad.assign(s.size(), 0.0);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double d = s_hat[n] - s[n];
    out.value += std::abs(d);
    if (with_grad) out.grad[n] = sign_or_zero(d) * inv;
  }
  out.value *= inv;
  return out;
}

LossValue eikonal_loss(const SdfGrid& s_hat, bool with_grad) {
  require(s_hat.resolution() >= 3, ErrorCode::kInvalidArgument, "eikonal loss needs R >= 3");
  const Strides st = strides_of(s_hat);
  const double inv2h = 1.0 / (2.0 * s_hat.voxel_size());
  const int r = s_hat.resolution();
  const double count = std::pow(static_cast<double>(r - 2), 3);
  LossValue out;
  if (with_grad) out.grad.assign(s_hat.size(), 0.0);
  for (int k = 1; k < r - 1; ++k)
    for (int j = 1; j < r - 1; ++j)
      for (int i = 1; i < r - 1; ++i) {
        const std::size_t n = s_hat.index(i, j, k);
        const Vec3 g = central_gradient(s_hat, n, st, inv2h);
        const double norm = g.norm();
        out.value += (norm - 1.0) * (norm - 1.0);
        if (with_grad) {
          const Vec3 dg = (2.0 * (norm - 1.0) / (count * std::max(norm, kGradientGuard))) * g;
          scatter_gradient(out.grad, n, dg, st, inv2h);
        }
      }
  out.value /= count;
  return out;
}

LossValue normal_loss(const SdfGrid& s_hat, const SdfGrid& s, bool with_grad) {
  require_same_resolution(s_hat, s, "normal_loss");
  require(s.resolution() >= 3, ErrorCode::kInvalidArgument, "normal loss needs R >= 3");
  const Strides st = strides_of(s);
  const double h = s.voxel_size();
  const double inv2h = 1.0 / (2.0 * h);
  std::vector<std::size_t> band;
  for (std::size_t n = 0; n < s.size(); ++n)
    if (std::abs(s[n]) < 2.0 * h && is_interior(s, n)) band.push_back(n);
  require(!band.empty(), ErrorCode::kEmptySurface, "normal loss band |S| < 2h is empty");
  const double count = static_cast<double>(band.size());
  LossValue out;
  if (with_grad) out.grad.assign(s.size(), 0.0);
  for (std::size_t n : band) {
    const Vec3 gp = central_gradient(s_hat, n, st, inv2h);
    const Vec3 gt = central_gradient(s, n, st, inv2h);
    const double np = gp.norm(), nt = gt.norm();
    if (np <= kGradientGuard || nt <= kGradientGuard) {
      out.value += 1.0;
      continue;
    }
    const double cosv = gp.dot(gt) / (np * nt);
    out.value += 1.0 - cosv;
    if (with_grad) {
      const Vec3 dcos = gt / (np * nt) - cosv * gp / (np * np);
      scatter_gradient(out.grad, n, -dcos / count, st, inv2h);
    }
  }
  out.value /= count;
  return out;
}

KlValue kl_loss(const std::vector<double>& mu, const std::vector<double>& logvar) {
  require(mu.size() == logvar.size(), ErrorCode::kInvalidArgument, "kl_loss: mu and logvar lengths differ");
  KlValue out;
  out.grad_mu.resize(mu.size());
  out.grad_logvar.resize(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double e = std::exp(logvar[i]);
    out.value += 0.5 * (e + mu[i] * mu[i] - 1.0 - logvar[i]);
    out.grad_mu[i] = mu[i];
    out.grad_logvar[i] = 0.5 * (e - 1.0);
  }
  return out;
}

LossReport vae_objective(const SdfGrid& s_hat, const SdfGrid& s, const std::vector<double>& mu,
                         const std::vector<double>& logvar, const LossWeights& w, bool with_grad) {
  w.validate();
  const LossValue l1 = l1_loss(s_hat, s, with_grad);
  const LossValue eik = eikonal_loss(s_hat, with_grad);
  const LossValue nrm = normal_loss(s_hat, s, with_grad);
  const KlValue kl = kl_loss(mu, logvar);
  LossReport rep;
  rep.terms = {{"l1", l1.value}, {"eikonal", eik.value}, {"normal", nrm.value}, {"kl", kl.value}};
  rep.total = w.l1 * l1.value + w.eik * eik.value + w.normal * nrm.value + w.kl * kl.value;
  if (with_grad) {
    rep.grad.resize(s.size());
    for (std::size_t n = 0; n < s.size(); ++n)
      rep.grad[n] = w.l1 * l1.grad[n] + w.eik * eik.grad[n] + w.normal * nrm.grad[n];
  }
  return rep;
}

double saturate(double s, double tau) {
  require(tau > 0.0, ErrorCode::kInvalidArgument, "tau must be > 0");
  return s > 0.0 ? tau * std::tanh(s / tau) : 0.0;
}

double saturate_derivative(double s, double tau) {
  require(tau > 0.0, ErrorCode::kInvalidArgument, "tau must be > 0");
  if (s <= 0.0) return 0.0;
  const double th = std::tanh(s / tau);
  return 1.0 - th * th;
}

std::vector<std::uint8_t> hand_volume_mask(const SdfGrid& s_h) {
  std::vector<std::uint8_t> m(s_h.size());
  for (std::size_t n = 0; n < s_h.size(); ++n) m[n] = s_h[n] < 0.0 ? 1 : 0;
  return m;
}

LossValue ni_loss(const SdfGrid& s_o_hat, const SdfGrid& s_h, double tau, bool with_grad) {
  require_same_resolution(s_o_hat, s_h, "ni_loss");
  require(tau > 0.0, ErrorCode::kInvalidArgument, "tau must be > 0");
  double mass = 0.0;
  for (std::size_t n = 0; n < s_h.size(); ++n) mass += s_h[n] < 0.0 ? 1.0 : 0.0;
  const double den = std::max(1.0, mass);
  LossValue out;
  if (with_grad) out.grad.assign(s_h.size(), 0.0);
  for (std::size_t n = 0; n < s_h.size(); ++n) {
    if (!(s_h[n] < 0.0)) continue;
    out.value += saturate(-s_o_hat[n], tau);
    if (with_grad) out.grad[n] = -saturate_derivative(-s_o_hat[n], tau) / den;
  }
  out.value /= den;
  return out;
}

LossValue contact_loss(const SdfGrid& s_o_hat, const std::vector<std::uint8_t>& contact, bool with_grad) {
  if (contact.size() != s_o_hat.size())
    fail(ErrorCode::kResolutionMismatch, "contact_loss: contact grid does not match the SDF resolution");
  double count = 0.0;
  for (auto c : contact) count += c ? 1.0 : 0.0;
  const double den = std::max(1.0, count);
  LossValue out;
  if (with_grad) out.grad.assign(contact.size(), 0.0);
  for (std::size_t n = 0; n < contact.size(); ++n) {
    if (!contact[n]) continue;
    out.value += std::abs(s_o_hat[n]);
    if (with_grad) out.grad[n] = sign_or_zero(s_o_hat[n]) / den;
  }
  out.value /= den;
  return out;
}

double time_weight(double t) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidArgument, "time must lie in [0, 1]");
  return (1.0 - t) * (1.0 - t);
}

PhysicsEnergy physics_energy(const SdfGrid& s_o_hat, const SdfGrid& s_h, const TouchTensor& touch, double lambda_ni,
                             double lambda_c, double tau, bool with_grad) {
  if (touch.resolution != s_o_hat.resolution())
    fail(ErrorCode::kResolutionMismatch, "physics_energy: touch tensor resolution mismatch");
  const LossValue ni = ni_loss(s_o_hat, s_h, tau, with_grad);
  const LossValue c = contact_loss(s_o_hat, touch.contact, with_grad);
  PhysicsEnergy out;
  out.ni = ni.value;
  out.contact = c.value;
  out.energy = lambda_ni * ni.value + lambda_c * c.value;
  if (with_grad) {
    out.grad.resize(ni.grad.size());
    for (std::size_t n = 0; n < out.grad.size(); ++n) out.grad[n] = lambda_ni * ni.grad[n] + lambda_c * c.grad[n];
  }
  return out;
}

double warmup(const WarmupSchedule& schedule, int step) {
  require(step >= 0, ErrorCode::kInvalidArgument, "warmup step must be >= 0");
  if (schedule.steps <= 0 || step >= schedule.steps) return schedule.target;
  return schedule.target * static_cast<double>(step) / schedule.steps;
}

double time_weighted_mean(const std::vector<double>& losses, const std::vector<double>& times) {
  require(losses.size() == times.size(), ErrorCode::kInvalidArgument, "losses and times differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < losses.size(); ++b) {
    const double w = time_weight(times[b]);
    num += w * losses[b];
    den += w;
  }
  return num / std::max(1e-12, den);
}

}  // namespace touchsdf
