// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "touchsdf/error.hpp"
#include "touchsdf/objectives.hpp"
#include "touchsdf/primitives.hpp"
#include "touchsdf/sampler.hpp"

using namespace touchsdf;

namespace {

Latent gaussian(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Latent z(k);
  for (int i = 0; i < k; ++i) z(i) = g(rng);
  return z;
}

class ConstantField final : public VelocityField {
 public:
  explicit ConstantField(Latent c) : c_(std::move(c)) {}
  Latent velocity(const Latent&, double) const override { return c_; }
  double sigma_min() const override { return 1e-3; }
  int dim() const override { return static_cast<int>(c_.size()); }

 private:
  Latent c_;
};

struct Scene {
  LinearCodec codec;
  SdfGrid hand;
  TouchTensor touch;
  ShapeLibrary lib;
};

// two candidate spheres; the right one overlaps the hand, contacts sit on the left one
Scene two_entry_scene() {
  const int r = 16;
  Scene s;
  const std::vector<SdfGrid> grids = {analytic_sdf(Sphere{Vec3(-0.15, 0, 0), 0.35}, r),
                                      analytic_sdf(Sphere{Vec3(0.15, 0, 0), 0.35}, r)};
  s.codec = fit_codec(grids, 2);
  s.hand = analytic_sdf(Box{Vec3(0.55, 0, 0), Vec3(0.2, 0.3, 0.3)}, r);
  ContactSet cs;
  cs.points = {Vec3(0.2, 0.0, 0.0), Vec3(0.15, 0.1, 0.05)};
  cs.source_finger = {0, 1};
  s.touch = build_touch_tensor(cs, r);
  s.lib = ShapeLibrary::uniform({encode(s.codec, grids[0]), encode(s.codec, grids[1])}, 1e-3);
  return s;
}

bool near_kink(const SdfGrid& g, const Scene& s) {
  for (std::size_t n = 0; n < g.size(); ++n)
    if ((s.hand[n] < 0.0 || s.touch.contact[n]) && std::abs(g[n]) < 1e-5) return true;
  return false;
}

}  // namespace

TEST_CASE("clean estimate") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Latent x0 = gaussian(5, rng) * 3.0, eps = gaussian(5, rng);
    const double t = u(rng);
    const Latent xt = interpolate(x0, eps, t, 1e-3);
    const Latent v = target_velocity(x0, eps, 1e-3);
    CHECK((clean_estimate(xt, v, t, 1e-3) - x0).cwiseAbs().maxCoeff() <= 1e-10);
  }
  const Latent x = gaussian(3, rng), v = gaussian(3, rng);
  CHECK((clean_estimate(x, v, 0.3, 0.0) - (x - 0.3 * v)).norm() <= 1e-14);
  CHECK((clean_estimate(x, v, 1e-9, 0.0) - x).norm() <= 1e-8);
  CHECK_THROWS_AS(clean_estimate(x, v, 1.5, 0.0), Error);
  CHECK_THROWS_AS(clean_estimate(x, v, 0.5, 1.0), Error);
}

TEST_CASE("sampler config") {
  SamplerConfig c;
  const auto t = c.times();
  REQUIRE(t.size() == 51u);
  CHECK(t.front() == 1.0);
  CHECK(t.back() == doctest::Approx(1e-3));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] < t[k - 1]);
  c.time_grid = {1.0, 0.5, 0.5};
  CHECK_THROWS_AS(c.validate(), Error);
  c.time_grid.clear();
  c.beta = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.beta = 0.9;
  c.eta = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);

  SamplerConfig d;
  d.eta = 2.5;
  d.steps = 7;
  nlohmann::json j = d;
  const auto back = j.get<SamplerConfig>();
  CHECK(back.eta == 2.5);
  CHECK(back.steps == 7);
  j["bogus"] = 1;
  CHECK_THROWS(j.get<SamplerConfig>());
}

TEST_CASE("stabilize") {
  SamplerConfig cfg;
  cfg.beta = 0.9;
  cfg.eta = 0.1;
  cfg.trust_ratio = 1e6;
  Latent g(3);
  g << 0.0, 3.0, 4.0;
  const Latent ghat = g / 5.0;
  const Latent v = Latent::Ones(3);
  ControlState st{Latent::Zero(3), Latent::Zero(3)};
  for (int n = 1; n <= 20; ++n) {
    st = stabilize(g, v, st, cfg);
    if (n == 1) CHECK((st.theta - 0.1 * ghat).norm() <= 1e-15);
    CHECK((st.theta - (1.0 - std::pow(0.9, n)) * ghat).norm() <= 1e-12);
  }
  // g = 0: pure decay
  const double n0 = st.theta.norm();
  for (int n = 1; n <= 10; ++n) {
    st = stabilize(Latent::Zero(3), v, st, cfg);
    CHECK(st.theta.norm() == doctest::Approx(std::pow(0.9, n) * n0).epsilon(1e-12));
  }
  // closed trust region
  cfg.trust_ratio = 0.0;
  const ControlState closed = stabilize(g, v, st, cfg);
  CHECK(closed.theta.norm() == 0.0);
  // clipping
  cfg.trust_ratio = 0.01;
  const ControlState clipped = stabilize(g, v, {Latent::Zero(3), Latent::Zero(3)}, cfg);
  CHECK(clipped.theta.norm() <= 0.01 * v.norm() + 1e-12);
  // projection removes the component against the gradient
  cfg.trust_ratio = 1e6;
  ControlState opposed{-ghat * 2.0, Latent::Zero(3)};
  cfg.projection = true;
  const ControlState proj = stabilize(g, v, opposed, cfg);
  CHECK(proj.theta.dot(g) >= -1e-12);
  cfg.projection = false;
  const ControlState raw = stabilize(g, v, opposed, cfg);
  CHECK(raw.theta.dot(g) < 0.0);
}

TEST_CASE("guidance gradient") {
  const Scene s = two_entry_scene();
  SamplerConfig cfg;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int probes = 0;
  for (int trial = 0; trial < 200 && probes < 50; ++trial) {
    const double t = u(rng);
    const Latent x = interpolate(s.lib.entries[trial % 2].z, gaussian(2, rng), t, 1e-3);
    const Latent v = oracle_velocity(x, t, s.lib);
    const PhysicsContext ctx{&s.hand, &s.touch};
    const GuidanceValue gv = guidance_gradient(x, v, t, 1e-3, s.codec, ctx, cfg);
    if (gv.grad.norm() < 1e-8) continue;
    bool skip = false;
    Latent fd(2);
    for (int d = 0; d < 2 && !skip; ++d) {
      const double h = 1e-6;
      Latent xp = x, xm = x;
      xp(d) += h;
      xm(d) -= h;
      skip = near_kink(decode(s.codec, clean_estimate(xp, v, t, 1e-3)), s) ||
             near_kink(decode(s.codec, clean_estimate(xm, v, t, 1e-3)), s);
      fd(d) = (guidance_gradient(xp, v, t, 1e-3, s.codec, ctx, cfg).energy -
               guidance_gradient(xm, v, t, 1e-3, s.codec, ctx, cfg).energy) / (2 * h);
    }
    if (skip) continue;
    ++probes;
    CHECK((fd - gv.grad).norm() <= 1e-3 * fd.norm());
  }
  CHECK(probes >= 50);

  const Latent x = gaussian(2, rng), v = gaussian(2, rng);
  SamplerConfig zero = cfg;
  zero.lambda_ni = 0.0;
  zero.lambda_c = 0.0;
  const PhysicsContext ctx{&s.hand, &s.touch};
  CHECK(guidance_gradient(x, v, 0.5, 1e-3, s.codec, ctx, zero).grad.norm() == 0.0);
  const SdfGrid far = SdfGrid::filled(16, 5.0);
  const TouchTensor none = build_touch_tensor({}, 16);
  const PhysicsContext disjoint{&far, &none};
  CHECK(guidance_gradient(x, v, 0.5, 1e-3, s.codec, disjoint, cfg).grad.norm() == 0.0);
}

TEST_CASE("euler integration") {
  const Scene s = two_entry_scene();
  SamplerConfig cfg;
  cfg.guidance = false;
  cfg.seed = 5;
  const SampleResult base = sample(ConstantField(Latent::Zero(2)), s.codec, {}, cfg);
  Latent c(2);
  c << 0.7, -1.3;
  const SampleResult moved = sample(ConstantField(c), s.codec, {}, cfg);
  CHECK((moved.state - (base.state - c * (1.0 - cfg.times().back()))).norm() <= 1e-12);

  // determinism and guidance no-op
  const OracleField field(s.lib);
  const PhysicsContext ctx{&s.hand, &s.touch};
  const SampleResult a = sample(field, s.codec, ctx, cfg);
  const SampleResult b = sample(field, s.codec, {}, cfg);
  CHECK(a.latent == b.latent);
  CHECK(a.state == b.state);
  for (const auto& row : a.log) CHECK(row.theta_norm == 0.0);
  cfg.guidance = true;
  const SampleResult g1 = sample(field, s.codec, ctx, cfg);
  const SampleResult g2 = sample(field, s.codec, ctx, cfg);
  CHECK(g1.latent == g2.latent);
  REQUIRE(g1.log.size() == g2.log.size());
  for (std::size_t k = 0; k < g1.log.size(); ++k) {
    CHECK(g1.log[k].energy == g2.log[k].energy);
    CHECK(g1.log[k].theta_norm <= cfg.trust_ratio * g1.log[k].v_norm + 1e-12);
  }
  const nlohmann::json row = to_json(g1.log.front());
  for (const char* key : {"k", "t", "E", "ni", "c", "theta_norm", "v_norm"}) CHECK(row.contains(key));
}

TEST_CASE("single-entry library lands on the entry") {
  const Scene s = two_entry_scene();
  const OracleField field(ShapeLibrary::uniform({s.lib.entries[0].z}, 1e-3));
  SamplerConfig cfg;
  cfg.guidance = false;
  cfg.steps = 200;
  for (int seed = 0; seed < 100; ++seed) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    const SampleResult r = sample(field, s.codec, {}, cfg);
    CHECK((r.latent - s.lib.entries[0].z).norm() <= 1e-3);
  }
}
