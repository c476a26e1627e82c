// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "touchsdf/denoiser.hpp"
#include "touchsdf/error.hpp"
#include "touchsdf/primitives.hpp"
#include "touchsdf/sampler.hpp"

using namespace touchsdf;

namespace {

Latent gaussian(int k, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Latent z(k);
  for (int i = 0; i < k; ++i) z(i) = g(rng);
  return z;
}

std::vector<Latent> two_entries() {
  // well separated: the Bayes floor of the FM loss grows only linearly with
  // the separation while the loss at initialization grows quadratically
  Latent a(2), b(2);
  a << 10.0, 5.0;
  b << -5.0, 10.0;
  return {a, b};
}

}  // namespace

TEST_CASE("time embedding") {
  const auto e = time_embedding(0.25);
  CHECK(e.size() == kTimeEmbeddingDim);
  CHECK(e[0] == 0.25);
  CHECK(e[1] == doctest::Approx(std::sin(M_PI / 4)));
  CHECK(e[8] == doctest::Approx(std::cos(2 * M_PI)));
}

TEST_CASE("denoiser backward matches finite differences") {
  Rng rng(4);
  TinyDenoiser net(3, 2, {8, 6}, 1000.0, rng);
  const Latent x = gaussian(3, rng), cond = gaussian(2, rng), w = gaussian(3, rng);
  const double t = 0.37;
  TinyDenoiser::Cache cache;
  net.forward(x, t, cond, cache);
  Latent dx;
  const Eigen::VectorXd g = net.backward(cache, w, &dx);
  Eigen::VectorXd p = net.flat_parameters();
  CHECK(g.size() == static_cast<Eigen::Index>(net.parameter_count()));
  std::uniform_int_distribution<Eigen::Index> pick(0, p.size() - 1);
  for (int probe = 0; probe < 50; ++probe) {
    const Eigen::Index i = pick(rng);
    const double h = 1e-6, saved = p(i);
    p(i) = saved + h;
    net.set_flat_parameters(p);
    const double fp = w.dot(net.forward(x, t, cond));
    p(i) = saved - h;
    net.set_flat_parameters(p);
    const double fm = w.dot(net.forward(x, t, cond));
    p(i) = saved;
    const double fd = (fp - fm) / (2 * h);
    CHECK(std::abs(fd - g(i)) <= 1e-4 * std::max(std::abs(fd), 1e-6));
  }
  net.set_flat_parameters(p);
  for (int d = 0; d < 3; ++d) {
    Latent xp = x, xm = x;
    xp(d) += 1e-6;
    xm(d) -= 1e-6;
    const double fd = (w.dot(net.forward(xp, t, cond)) - w.dot(net.forward(xm, t, cond))) / 2e-6;
    CHECK(std::abs(fd - dx(d)) <= 1e-4 * std::max(std::abs(fd), 1e-6));
  }
  CHECK_THROWS_AS(net.set_flat_parameters(Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("denoiser weights file") {
  Rng rng(9);
  TinyDenoiser net(2, 1, {5}, 500.0, rng);
  const auto path = std::filesystem::temp_directory_path() / "touchsdf_net.tdnz";
  net.save(path);
  const TinyDenoiser back = TinyDenoiser::load(path);
  CHECK(back.alpha() == 500.0);
  CHECK(back.flat_parameters() == net.flat_parameters());
  std::filesystem::resize_file(path, 40);
  CHECK_THROWS_AS(TinyDenoiser::load(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("training on a two-entry library") {
  const auto codes = two_entries();
  std::vector<TrainItem> items;
  for (const auto& z : codes) items.push_back({z, Latent::Zero(0), std::nullopt, std::nullopt});
  FlowConfig cfg;
  cfg.seed = 11;
  const LinearCodec unused;
  const TrainResult res = train_denoiser(items, unused, cfg, LossWeights{});
  REQUIRE(res.log.size() == 2000u);
  Rng init_rng(cfg.seed);
  const TinyDenoiser init(2, 0, cfg.hidden, cfg.alpha, init_rng);
  Rng mc(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double before = 0.0, after = 0.0;
  for (int n = 0; n < 4000; ++n) {
    const Latent& x0 = codes[n % 2];
    const Latent eps = gaussian(2, mc);
    const double t = unit(mc);
    const Latent xt = interpolate(x0, eps, t, cfg.sigma_min);
    before += fm_loss(init.forward(xt, t, Latent::Zero(0)), x0, eps, cfg.sigma_min);
    after += fm_loss(res.net.forward(xt, t, Latent::Zero(0)), x0, eps, cfg.sigma_min);
  }
  MESSAGE("fm at init " << before / 4000 << ", trained " << after / 4000);
  CHECK(before >= 10.0 * after);

  const OracleField oracle(ShapeLibrary::uniform(codes, cfg.sigma_min));
  Rng rng(77);
  double rel = 0.0;
  int count = 0;
  for (int ti = 0; ti < 10; ++ti) {
    const double t = 0.1 + 0.1 * ti;
    for (int n = 0; n < 20; ++n) {
      const Latent x = interpolate(codes[n % 2], gaussian(2, rng), t, cfg.sigma_min);
      const Latent vo = oracle.velocity(x, t);
      rel += (res.net.forward(x, t, Latent::Zero(0)) - vo).norm() / vo.norm();
      ++count;
    }
  }
  MESSAGE("mean relative velocity error " << rel / count);
  CHECK(rel / count <= 0.15);
}

TEST_CASE("finetuning with the penetration term") {
  const int r = 16;
  const std::vector<SdfGrid> grids = {analytic_sdf(Sphere{Vec3(-0.2, 0, 0), 0.3}, r),
                                      analytic_sdf(Sphere{Vec3(0.2, 0, 0), 0.3}, r)};
  const LinearCodec codec = fit_codec(grids, 2);
  const SdfGrid hand = analytic_sdf(Sphere{Vec3(0.5, 0, 0), 0.25}, r);
  const TouchTensor touch = build_touch_tensor({}, r);
  std::vector<TrainItem> items;
  for (const auto& g : grids) items.push_back({encode(codec, g), Latent::Zero(0), hand, touch});

  FlowConfig cfg;
  cfg.seed = 3;
  LossWeights w;
  w.ni_warmup.steps = 0;
  const TrainResult pre = train_denoiser(items, codec, cfg, w);
  FlowConfig ft = cfg;
  ft.steps = 0;
  ft.finetune_steps = 1000;
  const TrainResult tuned = train_denoiser(items, codec, ft, w, &pre.net);
  REQUIRE(tuned.log.size() == 1000u);

  auto mean_ni = [&](const TinyDenoiser& net) {
    const DenoiserField field(net, Latent::Zero(0), cfg.sigma_min);
    SamplerConfig sc;
    sc.guidance = false;
    double s = 0.0;
    for (int seed = 0; seed < 40; ++seed) {
      sc.seed = static_cast<std::uint64_t>(seed);
      s += ni_loss(sample(field, codec, {}, sc).grid, hand, w.tau, false).value;
    }
    return s / 40;
  };
  const double a = mean_ni(pre.net), b = mean_ni(tuned.net);
  MESSAGE("sampled L_NI pretrain " << a << ", finetuned " << b);
  CHECK(b < a);
}
