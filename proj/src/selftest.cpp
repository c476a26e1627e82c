// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "touchsdf/error.hpp"
#include "touchsdf/metrics.hpp"
#include "touchsdf/objectives.hpp"
#include "touchsdf/pipeline.hpp"
#include "touchsdf/primitives.hpp"
#include "touchsdf/sampler.hpp"
#include "touchsdf/scene.hpp"

namespace touchsdf {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- AC1

struct GradStats {
  int probes = 0;
  double worst = 0.0;
  void add(double analytic, double fd) {
    ++probes;
    const double scale = std::max(std::abs(analytic), std::abs(fd));
    if (scale < 1e-14) return;
    worst = std::max(worst, std::abs(analytic - fd) / scale);
  }
};

SdfGrid random_field(int r, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(r) * r * r);
  for (auto& x : v) x = u(rng);
  return SdfGrid(r, std::move(v));
}

SdfGrid with_value(const SdfGrid& g, std::size_t n, double v) {
  std::vector<double> vals(g.values().begin(), g.values().end());
  vals[n] = v;
  return SdfGrid(g.resolution(), std::move(vals));
}

// Central differences on grid values at 50 random voxels, skipping kinks.
GradStats grid_gradient(const SdfGrid& x, const std::function<double(const SdfGrid&)>& f,
                        const std::vector<double>& grad, const std::function<bool(std::size_t)>& skip) {
  Rng rng(99);
  const double step = 1e-4;
  GradStats st;
  for (int attempt = 0; st.probes < 50 && attempt < 100000; ++attempt) {
    const std::size_t n = rng() % x.size();
    if (skip && skip(n)) continue;
    st.add(grad[n], (f(with_value(x, n, x[n] + step)) - f(with_value(x, n, x[n] - step))) / (2 * step));
  }
  return st;
}

Latent gaussian(int k, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Latent z(k);
  for (int i = 0; i < k; ++i) z(i) = g(rng);
  return z;
}

// two candidate spheres; the right one overlaps a box hand, contacts sit on the left one
struct ToyScene {
  LinearCodec codec;
  SdfGrid hand;
  TouchTensor touch;
  ShapeLibrary lib;
};

ToyScene toy_scene() {
  const int r = 16;
  ToyScene s;
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

CheckResult ac1() {
  CheckResult res{"AC1", "gradient suite", false, "", 0.0};
  std::map<std::string, GradStats> stats;
  const int r = 12;
  const SdfGrid x = random_field(r, 1, -0.5, 0.5);
  const SdfGrid target = analytic_sdf(Sphere{Vec3::Zero(), 0.45}, r);

  stats["l1"] = grid_gradient(x, [&](const SdfGrid& g) { return l1_loss(g, target, false).value; },
                              l1_loss(x, target).grad, [&](std::size_t n) { return std::abs(x[n] - target[n]) < 1e-3; });
  stats["eikonal"] = grid_gradient(x, [](const SdfGrid& g) { return eikonal_loss(g, false).value; },
                                   eikonal_loss(x).grad, nullptr);
  stats["normal"] = grid_gradient(x, [&](const SdfGrid& g) { return normal_loss(g, target, false).value; },
                                  normal_loss(x, target).grad, nullptr);
  const SdfGrid hand = SdfGrid::from_function(r, [](const Vec3& p) { return p.x() - 0.1; });
  stats["ni"] = grid_gradient(x, [&](const SdfGrid& g) { return ni_loss(g, hand, 0.1, false).value; },
                              ni_loss(x, hand, 0.1).grad, [&](std::size_t n) { return std::abs(x[n]) < 1e-3; });
  std::vector<std::uint8_t> contact(x.size(), 0);
  Rng crng(7);
  for (int i = 0; i < 200; ++i) contact[crng() % contact.size()] = 1;
  stats["contact"] = grid_gradient(x, [&](const SdfGrid& g) { return contact_loss(g, contact, false).value; },
                                   contact_loss(x, contact).grad, [&](std::size_t n) { return std::abs(x[n]) < 1e-3; });
  {
    Rng rng(3);
    std::normal_distribution<double> g(0.0, 0.7);
    GradStats st;
    for (int trial = 0; trial < 25; ++trial) {
      std::vector<double> mu(2), lv(2);
      for (int d = 0; d < 2; ++d) mu[d] = g(rng), lv[d] = g(rng);
      const KlValue k = kl_loss(mu, lv);
      const int d = trial % 2;
      const double step = 1e-5;
      auto bump = [&](std::vector<double> v, double by) { v[d] += by; return v; };
      st.add(k.grad_mu[d], (kl_loss(bump(mu, step), lv).value - kl_loss(bump(mu, -step), lv).value) / (2 * step));
      st.add(k.grad_logvar[d], (kl_loss(mu, bump(lv, step)).value - kl_loss(mu, bump(lv, -step)).value) / (2 * step));
    }
    stats["kl"] = st;
  }

  // decoder chain rule: d E(decode(z)) / dz against differences in z
  {
    const ToyScene toy = toy_scene();
    Rng rng(5);
    GradStats st;
    for (int trial = 0; trial < 200 && st.probes < 50; ++trial) {
      const Latent z = gaussian(2, rng) * 3.0;
      const PhysicsEnergy e = physics_energy(decode(toy.codec, z), toy.hand, toy.touch, 1.0, 1.0, 0.1);
      const Latent gz = pull_back(toy.codec, e.grad);
      const int d = trial % 2;
      Latent zp = z, zm = z;
      zp(d) += 1e-6;
      zm(d) -= 1e-6;
      const SdfGrid gp = decode(toy.codec, zp), gm = decode(toy.codec, zm);
      bool kink = false;
      for (std::size_t n = 0; n < gp.size() && !kink; ++n)
        kink = (toy.hand[n] < 0.0 || toy.touch.contact[n]) && (std::signbit(gp[n]) != std::signbit(gm[n]));
      if (kink) continue;
      st.add(gz(d), (physics_energy(gp, toy.hand, toy.touch, 1.0, 1.0, 0.1, false).energy -
                     physics_energy(gm, toy.hand, toy.touch, 1.0, 1.0, 0.1, false).energy) / 2e-6);
    }
    stats["decoder_chain"] = st;
  }

  // full guidance gradient (looser tolerance)
  GradStats guidance;
  {
    const ToyScene toy = toy_scene();
    SamplerConfig cfg;
    Rng rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const PhysicsContext ctx{&toy.hand, &toy.touch};
    for (int trial = 0; trial < 400 && guidance.probes < 50; ++trial) {
      const double t = u(rng);
      const Latent x0 = interpolate(toy.lib.entries[trial % 2].z, gaussian(2, rng), t, 1e-3);
      const Latent v = oracle_velocity(x0, t, toy.lib);
      const GuidanceValue gv = guidance_gradient(x0, v, t, 1e-3, toy.codec, ctx, cfg);
      if (gv.grad.norm() < 1e-8) continue;
      Latent fd(2);
      bool kink = false;
      for (int d = 0; d < 2 && !kink; ++d) {
        const double h = 1e-6;
        Latent xp = x0, xm = x0;
        xp(d) += h;
        xm(d) -= h;
        const SdfGrid gp = decode(toy.codec, clean_estimate(xp, v, t, 1e-3));
        const SdfGrid gm = decode(toy.codec, clean_estimate(xm, v, t, 1e-3));
        for (std::size_t n = 0; n < gp.size() && !kink; ++n)
          kink = (toy.hand[n] < 0.0 || toy.touch.contact[n]) && std::min(std::abs(gp[n]), std::abs(gm[n])) < 1e-5;
        fd(d) = (guidance_gradient(xp, v, t, 1e-3, toy.codec, ctx, cfg).energy -
                 guidance_gradient(xm, v, t, 1e-3, toy.codec, ctx, cfg).energy) / (2 * h);
      }
      if (kink) continue;
      ++guidance.probes;
      guidance.worst = std::max(guidance.worst, (fd - gv.grad).norm() / std::max(fd.norm(), 1e-14));
    }
  }

  bool ok = guidance.probes >= 50 && guidance.worst <= 1e-3;
  std::ostringstream os;
  for (const auto& [name, st] : stats) {
    ok = ok && st.probes >= 50 && st.worst <= 1e-4;
    os << name << " " << st.probes << "p max " << fmt("%.1e", st.worst) << "; ";
  }
  os << "guidance " << guidance.probes << "p max " << fmt("%.1e", guidance.worst);
  res.passed = ok;
  res.detail = os.str();
  return res;
}

// ---------------------------------------------------------------- AC2-AC4

CheckResult ac2() {
  CheckResult res{"AC2", "eikonal fidelity", false, "", 0.0};
  const double sphere = eikonal_loss(analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 64), false).value;
  const double constant = eikonal_loss(SdfGrid::filled(64, 0.25), false).value;
  res.passed = sphere <= 1e-3 && constant == 1.0;
  res.detail = "sphere R=64 " + fmt("%.2e", sphere) + ", constant " + fmt("%.17g", constant);
  return res;
}

CheckResult ac3() {
  CheckResult res{"AC3", "augmentation oracle", false, "", 0.0};
  const int r = 32;
  const double h = 2.0 / r;
  Rng rng(2026);
  std::uniform_real_distribution<double> u(-1.0, 1.0), scale(0.5, 1.0);
  const std::vector<Primitive> prims = {Sphere{Vec3(0.05, -0.05, 0.0), 0.4},
                                        Box{Vec3::Zero(), Vec3(0.35, 0.25, 0.2)},
                                        Capsule{Vec3(-0.3, 0, 0), Vec3(0.3, 0.1, 0), 0.2},
                                        Cylinder{Vec3::Zero(), Vec3(0, 0.6, 0.8), 0.3, 0.25}};
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Primitive& prim = prims[trial % prims.size()];
    SimilarityTransform xf;
    xf.scale = scale(rng);
    xf.rotation = random_rotation(rng);
    xf.translation = 0.15 * Vec3(u(rng), u(rng), u(rng));
    const SdfGrid aug = augment_sdf(analytic_sdf(prim, r), xf);
    const auto moved = make_transformed(std::make_shared<PrimitiveShape>(prim), xf);
    const SdfGrid truth = SdfGrid::from_function(r, [&](const Vec3& p) { return moved->sdf(p); });
    const auto support = augmentation_support(r, xf);
    for (std::size_t n = 0; n < aug.size(); ++n)
      if (support[n]) worst = std::max(worst, std::abs(aug[n] - truth[n]));
  }
  res.passed = worst <= 1.5 * h;
  res.detail = "20 transforms, max error " + fmt("%.4f", worst) + " (bound " + fmt("%.4f", 1.5 * h) + ")";
  return res;
}

CheckResult ac4() {
  CheckResult res{"AC4", "flow consistency", false, "", 0.0};
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double identity = 0.0, round_trip = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Latent x0 = gaussian(6, rng) * 3.0, eps = gaussian(6, rng);
    const double t = 0.01 + 0.98 * u(rng), sm = i % 2 ? 1e-3 : 0.05;
    const double dt = 1e-5;
    const Latent d = (interpolate(x0, eps, t + dt, sm) - interpolate(x0, eps, t - dt, sm)) / (2 * dt);
    identity = std::max(identity, (d - target_velocity(x0, eps, sm)).cwiseAbs().maxCoeff());
    const Latent xt = interpolate(x0, eps, t, sm);
    round_trip = std::max(round_trip, (clean_estimate(xt, target_velocity(x0, eps, sm), t, sm) - x0).cwiseAbs().maxCoeff());
  }
  res.passed = identity <= 1e-8 && round_trip <= 1e-10;
  res.detail = "derivative identity " + fmt("%.1e", identity) + ", clean-estimate round trip " + fmt("%.1e", round_trip);
  return res;
}

// ---------------------------------------------------------------- AC5

CheckResult ac5() {
  CheckResult res{"AC5", "mixture-oracle sampling", false, "", 0.0};
  const int k = 4;
  Rng rng(5);
  const Latent single = gaussian(k, rng) * 3.0;
  const LinearCodec codec = [&] {
    LinearCodec c;
    c.resolution = 2;
    c.mean = Eigen::VectorXd::Zero(8);
    c.basis = Eigen::MatrixXd::Identity(8, k);
    return c;
  }();
  SamplerConfig cfg;
  cfg.guidance = false;
  cfg.steps = 200;
  const OracleField one(ShapeLibrary::uniform({single}, 1e-3));
  int landed = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const double d = (sample(one, codec, {}, cfg).latent - single).norm();
    worst = std::max(worst, d);
    landed += d <= 1e-3;
  }

  std::vector<Latent> entries;
  for (int i = 0; i < 3; ++i) entries.push_back(gaussian(k, rng) * 3.0);
  const OracleField three(ShapeLibrary::uniform(entries, 1e-3));
  cfg.steps = 50;
  std::vector<int> hist(3, 0);
  for (int s = 0; s < 300; ++s) {
    cfg.seed = derive_seed(55, static_cast<std::uint64_t>(s));
    const Latent z = sample(three, codec, {}, cfg).latent;
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if ((z - entries[i]).norm() < (z - entries[best]).norm()) best = i;
    ++hist[best];
  }
  double chi2 = 0.0;
  for (int c : hist) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
  const double p = std::exp(-0.5 * chi2);  // chi-squared survival with 2 degrees of freedom
  res.passed = landed == 100 && p > 0.01;
  std::ostringstream os;
  os << "single entry " << landed << "/100 within 1e-3 (max " << fmt("%.1e", worst) << "); three entries "
     << hist[0] << "/" << hist[1] << "/" << hist[2] << " chi2 " << fmt("%.2f", chi2) << " p " << fmt("%.3f", p);
  res.detail = os.str();
  return res;
}

// ---------------------------------------------------------------- AC6-AC8

constexpr std::uint64_t kSuiteBase = 1000;
constexpr int kSuiteScenes = 50;
constexpr int kSuiteSeeds = 8;

struct SuiteScene {
  GraspScene scene;
  SceneLibrary lib;
  std::unique_ptr<OracleField> field;
};

class Suite {
 public:
  const SuiteScene& at(int i) {
    while (static_cast<int>(scenes_.size()) <= i) {
      const auto idx = static_cast<std::uint64_t>(scenes_.size());
      SuiteScene s;
      s.scene = build_scene(kSuiteBase + idx, SceneConfig{});
      s.lib = build_scene_library(s.scene, LibraryConfig{}, derive_seed(kSuiteBase, idx));
      s.field = std::make_unique<OracleField>(conditioned_library(s.scene, s.lib, LibraryConfig{}));
      scenes_.push_back(std::move(s));
    }
    return scenes_[static_cast<std::size_t>(i)];
  }

 private:
  std::vector<SuiteScene> scenes_;
};

Suite& suite() {
  static Suite s;
  return s;
}

std::uint64_t run_seed(int scene, int r) { return derive_seed(static_cast<std::uint64_t>(scene) + 7919, r); }

CheckResult ac6() {
  CheckResult res{"AC6", "guidance efficacy", false, "", 0.0};
  SamplerConfig guided, unguided;
  unguided.guidance = false;
  double ni_u = 0, ni_g = 0, c_u = 0, c_g = 0;
  int chosen = 0, monotone = 0;
  for (int i = 0; chosen < 10 && i < 200; ++i) {
    const SuiteScene& s = suite().at(i);
    for (int r = 0; r < kSuiteSeeds; ++r) {
      const ReconstructionOptions opt{Ablation::kFull, 0.0, run_seed(i, r)};
      const Reconstruction u = reconstruct(s.scene, s.lib, *s.field, unguided, opt);
      if (u.ni <= 1e-4) continue;
      const Reconstruction g = reconstruct(s.scene, s.lib, *s.field, guided, opt);
      ni_u += u.ni, ni_g += g.ni, c_u += u.contact, c_g += g.contact;
      const auto& log = g.sample.log;
      const std::size_t n = log.size(), from = n - (n - 1) / 4 - 1;
      bool mono = true;
      for (std::size_t k = from + 1; k < n; ++k) mono = mono && log[k].energy <= log[k - 1].energy + 1e-9;
      monotone += mono;
      ++chosen;
      break;
    }
  }
  const double ni_drop = ni_u > 0 ? 1.0 - ni_g / ni_u : 0.0;
  const double c_drop = c_u > 0 ? 1.0 - c_g / c_u : 0.0;
  res.passed = chosen == 10 && ni_drop >= 0.5 && c_drop >= 0.3 && monotone >= 9;
  std::ostringstream os;
  os << chosen << " penetrating scenes; L_NI " << fmt("%.5f", ni_u / chosen) << " -> " << fmt("%.5f", ni_g / chosen)
     << " (-" << fmt("%.0f", 100 * ni_drop) << "%), L_C " << fmt("%.4f", c_u / chosen) << " -> "
     << fmt("%.4f", c_g / chosen) << " (-" << fmt("%.0f", 100 * c_drop) << "%); late-phase E non-increasing "
     << monotone << "/10";
  res.detail = os.str();
  return res;
}

struct AblationMeans {
  double vision = 0, no_touch = 0, full = 0, noise3 = 0, noise5 = 0;
};

const AblationMeans& ablation_means() {
  static std::optional<AblationMeans> cached;
  if (cached) return *cached;
  AblationMeans m;
  const SamplerConfig cfg;
  const double n = kSuiteScenes * kSuiteSeeds;
  for (int i = 0; i < kSuiteScenes; ++i) {
    const SuiteScene& s = suite().at(i);
    for (int r = 0; r < kSuiteSeeds; ++r) {
      auto iou = [&](Ablation a, double mm) {
        return reconstruct(s.scene, s.lib, *s.field, cfg, {a, mm, run_seed(i, r)}).iou / n;
      };
      m.vision += iou(Ablation::kVisionOnly, 0.0);
      m.no_touch += iou(Ablation::kNoTouch, 0.0);
      m.full += iou(Ablation::kFull, 0.0);
      m.noise3 += iou(Ablation::kFull, 3.0);
      m.noise5 += iou(Ablation::kFull, 5.0);
    }
  }
  cached = m;
  return *cached;
}

CheckResult ac7() {
  CheckResult res{"AC7", "ablation ordering", false, "", 0.0};
  const AblationMeans& m = ablation_means();
  res.passed = m.full >= m.no_touch && m.no_touch >= m.vision && m.full - m.vision >= 0.05;
  res.detail = "mean IoU over 50 scenes x 8 seeds: full " + fmt("%.4f", m.full) + ", no-touch " +
               fmt("%.4f", m.no_touch) + ", vision-only " + fmt("%.4f", m.vision);
  return res;
}

CheckResult ac8() {
  CheckResult res{"AC8", "tactile-noise robustness", false, "", 0.0};
  const AblationMeans& m = ablation_means();
  const double d3 = m.noise3 - m.full, d5 = m.noise5 - m.full;
  res.passed = std::abs(d3) <= 0.02 && d5 < d3;
  res.detail = "mean IoU full " + fmt("%.4f", m.full) + ", 3 mm " + fmt("%.4f", m.noise3) + " (" + fmt("%+.4f", d3) +
               "), 5 mm " + fmt("%.4f", m.noise5) + " (" + fmt("%+.4f", d5) + ")";
  return res;
}

// ---------------------------------------------------------------- AC9

PointSet random_points(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointSet p(n);
  for (auto& x : p) x = Vec3(u(rng), u(rng), u(rng));
  return p;
}

CheckResult ac9() {
  CheckResult res{"AC9", "metric oracles", false, "", 0.0};
  Rng rng(9);
  double emd_gap = 0.0, cd_gap = 0.0;
  for (std::size_t n = 1; n <= 8; ++n) {
    const PointSet p = random_points(n, rng), q = random_points(n, rng);
    emd_gap = std::max(emd_gap, std::abs(emd(p, q, EmdMode::kExact) - emd_brute_force(p, q)));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet p = random_points(200 + 37 * trial, rng), q = random_points(150 + 11 * trial, rng);
    cd_gap = std::max(cd_gap, std::abs(chamfer(p, q) - chamfer_brute_force(p, q)));
  }

  const SdfGrid shape = analytic_sdf(Box{Vec3(0.05, 0, 0), Vec3(0.4, 0.3, 0.25)}, 32);
  const SceneMetrics self = evaluate_reconstruction(shape, shape, MetricOptions{4000, 128, 500, 1});
  const bool ideal = self.cd == 0.0 && self.emd == 0.0 && self.fscore == 1.0 && self.iou == 1.0 &&
                     std::abs(self.nc - 1.0) <= 1e-12 && std::abs(self.iou3d - 1.0) <= 1e-12 && self.adds == 0.0 &&
                     self.adds_at == 1.0 && self.icp_rot <= 1e-6;

  const double nested = voxel_iou(analytic_sdf(Sphere{Vec3::Zero(), 0.25}, 64), analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 64));
  res.passed = emd_gap <= 1e-12 && cd_gap <= 1e-12 && ideal && std::abs(nested - 0.125) <= 0.02;
  std::ostringstream os;
  os << "EMD vs brute force " << fmt("%.1e", emd_gap) << ", CD vs brute force " << fmt("%.1e", cd_gap)
     << ", self-values " << (ideal ? "ideal" : "NOT ideal") << " (icp " << fmt("%.1e", self.icp_rot) << " deg)"
     << ", nested-sphere IoU " << fmt("%.4f", nested);
  res.detail = os.str();
  return res;
}

// ---------------------------------------------------------------- AC10 and extras

CheckResult ac10() {
  CheckResult res{"AC10", "scene validity", false, "", 0.0};
  const SceneConfig cfg;
  int bad = 0;
  std::string first;
  for (int i = 0; i < 100; ++i) {
    try {
      const GraspScene s = build_scene(static_cast<std::uint64_t>(i), cfg);
      const SceneCheck c = check_scene(s, cfg.padding);
      if (!c.ok()) {
        ++bad;
        if (first.empty()) first = "scene " + std::to_string(i) + " failed its checks";
      }
    } catch (const Error& e) {
      ++bad;
      if (first.empty()) first = "scene " + std::to_string(i) + ": " + e.what();
    }
  }
  res.passed = bad == 0;
  res.detail = std::to_string(100 - bad) + "/100 scenes valid" + (first.empty() ? "" : "; " + first);
  return res;
}

CheckResult corrupt_codec() {
  CheckResult res{"codec-file", "corrupted codec file is rejected", false, "", 0.0};
  const auto path = std::filesystem::temp_directory_path() /
                    ("touchsdf_selftest_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()) + ".codc");
  LinearCodec codec;
  codec.resolution = 4;
  codec.mean = Eigen::VectorXd::Zero(64);
  codec.basis = Eigen::MatrixXd::Identity(64, 2);
  save_codec(codec, path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
  try {
    load_codec(path);
    res.detail = "truncated file loaded without error";
  } catch (const Error& e) {
    res.passed = e.code() == ErrorCode::kFormat || e.code() == ErrorCode::kIo;
    res.detail = std::string("load error: ") + e.what();
  }
  std::filesystem::remove(path);
  return res;
}

struct Entry {
  const char* id;
  CheckResult (*fn)();
};

constexpr Entry kEntries[] = {{"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3},  {"AC4", ac4},
                              {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7},  {"AC8", ac8},
                              {"AC9", ac9}, {"codec-file", corrupt_codec}, {"AC10", ac10}};

}  // namespace

std::vector<std::string> selftest_ids() {
  std::vector<std::string> ids;
  for (const auto& e : kEntries) ids.emplace_back(e.id);
  return ids;
}

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
  for (const auto& id : options.only) {
    const auto ids = selftest_ids();
    require(std::find(ids.begin(), ids.end(), id) != ids.end(), ErrorCode::kInvalidArgument, "unknown selftest id: " + id);
  }
  const auto start = Clock::now();
  std::vector<CheckResult> out;
  for (const auto& e : kEntries) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.id) == options.only.end()) continue;
    const auto t0 = Clock::now();
    CheckResult r;
    try {
      r = e.fn();
    } catch (const std::exception& ex) {
      r = CheckResult{e.id, "", false, std::string("exception: ") + ex.what(), 0.0};
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r.id == "AC1" && r.seconds > 60.0) {
      r.passed = false;
      r.detail += "; over the 60 s budget";
    }
    if (r.id == "AC5" && r.seconds > 180.0) {
      r.passed = false;
      r.detail += "; over the 3 min budget";
    }
    if (r.id == "AC10" && options.only.empty()) {
      const double total = std::chrono::duration<double>(Clock::now() - start).count();
      r.detail += "; full selftest " + fmt("%.1f", total) + " s";
      if (total > kSelftestBudgetSeconds) r.passed = false;
    }
    if (options.on_result) options.on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace touchsdf
