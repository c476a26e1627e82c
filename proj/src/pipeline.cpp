// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/pipeline.hpp"

#include <cmath>

#include "touchsdf/error.hpp"
#include "touchsdf/mesh.hpp"
#include "touchsdf/objectives.hpp"

namespace touchsdf {

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoTouch: return "no-touch";
    case Ablation::kVisionOnly: return "vision-only";
  }
  return "full";
}

Ablation parse_ablation(const std::string& s) {
  if (s == "full") return Ablation::kFull;
  if (s == "no-touch") return Ablation::kNoTouch;
  if (s == "vision-only") return Ablation::kVisionOnly;
  fail(ErrorCode::kInvalidArgument, "unknown ablation mode: " + s + " (expected full, no-touch or vision-only)");
}

void LibraryConfig::validate() const {
  require(shift_voxels > 0.0 && std::isfinite(shift_voxels), ErrorCode::kInvalidArgument, "shift_voxels must be > 0");
  require(lambda_ev >= 0.0, ErrorCode::kInvalidArgument, "lambda_ev must be >= 0");
  require(sigma_min > 0.0 && sigma_min < 1.0, ErrorCode::kInvalidArgument, "sigma_min must lie in (0, 1)");
}

void to_json(nlohmann::json& j, const LibraryConfig& c) {
  j = nlohmann::json{{"shift_voxels", c.shift_voxels}, {"lambda_ev", c.lambda_ev}, {"sigma_min", c.sigma_min}};
}

void from_json(const nlohmann::json& j, LibraryConfig& c) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "library config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "shift_voxels") c.shift_voxels = value.get<double>();
    else if (key == "lambda_ev") c.lambda_ev = value.get<double>();
    else if (key == "sigma_min") c.sigma_min = value.get<double>();
    else fail(ErrorCode::kInvalidArgument, "unknown library config key: " + key);
  }
  c.validate();
}

SceneLibrary build_scene_library(const GraspScene& scene, const LibraryConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  SceneLibrary lib;
  const double sign = (rng() & 1) ? 1.0 : -1.0;
  lib.shift = sign * config.shift_voxels * scene.object_sdf.voxel_size();
  lib.gt_index = static_cast<int>(rng() & 1);
  SdfGrid variant = depth_variant(scene, lib.shift);
  lib.candidates = lib.gt_index == 0 ? std::vector<SdfGrid>{scene.object_sdf, std::move(variant)}
                                     : std::vector<SdfGrid>{std::move(variant), scene.object_sdf};
  lib.codec = fit_codec(lib.candidates, 2);
  for (const auto& c : lib.candidates) lib.codes.push_back(encode(lib.codec, c));
  return lib;
}

std::vector<std::uint8_t> mask_at_grid(const Mask& mask, int resolution) {
  require(mask.width == mask.height && mask.width % resolution == 0, ErrorCode::kInvalidArgument,
          "mask size must be a multiple of the grid resolution");
  const int m = mask.width / resolution;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(resolution) * resolution);
  for (int j = 0; j < resolution; ++j)
    for (int i = 0; i < resolution; ++i) out[static_cast<std::size_t>(j) * resolution + i] = mask.at(i * m, j * m);
  return out;
}

ShapeLibrary conditioned_library(const GraspScene& scene, const SceneLibrary& lib, const LibraryConfig& config) {
  const int r = scene.resolution;
  const auto vis = mask_at_grid(scene.masks.object_visible, r);
  const auto hand = mask_at_grid(scene.masks.hand, r);
  std::vector<double> mismatch;
  for (const auto& c : lib.candidates) mismatch.push_back(silhouette_mismatch(silhouette(c), vis, hand));
  return condition_library(ShapeLibrary::uniform(lib.codes, config.sigma_min), mismatch, config.lambda_ev);
}

TouchTensor observed_touch(const GraspScene& scene, Ablation ablation, double noise_mm, std::uint64_t seed) {
  if (ablation != Ablation::kFull) return build_touch_tensor({}, scene.resolution);
  if (noise_mm == 0.0) return scene.touch;
  Rng rng(derive_seed(seed, 0x70c4));
  return build_touch_tensor(perturb_contacts(scene.contacts, noise_mm, scene.frame, rng), scene.resolution);
}

Reconstruction reconstruct(const GraspScene& scene, const SceneLibrary& lib, const VelocityField& field,
                           const SamplerConfig& sampler, const ReconstructionOptions& opt) {
  const TouchTensor touch = observed_touch(scene, opt.ablation, opt.touch_noise_mm, opt.seed);
  PhysicsContext ctx;
  if (opt.ablation != Ablation::kVisionOnly) {
    ctx.hand = &scene.hand_sdf;
    ctx.touch = &touch;
  }
  SamplerConfig cfg = sampler;
  cfg.seed = opt.seed;
  Reconstruction out;
  out.sample = sample(field, lib.codec, ctx, cfg);
  out.ni = ni_loss(out.sample.grid, scene.hand_sdf, cfg.tau, false).value;
  out.contact = contact_loss(out.sample.grid, scene.touch.contact, false).value;
  out.iou = voxel_iou(out.sample.grid, scene.object_sdf);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lib.codes.size(); ++i) {
    const double d = (out.sample.latent - lib.codes[i]).norm();
    if (d < best) {
      best = d;
      out.nearest = static_cast<int>(i);
    }
  }
  return out;
}

Latent denoiser_condition(const GraspScene& scene, const LinearCodec& codec, const TouchFuser& fuser,
                          Ablation ablation, const TouchTensor& touch) {
  if (ablation == Ablation::kVisionOnly) return Latent::Zero(codec.dim());
  const Latent hand = encode(codec, scene.hand_sdf);
  if (ablation == Ablation::kNoTouch) {
    TouchFuser no_touch = fuser;
    no_touch.w_touch.setZero();
    return no_touch.apply(hand, touch);
  }
  return fuser.apply(hand, touch);
}

std::map<std::string, double> SceneMetrics::as_map() const {
  return {{"cd", cd},       {"nc", nc},     {"fscore", fscore},   {"voxel_iou", iou},    {"emd", emd},
          {"iou3d", iou3d}, {"adds", adds}, {"adds_at_0.1", adds_at}, {"icp_rot_deg", icp_rot}};
}

namespace {

PointSet unit_cube(const PointSet& p, std::size_t limit) {
  PointSet out;
  const std::size_t n = std::min(limit, p.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(0.5 * p[i]);
  return out;
}

}  // namespace

SceneMetrics evaluate_reconstruction(const SdfGrid& pred, const SdfGrid& gt, const MetricOptions& opt) {
  require_same_resolution(pred, gt, "evaluate_reconstruction");
  const TriMesh pm = extract_surface(pred), gm = extract_surface(gt);
  // same streams on both sides, so identical surfaces give identical samples
  SurfaceSample ps = sample_surface(pm, opt.surface_points, derive_seed(opt.seed, 1));
  SurfaceSample gs = sample_surface(gm, opt.surface_points, derive_seed(opt.seed, 1));
  for (auto& p : ps.points) p *= 0.5;
  for (auto& p : gs.points) p *= 0.5;
  SceneMetrics m;
  m.cd = chamfer(ps.points, gs.points);
  m.nc = normal_consistency(ps, gs);
  m.fscore = fscore(ps.points, gs.points, 0.02);
  m.iou = voxel_iou(pred, gt);
  const PointSet pe = unit_cube(sample_surface(pm, opt.emd_points, derive_seed(opt.seed, 3)).points, opt.emd_points);
  const PointSet ge = unit_cube(sample_surface(gm, opt.emd_points, derive_seed(opt.seed, 3)).points, opt.emd_points);
  m.emd = emd(pe, ge);
  m.iou3d = iou3d(bounding_box(ps.points), bounding_box(gs.points));
  const PointSet pp(ps.points.begin(), ps.points.begin() + std::min(opt.pose_points, ps.points.size()));
  const PointSet gp(gs.points.begin(), gs.points.begin() + std::min(opt.pose_points, gs.points.size()));
  m.adds = adds(pp, gp);
  m.adds_at = adds_at(m.adds, diameter(gp)) ? 1.0 : 0.0;
  m.icp_rot = icp_rot(pp, gp);
  return m;
}

}  // namespace touchsdf
