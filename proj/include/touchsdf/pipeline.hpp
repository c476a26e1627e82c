// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "touchsdf/denoiser.hpp"
#include "touchsdf/metrics.hpp"
#include "touchsdf/sampler.hpp"
#include "touchsdf/scene.hpp"

namespace touchsdf {

enum class Ablation { kFull, kNoTouch, kVisionOnly };
std::string ablation_name(Ablation a);
Ablation parse_ablation(const std::string& s);

/// Candidate shapes for one scene: the ground truth and a copy moved along
/// the viewing axis, which the masks cannot tell apart.
struct SceneLibrary {
  LinearCodec codec;
  std::vector<SdfGrid> candidates;
  std::vector<Latent> codes;
  int gt_index = 0;
  double shift = 0.0;  // signed z offset of the variant, grid units
};

struct LibraryConfig {
  double shift_voxels = 3.0;  // |dz| of the variant in voxels; the sign is drawn per scene
  double lambda_ev = 20.0;    // mask evidence strength
  double sigma_min = 1e-3;
  void validate() const;
};
void to_json(nlohmann::json& j, const LibraryConfig& c);
void from_json(const nlohmann::json& j, LibraryConfig& c);

SceneLibrary build_scene_library(const GraspScene& scene, const LibraryConfig& config, std::uint64_t seed);

/// R x R view of a W x W mask (top-left pixel of each block).
std::vector<std::uint8_t> mask_at_grid(const Mask& mask, int resolution);

/// Library weights after conditioning on the visible-object and hand masks.
ShapeLibrary conditioned_library(const GraspScene& scene, const SceneLibrary& lib, const LibraryConfig& config);

struct ReconstructionOptions {
  Ablation ablation = Ablation::kFull;
  double touch_noise_mm = 0.0;
  std::uint64_t seed = 0;  // sampler and contact-noise streams
};

struct Reconstruction {
  SampleResult sample;
  double ni = 0.0;       // L_NI of the output against the hand
  double contact = 0.0;  // L_C of the output against the clean contacts
  double iou = 0.0;      // voxel IoU against the ground truth
  int nearest = -1;      // library entry closest to the output latent
};

/// vision-only: library conditioned on masks, no hand or touch.
/// no-touch: adds the hand (penetration guidance).
/// full: adds the touch tensor (contact guidance).
Reconstruction reconstruct(const GraspScene& scene, const SceneLibrary& lib, const VelocityField& field,
                           const SamplerConfig& sampler, const ReconstructionOptions& opt);

/// Touch tensor as seen by a given ablation and noise level.
TouchTensor observed_touch(const GraspScene& scene, Ablation ablation, double noise_mm, std::uint64_t seed);

/// Conditioning vector for a learned field: fuser(hand code, touch features).
Latent denoiser_condition(const GraspScene& scene, const LinearCodec& codec, const TouchFuser& fuser,
                          Ablation ablation, const TouchTensor& touch);

struct SceneMetrics {
  double cd = 0.0;
  double nc = 0.0;
  double fscore = 0.0;
  double iou = 0.0;
  double emd = 0.0;
  double iou3d = 0.0;
  double adds = 0.0;
  double adds_at = 0.0;
  double icp_rot = 0.0;
  std::map<std::string, double> as_map() const;
};

struct MetricOptions {
  std::size_t surface_points = 10000;
  std::size_t emd_points = 256;
  std::size_t pose_points = 1000;
  std::uint64_t seed = 0;
};

/// Full metric set of a predicted grid against the ground truth, with
/// distances in unit-cube units (grid coordinates / 2). Throws kEmptySurface
/// when either grid has no surface.
SceneMetrics evaluate_reconstruction(const SdfGrid& pred, const SdfGrid& gt, const MetricOptions& opt = {});

}  // namespace touchsdf
