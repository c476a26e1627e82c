// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "touchsdf/primitives.hpp"
#include "touchsdf/shapes.hpp"
#include "touchsdf/touch.hpp"
#include "touchsdf/transform.hpp"

namespace touchsdf {

/// Haar-distributed rotation.
Mat3 random_rotation(Rng& rng);

// ---------------------------------------------------------------- objects

struct ObjectConfig {
  double min_size = 0.25;  // bounding radius range, object units
  double max_size = 0.5;
  double min_metric_scale = 0.06;  // meters per object unit
  double max_metric_scale = 0.12;
  std::vector<std::string> kinds = {"sphere", "box", "capsule", "cylinder", "superellipsoid"};

  void validate() const;
};
void to_json(nlohmann::json& j, const ObjectConfig& c);
void from_json(const nlohmann::json& j, ObjectConfig& c);

struct ProcObject {
  Primitive primitive;  // centered at the origin
  SimilarityTransform pose;
  double metric_scale = 0.1;

  ShapePtr shape() const;
  double bounding_radius() const;  // farthest corner of the primitive box; an upper bound
};

ProcObject sample_object(Rng& rng, const ObjectConfig& config = {});

// ---------------------------------------------------------------- hands

struct Finger {
  std::vector<Vec3> joints;    // base first, fingertip center last
  std::vector<double> radii;   // one per segment
  bool touching = false;       // the tip was placed on the object surface
};

struct ProcHand {
  int n_fingers = 0;
  std::vector<Finger> fingers;
  Vec3 palm_center = Vec3::Zero();
  Vec3 palm_half = Vec3::Zero();  // in the palm frame
  Mat3 palm_rotation = Mat3::Identity();  // palm frame -> object frame; local z points away from the object

  std::vector<Vec3> fingertips() const;
  ShapePtr shape() const;
  void validate() const;
};

struct GraspConfig {
  int max_retries = 64;
  double min_tip_radius = 0.05;
  double max_tip_radius = 0.08;
  void validate() const;
};

/// Tips are placed where an approach ray from the palm reaches distance r_tip
/// from the object surface. Candidates are checked on the canonical
/// voxelization (resolution, padding) for contact and penetration; throws
/// kGeneration once the retry budget is spent.
ProcHand sample_grasp(const ProcObject& object, int n_fingers, Rng& rng, const GraspConfig& config = {},
                      int resolution = 32, int padding = 2);

// ---------------------------------------------------------------- masks

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, x fastest

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
  bool operator==(const Mask&) const = default;
};

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool operator==(const PixelRect&) const = default;
};

/// Smallest rectangle covering the nonzero pixels. Throws kEmptySurface for an empty mask.
PixelRect tight_rect(const Mask& mask);

struct MaskSet {
  Mask object_full;
  Mask object_visible;
  Mask hand;
};

/// Orthographic view along +z at W = m*R pixels: each voxel column becomes an
/// m x m block. The front-most inside voxel of a column decides visibility;
/// hand wins ties. The hand mask holds the columns where the hand is in
/// front, so it never meets the visible object mask. `hand` may be null.
MaskSet render_masks(const SdfGrid& object, const SdfGrid* hand, int canvas);

/// Crops `mask` to `crop` (default: its tight rect), rescales it with nearest
/// neighbour to fit the pixel box bbox*W/R (aspect preserved) and pastes it
/// centered on a blank W x W canvas.
Mask sprite_place(const Mask& mask, const PixelRect& bbox, int resolution, int canvas,
                  const std::optional<PixelRect>& crop = std::nullopt);

struct OcclusionBin {
  double x = 0.0;
  int bin = 1;
};
OcclusionBin occlusion_bin(const Mask& visible, const Mask& full, int bins = 5);

void save_pgm(const Mask& mask, const std::filesystem::path& path);
Mask load_pgm(const std::filesystem::path& path);

// ---------------------------------------------------------------- scenes

struct SceneConfig {
  int resolution = 32;
  int canvas = 32;    // multiple of resolution
  int padding = 2;
  int fingers = 0;    // 3, 4 or 5; 0 draws one per scene
  int bins = 5;
  ObjectConfig object;
  GraspConfig grasp;

  void validate() const;
};
void to_json(nlohmann::json& j, const SceneConfig& c);
void from_json(const nlohmann::json& j, SceneConfig& c);

struct GraspScene {
  std::uint64_t seed = 0;
  int resolution = 0;
  ProcObject object;
  ProcHand hand;
  SimilarityTransform canonical;  // object frame -> grid
  GridFrame frame;
  SdfGrid object_sdf;  // float-quantized so bundles round-trip exactly
  SdfGrid hand_sdf;
  ContactSet contacts;
  TouchTensor touch;
  MaskSet masks;
  int canvas = 0;
  int bins = 5;
  double occlusion_x = 0.0;
  int bin = 1;

  ShapePtr object_shape() const;  // in grid coordinates
  ShapePtr hand_shape() const;
};

/// canonicalize -> voxelize -> contacts -> masks -> bin. Deterministic per seed.
GraspScene build_scene(std::uint64_t seed, const SceneConfig& config);

struct SceneCheck {
  bool contact = false;
  bool no_penetration = false;
  bool masks_consistent = false;
  bool margins = false;
  double ni = 0.0;
  bool ok() const { return contact && no_penetration && masks_consistent && margins; }
};
SceneCheck check_scene(const GraspScene& scene, int padding);

/// Object SDF after moving the object by `dz` along the viewing axis; the
/// silhouette is unchanged.
SdfGrid depth_variant(const GraspScene& scene, double dz);

/// Metadata only (no volumes or masks).
nlohmann::json scene_metadata(const GraspScene& scene);
/// Rebuilds a scene from metadata; volumes, touch and masks are recomputed.
GraspScene scene_from_metadata(const nlohmann::json& j);

/// scene.json, object.sdfg, hand.sdfg, touch_C.sdfg, touch_D.sdfg,
/// mask_object_full.pgm, mask_object_visible.pgm, mask_hand.pgm
void save_scene_bundle(const GraspScene& scene, const std::filesystem::path& dir);
GraspScene load_scene_bundle(const std::filesystem::path& dir);

nlohmann::json primitive_to_json(const Primitive& prim);
Primitive primitive_from_json(const nlohmann::json& j);
nlohmann::json transform_to_json(const SimilarityTransform& xf);
SimilarityTransform transform_from_json(const nlohmann::json& j);

}  // namespace touchsdf
