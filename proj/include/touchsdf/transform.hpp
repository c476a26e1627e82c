// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <vector>

#include "touchsdf/shapes.hpp"
#include "touchsdf/similarity.hpp"

namespace touchsdf {

using Rng = std::mt19937_64;

/// Stateless seed derivation for per-item RNG streams (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// S_aug(x) = s * S(R^T (x - t) / s), sampled trilinearly. Reads that fall
/// outside [-1,1]^3 continue the field as S(q) + |p - q| with q the nearest
/// in-domain point (exterior by the feasibility guarantee).
SdfGrid augment_sdf(const SdfGrid& grid, const SimilarityTransform& xf);

/// 1 where the inverse-warped voxel center lies in [-1,1]^3, i.e. where
/// augment_sdf reads the source grid rather than its continuation.
std::vector<std::uint8_t> augmentation_support(int resolution, const SimilarityTransform& xf);

/// Box enclosing the rotated surface voxels (|S| < h), each voxel counted
/// with its full rotated extent. Throws kEmptySurface if there are none.
Aabb rotated_surface_box(const SdfGrid& grid, const Mat3& rotation);

/// Largest s such that the rotated, scaled surface box fits inside the domain
/// shrunk by `padding_voxels` on every face.
double max_feasible_scale(const SdfGrid& grid, const Mat3& rotation, int padding_voxels);

/// s ~ U(0.5, 1) clipped to the feasible maximum, (t_x, t_y) uniform over the
/// feasible in-plane range, t_z centering the surface box along z.
SimilarityTransform sample_augmentation(Rng& rng, const SdfGrid& grid, const Mat3& rotation,
                                        int padding_voxels = 2);

struct CanonicalScene {
  SimilarityTransform transform;  // world -> grid, shared by hand and object
  ShapePtr hand;                  // in grid coordinates
  ShapePtr object;
  std::vector<Vec3> fingertips;
  SdfGrid hand_sdf;
  SdfGrid object_sdf;
};

/// Scales and translates a hand-object scene into the grid: the union box
/// keeps `padding_voxels` of clearance, is centered in (x, y), and the
/// fingertip centroid lands on z = 0.
CanonicalScene canonicalize_scene(const ShapePtr& hand, const ShapePtr& object, const std::vector<Vec3>& fingertips,
                                  int padding_voxels, int resolution);

/// The transform canonicalize_scene would use, without voxelizing.
SimilarityTransform canonical_transform(const Aabb& scene_box, const std::vector<Vec3>& fingertips,
                                        int padding_voxels, int resolution);

}  // namespace touchsdf
