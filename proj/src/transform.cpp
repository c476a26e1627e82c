// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/transform.hpp"

#include <algorithm>
#include <cmath>

#include "touchsdf/error.hpp"

namespace touchsdf {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

SdfGrid augment_sdf(const SdfGrid& grid, const SimilarityTransform& xf) {
  xf.validate();
  return SdfGrid::from_function(grid.resolution(), [&](const Vec3& x) {
    const Vec3 p = xf.inverse_apply(x);
    const Vec3 q = p.cwiseMax(-1.0).cwiseMin(1.0);
    const double v = sample_trilinear(grid, q).value + (p - q).norm();
    return xf.scale * v;
  });
}

std::vector<std::uint8_t> augmentation_support(int resolution, const SimilarityTransform& xf) {
  const SdfGrid probe = SdfGrid::filled(resolution, 0.0);
  std::vector<std::uint8_t> mask(probe.size());
  for (std::size_t n = 0; n < probe.size(); ++n)
    mask[n] = (xf.inverse_apply(probe.center(n)).array().abs() <= 1.0).all() ? 1 : 0;
  return mask;
}

Aabb rotated_surface_box(const SdfGrid& grid, const Mat3& rotation) {
  const double h = grid.voxel_size();
  Aabb box;
  for (std::size_t n = 0; n < grid.size(); ++n)
    if (std::abs(grid[n]) < h) box.extend(rotation * grid.center(n));
  require(!box.empty(), ErrorCode::kEmptySurface, "grid has no surface voxels");
  const Vec3 half = 0.5 * h * rotation.cwiseAbs().rowwise().sum();
  box.lo -= half;
  box.hi += half;
  return box;
}

double max_feasible_scale(const SdfGrid& grid, const Mat3& rotation, int padding_voxels) {
  const Aabb box = rotated_surface_box(grid, rotation);
  const double avail = 2.0 - 2.0 * padding_voxels * grid.voxel_size();
  require(avail > 0.0, ErrorCode::kInvalidArgument, "padding leaves no room in the domain");
  return avail / box.extent().maxCoeff();
}

SimilarityTransform sample_augmentation(Rng& rng, const SdfGrid& grid, const Mat3& rotation, int padding_voxels) {
  SimilarityTransform xf;
  xf.rotation = rotation;
  xf.validate();
  const Aabb box = rotated_surface_box(grid, rotation);
  const double half = 1.0 - padding_voxels * grid.voxel_size();
  const double s_max = 2.0 * half / box.extent().maxCoeff();
  std::uniform_real_distribution<double> scale_dist(0.5, 1.0);
  const double s = std::min(scale_dist(rng), s_max);
  xf.scale = s;
  for (int a = 0; a < 2; ++a) {
    const double lo = -half - s * box.lo[a];
    const double hi = half - s * box.hi[a];
    if (hi > lo) {
      std::uniform_real_distribution<double> t_dist(lo, hi);
      xf.translation[a] = t_dist(rng);
    } else {
      xf.translation[a] = 0.5 * (lo + hi);
    }
  }
  xf.translation.z() = -s * 0.5 * (box.lo.z() + box.hi.z());
  return xf;
}

SimilarityTransform canonical_transform(const Aabb& scene_box, const std::vector<Vec3>& fingertips,
                                        int padding_voxels, int resolution) {
  require(!fingertips.empty(), ErrorCode::kInvalidArgument, "canonicalization needs at least one fingertip");
  require(!scene_box.empty(), ErrorCode::kEmptySurface, "canonicalization of an empty scene");
  Vec3 centroid = Vec3::Zero();
  for (const auto& f : fingertips) centroid += f;
  centroid /= static_cast<double>(fingertips.size());

  const double half = 1.0 - padding_voxels * (2.0 / resolution);
  require(half > 0.0, ErrorCode::kInvalidArgument, "padding leaves no room in the domain");
  const Vec3 ext = scene_box.extent();
  const double s_xy = 2.0 * half / std::max(ext.x(), ext.y());
  const double reach_z = std::max(centroid.z() - scene_box.lo.z(), scene_box.hi.z() - centroid.z());
  require(reach_z > 0.0 || s_xy > 0.0, ErrorCode::kEmptySurface, "degenerate scene box");
  const double s_z = reach_z > 0.0 ? half / reach_z : s_xy;

  SimilarityTransform xf;
  xf.scale = std::min(s_xy, s_z);
  const Vec3 c = scene_box.center();
  xf.translation = Vec3(-xf.scale * c.x(), -xf.scale * c.y(), -xf.scale * centroid.z());
  return xf;
}

CanonicalScene canonicalize_scene(const ShapePtr& hand, const ShapePtr& object, const std::vector<Vec3>& fingertips,
                                  int padding_voxels, int resolution) {
  Aabb box = hand->bounds();
  box.extend(object->bounds());
  CanonicalScene out;
  out.transform = canonical_transform(box, fingertips, padding_voxels, resolution);
  out.hand = make_transformed(hand, out.transform);
  out.object = make_transformed(object, out.transform);
  for (const auto& f : fingertips) out.fingertips.push_back(out.transform.apply(f));
  out.hand_sdf = voxelize(*out.hand, resolution);
  out.object_sdf = voxelize(*out.object, resolution);
  return out;
}

}  // namespace touchsdf
