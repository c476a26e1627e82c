// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "touchsdf/similarity.hpp"
#include "touchsdf/transform.hpp"

namespace touchsdf {

struct ContactSet {
  std::vector<Vec3> points;        // domain units, inside [-1,1]^3
  std::vector<int> source_finger;  // -1 when unknown

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Two-channel touch volume. `contact` is the binary occupancy C; `distance`
/// is D, the Euclidean distance in voxel units to the nearest contact voxel.
struct TouchTensor {
  int resolution = 0;
  std::vector<std::uint8_t> contact;
  std::vector<double> distance;

  std::size_t contact_count() const;
};

/// D for a tensor without contacts: the grid diagonal in voxel units.
double touch_sentinel(int resolution);

/// Voxels where both |S_hand| < band and |S_object| < band, grouped into
/// 26-connected components; each component yields its centroid.
ContactSet extract_contacts(const SdfGrid& hand, const SdfGrid& object, double band);

/// Voxel index containing p (clamped to the grid).
std::array<int, 3> voxel_of(const Vec3& p, int resolution);

TouchTensor build_touch_tensor(const ContactSet& contacts, int resolution);

/// Exact squared Euclidean distance transform (separable lower-envelope
/// method) of a binary volume, in voxel units. Voxels with seed != 0 are 0.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& seeds, int resolution);

/// Offsets every point by a vector drawn uniformly from the ball of radius
/// sigma_mm (converted to domain units with frame.metric_scale), then clamps
/// the point to the domain. The draws do not depend on sigma_mm, so equal
/// seeds give the same directions at every noise level.
ContactSet perturb_contacts(const ContactSet& contacts, double sigma_mm, const GridFrame& frame, Rng& rng);

/// Fixed-length summary of T: mean of C and mean of D / sentinel over the
/// eight octants of the grid (16 values, C block first).
std::vector<double> pool_touch_features(const TouchTensor& touch);
inline constexpr int kTouchFeatureDim = 16;

void save_touch_tensor(const TouchTensor& t, const std::filesystem::path& c_path, const std::filesystem::path& d_path);
TouchTensor load_touch_tensor(const std::filesystem::path& c_path, const std::filesystem::path& d_path);

}  // namespace touchsdf
