// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "touchsdf/grid.hpp"

namespace touchsdf {

/// x -> scale * rotation * x + translation, in grid coordinates.
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static SimilarityTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  /// Inverse warp, rotation^T (x - t) / s.
  Vec3 inverse_apply(const Vec3& x) const { return rotation.transpose() * (x - translation) / scale; }

  /// Throws kInvalidArgument unless R^T R = I and det R = +1 (1e-9) and s > 0.
  void validate() const;
};

/// compose(a, b) applies b first, then a.
SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b);
SimilarityTransform invert(const SimilarityTransform& a);

Mat3 axis_angle(const Vec3& axis, double radians);

/// Camera-aligned frame metadata: the grid +z axis is the viewing direction.
struct GridFrame {
  Vec3 camera_axis = Vec3::UnitZ();
  Mat3 rotation_to_world = Mat3::Identity();
  double metric_scale = 0.1;  // meters per domain unit

  void validate() const;
};

}  // namespace touchsdf
