// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/similarity.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "touchsdf/error.hpp"

namespace touchsdf {

void SimilarityTransform::validate() const {
  require(std::isfinite(scale) && scale > 0.0, ErrorCode::kInvalidArgument, "similarity scale must be > 0");
  require(((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9),
          ErrorCode::kInvalidArgument, "rotation is not orthonormal");
  require(std::abs(rotation.determinant() - 1.0) <= 1e-9, ErrorCode::kInvalidArgument, "rotation has det != +1");
  require(translation.allFinite(), ErrorCode::kInvalidArgument, "translation is not finite");
}

SimilarityTransform compose(const SimilarityTransform& a, const SimilarityTransform& b) {
  SimilarityTransform c;
  c.scale = a.scale * b.scale;
  c.rotation = a.rotation * b.rotation;
  c.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return c;
}

SimilarityTransform invert(const SimilarityTransform& a) {
  SimilarityTransform inv;
  inv.scale = 1.0 / a.scale;
  inv.rotation = a.rotation.transpose();
  inv.translation = -(inv.rotation * a.translation) / a.scale;
  return inv;
}

Mat3 axis_angle(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

void GridFrame::validate() const {
  require(std::abs(camera_axis.norm() - 1.0) <= 1e-9, ErrorCode::kInvalidArgument, "camera axis must be unit");
  require(metric_scale > 0.0 && std::isfinite(metric_scale), ErrorCode::kInvalidArgument,
          "metric scale must be > 0");
}

}  // namespace touchsdf
