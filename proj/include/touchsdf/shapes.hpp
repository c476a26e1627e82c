// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "touchsdf/primitives.hpp"
#include "touchsdf/similarity.hpp"

namespace touchsdf {

/// Implicit geometry that can be voxelized: a signed distance (or a bound on
/// one) and an axis-aligned box enclosing the negative set.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual double sdf(const Vec3& p) const = 0;
  virtual Aabb bounds() const = 0;
};

using ShapePtr = std::shared_ptr<const Shape>;

class PrimitiveShape final : public Shape {
 public:
  explicit PrimitiveShape(Primitive prim) : prim_(std::move(prim)) {}
  double sdf(const Vec3& p) const override { return primitive_sdf(prim_, p); }
  Aabb bounds() const override { return primitive_bounds(prim_); }
  const Primitive& primitive() const { return prim_; }

 private:
  Primitive prim_;
};

/// base placed by a similarity transform; distances scale with it.
class TransformedShape final : public Shape {
 public:
  TransformedShape(ShapePtr base, const SimilarityTransform& xf) : base_(std::move(base)), xf_(xf) {}
  double sdf(const Vec3& p) const override { return xf_.scale * base_->sdf(xf_.inverse_apply(p)); }
  Aabb bounds() const override;

 private:
  ShapePtr base_;
  SimilarityTransform xf_;
};

/// Pointwise minimum. Exact outside, a bound inside.
class UnionShape final : public Shape {
 public:
  explicit UnionShape(std::vector<ShapePtr> parts) : parts_(std::move(parts)) {}
  double sdf(const Vec3& p) const override;
  Aabb bounds() const override;

 private:
  std::vector<ShapePtr> parts_;
};

/// Stretches base along z about `pivot_z` by `factor`. The value is scaled by
/// min(1, factor) so it stays a lower bound on the true distance magnitude.
class ZScaledShape final : public Shape {
 public:
  ZScaledShape(ShapePtr base, double pivot_z, double factor) : base_(std::move(base)), pivot_(pivot_z), k_(factor) {}
  double sdf(const Vec3& p) const override;
  Aabb bounds() const override;

 private:
  ShapePtr base_;
  double pivot_;
  double k_;
};

ShapePtr make_primitive(Primitive prim);
ShapePtr make_transformed(ShapePtr base, const SimilarityTransform& xf);

SdfGrid voxelize(const Shape& shape, int resolution);

/// Bracketed bisection for the first zero of shape.sdf along origin + r*dir,
/// r in [0, max_r], assuming sdf(origin) > 0. Returns r or a negative value
/// when no sign change is found.
double ray_root(const Shape& shape, const Vec3& origin, const Vec3& dir, double max_r);

/// Central-difference gradient of the shape's field.
Vec3 shape_gradient(const Shape& shape, const Vec3& p, double step);

}  // namespace touchsdf
