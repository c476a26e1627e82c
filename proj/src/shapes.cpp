// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace touchsdf {

Aabb TransformedShape::bounds() const {
  const Aabb b = base_->bounds();
  Aabb out;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? b.hi.x() : b.lo.x(), (c & 2) ? b.hi.y() : b.lo.y(), (c & 4) ? b.hi.z() : b.lo.z());
    out.extend(xf_.apply(corner));
  }
  return out;
}

double UnionShape::sdf(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& s : parts_) d = std::min(d, s->sdf(p));
  return d;
}

Aabb UnionShape::bounds() const {
  Aabb b;
  for (const auto& s : parts_) b.extend(s->bounds());
  return b;
}

double ZScaledShape::sdf(const Vec3& p) const {
  const Vec3 q(p.x(), p.y(), pivot_ + (p.z() - pivot_) / k_);
  return std::min(1.0, k_) * base_->sdf(q);
}

Aabb ZScaledShape::bounds() const {
  Aabb b = base_->bounds();
  const double lo = pivot_ + (b.lo.z() - pivot_) * k_;
  const double hi = pivot_ + (b.hi.z() - pivot_) * k_;
  b.lo.z() = std::min(lo, hi);
  b.hi.z() = std::max(lo, hi);
  return b;
}

ShapePtr make_primitive(Primitive prim) { return std::make_shared<PrimitiveShape>(std::move(prim)); }

ShapePtr make_transformed(ShapePtr base, const SimilarityTransform& xf) {
  return std::make_shared<TransformedShape>(std::move(base), xf);
}

SdfGrid voxelize(const Shape& shape, int resolution) {
  return SdfGrid::from_function(resolution, [&](const Vec3& p) { return shape.sdf(p); });
}

double ray_root(const Shape& shape, const Vec3& origin, const Vec3& dir, double max_r) {
  // march until the sign flips, then bisect
  const int steps = 256;
  double r0 = 0.0, f0 = shape.sdf(origin);
  if (f0 <= 0.0) return -1.0;
  for (int s = 1; s <= steps; ++s) {
    const double r1 = max_r * s / steps;
    const double f1 = shape.sdf(origin + r1 * dir);
    if (f1 <= 0.0) {
      double lo = r0, hi = r1;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (shape.sdf(origin + mid * dir) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      return lo;
    }
    r0 = r1;
    f0 = f1;
  }
  return -1.0;
}

Vec3 shape_gradient(const Shape& shape, const Vec3& p, double step) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = step;
    g[a] = (shape.sdf(p + e) - shape.sdf(p - e)) / (2.0 * step);
  }
  return g;
}

}  // namespace touchsdf
