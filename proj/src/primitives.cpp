// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/primitives.hpp"

#include <algorithm>
#include <cmath>

#include "touchsdf/error.hpp"

namespace touchsdf {

double sphere_sdf(const Vec3& p, const Vec3& c, double r) { return (p - c).norm() - r; }

double box_sdf(const Vec3& p, const Vec3& c, const Vec3& half) {
  const Vec3 q = (p - c).cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

double capsule_sdf(const Vec3& p, const Vec3& a, const Vec3& b, double r) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm() - r;
}

namespace {

double cylinder_sdf(const Cylinder& c, const Vec3& p) {
  const Vec3 q = p - c.center;
  const double along = q.dot(c.axis);
  const double radial = (q - along * c.axis).norm();
  const double dr = radial - c.radius;
  const double da = std::abs(along) - c.half_height;
  return std::hypot(std::max(dr, 0.0), std::max(da, 0.0)) + std::min(std::max(dr, da), 0.0);
}

double superellipsoid_sdf(const Superellipsoid& s, const Vec3& p) {
  const Vec3 q = p - s.center;
  const double n = q.norm();
  if (n == 0.0) return -s.radii.minCoeff();
  const double x = std::pow(std::abs(q.x() / s.radii.x()), 2.0 / s.e2);
  const double y = std::pow(std::abs(q.y() / s.radii.y()), 2.0 / s.e2);
  const double z = std::pow(std::abs(q.z() / s.radii.z()), 2.0 / s.e1);
  const double f = std::pow(x + y, s.e2 / s.e1) + z;
  // q / f^(e1/2) lies on the surface
  return n * (1.0 - std::pow(f, -0.5 * s.e1));
}

}  // namespace

double primitive_sdf(const Primitive& prim, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) return sphere_sdf(p, s.center, s.radius);
        else if constexpr (std::is_same_v<T, Box>) return box_sdf(p, s.center, s.half_extents);
        else if constexpr (std::is_same_v<T, Capsule>) return capsule_sdf(p, s.a, s.b, s.radius);
        else if constexpr (std::is_same_v<T, Cylinder>) return cylinder_sdf(s, p);
        else return superellipsoid_sdf(s, p);
      },
      prim);
}

Aabb primitive_bounds(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> Aabb {
        using T = std::decay_t<decltype(s)>;
        Aabb b;
        if constexpr (std::is_same_v<T, Sphere>) {
          b.lo = s.center.array() - s.radius;
          b.hi = s.center.array() + s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          b.lo = s.center - s.half_extents;
          b.hi = s.center + s.half_extents;
        } else if constexpr (std::is_same_v<T, Capsule>) {
          b.lo = s.a.cwiseMin(s.b).array() - s.radius;
          b.hi = s.a.cwiseMax(s.b).array() + s.radius;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          Vec3 e;
          for (int k = 0; k < 3; ++k) {
            const double ak = s.axis[k];
            e[k] = std::abs(ak) * s.half_height + s.radius * std::sqrt(std::max(0.0, 1.0 - ak * ak));
          }
          b.lo = s.center - e;
          b.hi = s.center + e;
        } else {
          b.lo = s.center - s.radii;
          b.hi = s.center + s.radii;
        }
        return b;
      },
      prim);
}

std::string primitive_name(const Primitive& prim) {
  static const char* names[] = {"sphere", "box", "capsule", "cylinder", "superellipsoid"};
  return names[prim.index()];
}

bool primitive_is_exact(const Primitive& prim) { return !std::holds_alternative<Superellipsoid>(prim); }

SdfGrid analytic_sdf(const Primitive& prim, int resolution) {
  require(resolution >= 8, ErrorCode::kInvalidArgument, "analytic_sdf needs R >= 8");
  const Aabb b = primitive_bounds(prim);
  require((b.lo.array() >= -1.0).all() && (b.hi.array() <= 1.0).all(), ErrorCode::kDomainViolation,
          primitive_name(prim) + " does not fit inside [-1,1]^3");
  return SdfGrid::from_function(resolution, [&](const Vec3& p) { return primitive_sdf(prim, p); });
}

}  // namespace touchsdf
