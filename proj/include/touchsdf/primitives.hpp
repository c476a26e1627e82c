// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>

#include "touchsdf/grid.hpp"

namespace touchsdf {

// Analytic primitives in domain (or any metric) units. Sphere, box, capsule and
// cylinder distances are exact. The superellipsoid uses the radial distance to
// its surface along the ray from its center, which has the exact sign and zero
// set but overestimates |distance| away from the surface.

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.5;
};

struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.3);
};

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.1;
};

struct Cylinder {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // unit
  double half_height = 0.3;
  double radius = 0.2;
};

struct Superellipsoid {
  Vec3 center = Vec3::Zero();
  Vec3 radii = Vec3::Constant(0.4);
  double e1 = 1.0;  // north-south roundness
  double e2 = 1.0;  // east-west roundness
};

using Primitive = std::variant<Sphere, Box, Capsule, Cylinder, Superellipsoid>;

double primitive_sdf(const Primitive& prim, const Vec3& p);
Aabb primitive_bounds(const Primitive& prim);
std::string primitive_name(const Primitive& prim);
bool primitive_is_exact(const Primitive& prim);

double sphere_sdf(const Vec3& p, const Vec3& c, double r);
double box_sdf(const Vec3& p, const Vec3& c, const Vec3& half);
double capsule_sdf(const Vec3& p, const Vec3& a, const Vec3& b, double r);

/// Samples the primitive at the voxel centers of an R^3 grid. Throws
/// kDomainViolation when the primitive's bounds leave [-1,1]^3.
SdfGrid analytic_sdf(const Primitive& prim, int resolution);

}  // namespace touchsdf
