// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "touchsdf/grid.hpp"

namespace touchsdf {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  /// Throws kInvalidArgument on out-of-range indices.
  void validate() const;
};

/// Zero-area threshold used when describing extracted meshes: a triangle can
/// only fall below it when the iso level hits a grid value exactly.
inline constexpr double kDegenerateAreaEps = 1e-14;

/// Marching tetrahedra over the Kuhn (six-tetrahedra) split of every cell.
/// Output vertices are shared per grid edge, so the mesh is closed wherever
/// the level set does not touch the grid boundary. Triangles are oriented with
/// normals pointing towards larger values. Throws kEmptySurface when the grid
/// does not straddle `iso`.
TriMesh extract_surface(const SdfGrid& grid, double iso = 0.0);

/// Signed distance of a closed mesh, sampled at voxel centers. The sign comes
/// from ray parity along +x, +y and +z; any disagreement between the three
/// (away from the surface itself) is reported as kNotWatertight.
SdfGrid mesh_to_sdf(const TriMesh& mesh, int resolution);

/// Signed enclosed volume (positive for outward-oriented closed meshes).
double mesh_volume(const TriMesh& mesh);
double triangle_area(const TriMesh& mesh, std::size_t t);
Vec3 triangle_normal(const TriMesh& mesh, std::size_t t);

TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions);
TriMesh make_box_mesh(const Vec3& center, const Vec3& half_extents);

/// Closest point on triangle (a,b,c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Nearest-triangle queries over a bounding-volume hierarchy.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriMesh& mesh);
  /// Unsigned distance from p to the mesh.
  double distance(const Vec3& p) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first triangle in order_, inner: left child
    std::uint32_t count = 0;  // leaf: triangle count, inner: 0
    std::uint32_t right = 0;
  };
  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  const TriMesh& mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<Vec3> centroids_;
};

void save_ply(const TriMesh& mesh, const std::filesystem::path& path);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_obj(const std::filesystem::path& path);

}  // namespace touchsdf
