// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace touchsdf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Largest magnitude stored by grid builders. Equal to the domain diagonal, so
/// exact distances of anything inside [-1,1]^3 are never cut off.
inline constexpr double kSdfClamp = 3.4641016151377544;

struct Aabb {
  Vec3 lo = Vec3::Constant(1e300);
  Vec3 hi = Vec3::Constant(-1e300);

  bool empty() const { return (lo.array() > hi.array()).any(); }
  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    if (b.empty()) return;
    extend(b.lo);
    extend(b.hi);
  }
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return 0.5 * (lo + hi); }
};

/// Scalar field sampled at the voxel centers of an R^3 grid over [-1,1]^3.
///
/// Voxel (i,j,k) has center (-1 + (i+0.5)h, -1 + (j+0.5)h, -1 + (k+0.5)h) with
/// h = 2/R. Values are stored z-major: x is the fastest-varying index and z
/// the slowest, i.e. index = i + R*(j + R*k). Negative values are inside.
class SdfGrid {
 public:
  SdfGrid() = default;
  SdfGrid(int resolution, std::vector<double> values);

  static SdfGrid filled(int resolution, double value);
  /// Evaluates `f` at every voxel center and clamps to +-kSdfClamp.
  static SdfGrid from_function(int resolution, const std::function<double(const Vec3&)>& f);

  int resolution() const { return res_; }
  double voxel_size() const { return 2.0 / res_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(res_) * (j + static_cast<std::size_t>(res_) * k);
  }
  double at(int i, int j, int k) const { return values_[index(i, j, k)]; }
  double operator[](std::size_t n) const { return values_[n]; }

  double center_coord(int i) const { return -1.0 + (i + 0.5) * voxel_size(); }
  Vec3 center(int i, int j, int k) const { return {center_coord(i), center_coord(j), center_coord(k)}; }
  Vec3 center(std::size_t n) const;

  /// Copy with every value rounded to f32, i.e. what a save/load cycle yields.
  SdfGrid quantized() const;

 private:
  int res_ = 0;
  std::vector<double> values_;
};

/// Finite-difference gradients with an interior mask that excludes the
/// outermost one-voxel shell.
struct GradientField {
  int resolution = 0;
  std::vector<Vec3> vectors;
  std::vector<std::uint8_t> interior_mask;
};

enum class OutOfDomain { kClamp, kThrow };

struct TrilinearSample {
  double value = 0.0;
  bool clamped = false;
};

/// Trilinear interpolation of the eight surrounding voxel values. Points in
/// the half-voxel rim outside the voxel-center hull are clamped onto it.
/// Points outside [-1,1]^3 are clamped (flagged) or rejected per `mode`.
TrilinearSample sample_trilinear(const SdfGrid& grid, const Vec3& p, OutOfDomain mode = OutOfDomain::kClamp);

GradientField gradient_stencil(const SdfGrid& grid);

SdfGrid sdf_min(const SdfGrid& a, const SdfGrid& b);

void require_same_resolution(const SdfGrid& a, const SdfGrid& b, const char* what);

/// Count of voxels with a strictly negative value.
std::size_t count_inside(const SdfGrid& grid);

// SDFG binary volume: "SDFG", u32 version, u32 R, 3 x f64 domain min,
// 3 x f64 domain max, then R^3 little-endian f32 in z-major order.
// Version 2 carries a channel tag and dtype after the domain box and is used
// for the touch tensor channels.
void save_grid(const SdfGrid& grid, const std::filesystem::path& path);
SdfGrid load_grid(const std::filesystem::path& path);

enum class ChannelType : std::uint8_t { kF32 = 0, kU8 = 1 };

struct TaggedVolume {
  int resolution = 0;
  char tag = '?';
  ChannelType type = ChannelType::kF32;
  std::vector<double> values;
};

void save_tagged_volume(const TaggedVolume& vol, const std::filesystem::path& path);
TaggedVolume load_tagged_volume(const std::filesystem::path& path);

}  // namespace touchsdf
