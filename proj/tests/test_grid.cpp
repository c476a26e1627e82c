// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstring>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "touchsdf/error.hpp"
#include "touchsdf/grid.hpp"
#include "touchsdf/mesh.hpp"
#include "touchsdf/primitives.hpp"

using namespace touchsdf;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("touchsdf_test_" + name);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("analytic sphere and box values") {
  CHECK(sphere_sdf(Vec3::Zero(), Vec3::Zero(), 0.5) == doctest::Approx(-0.5));
  CHECK(sphere_sdf(Vec3(0.5, 0, 0), Vec3::Zero(), 0.5) == doctest::Approx(0.0));
  CHECK(box_sdf(Vec3(0.5, 0, 0), Vec3::Zero(), Vec3::Constant(0.3)) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(primitive_sdf(Box{}, Vec3(0.5, 0, 0)) == doctest::Approx(0.2));
}

TEST_CASE("analytic_sdf grid and preconditions") {
  const SdfGrid g = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 16);
  CHECK(g.resolution() == 16);
  CHECK(g.voxel_size() == 2.0 / 16);
  CHECK(g.size() == 16u * 16u * 16u);
  CHECK(g.at(0, 0, 0) > 0.0);
  CHECK(g.at(8, 8, 8) < 0.0);
  CHECK(code_of([] { analytic_sdf(Sphere{Vec3(0.8, 0, 0), 0.5}, 16); }) == ErrorCode::kDomainViolation);
  CHECK(code_of([] { analytic_sdf(Sphere{}, 4); }) == ErrorCode::kInvalidArgument);
  for (const Primitive& p : {Primitive{Capsule{Vec3(-0.3, 0, 0), Vec3(0.3, 0, 0), 0.2}},
                             Primitive{Cylinder{}}, Primitive{Superellipsoid{}}}) {
    const SdfGrid q = analytic_sdf(p, 16);
    CHECK(q.at(8, 8, 8) < 0.0);
    CHECK(q.at(0, 0, 0) > 0.0);
  }
}

TEST_CASE("z-major index order") {
  const SdfGrid g = SdfGrid::from_function(8, [](const Vec3& p) { return p.x() + 10 * p.y() + 100 * p.z(); });
  CHECK(g.index(1, 0, 0) == 1);
  CHECK(g.index(0, 1, 0) == 8);
  CHECK(g.index(0, 0, 1) == 64);
  CHECK(g.center(std::size_t{65}).isApprox(g.center(1, 0, 1)));
}

TEST_CASE("trilinear sampling") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SdfGrid sphere = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 32);
  for (int n = 0; n < 50; ++n) {
    const std::size_t idx = rng() % sphere.size();
    CHECK(sample_trilinear(sphere, sphere.center(idx)).value == doctest::Approx(sphere[idx]).epsilon(1e-14));
  }
  const SdfGrid affine = SdfGrid::from_function(16, [](const Vec3& p) { return 0.3 * p.x() - 0.2 * p.y() + 0.1 * p.z() + 0.05; });
  const double lim = 1.0 - affine.voxel_size() / 2;
  for (int n = 0; n < 200; ++n) {
    const Vec3 p(u(rng) * lim, u(rng) * lim, u(rng) * lim);
    CHECK(std::abs(sample_trilinear(affine, p).value - (0.3 * p.x() - 0.2 * p.y() + 0.1 * p.z() + 0.05)) < 1e-13);
  }
  const double h = sphere.voxel_size();
  CHECK(std::abs(sample_trilinear(sphere, Vec3(0.25, 0, 0)).value + 0.25) < 2 * h * h);

  const auto clamped = sample_trilinear(sphere, Vec3(1.5, 0, 0));
  CHECK(clamped.clamped);
  CHECK(code_of([&] { sample_trilinear(sphere, Vec3(1.5, 0, 0), OutOfDomain::kThrow); }) == ErrorCode::kDomainViolation);
}

TEST_CASE("gradient stencil") {
  const SdfGrid c = SdfGrid::filled(8, 0.7);
  const GradientField gc = gradient_stencil(c);
  for (const auto& v : gc.vectors) CHECK(v.norm() == 0.0);

  const SdfGrid lin = SdfGrid::from_function(12, [](const Vec3& p) { return p.x(); });
  const GradientField gl = gradient_stencil(lin);
  std::size_t interior = 0;
  for (int k = 0; k < 12; ++k)
    for (int j = 0; j < 12; ++j)
      for (int i = 0; i < 12; ++i) {
        const std::size_t n = lin.index(i, j, k);
        const bool rim = i == 0 || j == 0 || k == 0 || i == 11 || j == 11 || k == 11;
        CHECK(gl.interior_mask[n] == (rim ? 0 : 1));
        if (!rim) {
          ++interior;
          CHECK((gl.vectors[n] - Vec3::UnitX()).norm() < 1e-12);
        }
      }
  CHECK(interior == 10u * 10u * 10u);

  const SdfGrid s = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 64);
  const GradientField gs = gradient_stencil(s);
  double sum = 0.0, worst = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (!gs.interior_mask[n] || s.center(n).norm() <= 2 * s.voxel_size()) continue;
    const double e = std::abs(gs.vectors[n].norm() - 1.0);
    sum += e;
    worst = std::max(worst, e);
    ++count;
  }
  CHECK(sum / count <= 1e-3);
  CHECK(code_of([] { gradient_stencil(SdfGrid::filled(2, 0.0)); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("sdf_min") {
  const SdfGrid a = analytic_sdf(Sphere{Vec3(-0.5, 0, 0), 0.3}, 16);
  const SdfGrid b = analytic_sdf(Sphere{Vec3(0.5, 0, 0), 0.3}, 16);
  const SdfGrid ab = sdf_min(a, b), ba = sdf_min(b, a), aa = sdf_min(a, a);
  for (std::size_t n = 0; n < a.size(); ++n) {
    CHECK(ab[n] == ba[n]);
    CHECK(aa[n] == a[n]);
    CHECK((ab[n] < 0) == (a[n] < 0 || b[n] < 0));
  }
  CHECK(code_of([&] { sdf_min(a, analytic_sdf(Sphere{}, 8)); }) == ErrorCode::kResolutionMismatch);
}

TEST_CASE("surface extraction") {
  const SdfGrid s = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 64);
  const TriMesh m = extract_surface(s);
  m.validate();
  REQUIRE_FALSE(m.empty());
  for (const auto& v : m.vertices) CHECK(std::abs(v.norm() - 0.5) <= 1.5 * s.voxel_size());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) CHECK(triangle_area(m, t) > kDegenerateAreaEps);
  CHECK(mesh_volume(m) > 0.0);

  const SdfGrid box = analytic_sdf(Box{Vec3::Zero(), Vec3(0.4, 0.3, 0.2)}, 64);
  const double vol = mesh_volume(extract_surface(box));
  CHECK(std::abs(vol - 8 * 0.4 * 0.3 * 0.2) <= 0.05 * 8 * 0.4 * 0.3 * 0.2);

  CHECK(code_of([] { extract_surface(SdfGrid::filled(8, 1.0)); }) == ErrorCode::kEmptySurface);
  CHECK(code_of([] { extract_surface(SdfGrid::filled(8, -1.0)); }) == ErrorCode::kEmptySurface);
}

TEST_CASE("extracted surface is closed") {
  const SdfGrid s = analytic_sdf(Capsule{Vec3(-0.3, -0.1, 0), Vec3(0.3, 0.2, 0.1), 0.25}, 24);
  const TriMesh m = extract_surface(s);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) edges[{t[e], t[(e + 1) % 3]}] += 1;
  for (const auto& [e, count] : edges) {
    CHECK(count == 1);
    CHECK(edges.count({e.second, e.first}) == 1);
  }
}

TEST_CASE("mesh_to_sdf") {
  const int r = 32;
  const double h = 2.0 / r;
  const SdfGrid analytic = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, r);
  const SdfGrid meshed = mesh_to_sdf(make_icosphere(Vec3::Zero(), 0.5, 4), r);
  double worst = 0.0;
  for (std::size_t n = 0; n < analytic.size(); ++n) worst = std::max(worst, std::abs(analytic[n] - meshed[n]));
  CHECK(worst <= 1.5 * h);

  const SdfGrid cube = mesh_to_sdf(make_box_mesh(Vec3::Zero(), Vec3::Constant(0.5)), 16);
  CHECK(cube.at(8, 8, 8) < 0.0);
  CHECK(cube.at(0, 0, 0) > 0.0);

  TriMesh open = make_box_mesh(Vec3::Zero(), Vec3::Constant(0.5));
  open.triangles.resize(open.triangles.size() - 2);
  CHECK(code_of([&] { mesh_to_sdf(open, 16); }) == ErrorCode::kNotWatertight);
}

TEST_CASE("extract then re-voxelize round trip") {
  const int r = 32;
  const double h = 2.0 / r;
  const SdfGrid s = analytic_sdf(Sphere{Vec3(0.1, -0.05, 0.0), 0.45}, r);
  const SdfGrid back = mesh_to_sdf(extract_surface(s), r);
  const TriMesh m2 = extract_surface(back);
  // symmetric mean squared distance of surface points to the analytic sphere
  double acc = 0.0;
  for (const auto& v : m2.vertices) {
    const double d = (v - Vec3(0.1, -0.05, 0.0)).norm() - 0.45;
    acc += d * d;
  }
  CHECK(std::sqrt(acc / m2.vertices.size()) <= 2 * h);
}

TEST_CASE("grid file round trip is bit exact") {
  const SdfGrid g = analytic_sdf(Superellipsoid{Vec3(0.1, 0, 0), Vec3(0.3, 0.4, 0.2), 0.5, 1.5}, 16).quantized();
  const auto path = temp_path("grid.sdfg");
  save_grid(g, path);
  const SdfGrid back = load_grid(path);
  REQUIRE(back.resolution() == 16);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::memcmp(&g.values()[n], &back.values()[n], sizeof(double)) == 0);
  CHECK(std::filesystem::file_size(path) == 4 + 4 + 4 + 48 + 4 * g.size());

  std::filesystem::resize_file(path, 100);
  CHECK(code_of([&] { load_grid(path); }) == ErrorCode::kFormat);
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE and more bytes to make it long enough to read a header from";
  }
  CHECK(code_of([&] { load_grid(path); }) == ErrorCode::kFormat);
  CHECK(code_of([] { load_grid("/nonexistent/dir/x.sdfg"); }) == ErrorCode::kIo);
  std::filesystem::remove(path);
}

TEST_CASE("mesh export") {
  const TriMesh m = make_box_mesh(Vec3::Zero(), Vec3::Constant(0.25));
  const auto obj = temp_path("box.obj"), ply = temp_path("box.ply");
  save_obj(m, obj);
  save_ply(m, ply);
  const TriMesh back = load_obj(obj);
  CHECK(back.triangles == m.triangles);
  CHECK(back.vertices.size() == m.vertices.size());
  CHECK(std::abs(mesh_volume(back) - 0.125) < 1e-6);
  CHECK(std::filesystem::file_size(ply) > 0);
  std::filesystem::remove(obj);
  std::filesystem::remove(ply);
}
