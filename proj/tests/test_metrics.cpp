// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "touchsdf/error.hpp"
#include "touchsdf/metrics.hpp"
#include "touchsdf/primitives.hpp"

using namespace touchsdf;

namespace {

PointSet random_points(std::size_t n, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PointSet p(n);
  for (auto& x : p) x = Vec3(u(rng), u(rng), u(rng));
  return p;
}

PointSet moved(const PointSet& p, const Mat3& r, const Vec3& t) {
  PointSet out;
  for (const auto& x : p) out.push_back(r * x + t);
  return out;
}

}  // namespace

TEST_CASE("kd-tree matches brute force") {
  Rng rng(1);
  const PointSet p = random_points(500, rng);
  const KdTree tree(p);
  for (const auto& q : random_points(200, rng, 1.5)) {
    double best = 1e300;
    for (const auto& x : p) best = std::min(best, (x - q).squaredNorm());
    CHECK(tree.nearest(q).second == best);
  }
  CHECK_THROWS_AS(KdTree(PointSet{}), Error);
}

TEST_CASE("chamfer") {
  CHECK(chamfer({Vec3::Zero()}, {Vec3(1, 0, 0)}) == 1.0);
  Rng rng(2);
  const PointSet p = random_points(100, rng), q = random_points(100, rng);
  CHECK(chamfer(p, p) == 0.0);
  CHECK(std::abs(chamfer(p, q) - chamfer_brute_force(p, q)) <= 1e-12);
  CHECK(chamfer(p, q) == chamfer(q, p));
  CHECK_THROWS_AS(chamfer({}, q), Error);
}

TEST_CASE("fscore") {
  Rng rng(3);
  const PointSet p = random_points(50, rng);
  CHECK(fscore(p, p) == 1.0);
  CHECK(fscore(p, moved(p, Mat3::Identity(), Vec3(5, 0, 0))) == 0.0);
  // half of P near Q, Q fully covered
  const PointSet q = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const PointSet pp = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(5, 0, 0), Vec3(6, 0, 0)};
  CHECK(fscore(pp, q) == doctest::Approx(2.0 * 0.5 / 1.5).epsilon(1e-12));
}

TEST_CASE("normal consistency") {
  const TriMesh sphere = make_icosphere(Vec3::Zero(), 0.5, 3);
  const SurfaceSample a = sample_surface(sphere, 2000, 1);
  CHECK(normal_consistency(a, a) == doctest::Approx(1.0).epsilon(1e-6));
  SurfaceSample flipped = a;
  for (auto& n : flipped.normals) n = -n;
  CHECK(normal_consistency(a, flipped) == doctest::Approx(1.0).epsilon(1e-6));
  const SurfaceSample cube = sample_surface(make_box_mesh(Vec3::Zero(), Vec3::Constant(0.45)), 2000, 2);
  CHECK(normal_consistency(a, cube) < 0.99);
  const SurfaceSample again = sample_surface(sphere, 2000, 1);
  CHECK(again.points == a.points);
}

TEST_CASE("voxel iou") {
  const int r = 64;
  const SdfGrid big = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, r);
  const SdfGrid small = analytic_sdf(Sphere{Vec3::Zero(), 0.25}, r);
  CHECK(voxel_iou(big, big) == 1.0);
  CHECK(std::abs(voxel_iou(big, small) - 0.125) <= 0.02);
  const SdfGrid left = analytic_sdf(Sphere{Vec3(-0.5, 0, 0), 0.3}, r);
  const SdfGrid right = analytic_sdf(Sphere{Vec3(0.5, 0, 0), 0.3}, r);
  CHECK(voxel_iou(left, right) == 0.0);
  CHECK(voxel_iou(SdfGrid::filled(8, 1.0), SdfGrid::filled(8, 1.0)) == 1.0);
  CHECK_THROWS_AS(voxel_iou(big, SdfGrid::filled(8, 1.0)), Error);
}

TEST_CASE("emd") {
  Rng rng(4);
  for (int n = 1; n <= 8; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      const PointSet p = random_points(n, rng), q = random_points(n, rng);
      CHECK(std::abs(emd(p, q) - emd_brute_force(p, q)) <= 1e-12);
    }
  }
  const PointSet p = random_points(64, rng);
  CHECK(emd(p, p) == 0.0);
  // swapping two points leaves the matching cost unchanged
  const PointSet q = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK(emd(q, {Vec3(1, 0, 0), Vec3(0, 0, 0)}) == 0.0);
  CHECK_THROWS_AS(emd(q, {Vec3::Zero()}), Error);

  const PointSet a = random_points(128, rng), b = random_points(128, rng);
  const double exact = emd(a, b, EmdMode::kExact);
  const double approx = emd(a, b, EmdMode::kSinkhorn);
  MESSAGE("emd exact " << exact << " sinkhorn " << approx);
  CHECK(std::abs(approx - exact) <= 0.02 * exact);
}

TEST_CASE("pose metrics") {
  const TriMesh box = make_box_mesh(Vec3::Zero(), Vec3(0.4, 0.2, 0.1));
  const PointSet gt = sample_surface(box, 3000, 5).points;
  CHECK(iou3d(bounding_box(gt), bounding_box(gt)) == 1.0);
  CHECK(adds(gt, gt) == 0.0);
  const double diam = diameter(PointSet(gt.begin(), gt.begin() + 1000));
  CHECK(adds_at(0.0, diam));
  CHECK(icp_rot(gt, gt) == doctest::Approx(0.0).epsilon(1e-9));

  const PointSet rot = moved(gt, axis_angle(Vec3::UnitZ(), 10.0 * M_PI / 180.0), Vec3::Zero());
  const double angle = icp_rot(rot, gt);
  MESSAGE("icp angle " << angle);
  CHECK(std::abs(angle - 10.0) <= 1.0);

  // nearest-point matching can only shorten the shift on a dense surface ...
  const Vec3 shift(0.05 * diam, 0, 0);
  const double a = adds(moved(gt, Mat3::Identity(), shift), gt);
  CHECK(a <= 0.05 * diam + 1e-12);
  CHECK(adds_at(a, diam));
  // ... and equals it on sparse points whose nearest neighbour is their own copy
  PointSet corners;
  for (int c = 0; c < 8; ++c) corners.emplace_back(c & 1 ? 0.4 : -0.4, c & 2 ? 0.2 : -0.2, c & 4 ? 0.1 : -0.1);
  const double cd = diameter(corners);
  const double ac = adds(moved(corners, Mat3::Identity(), Vec3(0.05 * cd, 0, 0)), corners);
  CHECK(ac == doctest::Approx(0.05 * cd).epsilon(1e-12));
  CHECK(adds_at(ac, cd));

  const Aabb u{Vec3::Zero(), Vec3::Ones()}, v{Vec3(0.5, 0, 0), Vec3(1.5, 1, 1)};
  CHECK(iou3d(u, v) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("perturbation ladder") {
  const TriMesh sphere = make_icosphere(Vec3::Zero(), 0.5, 3);
  const PointSet gt = sample_surface(sphere, 2000, 7).points;
  const SdfGrid gtg = analytic_sdf(Sphere{Vec3::Zero(), 0.5}, 32);
  double last_cd = -1.0, last_f = 2.0, last_iou = 2.0;
  for (int level = 0; level < 5; ++level) {
    const double d = 0.02 * level;
    const PointSet p = moved(gt, Mat3::Identity(), Vec3(d, 0, 0));
    const double cd = chamfer(p, gt), f = fscore(p, gt), iou = voxel_iou(analytic_sdf(Sphere{Vec3(d, 0, 0), 0.5}, 32), gtg);
    CHECK(cd >= last_cd);
    CHECK(f <= last_f);
    CHECK(iou <= last_iou);
    last_cd = cd;
    last_f = f;
    last_iou = iou;
  }
}

TEST_CASE("stratified report") {
  std::vector<EvalSample> s = {{1, true, {{"iou", 0.5}}},
                               {1, true, {{"iou", 0.7}}},
                               {3, true, {{"iou", 0.2}}},
                               {5, true, {{"iou", 0.0}}},
                               {2, false, {{"iou", 0.9}}}};
  const StratifiedReport r = stratified_report(s);
  CHECK(r.value("iou", 1) == doctest::Approx(0.6));
  CHECK(std::isnan(r.value("iou", 2)));
  CHECK(r.value("iou", 3) == 0.2);
  CHECK(r.value("iou", 0) == doctest::Approx(0.35));
  CHECK(r.counts == std::vector<int>{2, 0, 1, 0, 1});
  CHECK(r.total == 4);
  double weighted = 0.0;
  for (int b = 1; b <= 5; ++b)
    if (r.counts[b - 1]) weighted += r.counts[b - 1] * r.value("iou", b);
  CHECK(std::abs(weighted / r.total - r.value("iou", 0)) <= 1e-9);
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("metric,B1,B2,B3,B4,B5,All,count\n", 0) == 0);
  CHECK(r.to_json()["metrics"]["iou"]["B2"].is_null());

  const StratifiedReport one = stratified_report({{4, true, {{"cd", 1.0}}}, {4, true, {{"cd", 3.0}}}});
  CHECK(one.value("cd", 0) == one.value("cd", 4));
  CHECK_THROWS_AS(stratified_report({{1, false, {}}}), Error);
}
