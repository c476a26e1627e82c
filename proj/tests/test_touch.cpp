// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "touchsdf/error.hpp"
#include "touchsdf/primitives.hpp"
#include "touchsdf/touch.hpp"

using namespace touchsdf;

namespace {

std::vector<double> brute_force_distance(const TouchTensor& t) {
  const int r = t.resolution;
  std::vector<std::array<int, 3>> seeds;
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        if (t.contact[i + r * (j + r * k)]) seeds.push_back({i, j, k});
  std::vector<double> d(t.contact.size());
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) {
        double best = 1e300;
        for (const auto& s : seeds) {
          const double dx = i - s[0], dy = j - s[1], dz = k - s[2];
          best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
        d[i + r * (j + r * k)] = best;
      }
  return d;
}

}  // namespace

TEST_CASE("extract_contacts") {
  const int r = 32;
  const double h = 2.0 / r;
  const SdfGrid a = analytic_sdf(Sphere{Vec3(-0.6, 0, 0), 0.2}, r);
  const SdfGrid b = analytic_sdf(Sphere{Vec3(0.6, 0, 0), 0.2}, r);
  CHECK(extract_contacts(a, b, h).empty());

  // sphere resting on the half-space z <= -0.3 (evaluated as a slab)
  const double z0 = -0.3;
  const Vec3 c(0.03, -0.02, z0 + 0.4);
  const SdfGrid sphere = analytic_sdf(Sphere{c, 0.4}, r);
  const SdfGrid plane = SdfGrid::from_function(r, [&](const Vec3& p) { return p.z() - z0; });
  const ContactSet cs = extract_contacts(sphere, plane, h);
  REQUIRE(cs.size() == 1);
  CHECK((cs.points[0] - Vec3(c.x(), c.y(), z0)).norm() <= h);
  CHECK(extract_contacts(sphere, plane, 0.0).empty());
  CHECK_THROWS_AS(extract_contacts(sphere, analytic_sdf(Sphere{}, 16), h), Error);
}

TEST_CASE("touch tensor") {
  const int r = 16;
  const TouchTensor empty = build_touch_tensor({}, r);
  CHECK(empty.contact_count() == 0);
  for (double d : empty.distance) CHECK(d == touch_sentinel(r));
  CHECK_THROWS_AS(build_touch_tensor({}, 4), Error);

  ContactSet one;
  one.points = {Vec3(1e-3, 1e-3, 1e-3)};  // voxel (R/2, R/2, R/2)
  one.source_finger = {0};
  const TouchTensor t1 = build_touch_tensor(one, r);
  CHECK(t1.contact_count() == 1);
  CHECK(t1.contact[r / 2 + r * (r / 2 + r * (r / 2))] == 1);
  // the opposite corner is (R/2) voxels away per axis; corner (0,0,0) also R/2
  CHECK(std::abs(t1.distance[0] - std::sqrt(3.0) * (r / 2)) < 1e-9);
  CHECK(std::abs(t1.distance[t1.distance.size() - 1] - std::sqrt(3.0) * (r / 2 - 1)) < 1e-9);

  Rng rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    ContactSet cs;
    const int n = 1 + trial * 3;
    for (int i = 0; i < n; ++i) {
      cs.points.push_back(Vec3(u(rng), u(rng), u(rng)));
      cs.source_finger.push_back(i);
    }
    const TouchTensor t = build_touch_tensor(cs, r);
    const auto oracle = brute_force_distance(t);
    for (std::size_t q = 0; q < oracle.size(); ++q) {
      CHECK(std::abs(t.distance[q] - oracle[q]) < 1e-9);
      CHECK((t.distance[q] == 0.0) == (t.contact[q] == 1));
    }
    // 1-Lipschitz along x steps
    for (std::size_t q = 0; q + 1 < oracle.size(); ++q)
      if ((q + 1) % r != 0) CHECK(std::abs(t.distance[q + 1] - t.distance[q]) <= 1.0 + 1e-12);
  }
}

TEST_CASE("perturb_contacts") {
  ContactSet cs;
  Rng init(1);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 200; ++i) {
    cs.points.push_back(Vec3(u(init), u(init), u(init)));
    cs.source_finger.push_back(i % 5);
  }
  GridFrame frame;
  frame.metric_scale = 0.15;
  Rng a(4), b(4), c(4);
  const ContactSet zero = perturb_contacts(cs, 0.0, frame, a);
  for (std::size_t i = 0; i < cs.size(); ++i) CHECK(zero.points[i] == cs.points[i]);
  const ContactSet p3 = perturb_contacts(cs, 3.0, frame, b);
  const ContactSet p3b = perturb_contacts(cs, 3.0, frame, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    worst = std::max(worst, (p3.points[i] - cs.points[i]).norm());
    CHECK(p3.points[i] == p3b.points[i]);
    CHECK(p3.source_finger[i] == cs.source_finger[i]);
  }
  CHECK(worst <= 0.02 + 1e-15);
  CHECK(worst > 0.01);

  // same seed: the 5 mm offsets are the 3 mm offsets scaled by 5/3
  Rng d(4), e(4);
  const ContactSet q3 = perturb_contacts(cs, 3.0, frame, d);
  const ContactSet q5 = perturb_contacts(cs, 5.0, frame, e);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Vec3 o3 = q3.points[i] - cs.points[i], o5 = q5.points[i] - cs.points[i];
    if ((q5.points[i].array().abs() < 1.0).all()) CHECK((o5 - o3 * (5.0 / 3.0)).norm() < 1e-12);
  }

  ContactSet edge;
  edge.points = {Vec3(1.0, -1.0, 1.0)};
  edge.source_finger = {0};
  Rng f(2);
  const ContactSet pe = perturb_contacts(edge, 5.0, frame, f);
  CHECK((pe.points[0].array().abs() <= 1.0).all());
}

TEST_CASE("3 mm noise moves a contact by at most one voxel at R=64") {
  const int r = 64;
  GridFrame frame;
  frame.metric_scale = 0.1;
  Rng rng(12);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int trial = 0; trial < 200; ++trial) {
    ContactSet cs;
    cs.points = {Vec3(u(rng), u(rng), u(rng))};
    cs.source_finger = {0};
    const ContactSet p = perturb_contacts(cs, 3.0, frame, rng);
    const auto a = voxel_of(cs.points[0], r), b = voxel_of(p.points[0], r);
    for (int ax = 0; ax < 3; ++ax) CHECK(std::abs(a[ax] - b[ax]) <= 1);
  }
}

TEST_CASE("touch tensor files and pooled features") {
  ContactSet cs;
  cs.points = {Vec3(0.5, 0.5, 0.5), Vec3(-0.4, 0.1, -0.7)};
  cs.source_finger = {0, 1};
  const TouchTensor t = build_touch_tensor(cs, 16);
  const auto dir = std::filesystem::temp_directory_path();
  save_touch_tensor(t, dir / "touchsdf_c.sdfg", dir / "touchsdf_d.sdfg");
  const TouchTensor back = load_touch_tensor(dir / "touchsdf_c.sdfg", dir / "touchsdf_d.sdfg");
  CHECK(back.contact == t.contact);
  for (std::size_t q = 0; q < t.distance.size(); ++q)
    CHECK(back.distance[q] == static_cast<double>(static_cast<float>(t.distance[q])));
  CHECK_THROWS_AS(load_touch_tensor(dir / "touchsdf_d.sdfg", dir / "touchsdf_c.sdfg"), Error);

  const auto f = pool_touch_features(t);
  REQUIRE(f.size() == kTouchFeatureDim);
  CHECK(f[7] > 0.0);  // (+,+,+) octant has a contact
  CHECK(f[0] == 0.0);
  const auto fe = pool_touch_features(build_touch_tensor({}, 16));
  for (int o = 0; o < 8; ++o) CHECK(fe[8 + o] == doctest::Approx(1.0));
}
