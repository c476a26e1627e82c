// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "touchsdf/error.hpp"
#include "touchsdf/objectives.hpp"
#include "touchsdf/scene.hpp"

using namespace touchsdf;

namespace {
bool same(const SdfGrid& a, const SdfGrid& b) { return std::ranges::equal(a.values(), b.values()); }
}  // namespace

TEST_CASE("object sampling") {
  Rng a(5), b(5);
  const ProcObject x = sample_object(a), y = sample_object(b);
  CHECK(primitive_to_json(x.primitive) == primitive_to_json(y.primitive));
  CHECK(x.pose.rotation == y.pose.rotation);
  Rng rng(6);
  std::map<std::string, int> kinds;
  for (int i = 0; i < 1000; ++i) {
    const ProcObject o = sample_object(rng);
    const Aabb box = o.shape()->bounds();
    CHECK(((box.lo.array() >= -1.0).all() && (box.hi.array() <= 1.0).all()));
    CHECK(o.bounding_radius() <= 0.5 * std::sqrt(3.0) + 1e-12);
    CHECK(o.metric_scale >= 0.06);
    ++kinds[primitive_name(o.primitive)];
  }
  CHECK(kinds.size() == 5u);
  ObjectConfig bad;
  bad.min_size = 0.6;
  bad.max_size = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = {};
  bad.kinds = {"torus"};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS((nlohmann::json{{"min_size", 0.1}, {"colour", 1}}.get<ObjectConfig>()));
}

TEST_CASE("grasp on a sphere") {
  ProcObject sphere;
  sphere.primitive = Sphere{Vec3::Zero(), 0.4};
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const ProcHand hand = sample_grasp(sphere, 3, rng);
    CHECK(hand.fingertips().size() == 3u);
    for (const auto& f : hand.fingers) {
      if (!f.touching) continue;
      const double h = 2.0 / 32;
      CHECK(std::abs(f.joints.back().norm() - (0.4 + f.radii.back())) <= h);
      CHECK(f.joints.back().norm() - (0.4 + f.radii.back()) >= -1e-9);
    }
    const CanonicalScene cs = canonicalize_scene(hand.shape(), sphere.shape(), hand.fingertips(), 2, 32);
    CHECK(ni_loss(cs.object_sdf, cs.hand_sdf, 0.1, false).value <= 1e-6);
    CHECK(!extract_contacts(cs.hand_sdf, cs.object_sdf, cs.hand_sdf.voxel_size()).points.empty());
  }
  GraspConfig tight;
  tight.max_retries = 1;
  tight.min_tip_radius = tight.max_tip_radius = 0.05;
  ProcObject huge;
  huge.primitive = Sphere{Vec3::Zero(), 0.4};
  CHECK_THROWS_AS(sample_grasp(huge, 2, rng), Error);
}

TEST_CASE("mask rendering") {
  const int r = 16;
  const SdfGrid sphere = analytic_sdf(Sphere{Vec3(0, 0, 0.3), 0.4}, r);
  const MaskSet alone = render_masks(sphere, nullptr, r);
  CHECK(alone.object_visible == alone.object_full);
  CHECK(alone.hand.count() == 0u);

  // a plane in front of the object covers everything
  const SdfGrid wall = SdfGrid::from_function(r, [](const Vec3& p) { return p.z() + 0.3; });
  const MaskSet hidden = render_masks(sphere, &wall, r);
  CHECK(hidden.object_visible.count() == 0u);
  CHECK(occlusion_bin(hidden.object_visible, hidden.object_full).x == 1.0);

  // half-covering slab in front
  for (int w : {16, 32, 64}) {
    const SdfGrid slab = analytic_sdf(Box{Vec3(-0.5, 0, -0.5), Vec3(0.5, 1.0, 0.2)}, r);
    const MaskSet half = render_masks(sphere, &slab, w);
    const double x = occlusion_bin(half.object_visible, half.object_full).x;
    CHECK(std::abs(x - 0.5) <= 2.0 / w);
    for (std::size_t n = 0; n < half.hand.pixels.size(); ++n)
      CHECK(!(half.hand.pixels[n] && half.object_visible.pixels[n]));
  }
  CHECK_THROWS_AS(render_masks(sphere, nullptr, 20), Error);
}

TEST_CASE("sprite placement") {
  Mask full(8, 8);
  std::fill(full.pixels.begin(), full.pixels.end(), 1);
  CHECK(sprite_place(full, {0, 0, 8, 8}, 8, 8) == full);

  Mask two(5, 5);
  two.at(1, 2) = two.at(2, 2) = two.at(1, 3) = 1;
  const Mask out = sprite_place(two, {2, 2, 4, 4}, 8, 128);  // 2x2 cells -> 32x32 px box
  CHECK(out.width == 128);
  CHECK(out.count() == 3u * 16 * 16);
  CHECK(tight_rect(out) == PixelRect{32, 32, 64, 64});
  CHECK(out.at(32 + 16, 32) == 1);
  CHECK(out.at(32 + 16, 32 + 16) == 0);
  CHECK(out.at(32, 32) == 1);
  for (auto v : out.pixels) CHECK(v <= 1);

  // aspect preserved and centered
  Mask bar(4, 1);
  std::fill(bar.pixels.begin(), bar.pixels.end(), 1);
  const Mask wide = sprite_place(bar, {0, 0, 4, 4}, 4, 8);
  CHECK(tight_rect(wide) == PixelRect{0, 3, 8, 5});

  CHECK_THROWS_AS(sprite_place(Mask(4, 4), {0, 0, 4, 4}, 4, 8), Error);
  CHECK_THROWS_AS(sprite_place(full, {0, 0, 9, 4}, 8, 8), Error);
  CHECK_THROWS_AS(sprite_place(full, {0, 0, 4, 4}, 8, 12), Error);
}

TEST_CASE("occlusion bins") {
  Mask full(10, 10), vis(10, 10);
  std::fill(full.pixels.begin(), full.pixels.end(), 1);
  vis = full;
  CHECK(occlusion_bin(vis, full).bin == 1);
  CHECK(occlusion_bin(Mask(10, 10), full).bin == 5);
  for (int n = 0; n < 55; ++n) vis.pixels[n] = 0;
  const OcclusionBin b = occlusion_bin(vis, full);
  CHECK(b.x == doctest::Approx(0.55));
  CHECK(b.bin == 3);
  CHECK_THROWS_AS(occlusion_bin(vis, Mask(10, 10)), Error);
}

TEST_CASE("scene generation") {
  SceneConfig cfg;
  cfg.resolution = 24;
  cfg.canvas = 48;
  std::map<int, int> bins;
  for (int i = 0; i < 30; ++i) {
    const GraspScene s = build_scene(derive_seed(3, i), cfg);
    const SceneCheck c = check_scene(s, cfg.padding);
    CHECK(c.contact);
    CHECK(c.no_penetration);
    CHECK(c.masks_consistent);
    CHECK(c.margins);
    CHECK(s.touch.contact_count() > 0u);
    CHECK(s.masks.object_full.width == 48);
    ++bins[s.bin];
  }
  std::string hist;
  for (const auto& [b, n] : bins) hist += " B" + std::to_string(b) + "=" + std::to_string(n);
  MESSAGE("occlusion bins:" << hist);

  const GraspScene a = build_scene(99, cfg), b = build_scene(99, cfg);
  CHECK(same(a.object_sdf, b.object_sdf));
  CHECK(scene_metadata(a) == scene_metadata(b));
}

TEST_CASE("scene serialization") {
  SceneConfig cfg;
  cfg.resolution = 16;
  cfg.canvas = 32;
  const GraspScene s = build_scene(1234, cfg);
  const nlohmann::json meta = scene_metadata(s);
  const GraspScene again = scene_from_metadata(nlohmann::json::parse(meta.dump()));
  CHECK(scene_metadata(again) == meta);
  CHECK(same(again.object_sdf, s.object_sdf));
  CHECK(again.masks.object_visible == s.masks.object_visible);

  const auto dir = std::filesystem::temp_directory_path() / "touchsdf_scene_bundle";
  std::filesystem::remove_all(dir);
  save_scene_bundle(s, dir);
  for (const char* f : {"scene.json", "object.sdfg", "hand.sdfg", "touch_C.sdfg", "touch_D.sdfg",
                        "mask_object_full.pgm", "mask_object_visible.pgm", "mask_hand.pgm"})
    CHECK(std::filesystem::exists(dir / f));
  const GraspScene loaded = load_scene_bundle(dir);
  CHECK(scene_metadata(loaded) == meta);
  CHECK(same(loaded.object_sdf, s.object_sdf));
  CHECK(same(loaded.hand_sdf, s.hand_sdf));
  CHECK(loaded.touch.contact == s.touch.contact);
  CHECK(loaded.touch.distance == s.touch.distance);
  CHECK(loaded.masks.hand == s.masks.hand);
  std::filesystem::remove(dir / "hand.sdfg");
  CHECK_THROWS_AS(load_scene_bundle(dir), Error);
  std::filesystem::remove_all(dir);

  nlohmann::json broken = meta;
  broken["object"]["primitive"]["type"] = "torus";
  CHECK_THROWS_AS(scene_from_metadata(broken), Error);
}

TEST_CASE("canvas size invariance and depth variants") {
  SceneConfig cfg;
  cfg.resolution = 16;
  cfg.canvas = 16;
  for (int i = 0; i < 5; ++i) {
    const GraspScene s = build_scene(derive_seed(17, i), cfg);
    const PixelRect box = tight_rect(s.masks.object_full);
    for (int w : {16, 32, 64}) {
      const Mask full = sprite_place(s.masks.object_full, box, 16, w, box);
      const Mask vis = s.masks.object_visible.count() ? sprite_place(s.masks.object_visible, box, 16, w, box) : Mask(w, w);
      CHECK(std::abs(occlusion_bin(vis, full).x - s.occlusion_x) <= 2.0 / w);
    }
    const SdfGrid shifted = depth_variant(s, 0.0);
    CHECK(same(shifted, s.object_sdf));
    const SdfGrid near = depth_variant(s, -0.125);
    CHECK(render_masks(near, nullptr, 16).object_full == render_masks(s.object_sdf, nullptr, 16).object_full);
  }
}
