// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through the C header only.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "touchsdf/touchsdf.h"

namespace fs = std::filesystem;

namespace {

std::string config_json(const tsdf_config* c) {
  size_t n = 0;
  REQUIRE(tsdf_config_to_json(c, nullptr, 0, &n) == TSDF_OK);
  std::string s(n, '\0');
  REQUIRE(tsdf_config_to_json(c, s.data(), n, &n) == TSDF_OK);
  s.resize(n - 1);
  return s;
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(tsdf_version()) == "0.1.0");
  for (int s = 0; s <= 11; ++s) CHECK(std::string(tsdf_status_name(static_cast<tsdf_status>(s))) != "unknown status");
  CHECK(std::string(tsdf_status_name(static_cast<tsdf_status>(99))) == "unknown status");
}

TEST_CASE("config handle") {
  tsdf_config* c = nullptr;
  REQUIRE(tsdf_config_new(&c) == TSDF_OK);
  CHECK(tsdf_config_set(c, "seed", "42") == TSDF_OK);
  CHECK(tsdf_config_set(c, "sampler.guidance", "false") == TSDF_OK);
  CHECK(tsdf_config_set(c, "ablation", "\"no-touch\"") == TSDF_OK);
  const std::string before = config_json(c);
  CHECK(before.find("\"seed\": 42") != std::string::npos);
  CHECK(before.find("\"no-touch\"") != std::string::npos);

  CHECK(tsdf_config_set(c, "sampler.stpes", "3") == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(std::string(tsdf_last_error()).find("unknown config key") != std::string::npos);
  CHECK(tsdf_config_set(c, "workers", "0") == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(tsdf_config_set(c, "seed", "{not json") == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(config_json(c) == before);

  char small[4];
  size_t n = 0;
  CHECK(tsdf_config_to_json(c, small, sizeof small, &n) == TSDF_ERR_BUFFER_TOO_SMALL);
  CHECK(n == before.size() + 1);
  CHECK(tsdf_config_to_json(c, nullptr, 0, nullptr) == TSDF_ERR_INVALID_ARGUMENT);

  tsdf_config* d = nullptr;
  CHECK(tsdf_config_from_json(before.c_str(), &d) == TSDF_OK);
  CHECK(config_json(d) == before);
  tsdf_config_free(d);
  d = nullptr;
  CHECK(tsdf_config_from_json("{\"bogus\": 1}", &d) == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(d == nullptr);
  CHECK(tsdf_config_from_json("[1,", &d) == TSDF_ERR_FORMAT);
  CHECK(tsdf_config_load("/nonexistent.json", &d) == TSDF_ERR_IO);

  ::setenv("TOUCHSDF_DATA", "/tmp/capi_env_root", 1);
  std::string root(256, '\0');
  REQUIRE(tsdf_config_data_root(c, root.data(), root.size(), &n) == TSDF_OK);
  CHECK(root.substr(0, n - 1) == "/tmp/capi_env_root");
  ::unsetenv("TOUCHSDF_DATA");
  tsdf_config_free(c);
  tsdf_config_free(nullptr);
}

TEST_CASE("grid handle") {
  tsdf_grid* g = nullptr;
  REQUIRE(tsdf_grid_sphere(16, 0, 0, 0, 0.5, &g) == TSDF_OK);
  CHECK(tsdf_grid_resolution(g) == 16);
  std::vector<double> v(16 * 16 * 16);
  CHECK(tsdf_grid_copy_values(g, v.data(), v.size() - 1) == TSDF_ERR_INVALID_ARGUMENT);
  REQUIRE(tsdf_grid_copy_values(g, v.data(), v.size()) == TSDF_OK);
  // voxel (0,0,0) center is (-15/16)^3 away from the origin
  CHECK(v[0] == doctest::Approx(std::sqrt(3.0) * 15.0 / 16.0 - 0.5));

  tsdf_grid* h = nullptr;
  REQUIRE(tsdf_grid_from_values(16, v.data(), &h) == TSDF_OK);
  double iou = 0.0;
  CHECK(tsdf_grid_iou(g, h, &iou) == TSDF_OK);
  CHECK(iou == 1.0);

  tsdf_grid* small = nullptr;
  REQUIRE(tsdf_grid_sphere(8, 0, 0, 0, 0.5, &small) == TSDF_OK);
  CHECK(tsdf_grid_iou(g, small, &iou) == TSDF_ERR_RESOLUTION_MISMATCH);

  const fs::path dir = fs::temp_directory_path() / ("touchsdf_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  REQUIRE(tsdf_grid_save(g, (dir / "g.sdfg").c_str()) == TSDF_OK);
  REQUIRE(tsdf_grid_save_mesh(g, (dir / "g.ply").c_str()) == TSDF_OK);
  tsdf_grid* loaded = nullptr;
  REQUIRE(tsdf_grid_load((dir / "g.sdfg").c_str(), &loaded) == TSDF_OK);
  CHECK(tsdf_grid_iou(g, loaded, &iou) == TSDF_OK);
  CHECK(iou == 1.0);
  CHECK(tsdf_grid_load((dir / "missing.sdfg").c_str(), &h) == TSDF_ERR_IO);
  CHECK(tsdf_grid_load((dir / "g.ply").c_str(), &h) == TSDF_ERR_FORMAT);

  std::string metrics(1024, '\0');
  size_t n = 0;
  REQUIRE(tsdf_grid_evaluate(g, loaded, 3, metrics.data(), metrics.size(), &n) == TSDF_OK);
  metrics.resize(n - 1);
  CHECK(metrics.find("\"fscore\":1.0") != std::string::npos);

  tsdf_grid* empty = nullptr;
  std::vector<double> ones(8 * 8 * 8, 1.0);
  REQUIRE(tsdf_grid_from_values(8, ones.data(), &empty) == TSDF_OK);
  CHECK(tsdf_grid_save_mesh(empty, (dir / "e.ply").c_str()) == TSDF_ERR_EMPTY_SURFACE);

  for (tsdf_grid* x : {g, h, small, loaded, empty}) tsdf_grid_free(x);
  fs::remove_all(dir);
}

TEST_CASE("scene handle and commands") {
  const fs::path dir = fs::temp_directory_path() / ("touchsdf_capi_run_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  tsdf_scene* s = nullptr;
  REQUIRE(tsdf_scene_generate(5, nullptr, &s) == TSDF_OK);
  int ok = 0;
  CHECK(tsdf_scene_check(s, 2, &ok) == TSDF_OK);
  CHECK(ok == 1);
  CHECK(tsdf_scene_contact_count(s) >= 1);
  CHECK(tsdf_scene_bin(s) >= 1);
  REQUIRE(tsdf_scene_save(s, (dir / "bundle").c_str()) == TSDF_OK);
  tsdf_scene* t = nullptr;
  REQUIRE(tsdf_scene_load((dir / "bundle").c_str(), &t) == TSDF_OK);
  tsdf_grid *a = nullptr, *b = nullptr;
  REQUIRE(tsdf_scene_object(s, &a) == TSDF_OK);
  REQUIRE(tsdf_scene_object(t, &b) == TSDF_OK);
  double iou = 0.0;
  CHECK(tsdf_grid_iou(a, b, &iou) == TSDF_OK);
  CHECK(iou == 1.0);
  tsdf_grid_free(a);
  tsdf_grid_free(b);
  tsdf_scene_free(s);
  tsdf_scene_free(t);

  tsdf_config* c = nullptr;
  REQUIRE(tsdf_config_new(&c) == TSDF_OK);
  REQUIRE(tsdf_config_set(c, "data_root", ("\"" + (dir / "data").string() + "\"").c_str()) == TSDF_OK);
  REQUIRE(tsdf_config_set(c, "scenes", "2") == TSDF_OK);
  REQUIRE(tsdf_config_set(c, "sampler.steps", "10") == TSDF_OK);
  tsdf_report* r = nullptr;
  for (const char* cmd : {"gen-data", "fit-codec", "reconstruct", "evaluate"}) {
    REQUIRE(tsdf_run(cmd, c, &r) == TSDF_OK);
    CHECK(tsdf_report_processed(r) == 2);
    CHECK(tsdf_report_failure_count(r) == 0);
    size_t n = 0;
    CHECK(tsdf_report_json(r, nullptr, 0, &n) == TSDF_OK);
    CHECK(n > 2);
    tsdf_report_free(r);
    r = nullptr;
  }
  CHECK(tsdf_run("unknown", c, &r) == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(r == nullptr);
  tsdf_config_free(c);
  fs::remove_all(dir);
}

TEST_CASE("selftest subset and null arguments") {
  struct Seen {
    int calls = 0;
    std::string id;
  } seen;
  int failed = -1;
  const auto cb = [](const char* id, const char*, int, double, const char*, void* user) {
    auto* s = static_cast<Seen*>(user);
    ++s->calls;
    s->id = id;
  };
  REQUIRE(tsdf_selftest("AC4", cb, &seen, &failed) == TSDF_OK);
  CHECK(seen.calls == 1);
  CHECK(seen.id == "AC4");
  CHECK(failed == 0);
  CHECK(tsdf_selftest(nullptr, nullptr, nullptr, nullptr) == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(tsdf_grid_load(nullptr, nullptr) == TSDF_ERR_INVALID_ARGUMENT);
  CHECK(tsdf_grid_resolution(nullptr) == 0);
}
