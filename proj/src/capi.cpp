// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/touchsdf.h"

#include <cstring>
#include <exception>
#include <sstream>
#include <string>

#include "touchsdf/error.hpp"
#include "touchsdf/mesh.hpp"
#include "touchsdf/metrics.hpp"
#include "touchsdf/pipeline.hpp"
#include "touchsdf/primitives.hpp"
#include "touchsdf/run.hpp"
#include "touchsdf/scene.hpp"
#include "touchsdf/selftest.hpp"

using namespace touchsdf;
using nlohmann::json;

struct tsdf_config {
  RunConfig value;
};
struct tsdf_report {
  CommandReport value;
};
struct tsdf_grid {
  SdfGrid value;
};
struct tsdf_scene {
  GraspScene value;
};

namespace {

thread_local std::string g_last_error;

tsdf_status set_error(tsdf_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
tsdf_status guarded(Fn&& fn) {
  try {
    fn();
    return TSDF_OK;
  } catch (const Error& e) {
    return set_error(static_cast<tsdf_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return set_error(TSDF_ERR_FORMAT, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TSDF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(TSDF_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(TSDF_ERR_INTERNAL, "unknown error");
  }
}

tsdf_status copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (!needed && !buf) return set_error(TSDF_ERR_INVALID_ARGUMENT, "no output buffer");
  if (needed) *needed = s.size() + 1;
  if (cap == 0) return TSDF_OK;
  if (!buf) return set_error(TSDF_ERR_INVALID_ARGUMENT, "buffer is NULL but cap is nonzero");
  if (cap < s.size() + 1) return set_error(TSDF_ERR_BUFFER_TOO_SMALL, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return TSDF_OK;
}

#define TSDF_REQUIRE_ARG(cond)                                                 \
  do {                                                                         \
    if (!(cond)) return set_error(TSDF_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* tsdf_version(void) { return "0.1.0"; }

const char* tsdf_status_name(tsdf_status status) {
  switch (status) {
    case TSDF_OK: return "ok";
    case TSDF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TSDF_ERR_DOMAIN: return "domain violation";
    case TSDF_ERR_NOT_WATERTIGHT: return "mesh not watertight";
    case TSDF_ERR_EMPTY_SURFACE: return "empty surface";
    case TSDF_ERR_RESOLUTION_MISMATCH: return "resolution mismatch";
    case TSDF_ERR_IO: return "i/o error";
    case TSDF_ERR_FORMAT: return "format error";
    case TSDF_ERR_NUMERIC: return "numeric error";
    case TSDF_ERR_GENERATION: return "generation budget exhausted";
    case TSDF_ERR_INTERNAL: return "internal error";
    case TSDF_ERR_BUFFER_TOO_SMALL: return "buffer too small";
  }
  return "unknown status";
}

const char* tsdf_last_error(void) { return g_last_error.c_str(); }

// ---------------------------------------------------------------- config

tsdf_status tsdf_config_new(tsdf_config** out) {
  TSDF_REQUIRE_ARG(out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_config{}; });
}

tsdf_status tsdf_config_from_json(const char* text, tsdf_config** out) {
  TSDF_REQUIRE_ARG(text && out);
  *out = nullptr;
  return guarded([&] {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormat, std::string("config: ") + e.what());
    }
    *out = new tsdf_config{j.get<RunConfig>()};
  });
}

tsdf_status tsdf_config_load(const char* path, tsdf_config** out) {
  TSDF_REQUIRE_ARG(path && out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_config{load_run_config(path)}; });
}

tsdf_status tsdf_config_set(tsdf_config* config, const char* key, const char* json_value) {
  TSDF_REQUIRE_ARG(config && key && json_value);
  return guarded([&] {
    json value;
    try {
      value = json::parse(json_value);
    } catch (const json::exception& e) {
      fail(ErrorCode::kInvalidArgument, std::string("value for ") + key + ": " + e.what());
    }
    json j = config->value;
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    require(!parts.empty(), ErrorCode::kInvalidArgument, "empty config key");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      require(node->is_object() && node->contains(parts[i]), ErrorCode::kInvalidArgument,
              std::string("unknown config key: ") + key);
      node = &(*node)[parts[i]];
    }
    require(node->is_object() && node->contains(parts.back()), ErrorCode::kInvalidArgument,
            std::string("unknown config key: ") + key);
    (*node)[parts.back()] = value;
    config->value = j.get<RunConfig>();
  });
}

tsdf_status tsdf_config_to_json(const tsdf_config* config, char* buf, size_t cap, size_t* needed) {
  TSDF_REQUIRE_ARG(config);
  std::string s;
  const tsdf_status st = guarded([&] { s = json(config->value).dump(2); });
  return st == TSDF_OK ? copy_string(s, buf, cap, needed) : st;
}

tsdf_status tsdf_config_data_root(const tsdf_config* config, char* buf, size_t cap, size_t* needed) {
  TSDF_REQUIRE_ARG(config);
  return copy_string(config->value.root().string(), buf, cap, needed);
}

void tsdf_config_free(tsdf_config* config) { delete config; }

// ---------------------------------------------------------------- commands

tsdf_status tsdf_run(const char* command, const tsdf_config* config, tsdf_report** out) {
  TSDF_REQUIRE_ARG(command && config && out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_report{run_command(command, config->value)}; });
}

int tsdf_report_processed(const tsdf_report* report) { return report ? report->value.processed : 0; }

int tsdf_report_failure_count(const tsdf_report* report) {
  return report ? static_cast<int>(report->value.failures.size()) : 0;
}

tsdf_status tsdf_report_json(const tsdf_report* report, char* buf, size_t cap, size_t* needed) {
  TSDF_REQUIRE_ARG(report);
  std::string s;
  const tsdf_status st = guarded([&] { s = report->value.to_json().dump(2); });
  return st == TSDF_OK ? copy_string(s, buf, cap, needed) : st;
}

void tsdf_report_free(tsdf_report* report) { delete report; }

tsdf_status tsdf_selftest(const char* only, tsdf_check_callback callback, void* user, int* failed) {
  TSDF_REQUIRE_ARG(failed);
  *failed = 0;
  return guarded([&] {
    SelftestOptions opt;
    if (only) {
      std::stringstream ss(only);
      std::string id;
      while (std::getline(ss, id, ','))
        if (!id.empty()) opt.only.push_back(id);
    }
    opt.on_result = [&](const CheckResult& r) {
      if (!r.passed) ++*failed;
      if (callback) callback(r.id.c_str(), r.title.c_str(), r.passed ? 1 : 0, r.seconds, r.detail.c_str(), user);
    };
    run_selftest(opt);
  });
}

// ---------------------------------------------------------------- grids

tsdf_status tsdf_grid_load(const char* path, tsdf_grid** out) {
  TSDF_REQUIRE_ARG(path && out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_grid{load_grid(path)}; });
}

tsdf_status tsdf_grid_from_values(int resolution, const double* values, tsdf_grid** out) {
  TSDF_REQUIRE_ARG(values && out);
  *out = nullptr;
  return guarded([&] {
    require(resolution >= 2, ErrorCode::kInvalidArgument, "resolution must be >= 2");
    const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
    *out = new tsdf_grid{SdfGrid(resolution, std::vector<double>(values, values + n))};
  });
}

tsdf_status tsdf_grid_sphere(int resolution, double cx, double cy, double cz, double radius, tsdf_grid** out) {
  TSDF_REQUIRE_ARG(out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_grid{analytic_sdf(Sphere{Vec3(cx, cy, cz), radius}, resolution)}; });
}

int tsdf_grid_resolution(const tsdf_grid* grid) { return grid ? grid->value.resolution() : 0; }

tsdf_status tsdf_grid_copy_values(const tsdf_grid* grid, double* out, size_t count) {
  TSDF_REQUIRE_ARG(grid && out);
  if (count != grid->value.size()) return set_error(TSDF_ERR_INVALID_ARGUMENT, "count must equal resolution^3");
  std::memcpy(out, grid->value.values().data(), count * sizeof(double));
  return TSDF_OK;
}

tsdf_status tsdf_grid_save(const tsdf_grid* grid, const char* path) {
  TSDF_REQUIRE_ARG(grid && path);
  return guarded([&] { save_grid(grid->value, path); });
}

tsdf_status tsdf_grid_save_mesh(const tsdf_grid* grid, const char* ply_path) {
  TSDF_REQUIRE_ARG(grid && ply_path);
  return guarded([&] { save_ply(extract_surface(grid->value), ply_path); });
}

tsdf_status tsdf_grid_iou(const tsdf_grid* a, const tsdf_grid* b, double* out) {
  TSDF_REQUIRE_ARG(a && b && out);
  return guarded([&] { *out = voxel_iou(a->value, b->value); });
}

tsdf_status tsdf_grid_evaluate(const tsdf_grid* pred, const tsdf_grid* gt, uint64_t seed, char* buf, size_t cap,
                               size_t* needed) {
  TSDF_REQUIRE_ARG(pred && gt);
  std::string s;
  const tsdf_status st = guarded([&] {
    MetricOptions mo;
    mo.seed = seed;
    s = json(evaluate_reconstruction(pred->value, gt->value, mo).as_map()).dump();
  });
  return st == TSDF_OK ? copy_string(s, buf, cap, needed) : st;
}

void tsdf_grid_free(tsdf_grid* grid) { delete grid; }

// ---------------------------------------------------------------- scenes

tsdf_status tsdf_scene_generate(uint64_t seed, const tsdf_config* config, tsdf_scene** out) {
  TSDF_REQUIRE_ARG(out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_scene{build_scene(seed, config ? config->value.scene : SceneConfig{})}; });
}

tsdf_status tsdf_scene_load(const char* dir, tsdf_scene** out) {
  TSDF_REQUIRE_ARG(dir && out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_scene{load_scene_bundle(dir)}; });
}

tsdf_status tsdf_scene_save(const tsdf_scene* scene, const char* dir) {
  TSDF_REQUIRE_ARG(scene && dir);
  return guarded([&] { save_scene_bundle(scene->value, dir); });
}

tsdf_status tsdf_scene_check(const tsdf_scene* scene, int padding, int* ok) {
  TSDF_REQUIRE_ARG(scene && ok);
  return guarded([&] { *ok = check_scene(scene->value, padding).ok() ? 1 : 0; });
}

tsdf_status tsdf_scene_object(const tsdf_scene* scene, tsdf_grid** out) {
  TSDF_REQUIRE_ARG(scene && out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_grid{scene->value.object_sdf}; });
}

tsdf_status tsdf_scene_hand(const tsdf_scene* scene, tsdf_grid** out) {
  TSDF_REQUIRE_ARG(scene && out);
  *out = nullptr;
  return guarded([&] { *out = new tsdf_grid{scene->value.hand_sdf}; });
}

int tsdf_scene_bin(const tsdf_scene* scene) { return scene ? scene->value.bin : 0; }

int tsdf_scene_contact_count(const tsdf_scene* scene) {
  return scene ? static_cast<int>(scene->value.contacts.size()) : 0;
}

void tsdf_scene_free(tsdf_scene* scene) { delete scene; }

}  // extern "C"
