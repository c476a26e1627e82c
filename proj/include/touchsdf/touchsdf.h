/* Copyright 2026 The touchsdf Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the touchsdf library. All objects are opaque handles owned
 * by the caller and released with the matching *_free function (NULL is
 * accepted). Functions return a tsdf_status; on failure tsdf_last_error()
 * describes the error for the calling thread until its next failing call.
 *
 * Strings are returned through (buf, cap, needed): *needed receives the size
 * including the terminating NUL. buf may be NULL when cap is 0; a nonzero
 * cap smaller than *needed yields TSDF_ERR_BUFFER_TOO_SMALL.
 */
#ifndef TOUCHSDF_H_
#define TOUCHSDF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TOUCHSDF_BUILDING)
#define TSDF_API __declspec(dllexport)
#else
#define TSDF_API __declspec(dllimport)
#endif
#else
#define TSDF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tsdf_status {
  TSDF_OK = 0,
  TSDF_ERR_INVALID_ARGUMENT = 1,
  TSDF_ERR_DOMAIN = 2,
  TSDF_ERR_NOT_WATERTIGHT = 3,
  TSDF_ERR_EMPTY_SURFACE = 4,
  TSDF_ERR_RESOLUTION_MISMATCH = 5,
  TSDF_ERR_IO = 6,
  TSDF_ERR_FORMAT = 7,
  TSDF_ERR_NUMERIC = 8,
  TSDF_ERR_GENERATION = 9,
  TSDF_ERR_INTERNAL = 10,
  TSDF_ERR_BUFFER_TOO_SMALL = 11
} tsdf_status;

typedef struct tsdf_config tsdf_config;
typedef struct tsdf_report tsdf_report;
typedef struct tsdf_grid tsdf_grid;
typedef struct tsdf_scene tsdf_scene;

TSDF_API const char* tsdf_version(void);
TSDF_API const char* tsdf_status_name(tsdf_status status);
TSDF_API const char* tsdf_last_error(void);

/* ---- run configuration (strict JSON; unknown keys are rejected) ---- */
TSDF_API tsdf_status tsdf_config_new(tsdf_config** out);
TSDF_API tsdf_status tsdf_config_from_json(const char* text, tsdf_config** out);
TSDF_API tsdf_status tsdf_config_load(const char* path, tsdf_config** out);
/* Sets a dotted key ("seed", "sampler.guidance", ...) to a JSON value and
 * revalidates; the config is unchanged on failure. */
TSDF_API tsdf_status tsdf_config_set(tsdf_config* config, const char* key, const char* json_value);
TSDF_API tsdf_status tsdf_config_to_json(const tsdf_config* config, char* buf, size_t cap, size_t* needed);
/* Data root after applying the TOUCHSDF_DATA default. */
TSDF_API tsdf_status tsdf_config_data_root(const tsdf_config* config, char* buf, size_t cap, size_t* needed);
TSDF_API void tsdf_config_free(tsdf_config* config);

/* ---- commands: gen-data, fit-codec, train, reconstruct, evaluate, ablate ----
 * Per-scene failures do not fail the call; they are listed in the report. */
TSDF_API tsdf_status tsdf_run(const char* command, const tsdf_config* config, tsdf_report** out);
TSDF_API int tsdf_report_processed(const tsdf_report* report);
TSDF_API int tsdf_report_failure_count(const tsdf_report* report);
TSDF_API tsdf_status tsdf_report_json(const tsdf_report* report, char* buf, size_t cap, size_t* needed);
TSDF_API void tsdf_report_free(tsdf_report* report);

/* ---- self test ---- */
typedef void (*tsdf_check_callback)(const char* id, const char* title, int passed, double seconds,
                                    const char* detail, void* user);
/* only: comma-separated check ids, or NULL for all. *failed receives the
 * number of failing checks. */
TSDF_API tsdf_status tsdf_selftest(const char* only, tsdf_check_callback callback, void* user, int* failed);

/* ---- grids ---- */
TSDF_API tsdf_status tsdf_grid_load(const char* path, tsdf_grid** out);
TSDF_API tsdf_status tsdf_grid_from_values(int resolution, const double* values, tsdf_grid** out);
TSDF_API tsdf_status tsdf_grid_sphere(int resolution, double cx, double cy, double cz, double radius, tsdf_grid** out);
TSDF_API int tsdf_grid_resolution(const tsdf_grid* grid);
/* count must equal resolution^3; values are z-major (x fastest). */
TSDF_API tsdf_status tsdf_grid_copy_values(const tsdf_grid* grid, double* out, size_t count);
TSDF_API tsdf_status tsdf_grid_save(const tsdf_grid* grid, const char* path);
TSDF_API tsdf_status tsdf_grid_save_mesh(const tsdf_grid* grid, const char* ply_path);
TSDF_API tsdf_status tsdf_grid_iou(const tsdf_grid* a, const tsdf_grid* b, double* out);
/* Metric set as a JSON object (cd, nc, fscore, voxel_iou, emd, iou3d, adds, adds_at_0.1, icp_rot_deg). */
TSDF_API tsdf_status tsdf_grid_evaluate(const tsdf_grid* pred, const tsdf_grid* gt, uint64_t seed, char* buf, size_t cap,
                                        size_t* needed);
TSDF_API void tsdf_grid_free(tsdf_grid* grid);

/* ---- scenes ---- */
/* config may be NULL for defaults; only its scene section is used. */
TSDF_API tsdf_status tsdf_scene_generate(uint64_t seed, const tsdf_config* config, tsdf_scene** out);
TSDF_API tsdf_status tsdf_scene_load(const char* dir, tsdf_scene** out);
TSDF_API tsdf_status tsdf_scene_save(const tsdf_scene* scene, const char* dir);
/* *ok = 1 when contacts, non-penetration, mask consistency and margins hold. */
TSDF_API tsdf_status tsdf_scene_check(const tsdf_scene* scene, int padding, int* ok);
TSDF_API tsdf_status tsdf_scene_object(const tsdf_scene* scene, tsdf_grid** out);
TSDF_API tsdf_status tsdf_scene_hand(const tsdf_scene* scene, tsdf_grid** out);
TSDF_API int tsdf_scene_bin(const tsdf_scene* scene);
TSDF_API int tsdf_scene_contact_count(const tsdf_scene* scene);
TSDF_API void tsdf_scene_free(tsdf_scene* scene);

#ifdef __cplusplus
}
#endif

#endif /* TOUCHSDF_H_ */
