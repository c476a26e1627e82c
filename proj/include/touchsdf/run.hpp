// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "touchsdf/denoiser.hpp"
#include "touchsdf/objectives.hpp"
#include "touchsdf/pipeline.hpp"
#include "touchsdf/sampler.hpp"
#include "touchsdf/scene.hpp"

namespace touchsdf {

/// Environment variable naming the default data root.
inline constexpr const char* kDataRootEnv = "TOUCHSDF_DATA";

enum class FieldKind { kOracle, kDenoiser };

struct RunConfig {
  std::filesystem::path data_root;  // empty: $TOUCHSDF_DATA, else ./touchsdf-data
  std::string run_name;             // empty: derived from field, ablation, noise and guidance
  int scenes = 20;
  std::uint64_t seed = 0;
  int workers = 1;
  FieldKind field = FieldKind::kOracle;
  Ablation ablation = Ablation::kFull;
  double touch_noise_mm = 0.0;
  int codec_dim = 8;  // shared codec used by the denoiser
  SceneConfig scene;
  LibraryConfig library;
  SamplerConfig sampler;
  LossWeights loss;
  FlowConfig flow;
  MetricOptions metrics;

  void validate() const;
  std::filesystem::path root() const;
  std::string resolved_run_name() const;
};
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);

/// Outcome of one command: per-item failures are collected, not thrown.
struct CommandReport {
  std::string command;
  int processed = 0;
  std::vector<std::pair<int, std::string>> failures;  // (scene index, message)
  std::vector<std::string> warnings;
  nlohmann::json summary;

  bool ok() const { return failures.empty(); }
  nlohmann::json to_json() const;
};

// Layout under the data root:
//   scenes/manifest.json, scenes/scene_NNNNN/       gen-data
//   libraries/scene_NNNNN/, codec.codc               fit-codec
//   denoiser.tdnz, train_log.jsonl                   train
//   runs/<name>/scene_NNNNN/, runs/<name>/summary.json  reconstruct
//   runs/<name>/report.csv, report.json              evaluate
//   ablation.json, ablation.csv                      ablate
std::string scene_dir_name(int index);

CommandReport cmd_gen_data(const RunConfig& config);
CommandReport cmd_fit_codec(const RunConfig& config);
CommandReport cmd_train(const RunConfig& config);
CommandReport cmd_reconstruct(const RunConfig& config);
CommandReport cmd_evaluate(const RunConfig& config);
CommandReport cmd_ablate(const RunConfig& config);

/// Dispatch by command name (gen-data, fit-codec, train, reconstruct, evaluate, ablate).
CommandReport run_command(const std::string& command, const RunConfig& config);

void save_scene_library(const SceneLibrary& lib, const ShapeLibrary& conditioned, const std::filesystem::path& dir);
SceneLibrary load_scene_library(const std::filesystem::path& dir, ShapeLibrary* conditioned = nullptr);

/// Runs fn(i) for i in [0, count) on `workers` threads. Results must be
/// written to per-index slots; exceptions escape only through fn's own handling.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace touchsdf
