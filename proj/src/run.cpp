// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/run.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "touchsdf/error.hpp"
#include "touchsdf/mesh.hpp"
#include "touchsdf/metrics.hpp"

namespace touchsdf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::kIo, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir.string());
}

std::string field_name(FieldKind f) { return f == FieldKind::kOracle ? "oracle" : "denoiser"; }

FieldKind parse_field(const std::string& s) {
  if (s == "oracle") return FieldKind::kOracle;
  if (s == "denoiser") return FieldKind::kDenoiser;
  fail(ErrorCode::kInvalidArgument, "unknown field: " + s + " (expected oracle or denoiser)");
}

json latent_json(const Latent& z) { return std::vector<double>(z.data(), z.data() + z.size()); }

Latent latent_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct ManifestEntry {
  int index = 0;
  std::uint64_t seed = 0;
  int bin = 1;
};

std::vector<ManifestEntry> read_manifest(const RunConfig& config) {
  const json m = read_json(config.root() / "scenes" / "manifest.json");
  std::vector<ManifestEntry> out;
  for (const auto& s : m.at("scenes")) out.push_back({s.at("index").get<int>(), s.at("seed").get<std::uint64_t>(), s.at("bin").get<int>()});
  return out;
}

// Per-scene work with failures recorded against the scene index.
template <typename Fn>
void for_each_scene(const std::vector<ManifestEntry>& scenes, int workers, CommandReport& report, Fn&& fn) {
  std::vector<std::optional<std::string>> errors(scenes.size());
  parallel_for(static_cast<int>(scenes.size()), workers, [&](int i) {
    try {
      fn(scenes[static_cast<std::size_t>(i)], i);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  });
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (errors[i]) report.failures.emplace_back(scenes[i].index, *errors[i]);
    else ++report.processed;
  }
}

fs::path scene_path(const RunConfig& c, int index) { return c.root() / "scenes" / scene_dir_name(index); }
fs::path library_path(const RunConfig& c, int index) { return c.root() / "libraries" / scene_dir_name(index); }
fs::path run_path(const RunConfig& c) { return c.root() / "runs" / c.resolved_run_name(); }

}  // namespace

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
  require(scenes >= 1, ErrorCode::kInvalidArgument, "scenes must be >= 1");
  require(workers >= 1, ErrorCode::kInvalidArgument, "workers must be >= 1");
  require(touch_noise_mm >= 0.0 && std::isfinite(touch_noise_mm), ErrorCode::kInvalidArgument,
          "touch_noise_mm must be >= 0");
  require(codec_dim >= 1, ErrorCode::kInvalidArgument, "codec_dim must be >= 1");
  require(metrics.surface_points >= 1 && metrics.emd_points >= 1 && metrics.pose_points >= 1,
          ErrorCode::kInvalidArgument, "metric point counts must be >= 1");
  const std::string name = resolved_run_name();
  require(name.find('/') == std::string::npos && name != "." && name != "..", ErrorCode::kInvalidArgument,
          "run_name must be a plain directory name");
  scene.validate();
  library.validate();
  sampler.validate();
  flow.validate();
}

fs::path RunConfig::root() const {
  if (!data_root.empty()) return data_root;
  if (const char* env = std::getenv(kDataRootEnv); env && *env) return env;
  return "touchsdf-data";
}

std::string RunConfig::resolved_run_name() const {
  if (!run_name.empty()) return run_name;
  char noise[32];
  std::snprintf(noise, sizeof noise, "%gmm", touch_noise_mm);
  return field_name(field) + "_" + ablation_name(ablation) + "_" + noise + (sampler.guidance ? "" : "_unguided");
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"data_root", c.data_root.string()},
           {"run_name", c.run_name},
           {"scenes", c.scenes},
           {"seed", c.seed},
           {"workers", c.workers},
           {"field", field_name(c.field)},
           {"ablation", ablation_name(c.ablation)},
           {"touch_noise_mm", c.touch_noise_mm},
           {"codec_dim", c.codec_dim},
           {"scene", c.scene},
           {"library", c.library},
           {"sampler", c.sampler},
           {"loss", c.loss},
           {"flow", c.flow},
           {"metrics",
            {{"surface_points", c.metrics.surface_points},
             {"emd_points", c.metrics.emd_points},
             {"pose_points", c.metrics.pose_points}}}};
}

void from_json(const json& j, RunConfig& c) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "run config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data_root") c.data_root = value.get<std::string>();
      else if (key == "run_name") c.run_name = value.get<std::string>();
      else if (key == "scenes") c.scenes = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "field") c.field = parse_field(value.get<std::string>());
      else if (key == "ablation") c.ablation = parse_ablation(value.get<std::string>());
      else if (key == "touch_noise_mm") c.touch_noise_mm = value.get<double>();
      else if (key == "codec_dim") c.codec_dim = value.get<int>();
      else if (key == "scene") c.scene = value.get<SceneConfig>();
      else if (key == "library") c.library = value.get<LibraryConfig>();
      else if (key == "sampler") c.sampler = value.get<SamplerConfig>();
      else if (key == "loss") c.loss = value.get<LossWeights>();
      else if (key == "flow") c.flow = value.get<FlowConfig>();
      else if (key == "metrics") {
        require(value.is_object(), ErrorCode::kInvalidArgument, "metrics must be an object");
        for (const auto& [mk, mv] : value.items()) {
          if (mk == "surface_points") c.metrics.surface_points = mv.get<std::size_t>();
          else if (mk == "emd_points") c.metrics.emd_points = mv.get<std::size_t>();
          else if (mk == "pose_points") c.metrics.pose_points = mv.get<std::size_t>();
          else fail(ErrorCode::kInvalidArgument, "unknown metrics key: " + mk);
        }
      } else fail(ErrorCode::kInvalidArgument, "unknown config key: " + key);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  c.validate();
}

RunConfig load_run_config(const fs::path& path) { return read_json(path).get<RunConfig>(); }

json CommandReport::to_json() const {
  json f = json::array();
  for (const auto& [idx, msg] : failures) f.push_back({{"scene", idx}, {"error", msg}});
  return {{"command", command}, {"processed", processed}, {"failures", f}, {"warnings", warnings}, {"summary", summary}};
}

std::string scene_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05d", index);
  return buf;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  const int n = std::max(1, std::min(workers, count));
  if (n == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------- libraries

void save_scene_library(const SceneLibrary& lib, const ShapeLibrary& conditioned, const fs::path& dir) {
  make_dirs(dir);
  save_codec(lib.codec, dir / "codec.codc");
  json codes = json::array(), weights = json::array();
  for (const auto& z : lib.codes) codes.push_back(latent_json(z));
  for (const auto& e : conditioned.entries) weights.push_back(e.weight);
  for (std::size_t i = 0; i < lib.candidates.size(); ++i)
    save_grid(lib.candidates[i], dir / ("candidate_" + std::to_string(i) + ".sdfg"));
  write_json(dir / "library.json", {{"gt_index", lib.gt_index},
                                    {"shift", lib.shift},
                                    {"sigma_min", conditioned.sigma_min},
                                    {"codes", codes},
                                    {"weights", weights}});
}

SceneLibrary load_scene_library(const fs::path& dir, ShapeLibrary* conditioned) {
  const json j = read_json(dir / "library.json");
  SceneLibrary lib;
  lib.codec = load_codec(dir / "codec.codc");
  try {
    lib.gt_index = j.at("gt_index").get<int>();
    lib.shift = j.at("shift").get<double>();
    for (const auto& c : j.at("codes")) lib.codes.push_back(latent_from(c));
    for (std::size_t i = 0; i < lib.codes.size(); ++i)
      lib.candidates.push_back(load_grid(dir / ("candidate_" + std::to_string(i) + ".sdfg")));
    if (conditioned) {
      ShapeLibrary out;
      out.sigma_min = j.at("sigma_min").get<double>();
      const auto w = j.at("weights").get<std::vector<double>>();
      require(w.size() == lib.codes.size(), ErrorCode::kFormat, "library weights and codes differ in length");
      for (std::size_t i = 0; i < w.size(); ++i) out.entries.push_back({lib.codes[i], w[i]});
      out.validate();
      *conditioned = std::move(out);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, (dir / "library.json").string() + ": " + e.what());
  }
  for (const auto& z : lib.codes)
    require(z.size() == lib.codec.dim(), ErrorCode::kFormat, "library code dimension does not match its codec");
  return lib;
}

// ---------------------------------------------------------------- commands

CommandReport cmd_gen_data(const RunConfig& config) {
  config.validate();
  CommandReport report;
  report.command = "gen-data";
  const fs::path dir = config.root() / "scenes";
  make_dirs(dir);
  std::vector<json> entries(static_cast<std::size_t>(config.scenes));
  std::vector<ManifestEntry> all;
  for (int i = 0; i < config.scenes; ++i) all.push_back({i, derive_seed(config.seed, static_cast<std::uint64_t>(i)), 1});
  for_each_scene(all, config.workers, report, [&](const ManifestEntry& e, int slot) {
    const GraspScene s = build_scene(e.seed, config.scene);
    const fs::path sd = dir / scene_dir_name(e.index);
    save_scene_bundle(s, sd);
    const SceneCheck check = check_scene(load_scene_bundle(sd), config.scene.padding);
    require(check.ok(), ErrorCode::kGeneration, "scene failed revalidation after reload");
    entries[static_cast<std::size_t>(slot)] = {{"index", e.index},
                                               {"seed", e.seed},
                                               {"dir", scene_dir_name(e.index)},
                                               {"bin", s.bin},
                                               {"occlusion", s.occlusion_x},
                                               {"fingers", s.hand.n_fingers},
                                               {"contacts", s.contacts.size()}};
  });
  json scenes = json::array();
  for (const auto& e : entries)
    if (!e.is_null()) scenes.push_back(e);
  const json manifest = {{"format", "touchsdf-manifest"},
                         {"version", 1},
                         {"master_seed", config.seed},
                         {"requested", config.scenes},
                         {"count", scenes.size()},
                         {"scene_config", config.scene},
                         {"scenes", scenes}};
  write_json(dir / "manifest.json", manifest);
  report.summary = {{"count", scenes.size()}, {"manifest", (dir / "manifest.json").string()}};
  return report;
}

CommandReport cmd_fit_codec(const RunConfig& config) {
  config.validate();
  CommandReport report;
  report.command = "fit-codec";
  const auto scenes = read_manifest(config);
  for_each_scene(scenes, config.workers, report, [&](const ManifestEntry& e, int) {
    const GraspScene s = load_scene_bundle(scene_path(config, e.index));
    SceneLibrary lib = build_scene_library(s, config.library, derive_seed(e.seed, 1));
    // codes are taken against the stored (f32) codec so a reload reproduces them
    const fs::path dir = library_path(config, e.index);
    make_dirs(dir);
    save_codec(lib.codec, dir / "codec.codc");
    lib.codec = load_codec(dir / "codec.codc");
    for (std::size_t i = 0; i < lib.candidates.size(); ++i) lib.codes[i] = encode(lib.codec, lib.candidates[i]);
    save_scene_library(lib, conditioned_library(s, lib, config.library), dir);
  });

  // shared codec over all ground-truth objects, for the learned field
  std::vector<SdfGrid> objects;
  for (const auto& e : scenes) {
    try {
      objects.push_back(load_grid(scene_path(config, e.index) / "object.sdfg"));
    } catch (const Error& err) {
      report.warnings.push_back(scene_dir_name(e.index) + ": " + err.what());
    }
  }
  require(!objects.empty(), ErrorCode::kInvalidArgument, "no scenes available for the shared codec");
  const int k = std::min<int>(config.codec_dim, static_cast<int>(objects.size()));
  if (k < config.codec_dim)
    report.warnings.push_back("codec_dim reduced to " + std::to_string(k) + " (number of scenes)");
  save_codec(fit_codec(objects, k), config.root() / "codec.codc");
  report.summary = {{"libraries", report.processed}, {"shared_codec_dim", k}};
  return report;
}

namespace {

std::vector<TrainItem> train_items(const RunConfig& config, const LinearCodec& codec, CommandReport& report) {
  const TouchFuser fuser = TouchFuser::identity(codec.dim());
  std::vector<TrainItem> items;
  for (const auto& e : read_manifest(config)) {
    try {
      const GraspScene s = load_scene_bundle(scene_path(config, e.index));
      TrainItem item;
      item.x0 = encode(codec, s.object_sdf);
      item.cond = denoiser_condition(s, codec, fuser, Ablation::kFull, s.touch);
      if (config.flow.finetune_steps > 0) {
        item.hand = s.hand_sdf;
        item.touch = s.touch;
      }
      items.push_back(std::move(item));
      ++report.processed;
    } catch (const Error& err) {
      report.failures.emplace_back(e.index, err.what());
    }
  }
  return items;
}

}  // namespace

CommandReport cmd_train(const RunConfig& config) {
  config.validate();
  CommandReport report;
  report.command = "train";
  const LinearCodec codec = load_codec(config.root() / "codec.codc");
  const std::vector<TrainItem> items = train_items(config, codec, report);
  require(!items.empty(), ErrorCode::kInvalidArgument, "no training scenes");
  const TrainResult res = train_denoiser(items, codec, config.flow, config.loss);
  res.net.save(config.root() / "denoiser.tdnz");
  std::ofstream log(config.root() / "train_log.jsonl");
  require(log.good(), ErrorCode::kIo, "cannot write the training log");
  for (const auto& row : res.log) log << to_json(row).dump() << '\n';
  report.summary = {{"items", items.size()},
                    {"parameters", res.net.parameter_count()},
                    {"final", res.log.empty() ? json() : to_json(res.log.back())}};
  return report;
}

CommandReport cmd_reconstruct(const RunConfig& config) {
  config.validate();
  CommandReport report;
  report.command = "reconstruct";
  const auto scenes = read_manifest(config);
  const fs::path out = run_path(config);
  make_dirs(out);

  std::optional<LinearCodec> shared;
  std::optional<TinyDenoiser> net;
  if (config.field == FieldKind::kDenoiser) {
    shared = load_codec(config.root() / "codec.codc");
    net = TinyDenoiser::load(config.root() / "denoiser.tdnz");
    require(net->latent_dim() == shared->dim(), ErrorCode::kFormat, "denoiser and shared codec dimensions differ");
  }

  std::vector<json> results(scenes.size());
  for_each_scene(scenes, config.workers, report, [&](const ManifestEntry& e, int slot) {
    const GraspScene s = load_scene_bundle(scene_path(config, e.index));
    const ReconstructionOptions opt{config.ablation, config.touch_noise_mm, derive_seed(e.seed, 2)};
    Reconstruction rec;
    json extra = json::object();
    if (config.field == FieldKind::kOracle) {
      ShapeLibrary conditioned;
      const SceneLibrary lib = load_scene_library(library_path(config, e.index), &conditioned);
      rec = reconstruct(s, lib, OracleField(conditioned), config.sampler, opt);
      extra = {{"nearest", rec.nearest}, {"gt_index", lib.gt_index}};
    } else {
      SceneLibrary lib;
      lib.codec = *shared;
      const TouchTensor touch = observed_touch(s, config.ablation, config.touch_noise_mm, opt.seed);
      const Latent cond = denoiser_condition(s, *shared, TouchFuser::identity(shared->dim()), config.ablation, touch);
      rec = reconstruct(s, lib, DenoiserField(*net, cond, config.flow.sigma_min), config.sampler, opt);
    }
    const fs::path sd = out / scene_dir_name(e.index);
    make_dirs(sd);
    save_grid(rec.sample.grid, sd / "pred.sdfg");
    bool mesh = false;
    try {
      save_ply(extract_surface(rec.sample.grid), sd / "pred.ply");
      mesh = true;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kEmptySurface) throw;
    }
    std::ofstream log(sd / "trajectory.jsonl");
    require(log.good(), ErrorCode::kIo, "cannot write " + (sd / "trajectory.jsonl").string());
    for (const auto& row : rec.sample.log) log << to_json(row).dump() << '\n';
    json r = {{"index", e.index}, {"bin", e.bin}, {"ni", rec.ni}, {"contact", rec.contact},
              {"iou", rec.iou},   {"mesh", mesh}, {"latent", latent_json(rec.sample.latent)}};
    r.update(extra);
    write_json(sd / "result.json", r);
    results[static_cast<std::size_t>(slot)] = r;
  });

  json rows = json::array();
  double iou = 0.0, ni = 0.0, c = 0.0;
  for (const auto& r : results) {
    if (r.is_null()) continue;
    rows.push_back(r);
    iou += r["iou"].get<double>();
    ni += r["ni"].get<double>();
    c += r["contact"].get<double>();
  }
  const double n = std::max<double>(1.0, static_cast<double>(rows.size()));
  report.summary = {{"run", config.resolved_run_name()},
                    {"field", field_name(config.field)},
                    {"ablation", ablation_name(config.ablation)},
                    {"touch_noise_mm", config.touch_noise_mm},
                    {"guidance", config.sampler.guidance},
                    {"count", rows.size()},
                    {"mean_iou", iou / n},
                    {"mean_ni", ni / n},
                    {"mean_contact", c / n}};
  json summary = report.summary;
  summary["scenes"] = rows;
  write_json(out / "summary.json", summary);
  return report;
}

CommandReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  CommandReport report;
  report.command = "evaluate";
  const auto scenes = read_manifest(config);
  const fs::path out = run_path(config);
  std::vector<EvalSample> samples(scenes.size());
  std::vector<std::string> notes(scenes.size());
  std::vector<char> present(scenes.size(), 0);
  for_each_scene(scenes, config.workers, report, [&](const ManifestEntry& e, int slot) {
    const auto i = static_cast<std::size_t>(slot);
    const fs::path pred = out / scene_dir_name(e.index) / "pred.sdfg";
    if (!fs::exists(pred)) {
      notes[i] = scene_dir_name(e.index) + ": no reconstruction, excluded";
      return;
    }
    present[i] = 1;
    samples[i].bin = e.bin;
    MetricOptions mo = config.metrics;
    mo.seed = derive_seed(e.seed, 3);
    try {
      samples[i].metrics = evaluate_reconstruction(load_grid(pred), load_grid(scene_path(config, e.index) / "object.sdfg"), mo).as_map();
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kEmptySurface) throw;
      samples[i].valid = false;
      notes[i] = scene_dir_name(e.index) + ": empty surface, counted as invalid";
    }
  });
  std::vector<EvalSample> kept;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!notes[i].empty()) report.warnings.push_back(notes[i]);
    if (present[i]) kept.push_back(samples[i]);
  }
  require(!kept.empty(), ErrorCode::kInvalidArgument, "no reconstructions to evaluate in " + out.string());
  const StratifiedReport rep = stratified_report(kept, config.scene.bins);
  {
    std::ofstream os(out / "report.csv");
    require(os.good(), ErrorCode::kIo, "cannot write " + (out / "report.csv").string());
    os << rep.to_csv();
  }
  write_json(out / "report.json", rep.to_json());
  report.summary = {{"run", config.resolved_run_name()}, {"evaluated", rep.total}, {"report", rep.to_json()}};
  return report;
}

CommandReport cmd_ablate(const RunConfig& config) {
  config.validate();
  CommandReport report;
  report.command = "ablate";
  struct Variant {
    std::string name;
    Ablation ablation;
    double noise;
  };
  const std::vector<Variant> variants = {{"vision-only", Ablation::kVisionOnly, 0.0},
                                         {"no-touch", Ablation::kNoTouch, 0.0},
                                         {"full", Ablation::kFull, 0.0},
                                         {"full-3mm", Ablation::kFull, 3.0},
                                         {"full-5mm", Ablation::kFull, 5.0}};
  json table = json::object();
  std::vector<std::string> metric_names;
  for (const auto& v : variants) {
    RunConfig c = config;
    c.ablation = v.ablation;
    c.touch_noise_mm = v.noise;
    c.run_name = "ablate_" + v.name;
    const CommandReport rec = cmd_reconstruct(c);
    for (const auto& f : rec.failures) report.failures.emplace_back(f.first, v.name + ": " + f.second);
    const CommandReport ev = cmd_evaluate(c);
    for (const auto& f : ev.failures) report.failures.emplace_back(f.first, v.name + ": " + f.second);
    for (const auto& w : ev.warnings) report.warnings.push_back(v.name + ": " + w);
    const json& overall = ev.summary["report"];
    json row = {{"mean_iou", rec.summary["mean_iou"]}, {"mean_ni", rec.summary["mean_ni"]},
                {"mean_contact", rec.summary["mean_contact"]}};
    for (const auto& [metric, bins] : overall["metrics"].items()) {
      row[metric] = bins["All"];
      if (std::find(metric_names.begin(), metric_names.end(), metric) == metric_names.end()) metric_names.push_back(metric);
    }
    table[v.name] = row;
    report.processed += rec.processed;
  }
  json deltas = json::object();
  for (const char* noisy : {"full-3mm", "full-5mm"}) {
    json d = json::object();
    for (const auto& [key, value] : table[noisy].items())
      if (value.is_number() && table["full"][key].is_number()) d[key] = value.get<double>() - table["full"][key].get<double>();
    deltas[std::string(noisy) + " - full"] = d;
  }
  report.summary = {{"variants", table}, {"noise_deltas", deltas}};
  write_json(config.root() / "ablation.json", report.summary);

  std::ofstream os(config.root() / "ablation.csv");
  require(os.good(), ErrorCode::kIo, "cannot write ablation.csv");
  os << "variant,mean_iou,mean_ni,mean_contact";
  for (const auto& m : metric_names) os << ',' << m;
  os << '\n';
  for (const auto& v : variants) {
    const json& row = table[v.name];
    os << v.name << ',' << row["mean_iou"].get<double>() << ',' << row["mean_ni"].get<double>() << ','
       << row["mean_contact"].get<double>();
    for (const auto& m : metric_names) {
      os << ',';
      if (row.contains(m) && row[m].is_number()) os << row[m].get<double>();
    }
    os << '\n';
  }
  return report;
}

CommandReport run_command(const std::string& command, const RunConfig& config) {
  if (command == "gen-data") return cmd_gen_data(config);
  if (command == "fit-codec") return cmd_fit_codec(config);
  if (command == "train") return cmd_train(config);
  if (command == "reconstruct") return cmd_reconstruct(config);
  if (command == "evaluate") return cmd_evaluate(config);
  if (command == "ablate") return cmd_ablate(config);
  fail(ErrorCode::kInvalidArgument, "unknown command: " + command);
}

}  // namespace touchsdf
