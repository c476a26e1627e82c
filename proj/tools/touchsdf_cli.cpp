// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

// touchsdf command line driver. Talks to the library only through touchsdf.h.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "touchsdf/touchsdf.h"

namespace {

struct Overrides {
  std::string config_path;
  std::string data_root;
  std::string run_name;
  std::string field;
  std::string ablation;
  std::string guidance;
  std::optional<int> scenes;
  std::optional<long long> seed;
  std::optional<int> workers;
  std::optional<double> touch_noise_mm;
};

struct ConfigDeleter {
  void operator()(tsdf_config* c) const { tsdf_config_free(c); }
};
struct ReportDeleter {
  void operator()(tsdf_report* r) const { tsdf_report_free(r); }
};
using ConfigPtr = std::unique_ptr<tsdf_config, ConfigDeleter>;
using ReportPtr = std::unique_ptr<tsdf_report, ReportDeleter>;

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(tsdf_status s, const std::string& what) {
  if (s != TSDF_OK) throw CliError(what + ": " + tsdf_status_name(s) + ": " + tsdf_last_error());
}

template <typename Fn>
std::string fetch_string(Fn&& fn) {
  size_t needed = 0;
  check(fn(nullptr, 0, &needed), "query size");
  std::string out(needed, '\0');
  check(fn(out.data(), out.size(), &needed), "read string");
  out.resize(needed - 1);
  return out;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void set(tsdf_config* cfg, const char* key, const std::string& json_value) {
  check(tsdf_config_set(cfg, key, json_value.c_str()), std::string("--") + key);
}

ConfigPtr build_config(const Overrides& o) {
  tsdf_config* raw = nullptr;
  if (!o.config_path.empty())
    check(tsdf_config_load(o.config_path.c_str(), &raw), "config " + o.config_path);
  else
    check(tsdf_config_new(&raw), "config");
  ConfigPtr cfg(raw);
  if (!o.data_root.empty()) set(cfg.get(), "data_root", quoted(o.data_root));
  if (!o.run_name.empty()) set(cfg.get(), "run_name", quoted(o.run_name));
  if (!o.field.empty()) set(cfg.get(), "field", quoted(o.field));
  if (!o.ablation.empty()) set(cfg.get(), "ablation", quoted(o.ablation));
  if (!o.guidance.empty()) set(cfg.get(), "sampler.guidance", o.guidance == "on" ? "true" : "false");
  if (o.scenes) set(cfg.get(), "scenes", std::to_string(*o.scenes));
  if (o.seed) set(cfg.get(), "seed", std::to_string(*o.seed));
  if (o.workers) set(cfg.get(), "workers", std::to_string(*o.workers));
  if (o.touch_noise_mm) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *o.touch_noise_mm);
    set(cfg.get(), "touch_noise_mm", buf);
  }
  return cfg;
}

void add_run_options(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config_path, "JSON run config")->check(CLI::ExistingFile);
  sub->add_option("--data-root", o.data_root, "data directory (default $TOUCHSDF_DATA or ./touchsdf-data)");
  sub->add_option("--run-name", o.run_name, "output run name under runs/");
  sub->add_option("--scenes", o.scenes, "number of scenes")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "master seed")->check(CLI::NonNegativeNumber);
  sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--field", o.field, "velocity field")->check(CLI::IsMember({"oracle", "denoiser"}));
  sub->add_option("--ablation", o.ablation, "conditioning variant")
      ->check(CLI::IsMember({"vision-only", "no-touch", "full"}));
  sub->add_option("--guidance", o.guidance, "physics guidance")->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--touch-noise-mm", o.touch_noise_mm, "contact jitter in mm")->check(CLI::NonNegativeNumber);
}

int run_command(const std::string& name, const Overrides& o, bool quiet) {
  ConfigPtr cfg = build_config(o);
  tsdf_report* raw = nullptr;
  check(tsdf_run(name.c_str(), cfg.get(), &raw), name);
  ReportPtr report(raw);
  const int failures = tsdf_report_failure_count(report.get());
  if (!quiet)
    std::printf("%s\n", fetch_string([&](char* b, size_t c, size_t* n) { return tsdf_report_json(report.get(), b, c, n); })
                            .c_str());
  std::fprintf(stderr, "%s: %d processed, %d failed\n", name.c_str(), tsdf_report_processed(report.get()), failures);
  return failures == 0 ? 0 : 1;
}

void print_check(const char* id, const char* title, int passed, double seconds, const char* detail, void*) {
  std::printf("%-4s %-10s %-48s %7.2fs  %s\n", passed ? "PASS" : "FAIL", id, title, seconds, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"touchsdf: touch-guided shape reconstruction"};
  app.set_version_flag("--version", std::string(tsdf_version()));
  app.require_subcommand(1);

  Overrides o;
  bool quiet = false;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "generate and validate procedural grasp scenes"},
      {"fit-codec", "fit per-scene shape libraries and the shared codec"},
      {"train", "train the velocity denoiser"},
      {"reconstruct", "sample reconstructions for every scene"},
      {"evaluate", "score a reconstruction run"},
      {"ablate", "run and score the conditioning ablations"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_run_options(sub, o);
    sub->add_flag("-q,--quiet", quiet, "print only the one-line summary");
  }

  CLI::App* show = app.add_subcommand("show-config", "print the effective run config");
  add_run_options(show, o);

  std::string only;
  CLI::App* selftest = app.add_subcommand("selftest", "run the acceptance checks");
  selftest->add_option("--only", only, "comma-separated check ids (AC1..AC10, codec-file)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (show->parsed()) {
      ConfigPtr cfg = build_config(o);
      std::printf("%s\n",
                  fetch_string([&](char* b, size_t c, size_t* n) { return tsdf_config_to_json(cfg.get(), b, c, n); })
                      .c_str());
      return 0;
    }
    if (selftest->parsed()) {
      int failed = 0;
      check(tsdf_selftest(only.empty() ? nullptr : only.c_str(), print_check, nullptr, &failed), "selftest");
      std::printf("%s\n", failed == 0 ? "all checks passed" : (std::to_string(failed) + " check(s) failed").c_str());
      return failed == 0 ? 0 : 1;
    }
    for (const auto& [name, help] : commands)
      if (app.got_subcommand(name)) return run_command(name, o, quiet);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
