// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "touchsdf/flow.hpp"
#include "touchsdf/objectives.hpp"
#include "touchsdf/transform.hpp"

namespace touchsdf {

/// Time features fed to the denoiser: [t, sin(2^j pi t), cos(2^j pi t)] for
/// j = 0..3, where t = tau / alpha is the rescaled time normalized back.
inline constexpr int kTimeEmbeddingDim = 9;
std::vector<double> time_embedding(double t);

/// Small tanh MLP v = f(x_t, embed(t), cond) with a linear output layer.
class TinyDenoiser {
 public:
  TinyDenoiser() = default;
  TinyDenoiser(int latent_dim, int cond_dim, const std::vector<int>& hidden, double alpha, Rng& rng);

  int latent_dim() const { return latent_dim_; }
  int cond_dim() const { return cond_dim_; }
  double alpha() const { return alpha_; }
  std::size_t layer_count() const { return weights_.size(); }
  std::size_t parameter_count() const;

  Latent forward(const Latent& x, double t, const Latent& cond) const;

  struct Cache {
    std::vector<Eigen::VectorXd> activations;  // input, hidden outputs, output
  };
  Latent forward(const Latent& x, double t, const Latent& cond, Cache& cache) const;

  /// Parameter gradient of <dout, output> given a forward cache; the result
  /// is laid out like flat_parameters(). Optionally also returns d/dx.
  Eigen::VectorXd backward(const Cache& cache, const Latent& dout, Latent* dx = nullptr) const;

  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& p);

  // "TDNZ", u32 version, u32 K, u32 C, f64 alpha, u32 layers, then per layer
  // u32 rows, u32 cols, f64 weights row-major, f64 bias.
  void save(const std::filesystem::path& path) const;
  static TinyDenoiser load(const std::filesystem::path& path);

 private:
  int latent_dim_ = 0;
  int cond_dim_ = 0;
  double alpha_ = 1000.0;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

class DenoiserField final : public VelocityField {
 public:
  DenoiserField(const TinyDenoiser& net, Latent cond, double sigma_min)
      : net_(net), cond_(std::move(cond)), sigma_min_(sigma_min) {}
  Latent velocity(const Latent& x, double t) const override { return net_.forward(x, t, cond_); }
  double sigma_min() const override { return sigma_min_; }
  int dim() const override { return net_.latent_dim(); }

 private:
  const TinyDenoiser& net_;
  Latent cond_;
  double sigma_min_;
};

struct FlowConfig {
  double sigma_min = 1e-3;
  double alpha = 1000.0;
  int batch = 16;
  double learning_rate = 0.01;
  int steps = 2000;
  int finetune_steps = 0;
  std::vector<int> hidden = {64, 64};
  double clip_norm = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const FlowConfig& c);
void from_json(const nlohmann::json& j, FlowConfig& c);

/// One training example: a data latent, its conditioning vector and, for the
/// finetuning phase, the hand volume and touch tensor of its scene.
struct TrainItem {
  Latent x0;
  Latent cond;
  std::optional<SdfGrid> hand;
  std::optional<TouchTensor> touch;
};

struct TrainLogRow {
  int step = 0;
  double fm = 0.0;
  double ni = 0.0;
  double c = 0.0;
  double total = 0.0;
};
nlohmann::json to_json(const TrainLogRow& row);

struct TrainResult {
  TinyDenoiser net;
  std::vector<TrainLogRow> log;
};

/// Plain gradient descent with global-norm clipping on the flow-matching
/// objective for config.steps, then config.finetune_steps of the finetuning
/// objective (flow matching plus time-weighted physics terms through the
/// decoded clean estimate). Throws kNumeric when the loss exceeds 1e6.
TrainResult train_denoiser(const std::vector<TrainItem>& items, const LinearCodec& codec, const FlowConfig& config,
                           const LossWeights& weights, const TinyDenoiser* init = nullptr);

}  // namespace touchsdf
