// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/denoiser.hpp"

#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "touchsdf/error.hpp"
#include "touchsdf/sampler.hpp"

namespace touchsdf {

std::vector<double> time_embedding(double t) {
  std::vector<double> e(kTimeEmbeddingDim);
  e[0] = t;
  for (int j = 0; j < 4; ++j) {
    const double w = std::ldexp(M_PI, j) * t;
    e[1 + j] = std::sin(w);
    e[5 + j] = std::cos(w);
  }
  return e;
}

TinyDenoiser::TinyDenoiser(int latent_dim, int cond_dim, const std::vector<int>& hidden, double alpha, Rng& rng)
    : latent_dim_(latent_dim), cond_dim_(cond_dim), alpha_(alpha) {
  require(latent_dim >= 1 && cond_dim >= 0, ErrorCode::kInvalidArgument, "denoiser dimensions must be positive");
  require(alpha > 0.0, ErrorCode::kInvalidArgument, "alpha must be > 0");
  std::vector<int> sizes = {latent_dim + kTimeEmbeddingDim + cond_dim};
  for (int h : hidden) {
    require(h >= 1, ErrorCode::kInvalidArgument, "hidden widths must be positive");
    sizes.push_back(h);
  }
  sizes.push_back(latent_dim);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double a = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> u(-a, a);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
}

std::size_t TinyDenoiser::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Latent TinyDenoiser::forward(const Latent& x, double t, const Latent& cond) const {
  Cache cache;
  return forward(x, t, cond, cache);
}

Latent TinyDenoiser::forward(const Latent& x, double t, const Latent& cond, Cache& cache) const {
  require(!weights_.empty(), ErrorCode::kInvalidArgument, "denoiser has no layers");
  require(x.size() == latent_dim_ && cond.size() == cond_dim_, ErrorCode::kInvalidArgument,
          "denoiser input dimension mismatch");
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidArgument, "denoiser: t must lie in [0, 1]");
  const double tau = alpha_ * t;
  const auto emb = time_embedding(tau / alpha_);
  Eigen::VectorXd in(latent_dim_ + kTimeEmbeddingDim + cond_dim_);
  in << x, Eigen::Map<const Eigen::VectorXd>(emb.data(), kTimeEmbeddingDim), cond;
  cache.activations.assign(1, in);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::VectorXd z = weights_[l] * cache.activations.back() + biases_[l];
    if (l + 1 < weights_.size()) z = z.array().tanh();
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

Eigen::VectorXd TinyDenoiser::backward(const Cache& cache, const Latent& dout, Latent* dx) const {
  require(cache.activations.size() == weights_.size() + 1, ErrorCode::kInvalidArgument, "stale forward cache");
  Eigen::VectorXd grad(parameter_count());
  std::vector<std::size_t> offset(weights_.size());
  std::size_t o = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    offset[l] = o;
    o += weights_[l].size() + biases_[l].size();
  }
  Eigen::VectorXd delta = dout;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Eigen::VectorXd& a = cache.activations[l];
    const Eigen::Index rows = weights_[l].rows(), cols = weights_[l].cols();
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) grad(offset[l] + i * cols + j) = delta(i) * a(j);
    grad.segment(offset[l] + rows * cols, rows) = delta;
    Eigen::VectorXd prev = weights_[l].transpose() * delta;
    if (l > 0) prev.array() *= 1.0 - a.array().square();
    delta = std::move(prev);
  }
  if (dx) *dx = delta.head(latent_dim_);
  return grad;
}

Eigen::VectorXd TinyDenoiser::flat_parameters() const {
  Eigen::VectorXd p(parameter_count());
  std::size_t o = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) p(o++) = weights_[l](i, j);
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) p(o++) = biases_[l](i);
  }
  return p;
}

void TinyDenoiser::set_flat_parameters(const Eigen::VectorXd& p) {
  require(static_cast<std::size_t>(p.size()) == parameter_count(), ErrorCode::kInvalidArgument,
          "parameter vector size mismatch");
  std::size_t o = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) weights_[l](i, j) = p(o++);
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l](i) = p(o++);
  }
}

namespace {
constexpr char kNetMagic[4] = {'T', 'D', 'N', 'Z'};
}

void TinyDenoiser::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os.write(kNetMagic, 4);
  io::put<std::uint32_t>(os, 1);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(latent_dim_));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(cond_dim_));
  io::put<double>(os, alpha_);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(weights_.size()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    io::put<std::uint32_t>(os, static_cast<std::uint32_t>(weights_[l].rows()));
    io::put<std::uint32_t>(os, static_cast<std::uint32_t>(weights_[l].cols()));
    for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights_[l].cols(); ++j) io::put<double>(os, weights_[l](i, j));
    for (Eigen::Index i = 0; i < biases_[l].size(); ++i) io::put<double>(os, biases_[l](i));
  }
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

TinyDenoiser TinyDenoiser::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  char magic[4];
  io::read_exact(is, magic, 4, path);
  require(std::equal(magic, magic + 4, kNetMagic), ErrorCode::kFormat, path.string() + ": not a denoiser file");
  require(io::get<std::uint32_t>(is, path) == 1, ErrorCode::kFormat, path.string() + ": unsupported version");
  TinyDenoiser net;
  net.latent_dim_ = static_cast<int>(io::get<std::uint32_t>(is, path));
  net.cond_dim_ = static_cast<int>(io::get<std::uint32_t>(is, path));
  net.alpha_ = io::get<double>(is, path);
  const auto layers = io::get<std::uint32_t>(is, path);
  require(layers >= 1 && layers <= 64 && net.alpha_ > 0.0, ErrorCode::kFormat, path.string() + ": bad header");
  Eigen::Index expect_cols = net.latent_dim_ + kTimeEmbeddingDim + net.cond_dim_;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto rows = io::get<std::uint32_t>(is, path), cols = io::get<std::uint32_t>(is, path);
    require(cols == expect_cols && rows >= 1 && rows <= 1u << 16, ErrorCode::kFormat,
            path.string() + ": inconsistent layer table");
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = io::get<double>(is, path);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = io::get<double>(is, path);
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(std::move(b));
    expect_cols = rows;
  }
  require(expect_cols == net.latent_dim_, ErrorCode::kFormat, path.string() + ": output width differs from K");
  return net;
}

void FlowConfig::validate() const {
  require(sigma_min >= 0.0 && sigma_min < 1.0, ErrorCode::kInvalidArgument, "sigma_min must lie in [0, 1)");
  require(alpha > 0.0, ErrorCode::kInvalidArgument, "alpha must be > 0");
  require(batch >= 1 && steps >= 0 && finetune_steps >= 0, ErrorCode::kInvalidArgument, "bad batch/step counts");
  require(learning_rate > 0.0 && clip_norm > 0.0, ErrorCode::kInvalidArgument, "learning rate and clip must be > 0");
  for (int h : hidden) require(h >= 1, ErrorCode::kInvalidArgument, "hidden widths must be positive");
}

void to_json(nlohmann::json& j, const FlowConfig& c) {
  j = nlohmann::json{{"sigma_min", c.sigma_min}, {"alpha", c.alpha},       {"batch", c.batch},
                     {"learning_rate", c.learning_rate}, {"steps", c.steps}, {"finetune_steps", c.finetune_steps},
                     {"hidden", c.hidden},       {"clip_norm", c.clip_norm}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, FlowConfig& c) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "flow config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "sigma_min") c.sigma_min = value.get<double>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "batch") c.batch = value.get<int>();
    else if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "steps") c.steps = value.get<int>();
    else if (key == "finetune_steps") c.finetune_steps = value.get<int>();
    else if (key == "hidden") c.hidden = value.get<std::vector<int>>();
    else if (key == "clip_norm") c.clip_norm = value.get<double>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else fail(ErrorCode::kInvalidArgument, "unknown flow config key: " + key);
  }
  c.validate();
}

nlohmann::json to_json(const TrainLogRow& row) {
  return {{"step", row.step}, {"fm", row.fm}, {"ni", row.ni}, {"c", row.c}, {"total", row.total}};
}

TrainResult train_denoiser(const std::vector<TrainItem>& items, const LinearCodec& codec, const FlowConfig& config,
                           const LossWeights& weights, const TinyDenoiser* init) {
  config.validate();
  weights.validate();
  require(!items.empty(), ErrorCode::kInvalidArgument, "train_denoiser needs at least one item");
  const int k = static_cast<int>(items.front().x0.size());
  const int c = static_cast<int>(items.front().cond.size());
  for (const auto& it : items)
    require(it.x0.size() == k && it.cond.size() == c, ErrorCode::kInvalidArgument, "training items differ in shape");
  if (config.finetune_steps > 0) {
    require(codec.dim() == k, ErrorCode::kInvalidArgument, "codec dimension differs from the latent size");
    for (const auto& it : items)
      require(it.hand.has_value() && it.touch.has_value(), ErrorCode::kInvalidArgument,
              "finetuning needs a hand volume and touch tensor for every item");
  }

  Rng rng(config.seed);
  TrainResult result;
  result.net = init ? *init : TinyDenoiser(k, c, config.hidden, config.alpha, rng);
  require(result.net.latent_dim() == k && result.net.cond_dim() == c, ErrorCode::kInvalidArgument,
          "initial denoiser does not match the data");
  Eigen::VectorXd params = result.net.flat_parameters();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sm = config.sigma_min;
  const int total_steps = config.steps + config.finetune_steps;

  struct Slot {
    TinyDenoiser::Cache cache;
    Latent dout;
    Latent dphys;
    double w = 0.0;
  };
  std::vector<Slot> slots(config.batch);

  for (int step = 0; step < total_steps; ++step) {
    const bool finetune = step >= config.steps;
    const double lambda_ni = finetune ? warmup({weights.ni, weights.ni_warmup.steps}, step - config.steps) : 0.0;
    double fm_sum = 0.0, ni_sum = 0.0, c_sum = 0.0, phys_num = 0.0, w_sum = 0.0;
    for (auto& slot : slots) {
      const TrainItem& item = items[rng() % items.size()];
      const double t = unit(rng);
      Latent eps(k);
      for (int d = 0; d < k; ++d) eps(d) = gauss(rng);
      const Latent xt = interpolate(item.x0, eps, t, sm);
      const Latent out = result.net.forward(xt, t, item.cond, slot.cache);
      const Latent r = out - target_velocity(item.x0, eps, sm);
      fm_sum += r.squaredNorm();
      slot.dout = 2.0 * r / static_cast<double>(config.batch);
      slot.w = 0.0;
      slot.dphys = Latent::Zero(k);
      if (finetune) {
        const Latent x0_hat = clean_estimate(xt, out, t, sm);
        const PhysicsEnergy e =
            physics_energy(decode(codec, x0_hat), *item.hand, *item.touch, lambda_ni, weights.contact, weights.tau);
        const double s = noise_scale(t, sm);
        const double den = s + (1.0 - sm) * (1.0 - t);
        slot.w = time_weight(t);
        slot.dphys = (-s / den) * pull_back(codec, e.grad);
        phys_num += slot.w * e.energy;
        w_sum += slot.w;
        ni_sum += e.ni;
        c_sum += e.contact;
      }
    }
    const double norm_w = std::max(1e-12, w_sum);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
    for (auto& slot : slots) {
      Latent dout = slot.dout;
      if (finetune) dout += (slot.w / norm_w) * slot.dphys;
      grad += result.net.backward(slot.cache, dout);
    }
    TrainLogRow row;
    row.step = step;
    row.fm = fm_sum / config.batch;
    row.ni = ni_sum / config.batch;
    row.c = c_sum / config.batch;
    row.total = row.fm + (finetune ? phys_num / norm_w : 0.0);
    result.log.push_back(row);
    if (!std::isfinite(row.total) || row.total > 1e6)
      fail(ErrorCode::kNumeric, "training diverged at step " + std::to_string(step) +
                                    " (loss=" + std::to_string(row.total) + ")");
    const double gn = grad.norm();
    if (gn > config.clip_norm) grad *= config.clip_norm / gn;
    params -= config.learning_rate * grad;
    result.net.set_flat_parameters(params);
  }
  return result;
}

}  // namespace touchsdf
