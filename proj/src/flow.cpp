// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "touchsdf/error.hpp"

namespace touchsdf {

namespace {

// Orthonormalize the columns of m in place (modified Gram-Schmidt, two
// passes). Columns that vanish are replaced by the first coordinate axis
// that is independent of the ones kept so far.
void orthonormalize(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::Index axis = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index p = 0; p < c; ++p) m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
    double norm = m.col(c).norm();
    while (norm < 1e-8) {
      require(axis < n, ErrorCode::kNumeric, "cannot complete codec basis");
      m.col(c).setZero();
      m(axis++, c) = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index p = 0; p < c; ++p) m.col(c) -= m.col(p).dot(m.col(c)) * m.col(p);
      norm = m.col(c).norm();
    }
    m.col(c) /= norm;
    // sign convention: largest-magnitude entry positive
    Eigen::Index arg = 0;
    m.col(c).cwiseAbs().maxCoeff(&arg);
    if (m(arg, c) < 0.0) m.col(c) = -m.col(c);
  }
}

std::size_t cube(int r) { return static_cast<std::size_t>(r) * r * r; }

}  // namespace

void LinearCodec::validate() const {
  require(resolution >= 1, ErrorCode::kInvalidArgument, "codec resolution must be positive");
  require(static_cast<std::size_t>(mean.size()) == cube(resolution) &&
              static_cast<std::size_t>(basis.rows()) == cube(resolution),
          ErrorCode::kInvalidArgument, "codec dimensions do not match R^3");
  require(basis.cols() >= 1, ErrorCode::kInvalidArgument, "codec needs K >= 1");
}

LinearCodec fit_codec(const std::vector<SdfGrid>& grids, int k) {
  require(!grids.empty(), ErrorCode::kInvalidArgument, "fit_codec needs at least one grid");
  const int r = grids.front().resolution();
  const std::size_t n = cube(r);
  require(k >= 1 && static_cast<std::size_t>(k) <= std::min(grids.size(), n), ErrorCode::kInvalidArgument,
          "codec dimension K must satisfy 1 <= K <= min(count, R^3)");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grids.size()));
  for (std::size_t c = 0; c < grids.size(); ++c) {
    require_same_resolution(grids.front(), grids[c], "fit_codec");
    for (std::size_t q = 0; q < n; ++q) data(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) = grids[c][q];
  }
  LinearCodec codec;
  codec.resolution = r;
  codec.mean = data.rowwise().mean();
  data.colwise() -= codec.mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
  codec.basis = svd.matrixU().leftCols(k);
  const auto& sv = svd.singularValues();
  const double tol = std::max(1e-12, sv.size() ? sv(0) * 1e-10 : 0.0);
  for (int c = 0; c < k; ++c)
    if (c >= sv.size() || sv(c) <= tol) codec.basis.col(c).setZero();  // completed below
  orthonormalize(codec.basis);
  return codec;
}

Latent encode(const LinearCodec& codec, const SdfGrid& grid) {
  if (grid.resolution() != codec.resolution)
    fail(ErrorCode::kResolutionMismatch, "encode: grid resolution does not match the codec");
  const Eigen::Map<const Eigen::VectorXd> g(grid.values().data(), static_cast<Eigen::Index>(grid.size()));
  return codec.basis.transpose() * (g - codec.mean);
}

SdfGrid decode(const LinearCodec& codec, const Latent& z) {
  require(z.size() == codec.basis.cols(), ErrorCode::kInvalidArgument, "decode: latent dimension mismatch");
  const Eigen::VectorXd g = codec.mean + codec.basis * z;
  return SdfGrid(codec.resolution, std::vector<double>(g.data(), g.data() + g.size()));
}

Latent pull_back(const LinearCodec& codec, const std::vector<double>& grid_gradient) {
  require(static_cast<Eigen::Index>(grid_gradient.size()) == codec.basis.rows(), ErrorCode::kInvalidArgument,
          "pull_back: gradient size mismatch");
  const Eigen::Map<const Eigen::VectorXd> g(grid_gradient.data(), static_cast<Eigen::Index>(grid_gradient.size()));
  return codec.basis.transpose() * g;
}

namespace {
constexpr char kCodecMagic[4] = {'C', 'O', 'D', 'C'};
}

void save_codec(const LinearCodec& codec, const std::filesystem::path& path) {
  codec.validate();
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os.write(kCodecMagic, 4);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(codec.dim()));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(codec.mean.size()));
  for (Eigen::Index q = 0; q < codec.mean.size(); ++q) io::put<float>(os, static_cast<float>(codec.mean(q)));
  for (Eigen::Index c = 0; c < codec.basis.cols(); ++c)
    for (Eigen::Index q = 0; q < codec.basis.rows(); ++q) io::put<float>(os, static_cast<float>(codec.basis(q, c)));
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

LinearCodec load_codec(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  char magic[4];
  io::read_exact(is, magic, 4, path);
  require(std::equal(magic, magic + 4, kCodecMagic), ErrorCode::kFormat, path.string() + ": not a codec file");
  const auto k = io::get<std::uint32_t>(is, path);
  const auto n = io::get<std::uint32_t>(is, path);
  const int r = static_cast<int>(std::lround(std::cbrt(static_cast<double>(n))));
  require(n >= 1 && cube(r) == n, ErrorCode::kFormat, path.string() + ": voxel count is not a cube");
  require(k >= 1 && k <= n && k <= 4096, ErrorCode::kFormat, path.string() + ": bad latent dimension");
  LinearCodec codec;
  codec.resolution = r;
  codec.mean.resize(n);
  for (std::uint32_t q = 0; q < n; ++q) codec.mean(q) = io::get<float>(is, path);
  codec.basis.resize(n, k);
  for (std::uint32_t c = 0; c < k; ++c)
    for (std::uint32_t q = 0; q < n; ++q) codec.basis(q, c) = io::get<float>(is, path);
  require(codec.mean.allFinite() && codec.basis.allFinite(), ErrorCode::kFormat, path.string() + ": non-finite values");
  orthonormalize(codec.basis);
  return codec;
}

double noise_scale(double t, double sigma_min) { return sigma_min + (1.0 - sigma_min) * t; }

Latent interpolate(const Latent& x0, const Latent& eps, double t, double sigma_min) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidArgument, "interpolate: t must lie in [0, 1]");
  require(x0.size() == eps.size(), ErrorCode::kInvalidArgument, "interpolate: dimension mismatch");
  return (1.0 - t) * x0 + noise_scale(t, sigma_min) * eps;
}

Latent target_velocity(const Latent& x0, const Latent& eps, double sigma_min) {
  require(x0.size() == eps.size(), ErrorCode::kInvalidArgument, "target_velocity: dimension mismatch");
  return (1.0 - sigma_min) * eps - x0;
}

double fm_loss(const Latent& out, const Latent& x0, const Latent& eps, double sigma_min) {
  require(out.size() == x0.size(), ErrorCode::kInvalidArgument, "fm_loss: dimension mismatch");
  return (out - target_velocity(x0, eps, sigma_min)).squaredNorm();
}

void ShapeLibrary::validate() const {
  require(!entries.empty(), ErrorCode::kInvalidArgument, "shape library is empty");
  require(sigma_min >= 0.0 && sigma_min < 1.0, ErrorCode::kInvalidArgument, "sigma_min must lie in [0, 1)");
  double sum = 0.0;
  for (const auto& e : entries) {
    require(e.weight >= 0.0 && std::isfinite(e.weight), ErrorCode::kInvalidArgument, "library weights must be >= 0");
    require(e.z.size() == entries.front().z.size(), ErrorCode::kInvalidArgument, "library latent sizes differ");
    require(e.z.allFinite(), ErrorCode::kInvalidArgument, "library latent is not finite");
    sum += e.weight;
  }
  require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::kInvalidArgument, "library weights must sum to 1");
}

ShapeLibrary ShapeLibrary::uniform(const std::vector<Latent>& codes, double sigma_min) {
  ShapeLibrary lib;
  lib.sigma_min = sigma_min;
  for (const auto& z : codes) lib.entries.push_back({z, 1.0 / static_cast<double>(codes.size())});
  lib.validate();
  return lib;
}

std::vector<double> posterior_weights(const Latent& x, double t, const ShapeLibrary& lib) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::kInvalidArgument, "oracle: t must lie in [0, 1]");
  const double s = noise_scale(t, lib.sigma_min);
  require(s > 0.0, ErrorCode::kNumeric, "oracle: singular time (t = 0 with sigma_min = 0)");
  std::vector<double> logw(lib.entries.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lib.entries.size(); ++i) {
    const auto& e = lib.entries[i];
    require(e.z.size() == x.size(), ErrorCode::kInvalidArgument, "oracle: latent dimension mismatch");
    logw[i] = e.weight > 0.0 ? std::log(e.weight) - (x - (1.0 - t) * e.z).squaredNorm() / (2.0 * s * s)
                             : -std::numeric_limits<double>::infinity();
    top = std::max(top, logw[i]);
  }
  require(std::isfinite(top), ErrorCode::kNumeric, "oracle: all library weights vanish");
  double sum = 0.0;
  for (auto& v : logw) sum += (v = std::exp(v - top));
  for (auto& v : logw) v /= sum;
  return logw;
}

Latent oracle_velocity(const Latent& x, double t, const ShapeLibrary& lib) {
  const std::vector<double> p = posterior_weights(x, t, lib);
  const double s = noise_scale(t, lib.sigma_min);
  Latent v = Latent::Zero(x.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const auto& z = lib.entries[i].z;
    v += p[i] * ((1.0 - lib.sigma_min) * (x - (1.0 - t) * z) / s - z);
  }
  return v;
}

OracleField::OracleField(ShapeLibrary lib) : lib_(std::move(lib)) { lib_.validate(); }

std::vector<std::uint8_t> silhouette(const SdfGrid& grid) {
  const int r = grid.resolution();
  std::vector<std::uint8_t> m(static_cast<std::size_t>(r) * r, 0);
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        if (grid.at(i, j, k) < 0.0) m[i + static_cast<std::size_t>(r) * j] = 1;
  return m;
}

double silhouette_mismatch(const std::vector<std::uint8_t>& candidate, const std::vector<std::uint8_t>& object_visible,
                           const std::vector<std::uint8_t>& hand_visible) {
  require(candidate.size() == object_visible.size() && candidate.size() == hand_visible.size(),
          ErrorCode::kInvalidArgument, "silhouette_mismatch: mask sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t p = 0; p < candidate.size(); ++p) {
    const bool a = candidate[p] && !hand_visible[p];
    const bool b = object_visible[p] != 0;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

ShapeLibrary condition_library(const ShapeLibrary& lib, const std::vector<double>& mismatch, double lambda_ev) {
  lib.validate();
  require(mismatch.size() == lib.entries.size(), ErrorCode::kInvalidArgument, "one mismatch value per entry required");
  require(lambda_ev >= 0.0, ErrorCode::kInvalidArgument, "evidence strength must be >= 0");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mismatch.size(); ++i)
    if (lib.entries[i].weight > 0.0) best = std::min(best, mismatch[i]);
  ShapeLibrary out = lib;
  double sum = 0.0;
  for (std::size_t i = 0; i < mismatch.size(); ++i) {
    const double d = mismatch[i] - best;
    double f;
    if (std::isinf(lambda_ev))
      f = d <= 0.0 ? 1.0 : 0.0;
    else
      f = lambda_ev == 0.0 ? 1.0 : std::exp(-lambda_ev * d);
    out.entries[i].weight = lib.entries[i].weight * f;
    sum += out.entries[i].weight;
  }
  require(sum > 0.0 && std::isfinite(sum), ErrorCode::kNumeric, "conditioned library has all-zero weights");
  for (auto& e : out.entries) e.weight /= sum;
  return out;
}

TouchFuser TouchFuser::identity(int k) {
  TouchFuser f;
  f.w_hand = Eigen::MatrixXd::Identity(k, k);
  f.w_touch = Eigen::MatrixXd::Zero(k, kTouchFeatureDim);
  f.bias = Eigen::VectorXd::Zero(k);
  return f;
}

Latent TouchFuser::apply(const Latent& hand_latent, const std::vector<double>& touch_features) const {
  require(hand_latent.size() == w_hand.cols() && w_hand.rows() == w_hand.cols(), ErrorCode::kInvalidArgument,
          "fuse_touch: hand latent dimension mismatch");
  require(static_cast<Eigen::Index>(touch_features.size()) == w_touch.cols() && w_touch.rows() == w_hand.rows(),
          ErrorCode::kInvalidArgument, "fuse_touch: touch feature dimension mismatch");
  const bool identity_hand = w_hand.isIdentity(0.0) && bias.isZero(0.0);
  if (touch_disabled() && identity_hand) return hand_latent;
  Latent out = identity_hand ? hand_latent : Latent(w_hand * hand_latent + bias);
  if (!touch_disabled()) {
    const Eigen::Map<const Eigen::VectorXd> f(touch_features.data(), static_cast<Eigen::Index>(touch_features.size()));
    out += w_touch * f;
  }
  return out;
}

Latent TouchFuser::apply(const Latent& hand_latent, const TouchTensor& touch) const {
  return apply(hand_latent, pool_touch_features(touch));
}

}  // namespace touchsdf
