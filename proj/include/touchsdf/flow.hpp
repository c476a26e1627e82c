// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "touchsdf/grid.hpp"
#include "touchsdf/touch.hpp"

namespace touchsdf {

using Latent = Eigen::VectorXd;

/// Linear stand-in for the structure VAE: g = mean + basis * z with an
/// orthonormal (R^3 x K) basis.
struct LinearCodec {
  int resolution = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;

  int dim() const { return static_cast<int>(basis.cols()); }
  void validate() const;
};

/// Mean grid plus the top-K left singular vectors of the centered data.
/// Directions beyond the data rank are completed deterministically.
LinearCodec fit_codec(const std::vector<SdfGrid>& grids, int k);
Latent encode(const LinearCodec& codec, const SdfGrid& grid);
SdfGrid decode(const LinearCodec& codec, const Latent& z);
/// basis^T * grad, i.e. the gradient w.r.t. z of a function of decode(z).
Latent pull_back(const LinearCodec& codec, const std::vector<double>& grid_gradient);

// "CODC", u32 K, u32 R^3, f32 mean[R^3], f32 basis[R^3 * K] column-major.
// The basis is re-orthonormalized after loading.
void save_codec(const LinearCodec& codec, const std::filesystem::path& path);
LinearCodec load_codec(const std::filesystem::path& path);

/// s(t) = sigma_min + (1 - sigma_min) t
double noise_scale(double t, double sigma_min);
/// x_t = (1 - t) x0 + s(t) eps
Latent interpolate(const Latent& x0, const Latent& eps, double t, double sigma_min);
/// (1 - sigma_min) eps - x0
Latent target_velocity(const Latent& x0, const Latent& eps, double sigma_min);
/// ||out - target||^2
double fm_loss(const Latent& out, const Latent& x0, const Latent& eps, double sigma_min);

struct LibraryEntry {
  Latent z;
  double weight = 1.0;
};

struct ShapeLibrary {
  std::vector<LibraryEntry> entries;
  double sigma_min = 1e-3;

  /// Throws unless nonempty, weights >= 0 summing to 1 (1e-9), sigma_min in [0,1).
  void validate() const;
  static ShapeLibrary uniform(const std::vector<Latent>& codes, double sigma_min);
};

/// p(i | x, t) for the Gaussian paths of the library (log-sum-exp).
std::vector<double> posterior_weights(const Latent& x, double t, const ShapeLibrary& lib);

/// Exact marginal velocity of the finite library under the interpolation path.
Latent oracle_velocity(const Latent& x, double t, const ShapeLibrary& lib);

class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Latent velocity(const Latent& x, double t) const = 0;
  virtual double sigma_min() const = 0;
  virtual int dim() const = 0;
};

class OracleField final : public VelocityField {
 public:
  explicit OracleField(ShapeLibrary lib);
  Latent velocity(const Latent& x, double t) const override { return oracle_velocity(x, t, lib_); }
  double sigma_min() const override { return lib_.sigma_min; }
  int dim() const override { return static_cast<int>(lib_.entries.front().z.size()); }
  const ShapeLibrary& library() const { return lib_; }

 private:
  ShapeLibrary lib_;
};

/// Binary silhouette along +z: pixel (i, j) set when any voxel of column
/// (i, j) is inside. Row-major with i fastest (R x R).
std::vector<std::uint8_t> silhouette(const SdfGrid& grid);

/// 1 - IoU between the candidate silhouette restricted to pixels outside the
/// visible-hand mask and the visible-object mask (0 when both are empty).
double silhouette_mismatch(const std::vector<std::uint8_t>& candidate, const std::vector<std::uint8_t>& object_visible,
                           const std::vector<std::uint8_t>& hand_visible);

/// w_i' proportional to w_i exp(-lambda_ev * mismatch_i). lambda_ev may be
/// +inf (keep only the best-matching entries).
ShapeLibrary condition_library(const ShapeLibrary& lib, const std::vector<double>& mismatch, double lambda_ev);

/// Touch fusion: pooled touch features concatenated with the hand latent and
/// projected back to K. Identity initialization leaves the hand latent as is.
struct TouchFuser {
  Eigen::MatrixXd w_hand;   // K x K
  Eigen::MatrixXd w_touch;  // K x kTouchFeatureDim
  Eigen::VectorXd bias;     // K

  static TouchFuser identity(int k);
  bool touch_disabled() const { return w_touch.isZero(0.0); }
  Latent apply(const Latent& hand_latent, const std::vector<double>& touch_features) const;
  Latent apply(const Latent& hand_latent, const TouchTensor& touch) const;
};

}  // namespace touchsdf
