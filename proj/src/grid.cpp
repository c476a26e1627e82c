// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "binary_io.hpp"
#include "touchsdf/error.hpp"

namespace touchsdf {

SdfGrid::SdfGrid(int resolution, std::vector<double> values) : res_(resolution), values_(std::move(values)) {
  require(resolution >= 1, ErrorCode::kInvalidArgument, "grid resolution must be positive");
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
  require(values_.size() == n, ErrorCode::kInvalidArgument, "grid value count must equal R^3");
}

SdfGrid SdfGrid::filled(int resolution, double value) {
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
  return SdfGrid(resolution, std::vector<double>(n, value));
}

SdfGrid SdfGrid::from_function(int resolution, const std::function<double(const Vec3&)>& f) {
  require(resolution >= 1, ErrorCode::kInvalidArgument, "grid resolution must be positive");
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
  std::vector<double> v(n);
  const double h = 2.0 / resolution;
  std::size_t idx = 0;
  for (int k = 0; k < resolution; ++k) {
    const double z = -1.0 + (k + 0.5) * h;
    for (int j = 0; j < resolution; ++j) {
      const double y = -1.0 + (j + 0.5) * h;
      for (int i = 0; i < resolution; ++i, ++idx) {
        const double d = f(Vec3(-1.0 + (i + 0.5) * h, y, z));
        v[idx] = std::clamp(d, -kSdfClamp, kSdfClamp);
      }
    }
  }
  return SdfGrid(resolution, std::move(v));
}

Vec3 SdfGrid::center(std::size_t n) const {
  const std::size_t r = static_cast<std::size_t>(res_);
  return center(static_cast<int>(n % r), static_cast<int>((n / r) % r), static_cast<int>(n / (r * r)));
}

SdfGrid SdfGrid::quantized() const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(),
                 [](double x) { return static_cast<double>(static_cast<float>(x)); });
  return SdfGrid(res_, std::move(v));
}

TrilinearSample sample_trilinear(const SdfGrid& grid, const Vec3& p, OutOfDomain mode) {
  TrilinearSample out;
  const bool outside = (p.array().abs() > 1.0).any() || !p.allFinite();
  if (outside) {
    require(mode == OutOfDomain::kClamp, ErrorCode::kDomainViolation, "sample point outside [-1,1]^3");
    out.clamped = true;
  }
  const int r = grid.resolution();
  const double h = grid.voxel_size();
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    // continuous index of p in voxel-center coordinates
    double u = (p[a] + 1.0) / h - 0.5;
    if (!std::isfinite(u)) u = 0.0;
    u = std::clamp(u, 0.0, static_cast<double>(r - 1));
    int i0 = std::min(static_cast<int>(std::floor(u)), std::max(r - 2, 0));
    base[a] = i0;
    frac[a] = r > 1 ? u - i0 : 0.0;
  }
  const int i1 = std::min(base[0] + 1, r - 1);
  const int j1 = std::min(base[1] + 1, r - 1);
  const int k1 = std::min(base[2] + 1, r - 1);
  const double fx = frac[0], fy = frac[1], fz = frac[2];
  const double c00 = grid.at(base[0], base[1], base[2]) * (1 - fx) + grid.at(i1, base[1], base[2]) * fx;
  const double c10 = grid.at(base[0], j1, base[2]) * (1 - fx) + grid.at(i1, j1, base[2]) * fx;
  const double c01 = grid.at(base[0], base[1], k1) * (1 - fx) + grid.at(i1, base[1], k1) * fx;
  const double c11 = grid.at(base[0], j1, k1) * (1 - fx) + grid.at(i1, j1, k1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  out.value = c0 * (1 - fz) + c1 * fz;
  return out;
}

GradientField gradient_stencil(const SdfGrid& grid) {
  const int r = grid.resolution();
  require(r >= 3, ErrorCode::kInvalidArgument, "gradient stencil needs R >= 3");
  const double inv2h = 1.0 / (2.0 * grid.voxel_size());
  GradientField g;
  g.resolution = r;
  g.vectors.assign(grid.size(), Vec3::Zero());
  g.interior_mask.assign(grid.size(), 0);
  const std::size_t sx = 1, sy = r, sz = static_cast<std::size_t>(r) * r;
  for (int k = 1; k < r - 1; ++k)
    for (int j = 1; j < r - 1; ++j)
      for (int i = 1; i < r - 1; ++i) {
        const std::size_t n = grid.index(i, j, k);
        g.vectors[n] = Vec3((grid[n + sx] - grid[n - sx]) * inv2h, (grid[n + sy] - grid[n - sy]) * inv2h,
                            (grid[n + sz] - grid[n - sz]) * inv2h);
        g.interior_mask[n] = 1;
      }
  return g;
}

void require_same_resolution(const SdfGrid& a, const SdfGrid& b, const char* what) {
  if (a.resolution() != b.resolution())
    fail(ErrorCode::kResolutionMismatch, std::string(what) + ": resolution mismatch (" +
                                             std::to_string(a.resolution()) + " vs " +
                                             std::to_string(b.resolution()) + ")");
}

SdfGrid sdf_min(const SdfGrid& a, const SdfGrid& b) {
  require_same_resolution(a, b, "sdf_min");
  std::vector<double> v(a.size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = std::min(a[n], b[n]);
  return SdfGrid(a.resolution(), std::move(v));
}

std::size_t count_inside(const SdfGrid& grid) {
  return static_cast<std::size_t>(std::count_if(grid.values().begin(), grid.values().end(),
                                                 [](double v) { return v < 0.0; }));
}

namespace {

constexpr char kMagic[4] = {'S', 'D', 'F', 'G'};

struct Header {
  std::uint32_t version = 0;
  std::uint32_t resolution = 0;
};

void write_header(std::ostream& os, std::uint32_t version, std::uint32_t r) {
  os.write(kMagic, 4);
  io::put<std::uint32_t>(os, version);
  io::put<std::uint32_t>(os, r);
  for (int a = 0; a < 3; ++a) io::put<double>(os, -1.0);
  for (int a = 0; a < 3; ++a) io::put<double>(os, 1.0);
}

Header read_header(std::istream& is, const std::filesystem::path& path) {
  char magic[4];
  io::read_exact(is, magic, 4, path);
  require(std::memcmp(magic, kMagic, 4) == 0, ErrorCode::kFormat, path.string() + ": not an SDFG volume");
  Header h;
  h.version = io::get<std::uint32_t>(is, path);
  h.resolution = io::get<std::uint32_t>(is, path);
  for (int a = 0; a < 3; ++a)
    require(io::get<double>(is, path) == -1.0, ErrorCode::kFormat, path.string() + ": unsupported domain min");
  for (int a = 0; a < 3; ++a)
    require(io::get<double>(is, path) == 1.0, ErrorCode::kFormat, path.string() + ": unsupported domain max");
  require(h.resolution >= 1 && h.resolution <= 1024, ErrorCode::kFormat, path.string() + ": bad resolution");
  return h;
}

}  // namespace

void save_grid(const SdfGrid& grid, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_header(os, 1, static_cast<std::uint32_t>(grid.resolution()));
  for (double v : grid.values()) io::put<float>(os, static_cast<float>(v));
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

SdfGrid load_grid(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  const Header h = read_header(is, path);
  require(h.version == 1, ErrorCode::kFormat, path.string() + ": expected SDFG version 1");
  const std::size_t n = static_cast<std::size_t>(h.resolution) * h.resolution * h.resolution;
  std::vector<double> v(n);
  for (auto& x : v) x = io::get<float>(is, path);
  return SdfGrid(static_cast<int>(h.resolution), std::move(v));
}

void save_tagged_volume(const TaggedVolume& vol, const std::filesystem::path& path) {
  const std::size_t n = static_cast<std::size_t>(vol.resolution) * vol.resolution * vol.resolution;
  require(vol.values.size() == n, ErrorCode::kInvalidArgument, "tagged volume size mismatch");
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_header(os, 2, static_cast<std::uint32_t>(vol.resolution));
  io::put<std::uint8_t>(os, static_cast<std::uint8_t>(vol.tag));
  io::put<std::uint8_t>(os, static_cast<std::uint8_t>(vol.type));
  io::put<std::uint16_t>(os, 0);
  for (double v : vol.values) {
    if (vol.type == ChannelType::kU8)
      io::put<std::uint8_t>(os, static_cast<std::uint8_t>(v != 0.0 ? 1 : 0));
    else
      io::put<float>(os, static_cast<float>(v));
  }
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

TaggedVolume load_tagged_volume(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  const Header h = read_header(is, path);
  require(h.version == 2, ErrorCode::kFormat, path.string() + ": expected SDFG version 2 (tagged)");
  TaggedVolume vol;
  vol.resolution = static_cast<int>(h.resolution);
  vol.tag = static_cast<char>(io::get<std::uint8_t>(is, path));
  const auto type = io::get<std::uint8_t>(is, path);
  require(type <= 1, ErrorCode::kFormat, path.string() + ": unknown channel dtype");
  vol.type = static_cast<ChannelType>(type);
  io::get<std::uint16_t>(is, path);
  const std::size_t n = static_cast<std::size_t>(h.resolution) * h.resolution * h.resolution;
  vol.values.resize(n);
  for (auto& x : vol.values)
    x = vol.type == ChannelType::kU8 ? static_cast<double>(io::get<std::uint8_t>(is, path))
                                     : static_cast<double>(io::get<float>(is, path));
  return vol;
}

}  // namespace touchsdf
