// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/touch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "touchsdf/error.hpp"

namespace touchsdf {

std::size_t TouchTensor::contact_count() const {
  return static_cast<std::size_t>(std::count(contact.begin(), contact.end(), std::uint8_t{1}));
}

double touch_sentinel(int resolution) { return std::sqrt(3.0) * resolution; }

ContactSet extract_contacts(const SdfGrid& hand, const SdfGrid& object, double band) {
  require_same_resolution(hand, object, "extract_contacts");
  const int r = hand.resolution();
  std::vector<std::uint8_t> mark(hand.size(), 0);
  for (std::size_t n = 0; n < hand.size(); ++n)
    mark[n] = (std::abs(hand[n]) < band && std::abs(object[n]) < band) ? 1 : 0;

  ContactSet out;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < mark.size(); ++seed) {
    if (mark[seed] != 1) continue;
    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
    stack.push_back(seed);
    mark[seed] = 2;
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      sum += hand.center(n);
      ++count;
      const int i = static_cast<int>(n % r), j = static_cast<int>((n / r) % r), k = static_cast<int>(n / (static_cast<std::size_t>(r) * r));
      for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int a = i + di, b = j + dj, c = k + dk;
            if (a < 0 || b < 0 || c < 0 || a >= r || b >= r || c >= r) continue;
            const std::size_t m = hand.index(a, b, c);
            if (mark[m] == 1) {
              mark[m] = 2;
              stack.push_back(m);
            }
          }
    }
    out.points.push_back(sum / static_cast<double>(count));
    out.source_finger.push_back(-1);
  }
  return out;
}

std::array<int, 3> voxel_of(const Vec3& p, int resolution) {
  std::array<int, 3> v{};
  for (int a = 0; a < 3; ++a)
    v[a] = std::clamp(static_cast<int>(std::floor((p[a] + 1.0) * resolution / 2.0)), 0, resolution - 1);
  return v;
}

namespace {

// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher).
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0)
        --k;
      else
        break;
    }
    if (s <= z[k]) {  // k == 0: replace
      v[0] = q;
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& seeds, int resolution) {
  const int r = resolution;
  const std::size_t n = static_cast<std::size_t>(r) * r * r;
  require(seeds.size() == n, ErrorCode::kInvalidArgument, "seed volume size mismatch");
  constexpr double kFar = 1e20;
  std::vector<double> g(n);
  for (std::size_t q = 0; q < n; ++q) g[q] = seeds[q] ? 0.0 : kFar;

  std::vector<double> f(r), d(r), z(r + 1);
  std::vector<int> v(r);
  const std::size_t stride[3] = {1, static_cast<std::size_t>(r), static_cast<std::size_t>(r) * r};
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int u = 0; u < r; ++u)
      for (int w = 0; w < r; ++w) {
        const std::size_t base = stride[a1] * u + stride[a2] * w;
        for (int q = 0; q < r; ++q) f[q] = g[base + stride[axis] * q];
        edt_1d(f.data(), d.data(), r, v, z);
        for (int q = 0; q < r; ++q) g[base + stride[axis] * q] = d[q];
      }
  }
  return g;
}

TouchTensor build_touch_tensor(const ContactSet& contacts, int resolution) {
  require(resolution >= 8, ErrorCode::kInvalidArgument, "touch tensor needs R >= 8");
  TouchTensor t;
  t.resolution = resolution;
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution * resolution;
  t.contact.assign(n, 0);
  for (const auto& p : contacts.points) {
    const auto v = voxel_of(p, resolution);
    t.contact[v[0] + static_cast<std::size_t>(resolution) * (v[1] + static_cast<std::size_t>(resolution) * v[2])] = 1;
  }
  if (contacts.empty()) {
    t.distance.assign(n, touch_sentinel(resolution));
    return t;
  }
  t.distance = squared_distance_transform(t.contact, resolution);
  const double cap = touch_sentinel(resolution);
  for (auto& d : t.distance) d = std::min(std::sqrt(d), cap);
  return t;
}

ContactSet perturb_contacts(const ContactSet& contacts, double sigma_mm, const GridFrame& frame, Rng& rng) {
  frame.validate();
  require(sigma_mm >= 0.0, ErrorCode::kInvalidArgument, "noise level must be >= 0");
  const double radius = sigma_mm * 1e-3 / frame.metric_scale;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ContactSet out = contacts;
  for (auto& p : out.points) {
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    const double len = dir.norm();
    const double u = unit(rng);
    if (len == 0.0 || radius == 0.0) continue;
    p += (radius * std::cbrt(u) / len) * dir;
    p = p.cwiseMax(-1.0).cwiseMin(1.0);
  }
  return out;
}

std::vector<double> pool_touch_features(const TouchTensor& touch) {
  const int r = touch.resolution;
  const int half = r / 2;
  std::vector<double> feat(kTouchFeatureDim, 0.0);
  std::vector<double> count(8, 0.0);
  const double sentinel = touch_sentinel(r);
  std::size_t n = 0;
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i, ++n) {
        const int o = (i >= half ? 1 : 0) + (j >= half ? 2 : 0) + (k >= half ? 4 : 0);
        feat[o] += touch.contact[n];
        feat[8 + o] += touch.distance[n] / sentinel;
        count[o] += 1.0;
      }
  for (int o = 0; o < 8; ++o) {
    feat[o] /= count[o];
    feat[8 + o] /= count[o];
  }
  return feat;
}

void save_touch_tensor(const TouchTensor& t, const std::filesystem::path& c_path, const std::filesystem::path& d_path) {
  TaggedVolume c{t.resolution, 'C', ChannelType::kU8, std::vector<double>(t.contact.begin(), t.contact.end())};
  TaggedVolume d{t.resolution, 'D', ChannelType::kF32, t.distance};
  save_tagged_volume(c, c_path);
  save_tagged_volume(d, d_path);
}

TouchTensor load_touch_tensor(const std::filesystem::path& c_path, const std::filesystem::path& d_path) {
  const TaggedVolume c = load_tagged_volume(c_path);
  const TaggedVolume d = load_tagged_volume(d_path);
  require(c.tag == 'C' && d.tag == 'D', ErrorCode::kFormat, "touch volumes carry wrong channel tags");
  require(c.resolution == d.resolution, ErrorCode::kFormat, "touch channels differ in resolution");
  TouchTensor t;
  t.resolution = c.resolution;
  t.contact.reserve(c.values.size());
  for (double v : c.values) t.contact.push_back(v != 0.0 ? 1 : 0);
  t.distance = d.values;
  return t;
}

}  // namespace touchsdf
