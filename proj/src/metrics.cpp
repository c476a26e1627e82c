// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "touchsdf/error.hpp"

namespace touchsdf {

// ---------------------------------------------------------------- kd-tree

KdTree::KdTree(const PointSet& points) : points_(points) {
  require(!points_.empty(), ErrorCode::kEmptySurface, "kd-tree over an empty point set");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / 8 + 2);
  build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

int KdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= 8) return id;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const int l = build(begin, mid, depth + 1);
  const int r = build(mid, end, depth + 1);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void KdTree::search(int node, const Vec3& q, std::size_t& best, double& best_d2) const {
  const Node& n = nodes_[node];
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const double d2 = (points_[order_[i]] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && order_[i] < best)) {
        best_d2 = d2;
        best = order_[i];
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, q, best, best_d2);
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

std::pair<std::size_t, double> KdTree::nearest(const Vec3& q) const {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double d2 = std::numeric_limits<double>::infinity();
  search(0, q, best, d2);
  return {best, d2};
}

// ---------------------------------------------------------------- sampling

SurfaceSample sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  mesh.validate();
  require(!mesh.empty(), ErrorCode::kEmptySurface, "cannot sample an empty mesh");
  require(count > 0, ErrorCode::kInvalidArgument, "sample count must be positive");
  std::vector<double> cdf(mesh.triangles.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    acc += triangle_area(mesh, t);
    cdf[t] = acc;
  }
  require(acc > 0.0, ErrorCode::kEmptySurface, "mesh has zero area");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SurfaceSample out;
  out.points.reserve(count);
  out.normals.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double u = unit(rng) * acc;
    const std::size_t t =
        std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1);
    double a = unit(rng), b = unit(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    const auto& tri = mesh.triangles[t];
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3& p1 = mesh.vertices[tri[1]];
    const Vec3& p2 = mesh.vertices[tri[2]];
    out.points.push_back(p0 + a * (p1 - p0) + b * (p2 - p0));
    out.normals.push_back(triangle_normal(mesh, t));
  }
  return out;
}

// ---------------------------------------------------------------- distances

namespace {

void require_nonempty(const PointSet& p, const PointSet& q, const char* what) {
  require(!p.empty() && !q.empty(), ErrorCode::kEmptySurface, std::string(what) + ": empty point set");
}

double mean_nn_sq(const PointSet& from, const KdTree& to) {
  double s = 0.0;
  for (const auto& p : from) s += to.nearest(p).second;
  return s / static_cast<double>(from.size());
}

}  // namespace

double chamfer(const PointSet& p, const PointSet& q) {
  require_nonempty(p, q, "chamfer");
  const KdTree tp(p), tq(q);
  return 0.5 * (mean_nn_sq(p, tq) + mean_nn_sq(q, tp));
}

double chamfer_brute_force(const PointSet& p, const PointSet& q) {
  require_nonempty(p, q, "chamfer");
  auto one = [](const PointSet& a, const PointSet& b) {
    double s = 0.0;
    for (const auto& x : a) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : b) best = std::min(best, (x - y).squaredNorm());
      s += best;
    }
    return s / static_cast<double>(a.size());
  };
  return 0.5 * (one(p, q) + one(q, p));
}

double normal_consistency(const SurfaceSample& a, const SurfaceSample& b) {
  require_nonempty(a.points, b.points, "normal_consistency");
  require(a.normals.size() == a.points.size() && b.normals.size() == b.points.size(), ErrorCode::kInvalidArgument,
          "normal_consistency: one normal per point");
  auto one = [](const SurfaceSample& from, const SurfaceSample& to) {
    const KdTree tree(to.points);
    double s = 0.0;
    for (std::size_t i = 0; i < from.points.size(); ++i)
      s += std::abs(from.normals[i].dot(to.normals[tree.nearest(from.points[i]).first]));
    return s / static_cast<double>(from.points.size());
  };
  return 0.5 * (one(a, b) + one(b, a));
}

double fscore(const PointSet& p, const PointSet& q, double threshold) {
  require_nonempty(p, q, "fscore");
  require(threshold > 0.0, ErrorCode::kInvalidArgument, "fscore threshold must be positive");
  const KdTree tp(p), tq(q);
  const double t2 = threshold * threshold;
  auto frac = [t2](const PointSet& from, const KdTree& to) {
    std::size_t hit = 0;
    for (const auto& x : from) hit += to.nearest(x).second <= t2 ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(from.size());
  };
  const double precision = frac(p, tq), recall = frac(q, tp);
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double voxel_iou(const SdfGrid& a, const SdfGrid& b) {
  require_same_resolution(a, b, "voxel_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const bool x = a[n] < 0.0, y = b[n] < 0.0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------- emd

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  require(cost.cols() == n, ErrorCode::kInvalidArgument, "assignment needs a square cost matrix");
  // shortest augmenting paths with potentials, 1-based
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assign(n);
  for (int j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
  return assign;
}

namespace {

Eigen::MatrixXd distance_matrix(const PointSet& p, const PointSet& q) {
  Eigen::MatrixXd c(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (p[i] - q[j]).norm();
  return c;
}

double sinkhorn_cost(const Eigen::MatrixXd& cost, const SinkhornOptions& opt) {
  const Eigen::Index n = cost.rows();
  const double cmax = cost.maxCoeff();
  if (cmax == 0.0) return 0.0;
  const Eigen::MatrixXd c = cost / cmax;
  const double log_a = -std::log(static_cast<double>(n));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(n);
  auto lse_rows = [&](double eps) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::ArrayXd z = (g.array() - c.row(i).transpose().array()) / eps;
      const double m = z.maxCoeff();
      f(i) = eps * log_a - eps * (m + std::log((z - m).exp().sum()));
    }
  };
  auto lse_cols = [&](double eps) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::ArrayXd z = (f.array() - c.col(j).array()) / eps;
      const double m = z.maxCoeff();
      g(j) = eps * log_a - eps * (m + std::log((z - m).exp().sum()));
    }
  };
  auto row_violation = [&](double eps) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = ((f(i) + g.array() - c.row(i).transpose().array()) / eps).exp().sum();
      worst = std::max(worst, std::abs(s - 1.0 / static_cast<double>(n)));
    }
    return worst * static_cast<double>(n);
  };
  int iterations = 0;
  // epsilon scaling: halve from 1 down to the target
  for (double eps = 1.0;; eps = std::max(opt.epsilon, 0.5 * eps)) {
    const bool final = eps <= opt.epsilon;
    const double tol = final ? opt.tolerance : 1e-3;
    for (;;) {
      lse_rows(eps);
      lse_cols(eps);
      if (++iterations >= opt.max_iterations) break;
      if (iterations % 10 == 0 && row_violation(eps) <= tol) break;
    }
    if (final || iterations >= opt.max_iterations) {
      require(std::isfinite(f.sum()) && std::isfinite(g.sum()), ErrorCode::kNumeric, "sinkhorn diverged");
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        total += (((f(i) + g.array() - c.row(i).transpose().array()) / eps).exp() * c.row(i).transpose().array()).sum();
      return total * cmax;
    }
  }
}

}  // namespace

double emd(const PointSet& p, const PointSet& q, EmdMode mode, const SinkhornOptions& opt) {
  require_nonempty(p, q, "emd");
  require(p.size() == q.size(), ErrorCode::kInvalidArgument, "emd needs equal point counts");
  require(opt.epsilon > 0.0 && opt.tolerance > 0.0 && opt.max_iterations > 0, ErrorCode::kInvalidArgument,
          "bad sinkhorn options");
  const Eigen::MatrixXd c = distance_matrix(p, q);
  const bool exact = mode == EmdMode::kExact || (mode == EmdMode::kAuto && p.size() <= kExactEmdLimit);
  if (!exact) return sinkhorn_cost(c, opt);
  const auto assign = hungarian(c);
  double s = 0.0;
  for (std::size_t i = 0; i < assign.size(); ++i) s += c(static_cast<Eigen::Index>(i), assign[i]);
  return s / static_cast<double>(p.size());
}

double emd_brute_force(const PointSet& p, const PointSet& q) {
  require(p.size() == q.size() && !p.empty(), ErrorCode::kInvalidArgument, "emd needs equal nonempty point counts");
  require(p.size() <= 10, ErrorCode::kInvalidArgument, "brute force limited to 10 points");
  std::vector<int> perm(p.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[perm[i]]).norm();
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(p.size());
}

// ---------------------------------------------------------------- pose

Aabb bounding_box(const PointSet& p) {
  require(!p.empty(), ErrorCode::kEmptySurface, "bounding box of an empty point set");
  Aabb b;
  for (const auto& x : p) b.extend(x);
  return b;
}

double iou3d(const Aabb& a, const Aabb& b) {
  require(!a.empty() && !b.empty(), ErrorCode::kEmptySurface, "iou3d of an empty box");
  const Vec3 lo = a.lo.cwiseMax(b.lo), hi = a.hi.cwiseMin(b.hi);
  const double inter = (hi - lo).cwiseMax(0.0).prod();
  const double uni = a.extent().prod() + b.extent().prod() - inter;
  return uni > 0.0 ? inter / uni : 1.0;
}

double adds(const PointSet& pred, const PointSet& gt) {
  require_nonempty(pred, gt, "adds");
  const KdTree tree(pred);
  double s = 0.0;
  for (const auto& g : gt) s += std::sqrt(tree.nearest(g).second);
  return s / static_cast<double>(gt.size());
}

double diameter(const PointSet& p) {
  require(!p.empty(), ErrorCode::kEmptySurface, "diameter of an empty point set");
  double best = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) best = std::max(best, (p[i] - p[j]).squaredNorm());
  return std::sqrt(best);
}

bool adds_at(double adds_value, double diam, double fraction) {
  require(diam > 0.0 && fraction > 0.0, ErrorCode::kInvalidArgument, "adds_at needs a positive diameter and fraction");
  return adds_value < fraction * diam;
}

namespace {

// least-squares rigid motion mapping a onto b
SimilarityTransform kabsch(const PointSet& a, const PointSet& b) {
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
  }
  ca /= static_cast<double>(a.size());
  cb /= static_cast<double>(b.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) h += (a[i] - ca) * (b[i] - cb).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  SimilarityTransform xf;
  xf.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  xf.translation = cb - xf.rotation * ca;
  return xf;
}

}  // namespace

SimilarityTransform icp(const PointSet& pred, const PointSet& gt, const IcpOptions& opt) {
  require_nonempty(pred, gt, "icp");
  require(opt.max_iterations >= 1 && opt.tolerance >= 0.0, ErrorCode::kInvalidArgument, "bad ICP options");
  const KdTree tree(gt);
  SimilarityTransform total;
  PointSet cur = pred, matched(pred.size());
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    double mse = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const auto [idx, d2] = tree.nearest(cur[i]);
      matched[i] = gt[idx];
      mse += d2;
    }
    mse /= static_cast<double>(cur.size());
    if (std::isfinite(prev) && std::abs(prev - mse) <= opt.tolerance * std::max(prev, 1e-300)) break;
    prev = mse;
    const SimilarityTransform step = kabsch(cur, matched);
    for (auto& x : cur) x = step.apply(x);
    total = compose(step, total);
  }
  return total;
}

double rotation_angle_deg(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

double icp_rot(const PointSet& pred, const PointSet& gt, const IcpOptions& opt) {
  return rotation_angle_deg(icp(pred, gt, opt).rotation);
}

// ---------------------------------------------------------------- reports

StratifiedReport stratified_report(const std::vector<EvalSample>& samples, int bins) {
  require(bins >= 1, ErrorCode::kInvalidArgument, "report needs at least one bin");
  StratifiedReport r;
  r.bins = bins;
  r.counts.assign(bins, 0);
  std::map<std::string, std::vector<double>> sums, cnt;
  std::map<std::string, double> all_sum, all_cnt;
  for (const auto& s : samples) {
    if (!s.valid) continue;
    require(s.bin >= 1 && s.bin <= bins, ErrorCode::kInvalidArgument, "sample bin out of range");
    ++r.counts[s.bin - 1];
    ++r.total;
    for (const auto& [name, value] : s.metrics) {
      auto& sv = sums[name];
      auto& cv = cnt[name];
      if (sv.empty()) {
        sv.assign(bins, 0.0);
        cv.assign(bins, 0.0);
      }
      sv[s.bin - 1] += value;
      cv[s.bin - 1] += 1.0;
      all_sum[name] += value;
      all_cnt[name] += 1.0;
    }
  }
  require(r.total > 0, ErrorCode::kInvalidArgument, "no valid samples to report");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [name, sv] : sums) {
    r.metric_names.push_back(name);
    std::vector<double> row(bins, nan);
    for (int b = 0; b < bins; ++b)
      if (cnt[name][b] > 0.0) row[b] = sv[b] / cnt[name][b];
    r.per_bin.push_back(std::move(row));
    r.overall.push_back(all_sum[name] / all_cnt[name]);
  }
  return r;
}

double StratifiedReport::value(const std::string& metric, int bin) const {
  const auto it = std::find(metric_names.begin(), metric_names.end(), metric);
  require(it != metric_names.end(), ErrorCode::kInvalidArgument, "unknown metric: " + metric);
  require(bin >= 0 && bin <= bins, ErrorCode::kInvalidArgument, "bin out of range");
  const std::size_t m = static_cast<std::size_t>(it - metric_names.begin());
  return bin == 0 ? overall[m] : per_bin[m][bin - 1];
}

std::string StratifiedReport::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(12) << "metric";
  for (int b = 1; b <= bins; ++b) os << ",B" << b;
  os << ",All,count\n";
  for (std::size_t m = 0; m < metric_names.size(); ++m) {
    os << metric_names[m];
    for (double v : per_bin[m]) {
      os << ',';
      if (std::isnan(v))
        os << "nan";
      else
        os << v;
    }
    os << ',' << overall[m] << ',' << total << '\n';
  }
  os << "count";
  for (int c : counts) os << ',' << c;
  os << ',' << total << ',' << total << '\n';
  return os.str();
}

nlohmann::json StratifiedReport::to_json() const {
  nlohmann::json j;
  j["bins"] = bins;
  j["counts"] = counts;
  j["total"] = total;
  nlohmann::json metrics = nlohmann::json::object();
  for (std::size_t m = 0; m < metric_names.size(); ++m) {
    nlohmann::json row = nlohmann::json::object();
    for (int b = 0; b < bins; ++b) {
      const double v = per_bin[m][b];
      row["B" + std::to_string(b + 1)] = std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    }
    row["All"] = overall[m];
    metrics[metric_names[m]] = row;
  }
  j["metrics"] = metrics;
  return j;
}

}  // namespace touchsdf
