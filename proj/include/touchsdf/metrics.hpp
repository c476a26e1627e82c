// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "touchsdf/mesh.hpp"
#include "touchsdf/transform.hpp"

namespace touchsdf {

using PointSet = std::vector<Vec3>;

/// Static 3-d tree for nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(const PointSet& points);
  /// Index of the nearest point and its squared distance.
  std::pair<std::size_t, double> nearest(const Vec3& q) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };
  int build(std::uint32_t begin, std::uint32_t end, int depth);
  void search(int node, const Vec3& q, std::size_t& best, double& best_d2) const;

  PointSet points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

struct SurfaceSample {
  PointSet points;
  std::vector<Vec3> normals;
};

/// Area-weighted uniform samples with face normals. Deterministic per seed.
SurfaceSample sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

/// 0.5 * (mean_p min_q |p-q|^2 + mean_q min_p |p-q|^2)
double chamfer(const PointSet& p, const PointSet& q);
double chamfer_brute_force(const PointSet& p, const PointSet& q);

/// Symmetric mean of |cos| between each sample's normal and the normal of
/// its nearest neighbour on the other surface.
double normal_consistency(const SurfaceSample& a, const SurfaceSample& b);

double fscore(const PointSet& p, const PointSet& q, double threshold = 0.02);

/// Both empty -> 1.
double voxel_iou(const SdfGrid& a, const SdfGrid& b);

enum class EmdMode { kAuto, kExact, kSinkhorn };
inline constexpr std::size_t kExactEmdLimit = 256;

struct SinkhornOptions {
  double epsilon = 0.002;     // final entropic regularization, relative to the largest cost
  double tolerance = 1e-4;    // max relative marginal violation
  int max_iterations = 20000;
};

/// Mean matched distance of the optimal perfect matching. kAuto is exact for
/// n <= kExactEmdLimit and entropic above.
double emd(const PointSet& p, const PointSet& q, EmdMode mode = EmdMode::kAuto, const SinkhornOptions& opt = {});
double emd_brute_force(const PointSet& p, const PointSet& q);

/// Minimum-cost assignment (rows to columns) of a square cost matrix.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

Aabb bounding_box(const PointSet& p);
double iou3d(const Aabb& a, const Aabb& b);

/// Mean over gt points of the distance to the nearest predicted point.
double adds(const PointSet& pred, const PointSet& gt);
double diameter(const PointSet& p);
bool adds_at(double adds_value, double diameter, double fraction = 0.1);

struct IcpOptions {
  int max_iterations = 50;
  double tolerance = 1e-6;  // relative change of the mean squared error
};

/// Rigid point-to-point ICP of pred onto gt from the identity.
SimilarityTransform icp(const PointSet& pred, const PointSet& gt, const IcpOptions& opt = {});
/// Geodesic angle of the ICP rotation, in degrees.
double icp_rot(const PointSet& pred, const PointSet& gt, const IcpOptions& opt = {});
double rotation_angle_deg(const Mat3& r);

// ---------------------------------------------------------------- reports

struct EvalSample {
  int bin = 1;
  bool valid = true;
  std::map<std::string, double> metrics;
};

struct StratifiedReport {
  int bins = 5;
  std::vector<std::string> metric_names;
  std::vector<std::vector<double>> per_bin;  // [metric][bin], NaN when the bin is empty
  std::vector<double> overall;               // [metric]
  std::vector<int> counts;                   // valid samples per bin
  int total = 0;

  double value(const std::string& metric, int bin) const;  // bin 0 is overall
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

StratifiedReport stratified_report(const std::vector<EvalSample>& samples, int bins = 5);

}  // namespace touchsdf
