// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "binary_io.hpp"
#include "touchsdf/error.hpp"

namespace touchsdf {

void TriMesh::validate() const {
  const auto n = static_cast<std::uint32_t>(vertices.size());
  for (const auto& t : triangles)
    for (auto v : t) require(v < n, ErrorCode::kInvalidArgument, "triangle index out of range");
}

double triangle_area(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Vec3& a = mesh.vertices[tri[0]];
  return 0.5 * (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a).norm();
}

Vec3 triangle_normal(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Vec3& a = mesh.vertices[tri[0]];
  const Vec3 n = (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double mesh_volume(const TriMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles)
    v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  return v / 6.0;
}

// ---------------------------------------------------------------------------
// Surface extraction

namespace {

// Kuhn split: every tetrahedron walks from corner 0 to corner 7 along one
// permutation of the axes. Corner id = dx + 2*dy + 4*dz.
constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

}  // namespace

TriMesh extract_surface(const SdfGrid& grid, double iso) {
  const int r = grid.resolution();
  bool any_below = false, any_above = false;
  for (double v : grid.values()) {
    any_below |= v < iso;
    any_above |= v >= iso;
  }
  require(any_below && any_above, ErrorCode::kEmptySurface, "grid does not cross the iso level");

  TriMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  edge_vertex.reserve(grid.size() / 4);

  auto vertex_on_edge = [&](std::size_t ga, std::size_t gb) -> std::uint32_t {
    if (ga > gb) std::swap(ga, gb);
    const std::uint64_t key = (static_cast<std::uint64_t>(ga) << 32) | static_cast<std::uint64_t>(gb);
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double va = grid[ga], vb = grid[gb];
    const double t = (iso - va) / (vb - va);
    const Vec3 pa = grid.center(ga), pb = grid.center(gb);
    const auto id = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(pa + t * (pb - pa));
    edge_vertex.emplace(key, id);
    return id;
  };

  auto emit = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3& towards_outside) {
    const Vec3 n = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
    if (n.dot(towards_outside) < 0.0) std::swap(b, c);
    mesh.triangles.push_back({a, b, c});
  };

  std::size_t corner[8];
  for (int k = 0; k + 1 < r; ++k)
    for (int j = 0; j + 1 < r; ++j)
      for (int i = 0; i + 1 < r; ++i) {
        bool lo = false, hi = false;
        for (int c = 0; c < 8; ++c) {
          corner[c] = grid.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          const bool below = grid[corner[c]] < iso;
          lo |= below;
          hi |= !below;
        }
        if (!(lo && hi)) continue;
        for (const auto& tet : kTets) {
          std::size_t in[4], out[4];
          int nin = 0, nout = 0;
          for (int c : tet) {
            if (grid[corner[c]] < iso)
              in[nin++] = corner[c];
            else
              out[nout++] = corner[c];
          }
          if (nin == 0 || nout == 0) continue;
          Vec3 cin = Vec3::Zero(), cout = Vec3::Zero();
          for (int q = 0; q < nin; ++q) cin += grid.center(in[q]);
          for (int q = 0; q < nout; ++q) cout += grid.center(out[q]);
          const Vec3 dir = cout / nout - cin / nin;
          if (nin == 1) {
            emit(vertex_on_edge(in[0], out[0]), vertex_on_edge(in[0], out[1]), vertex_on_edge(in[0], out[2]), dir);
          } else if (nin == 3) {
            emit(vertex_on_edge(out[0], in[0]), vertex_on_edge(out[0], in[1]), vertex_on_edge(out[0], in[2]), dir);
          } else {
            const auto ac = vertex_on_edge(in[0], out[0]);
            const auto ad = vertex_on_edge(in[0], out[1]);
            const auto bd = vertex_on_edge(in[1], out[1]);
            const auto bc = vertex_on_edge(in[1], out[0]);
            emit(ac, ad, bd, dir);
            emit(ac, bd, bc, dir);
          }
        }
      }
  return mesh;
}

// ---------------------------------------------------------------------------
// Nearest-triangle queries

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(const TriMesh& mesh) : mesh_(mesh) {
  mesh.validate();
  require(!mesh.empty(), ErrorCode::kInvalidArgument, "BVH over an empty mesh");
  const auto n = static_cast<std::uint32_t>(mesh.triangles.size());
  order_.resize(n);
  centroids_.resize(n);
  for (std::uint32_t t = 0; t < n; ++t) {
    order_[t] = t;
    const auto& tri = mesh.triangles[t];
    centroids_[t] = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
  }
  nodes_.reserve(2 * n);
  build(0, n);
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, cbox;
  for (std::uint32_t q = begin; q < end; ++q) {
    const auto& tri = mesh_.triangles[order_[q]];
    for (auto v : tri) box.extend(mesh_.vertices[v]);
    cbox.extend(centroids_[order_[q]]);
  }
  nodes_[id].box = box;
  if (end - begin <= 4) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  int axis = 0;
  cbox.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) { return centroids_[x][axis] < centroids_[y][axis]; });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].first = left;
  nodes_[id].right = right;
  nodes_[id].count = 0;
  return id;
}

double TriangleBvh::distance(const Vec3& p) const {
  auto box_dist2 = [&](const Aabb& b) {
    const Vec3 d = (b.lo - p).cwiseMax(p - b.hi).cwiseMax(0.0);
    return d.squaredNorm();
  };
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_dist2(node.box) >= best) continue;
    if (node.count > 0) {
      for (std::uint32_t q = node.first; q < node.first + node.count; ++q) {
        const auto& tri = mesh_.triangles[order_[q]];
        const Vec3 c = closest_point_on_triangle(p, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
                                                 mesh_.vertices[tri[2]]);
        best = std::min(best, (c - p).squaredNorm());
      }
      continue;
    }
    const Node& l = nodes_[node.first];
    const Node& rn = nodes_[node.right];
    const double dl = box_dist2(l.box), dr = box_dist2(rn.box);
    // visit the nearer child first
    if (dl < dr) {
      stack[top++] = node.right;
      stack[top++] = node.first;
    } else {
      stack[top++] = node.first;
      stack[top++] = node.right;
    }
  }
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Mesh -> SDF

namespace {

// Per-voxel crossing parity for rays cast along +axis. Ray origins are shifted
// off the voxel-center lattice by a tiny fixed offset so that they never pass
// exactly through mesh edges or vertices placed on lattice-aligned positions.
std::vector<std::uint8_t> ray_parity(const TriMesh& mesh, int r, int axis) {
  const double h = 2.0 / r;
  const int ab = (axis + 1) % 3, ac = (axis + 2) % 3;
  const double jb = h * 1.7320508075688772e-6, jc = h * 1.4142135623730951e-6;
  std::vector<std::vector<double>> hits(static_cast<std::size_t>(r) * r);

  auto col_range = [&](double lo, double hi, int& i0, int& i1) {
    i0 = std::max(0, static_cast<int>(std::ceil((lo + 1.0) / h - 0.5 - 1e-9)));
    i1 = std::min(r - 1, static_cast<int>(std::floor((hi + 1.0) / h - 0.5 + 1e-9)));
  };

  for (const auto& tri : mesh.triangles) {
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3& p1 = mesh.vertices[tri[1]];
    const Vec3& p2 = mesh.vertices[tri[2]];
    int b0, b1, c0, c1;
    col_range(std::min({p0[ab], p1[ab], p2[ab]}) - jb, std::max({p0[ab], p1[ab], p2[ab]}) + jb, b0, b1);
    col_range(std::min({p0[ac], p1[ac], p2[ac]}) - jc, std::max({p0[ac], p1[ac], p2[ac]}) + jc, c0, c1);
    for (int cc = c0; cc <= c1; ++cc)
      for (int bb = b0; bb <= b1; ++bb) {
        const double qb = -1.0 + (bb + 0.5) * h + jb;
        const double qc = -1.0 + (cc + 0.5) * h + jc;
        auto edge = [&](const Vec3& u, const Vec3& v) {
          return (v[ab] - u[ab]) * (qc - u[ac]) - (v[ac] - u[ac]) * (qb - u[ab]);
        };
        const double w0 = edge(p1, p2), w1 = edge(p2, p0), w2 = edge(p0, p1);
        const bool inside = (w0 > 0 && w1 > 0 && w2 > 0) || (w0 < 0 && w1 < 0 && w2 < 0);
        if (!inside) continue;
        const double x = (w0 * p0[axis] + w1 * p1[axis] + w2 * p2[axis]) / (w0 + w1 + w2);
        hits[static_cast<std::size_t>(cc) * r + bb].push_back(x);
      }
  }

  std::vector<std::uint8_t> parity(static_cast<std::size_t>(r) * r * r, 0);
  int idx[3];
  for (int cc = 0; cc < r; ++cc)
    for (int bb = 0; bb < r; ++bb) {
      auto& col = hits[static_cast<std::size_t>(cc) * r + bb];
      std::sort(col.begin(), col.end());
      std::size_t behind = 0;  // hits with coordinate <= current voxel
      for (int a = 0; a < r; ++a) {
        const double x = -1.0 + (a + 0.5) * h;
        while (behind < col.size() && col[behind] <= x) ++behind;
        idx[axis] = a;
        idx[ab] = bb;
        idx[ac] = cc;
        const std::size_t n =
            static_cast<std::size_t>(idx[0]) + static_cast<std::size_t>(r) * (idx[1] + static_cast<std::size_t>(r) * idx[2]);
        parity[n] = static_cast<std::uint8_t>((col.size() - behind) & 1u);
      }
    }
  return parity;
}

}  // namespace

SdfGrid mesh_to_sdf(const TriMesh& mesh, int resolution) {
  require(resolution >= 2, ErrorCode::kInvalidArgument, "mesh_to_sdf needs R >= 2");
  mesh.validate();
  require(!mesh.empty(), ErrorCode::kInvalidArgument, "mesh_to_sdf on an empty mesh");
  for (const auto& v : mesh.vertices)
    require((v.array().abs() <= 1.0).all(), ErrorCode::kDomainViolation, "mesh leaves [-1,1]^3");

  const TriangleBvh bvh(mesh);
  const auto px = ray_parity(mesh, resolution, 0);
  const auto py = ray_parity(mesh, resolution, 1);
  const auto pz = ray_parity(mesh, resolution, 2);
  const double h = 2.0 / resolution;

  std::vector<double> values(px.size());
  for (std::size_t n = 0; n < values.size(); ++n) {
    const std::size_t r = static_cast<std::size_t>(resolution);
    const Vec3 p(-1.0 + (static_cast<double>(n % r) + 0.5) * h, -1.0 + (static_cast<double>((n / r) % r) + 0.5) * h,
                 -1.0 + (static_cast<double>(n / (r * r)) + 0.5) * h);
    const double d = bvh.distance(p);
    if (px[n] != py[n] || px[n] != pz[n]) {
      // on-surface points may legitimately disagree
      if (d > 1e-6 * h)
        fail(ErrorCode::kNotWatertight, "mesh is not watertight: ray parity disagrees across axes");
    }
    const int votes = px[n] + py[n] + pz[n];
    values[n] = std::clamp(votes >= 2 ? -d : d, -kSdfClamp, kSdfClamp);
  }
  return SdfGrid(resolution, std::move(values));
}

// ---------------------------------------------------------------------------
// Generators

TriMesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<std::uint32_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(v.size());
      v.push_back((v[a] + v[b]).normalized());
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const auto ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  TriMesh mesh;
  mesh.vertices.reserve(v.size());
  for (const auto& p : v) mesh.vertices.push_back(center + radius * p);
  mesh.triangles = std::move(f);
  return mesh;
}

TriMesh make_box_mesh(const Vec3& center, const Vec3& half_extents) {
  TriMesh mesh;
  for (int c = 0; c < 8; ++c) {
    const Vec3 s((c & 1) ? 1.0 : -1.0, (c & 2) ? 1.0 : -1.0, (c & 4) ? 1.0 : -1.0);
    mesh.vertices.push_back(center + s.cwiseProduct(half_extents));
  }
  mesh.triangles = {{0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}, {0, 1, 5}, {0, 5, 4},
                    {2, 6, 7}, {2, 7, 3}, {0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}};
  return mesh;
}

// ---------------------------------------------------------------------------
// IO

void save_ply(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os << "ply\nformat binary_little_endian 1.0\n"
     << "element vertex " << mesh.vertices.size() << "\n"
     << "property float x\nproperty float y\nproperty float z\n"
     << "element face " << mesh.triangles.size() << "\n"
     << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) io::put<float>(os, static_cast<float>(v[a]));
  for (const auto& t : mesh.triangles) {
    io::put<std::uint8_t>(os, 3);
    for (auto i : t) io::put<std::int32_t>(os, static_cast<std::int32_t>(i));
  }
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os.precision(9);
  for (const auto& v : mesh.vertices) os << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  TriMesh mesh;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      require(!ls.fail(), ErrorCode::kFormat, path.string() + ": bad vertex line");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::array<std::uint32_t, 3> t{};
      for (auto& i : t) {
        std::string tok;
        ls >> tok;
        require(!tok.empty(), ErrorCode::kFormat, path.string() + ": only triangle faces are supported");
        i = static_cast<std::uint32_t>(std::stoul(tok.substr(0, tok.find('/')))) - 1;
      }
      mesh.triangles.push_back(t);
    }
  }
  mesh.validate();
  return mesh;
}

}  // namespace touchsdf
