// Copyright 2026 The touchsdf Authors
// SPDX-License-Identifier: Apache-2.0

#include "touchsdf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "touchsdf/error.hpp"
#include "touchsdf/objectives.hpp"

namespace touchsdf {

using nlohmann::json;

Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  if (q.norm() == 0.0) return Mat3::Identity();
  q.normalize();
  return q.toRotationMatrix();
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v(g(rng), g(rng), g(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) {
  require(j.is_array() && j.size() == 3, ErrorCode::kFormat, "expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json mat_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Mat3 mat_from(const json& j) {
  require(j.is_array() && j.size() == 9, ErrorCode::kFormat, "expected a row-major 3x3 matrix");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[static_cast<std::size_t>(3 * r + c)].get<double>();
  return m;
}

// sdf shifted by a constant; roots sit at distance `offset` from the surface
class OffsetShape final : public Shape {
 public:
  OffsetShape(const Shape& base, double offset) : base_(base), offset_(offset) {}
  double sdf(const Vec3& p) const override { return base_.sdf(p) - offset_; }
  Aabb bounds() const override { return base_.bounds(); }

 private:
  const Shape& base_;
  double offset_;
};

}  // namespace

// ---------------------------------------------------------------- objects

void ObjectConfig::validate() const {
  require(min_size > 0.0 && min_size <= max_size && max_size <= 0.8, ErrorCode::kInvalidArgument,
          "object size range must satisfy 0 < min <= max <= 0.8");
  require(min_metric_scale > 0.0 && min_metric_scale <= max_metric_scale, ErrorCode::kInvalidArgument,
          "metric scale range must satisfy 0 < min <= max");
  require(!kinds.empty(), ErrorCode::kInvalidArgument, "object kinds must not be empty");
  for (const auto& k : kinds)
    require(k == "sphere" || k == "box" || k == "capsule" || k == "cylinder" || k == "superellipsoid",
            ErrorCode::kInvalidArgument, "unknown object kind: " + k);
}

void to_json(json& j, const ObjectConfig& c) {
  j = json{{"min_size", c.min_size},
           {"max_size", c.max_size},
           {"min_metric_scale", c.min_metric_scale},
           {"max_metric_scale", c.max_metric_scale},
           {"kinds", c.kinds}};
}

void from_json(const json& j, ObjectConfig& c) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "object config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "min_size") c.min_size = value.get<double>();
    else if (key == "max_size") c.max_size = value.get<double>();
    else if (key == "min_metric_scale") c.min_metric_scale = value.get<double>();
    else if (key == "max_metric_scale") c.max_metric_scale = value.get<double>();
    else if (key == "kinds") c.kinds = value.get<std::vector<std::string>>();
    else fail(ErrorCode::kInvalidArgument, "unknown object config key: " + key);
  }
  c.validate();
}

ShapePtr ProcObject::shape() const { return make_transformed(make_primitive(primitive), pose); }

double ProcObject::bounding_radius() const {
  const Aabb b = primitive_bounds(primitive);
  return pose.scale * std::max(b.lo.norm(), b.hi.norm());
}

ProcObject sample_object(Rng& rng, const ObjectConfig& config) {
  config.validate();
  ProcObject obj;
  const std::string kind = config.kinds[rng() % config.kinds.size()];
  const double size = uniform(rng, config.min_size, config.max_size);
  if (kind == "sphere") {
    obj.primitive = Sphere{Vec3::Zero(), size};
  } else if (kind == "box") {
    const Vec3 v(uniform(rng, 0.4, 1.0), uniform(rng, 0.4, 1.0), uniform(rng, 0.4, 1.0));
    obj.primitive = Box{Vec3::Zero(), size * v / v.norm()};
  } else if (kind == "capsule") {
    const double r = size * uniform(rng, 0.3, 0.6);
    obj.primitive = Capsule{Vec3(0, 0, r - size), Vec3(0, 0, size - r), r};
  } else if (kind == "cylinder") {
    const double a = uniform(rng, 0.5, 1.1);
    obj.primitive = Cylinder{Vec3::Zero(), Vec3::UnitZ(), size * std::sin(a), size * std::cos(a)};
  } else {
    const Vec3 v(uniform(rng, 0.5, 1.0), uniform(rng, 0.5, 1.0), uniform(rng, 0.5, 1.0));
    obj.primitive = Superellipsoid{Vec3::Zero(), size * v / v.norm(), uniform(rng, 0.4, 1.0), uniform(rng, 0.4, 1.0)};
  }
  obj.pose.rotation = random_rotation(rng);
  obj.metric_scale = uniform(rng, config.min_metric_scale, config.max_metric_scale);
  return obj;
}

// ---------------------------------------------------------------- hands

std::vector<Vec3> ProcHand::fingertips() const {
  std::vector<Vec3> tips;
  for (const auto& f : fingers) tips.push_back(f.joints.back());
  return tips;
}

void ProcHand::validate() const {
  require(n_fingers >= 3 && n_fingers <= 5, ErrorCode::kInvalidArgument, "hands have 3, 4 or 5 fingers");
  require(static_cast<int>(fingers.size()) == n_fingers, ErrorCode::kInvalidArgument, "finger count mismatch");
  for (const auto& f : fingers) {
    require(f.joints.size() >= 2 && f.radii.size() + 1 == f.joints.size(), ErrorCode::kInvalidArgument,
            "a finger needs one radius per segment");
    for (double r : f.radii) require(r > 0.0, ErrorCode::kInvalidArgument, "finger radii must be positive");
  }
  require((palm_half.array() > 0.0).all(), ErrorCode::kInvalidArgument, "palm extents must be positive");
}

ShapePtr ProcHand::shape() const {
  std::vector<ShapePtr> parts;
  for (const auto& f : fingers)
    for (std::size_t s = 0; s + 1 < f.joints.size(); ++s)
      parts.push_back(make_primitive(Capsule{f.joints[s], f.joints[s + 1], f.radii[s]}));
  SimilarityTransform palm;
  palm.rotation = palm_rotation;
  palm.translation = palm_center;
  parts.push_back(make_transformed(make_primitive(Box{Vec3::Zero(), palm_half}), palm));
  return std::make_shared<UnionShape>(std::move(parts));
}

void GraspConfig::validate() const {
  require(max_retries >= 1, ErrorCode::kInvalidArgument, "grasp retry budget must be >= 1");
  require(min_tip_radius > 0.0 && min_tip_radius <= max_tip_radius, ErrorCode::kInvalidArgument,
          "tip radius range must satisfy 0 < min <= max");
}

namespace {

ProcHand propose_grasp(const ProcObject& object, const Shape& obj, int n_fingers, Rng& rng, const GraspConfig& cfg) {
  const double rho = object.bounding_radius();
  const double unit = rho / 0.4;  // hand dimensions scale with the object
  const Vec3 d = random_unit(rng);
  Vec3 e1 = d.unitOrthogonal();
  Vec3 e2 = d.cross(e1);
  const double spin = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const Vec3 a1 = std::cos(spin) * e1 + std::sin(spin) * e2;
  const Vec3 a2 = d.cross(a1);
  e1 = a1;
  e2 = a2;

  ProcHand hand;
  hand.n_fingers = n_fingers;
  const double r_tip = uniform(rng, cfg.min_tip_radius, cfg.max_tip_radius) * unit;
  const double gap = uniform(rng, 0.5, 0.9) * rho;
  hand.palm_half = Vec3(0.45 * rho, 0.35 * rho, 0.05 * unit);
  hand.palm_center = d * (rho + gap + hand.palm_half.z());
  hand.palm_rotation.col(0) = e1;
  hand.palm_rotation.col(1) = e2;
  hand.palm_rotation.col(2) = d;
  const OffsetShape offset(obj, r_tip * (1.0 + 1e-9));

  for (int i = 0; i < n_fingers; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / n_fingers + uniform(rng, -0.3, 0.3);
    const Vec3 radial = std::cos(phi) * e1 + std::sin(phi) * e2;
    const Vec3 base = hand.palm_center + 0.6 * rho * radial - d * hand.palm_half.z();
    const Vec3 target = uniform(rng, 0.1, 0.6) * rho * radial;
    const Vec3 u = (target - base).normalized();
    Finger f;
    Vec3 tip;
    if (offset.sdf(base) <= 0.0) {
      f.touching = false;
      tip = base + 0.3 * gap * u;
    } else {
      const double r = ray_root(offset, base, u, 4.0 * rho + 2.0 * gap);
      f.touching = r > 0.0;
      tip = f.touching ? Vec3(base + r * u) : Vec3(base + 0.5 * gap * u);
    }
    const double len = (tip - base).norm();
    const Vec3 knuckle = 0.5 * (base + tip) + d * (0.25 * len);
    f.joints = {base, knuckle, tip};
    f.radii = {1.15 * r_tip, r_tip};
    hand.fingers.push_back(std::move(f));
  }
  return hand;
}

}  // namespace

ProcHand sample_grasp(const ProcObject& object, int n_fingers, Rng& rng, const GraspConfig& config, int resolution,
                      int padding) {
  config.validate();
  require(n_fingers >= 3 && n_fingers <= 5, ErrorCode::kInvalidArgument, "hands have 3, 4 or 5 fingers");
  const ShapePtr obj = object.shape();
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    ProcHand hand = propose_grasp(object, *obj, n_fingers, rng, config);
    if (std::none_of(hand.fingers.begin(), hand.fingers.end(), [](const Finger& f) { return f.touching; })) continue;
    const CanonicalScene cs = canonicalize_scene(hand.shape(), obj, hand.fingertips(), padding, resolution);
    if (ni_loss(cs.object_sdf, cs.hand_sdf, 0.1, false).value > 1e-6) continue;
    if (extract_contacts(cs.hand_sdf, cs.object_sdf, cs.hand_sdf.voxel_size()).points.empty()) continue;
    return hand;
  }
  fail(ErrorCode::kGeneration, "no valid grasp after " + std::to_string(config.max_retries) + " attempts");
}

// ---------------------------------------------------------------- masks

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t v) { return v != 0; }));
}

PixelRect tight_rect(const Mask& mask) {
  PixelRect r{mask.width, mask.height, 0, 0};
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        r.x0 = std::min(r.x0, x);
        r.y0 = std::min(r.y0, y);
        r.x1 = std::max(r.x1, x + 1);
        r.y1 = std::max(r.y1, y + 1);
      }
  require(r.x1 > r.x0, ErrorCode::kEmptySurface, "mask is empty");
  return r;
}

MaskSet render_masks(const SdfGrid& object, const SdfGrid* hand, int canvas) {
  const int r = object.resolution();
  if (hand) require_same_resolution(object, *hand, "render_masks");
  require(canvas >= r && canvas % r == 0, ErrorCode::kInvalidArgument, "canvas must be a multiple of the grid resolution");
  const int m = canvas / r;
  MaskSet out{Mask(canvas, canvas), Mask(canvas, canvas), Mask(canvas, canvas)};
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      bool full = false, in_hand = false, visible = false, decided = false;
      for (int k = 0; k < r; ++k) {
        const std::size_t n = object.index(i, j, k);
        const bool o = object[n] < 0.0;
        const bool h = hand && (*hand)[n] < 0.0;
        full = full || o;
        if (!decided && (o || h)) {
          visible = o && !h;
          in_hand = h;
          decided = true;
        }
      }
      for (int y = j * m; y < (j + 1) * m; ++y)
        for (int x = i * m; x < (i + 1) * m; ++x) {
          out.object_full.at(x, y) = full;
          out.object_visible.at(x, y) = visible;
          out.hand.at(x, y) = in_hand;
        }
    }
  return out;
}

Mask sprite_place(const Mask& mask, const PixelRect& bbox, int resolution, int canvas,
                  const std::optional<PixelRect>& crop) {
  require(resolution >= 1 && canvas >= resolution && canvas % resolution == 0, ErrorCode::kInvalidArgument,
          "canvas must be a multiple of the grid resolution");
  require(bbox.x0 >= 0 && bbox.y0 >= 0 && bbox.x1 <= resolution && bbox.y1 <= resolution && bbox.x0 < bbox.x1 &&
              bbox.y0 < bbox.y1,
          ErrorCode::kInvalidArgument, "sprite box must be a nonempty rectangle inside the grid");
  const PixelRect c = crop ? *crop : tight_rect(mask);
  require(c.x0 >= 0 && c.y0 >= 0 && c.x1 <= mask.width && c.y1 <= mask.height && c.width() > 0 && c.height() > 0,
          ErrorCode::kInvalidArgument, "crop rectangle outside the mask");
  if (crop) require(mask.count() > 0, ErrorCode::kEmptySurface, "mask is empty");
  const int s = canvas / resolution;
  const int bx = bbox.x0 * s, by = bbox.y0 * s;
  const int bw = bbox.width() * s, bh = bbox.height() * s;
  const double f = std::min(static_cast<double>(bw) / c.width(), static_cast<double>(bh) / c.height());
  const int ow = std::clamp(static_cast<int>(std::floor(c.width() * f + 1e-9)), 1, bw);
  const int oh = std::clamp(static_cast<int>(std::floor(c.height() * f + 1e-9)), 1, bh);
  const int ox = bx + (bw - ow) / 2, oy = by + (bh - oh) / 2;
  Mask out(canvas, canvas);
  for (int v = 0; v < oh; ++v) {
    const int sy = c.y0 + std::min(c.height() - 1, static_cast<int>(std::floor((v + 0.5) / f)));
    for (int u = 0; u < ow; ++u) {
      const int sx = c.x0 + std::min(c.width() - 1, static_cast<int>(std::floor((u + 0.5) / f)));
      out.at(ox + u, oy + v) = mask.at(sx, sy) ? 1 : 0;
    }
  }
  return out;
}

OcclusionBin occlusion_bin(const Mask& visible, const Mask& full, int bins) {
  require(bins >= 1, ErrorCode::kInvalidArgument, "bin count must be >= 1");
  require(visible.width == full.width && visible.height == full.height, ErrorCode::kInvalidArgument,
          "mask sizes differ");
  const std::size_t n_full = full.count();
  require(n_full > 0, ErrorCode::kInvalidArgument, "full object mask is empty");
  OcclusionBin out;
  out.x = 1.0 - static_cast<double>(visible.count()) / static_cast<double>(n_full);
  out.bin = std::min(bins, static_cast<int>(std::floor(out.x * bins)) + 1);
  return out;
}

void save_pgm(const Mask& mask, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  for (auto v : mask.pixels) os.put(static_cast<char>(v ? 255 : 0));
  require(os.good(), ErrorCode::kIo, "write failed: " + path.string());
}

Mask load_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot open " + path.string());
  auto token = [&]() {
    std::string t;
    char ch;
    while (is.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(is, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(ch);
    }
    return t;
  };
  require(token() == "P5", ErrorCode::kFormat, path.string() + ": not a binary PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    fail(ErrorCode::kFormat, path.string() + ": bad PGM header");
  }
  require(w > 0 && h > 0 && maxval > 0 && maxval < 256, ErrorCode::kFormat, path.string() + ": unsupported PGM");
  Mask m(w, h);
  std::string buf(m.pixels.size(), '\0');
  is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  require(static_cast<std::size_t>(is.gcount()) == buf.size(), ErrorCode::kFormat, path.string() + ": truncated PGM");
  for (std::size_t n = 0; n < buf.size(); ++n) m.pixels[n] = static_cast<unsigned char>(buf[n]) * 2 > maxval ? 1 : 0;
  return m;
}

// ---------------------------------------------------------------- scenes

void SceneConfig::validate() const {
  require(resolution >= 8 && resolution <= 256, ErrorCode::kInvalidArgument, "scene resolution must be in [8, 256]");
  require(canvas >= resolution && canvas % resolution == 0, ErrorCode::kInvalidArgument,
          "canvas must be a multiple of the resolution");
  require(padding >= 0 && 2 * padding < resolution, ErrorCode::kInvalidArgument, "padding too large");
  require(fingers == 0 || (fingers >= 3 && fingers <= 5), ErrorCode::kInvalidArgument, "fingers must be 0, 3, 4 or 5");
  require(bins >= 1, ErrorCode::kInvalidArgument, "bins must be >= 1");
  object.validate();
  grasp.validate();
}

void to_json(json& j, const SceneConfig& c) {
  j = json{{"resolution", c.resolution},
           {"canvas", c.canvas},
           {"padding", c.padding},
           {"fingers", c.fingers},
           {"bins", c.bins},
           {"object", c.object},
           {"grasp", {{"max_retries", c.grasp.max_retries},
                      {"min_tip_radius", c.grasp.min_tip_radius},
                      {"max_tip_radius", c.grasp.max_tip_radius}}}};
}

void from_json(const json& j, SceneConfig& c) {
  require(j.is_object(), ErrorCode::kInvalidArgument, "scene config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "resolution") c.resolution = value.get<int>();
    else if (key == "canvas") c.canvas = value.get<int>();
    else if (key == "padding") c.padding = value.get<int>();
    else if (key == "fingers") c.fingers = value.get<int>();
    else if (key == "bins") c.bins = value.get<int>();
    else if (key == "object") c.object = value.get<ObjectConfig>();
    else if (key == "grasp") {
      require(value.is_object(), ErrorCode::kInvalidArgument, "grasp config must be a JSON object");
      for (const auto& [gk, gv] : value.items()) {
        if (gk == "max_retries") c.grasp.max_retries = gv.get<int>();
        else if (gk == "min_tip_radius") c.grasp.min_tip_radius = gv.get<double>();
        else if (gk == "max_tip_radius") c.grasp.max_tip_radius = gv.get<double>();
        else fail(ErrorCode::kInvalidArgument, "unknown grasp config key: " + gk);
      }
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown scene config key: " + key);
    }
  }
  c.validate();
}

ShapePtr GraspScene::object_shape() const { return make_transformed(object.shape(), canonical); }
ShapePtr GraspScene::hand_shape() const { return make_transformed(hand.shape(), canonical); }

namespace {

TouchTensor quantized_touch(const ContactSet& contacts, int resolution) {
  TouchTensor t = build_touch_tensor(contacts, resolution);
  for (auto& d : t.distance) d = static_cast<float>(d);
  return t;
}

// Everything downstream of (object, hand, canonical transform).
void finish_scene(GraspScene& s) {
  s.object_sdf = voxelize(*s.object_shape(), s.resolution).quantized();
  s.hand_sdf = voxelize(*s.hand_shape(), s.resolution).quantized();
  s.contacts = extract_contacts(s.hand_sdf, s.object_sdf, s.hand_sdf.voxel_size());
  std::vector<Vec3> tips;
  for (const auto& t : s.hand.fingertips()) tips.push_back(s.canonical.apply(t));
  for (std::size_t c = 0; c < s.contacts.points.size(); ++c) {
    int best = 0;
    for (std::size_t f = 1; f < tips.size(); ++f)
      if ((tips[f] - s.contacts.points[c]).squaredNorm() < (tips[best] - s.contacts.points[c]).squaredNorm())
        best = static_cast<int>(f);
    s.contacts.source_finger[c] = best;
  }
  s.touch = quantized_touch(s.contacts, s.resolution);
  s.masks = render_masks(s.object_sdf, &s.hand_sdf, s.canvas);
  const OcclusionBin ob = occlusion_bin(s.masks.object_visible, s.masks.object_full, s.bins);
  s.occlusion_x = ob.x;
  s.bin = ob.bin;
  s.frame.metric_scale = s.object.metric_scale / s.canonical.scale;
}

}  // namespace

GraspScene build_scene(std::uint64_t seed, const SceneConfig& config) {
  config.validate();
  Rng rng(seed);
  GraspScene s;
  s.seed = seed;
  s.resolution = config.resolution;
  s.canvas = config.canvas;
  s.bins = config.bins;
  s.object = sample_object(rng, config.object);
  const int fingers = config.fingers ? config.fingers : 3 + static_cast<int>(rng() % 3);
  s.hand = sample_grasp(s.object, fingers, rng, config.grasp, config.resolution, config.padding);
  Aabb box = s.hand.shape()->bounds();
  box.extend(s.object.shape()->bounds());
  s.canonical = canonical_transform(box, s.hand.fingertips(), config.padding, config.resolution);
  finish_scene(s);
  return s;
}

SceneCheck check_scene(const GraspScene& scene, int padding) {
  SceneCheck c;
  c.contact = !scene.contacts.points.empty();
  c.ni = ni_loss(scene.object_sdf, scene.hand_sdf, 0.1, false).value;
  c.no_penetration = c.ni <= 1e-6;
  const auto& m = scene.masks;
  c.masks_consistent = true;
  for (std::size_t n = 0; n < m.object_full.pixels.size(); ++n) {
    if (m.object_visible.pixels[n] && !m.object_full.pixels[n]) c.masks_consistent = false;
    if (m.object_visible.pixels[n] && m.hand.pixels[n]) c.masks_consistent = false;
  }
  const int r = scene.resolution;
  c.margins = true;
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) {
        const bool border = std::min({i, j, k, r - 1 - i, r - 1 - j, r - 1 - k}) < padding;
        if (!border) continue;
        const std::size_t n = scene.object_sdf.index(i, j, k);
        if (scene.object_sdf[n] < 0.0 || scene.hand_sdf[n] < 0.0) c.margins = false;
      }
  return c;
}

SdfGrid depth_variant(const GraspScene& scene, double dz) {
  SimilarityTransform shift;
  shift.translation = Vec3(0.0, 0.0, dz);
  return voxelize(*make_transformed(scene.object_shape(), shift), scene.resolution).quantized();
}

json primitive_to_json(const Primitive& prim) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return {{"type", "sphere"}, {"center", vec_json(p.center)}, {"radius", p.radius}};
        } else if constexpr (std::is_same_v<T, Box>) {
          return {{"type", "box"}, {"center", vec_json(p.center)}, {"half_extents", vec_json(p.half_extents)}};
        } else if constexpr (std::is_same_v<T, Capsule>) {
          return {{"type", "capsule"}, {"a", vec_json(p.a)}, {"b", vec_json(p.b)}, {"radius", p.radius}};
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          return {{"type", "cylinder"},       {"center", vec_json(p.center)}, {"axis", vec_json(p.axis)},
                  {"half_height", p.half_height}, {"radius", p.radius}};
        } else {
          return {{"type", "superellipsoid"}, {"center", vec_json(p.center)}, {"radii", vec_json(p.radii)},
                  {"e1", p.e1},               {"e2", p.e2}};
        }
      },
      prim);
}

Primitive primitive_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "sphere") return Sphere{vec_from(j.at("center")), j.at("radius").get<double>()};
    if (type == "box") return Box{vec_from(j.at("center")), vec_from(j.at("half_extents"))};
    if (type == "capsule") return Capsule{vec_from(j.at("a")), vec_from(j.at("b")), j.at("radius").get<double>()};
    if (type == "cylinder")
      return Cylinder{vec_from(j.at("center")), vec_from(j.at("axis")), j.at("half_height").get<double>(),
                      j.at("radius").get<double>()};
    if (type == "superellipsoid")
      return Superellipsoid{vec_from(j.at("center")), vec_from(j.at("radii")), j.at("e1").get<double>(),
                            j.at("e2").get<double>()};
    fail(ErrorCode::kFormat, "unknown primitive type: " + type);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad primitive: ") + e.what());
  }
}

json transform_to_json(const SimilarityTransform& xf) {
  return {{"scale", xf.scale}, {"rotation", mat_json(xf.rotation)}, {"translation", vec_json(xf.translation)}};
}

SimilarityTransform transform_from_json(const json& j) {
  SimilarityTransform xf;
  try {
    xf.scale = j.at("scale").get<double>();
    xf.rotation = mat_from(j.at("rotation"));
    xf.translation = vec_from(j.at("translation"));
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad transform: ") + e.what());
  }
  return xf;
}

json scene_metadata(const GraspScene& s) {
  json fingers = json::array();
  for (const auto& f : s.hand.fingers) {
    json joints = json::array();
    for (const auto& p : f.joints) joints.push_back(vec_json(p));
    fingers.push_back({{"joints", joints}, {"radii", f.radii}, {"touching", f.touching}});
  }
  json points = json::array();
  for (const auto& p : s.contacts.points) points.push_back(vec_json(p));
  return {{"seed", s.seed},
          {"resolution", s.resolution},
          {"canvas", s.canvas},
          {"bins", s.bins},
          {"object",
           {{"primitive", primitive_to_json(s.object.primitive)},
            {"pose", transform_to_json(s.object.pose)},
            {"metric_scale", s.object.metric_scale}}},
          {"hand",
           {{"n_fingers", s.hand.n_fingers},
            {"fingers", fingers},
            {"palm_center", vec_json(s.hand.palm_center)},
            {"palm_half", vec_json(s.hand.palm_half)},
            {"palm_rotation", mat_json(s.hand.palm_rotation)}}},
          {"canonical", transform_to_json(s.canonical)},
          {"frame", {{"camera_axis", vec_json(s.frame.camera_axis)}, {"metric_scale", s.frame.metric_scale}}},
          {"contacts", {{"points", points}, {"source_finger", s.contacts.source_finger}}},
          {"occlusion_x", s.occlusion_x},
          {"bin", s.bin}};
}

namespace {

GraspScene scene_skeleton(const json& j) {
  GraspScene s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.resolution = j.at("resolution").get<int>();
    s.canvas = j.at("canvas").get<int>();
    s.bins = j.at("bins").get<int>();
    const json& o = j.at("object");
    s.object.primitive = primitive_from_json(o.at("primitive"));
    s.object.pose = transform_from_json(o.at("pose"));
    s.object.metric_scale = o.at("metric_scale").get<double>();
    const json& h = j.at("hand");
    s.hand.n_fingers = h.at("n_fingers").get<int>();
    for (const auto& f : h.at("fingers")) {
      Finger finger;
      for (const auto& p : f.at("joints")) finger.joints.push_back(vec_from(p));
      finger.radii = f.at("radii").get<std::vector<double>>();
      finger.touching = f.at("touching").get<bool>();
      s.hand.fingers.push_back(std::move(finger));
    }
    s.hand.palm_center = vec_from(h.at("palm_center"));
    s.hand.palm_half = vec_from(h.at("palm_half"));
    s.hand.palm_rotation = mat_from(h.at("palm_rotation"));
    s.canonical = transform_from_json(j.at("canonical"));
    s.frame.camera_axis = vec_from(j.at("frame").at("camera_axis"));
    s.frame.metric_scale = j.at("frame").at("metric_scale").get<double>();
    for (const auto& p : j.at("contacts").at("points")) s.contacts.points.push_back(vec_from(p));
    s.contacts.source_finger = j.at("contacts").at("source_finger").get<std::vector<int>>();
    s.occlusion_x = j.at("occlusion_x").get<double>();
    s.bin = j.at("bin").get<int>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad scene metadata: ") + e.what());
  }
  require(s.contacts.points.size() == s.contacts.source_finger.size(), ErrorCode::kFormat,
          "contact points and fingers differ in length");
  require(s.resolution >= 8 && s.canvas >= s.resolution && s.canvas % s.resolution == 0, ErrorCode::kFormat,
          "bad scene resolution or canvas");
  s.hand.validate();
  s.canonical.validate();
  s.object.pose.validate();
  return s;
}

}  // namespace

GraspScene scene_from_metadata(const json& j) {
  GraspScene s = scene_skeleton(j);
  finish_scene(s);
  return s;
}

void save_scene_bundle(const GraspScene& scene, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir.string());
  {
    std::ofstream os(dir / "scene.json");
    require(os.good(), ErrorCode::kIo, "cannot write " + (dir / "scene.json").string());
    os << scene_metadata(scene).dump(2) << '\n';
  }
  save_grid(scene.object_sdf, dir / "object.sdfg");
  save_grid(scene.hand_sdf, dir / "hand.sdfg");
  save_touch_tensor(scene.touch, dir / "touch_C.sdfg", dir / "touch_D.sdfg");
  save_pgm(scene.masks.object_full, dir / "mask_object_full.pgm");
  save_pgm(scene.masks.object_visible, dir / "mask_object_visible.pgm");
  save_pgm(scene.masks.hand, dir / "mask_hand.pgm");
}

GraspScene load_scene_bundle(const std::filesystem::path& dir) {
  std::ifstream is(dir / "scene.json");
  require(is.good(), ErrorCode::kIo, "cannot open " + (dir / "scene.json").string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, (dir / "scene.json").string() + ": " + e.what());
  }
  GraspScene s = scene_skeleton(j);
  s.object_sdf = load_grid(dir / "object.sdfg");
  s.hand_sdf = load_grid(dir / "hand.sdfg");
  s.touch = load_touch_tensor(dir / "touch_C.sdfg", dir / "touch_D.sdfg");
  s.masks.object_full = load_pgm(dir / "mask_object_full.pgm");
  s.masks.object_visible = load_pgm(dir / "mask_object_visible.pgm");
  s.masks.hand = load_pgm(dir / "mask_hand.pgm");
  require(s.object_sdf.resolution() == s.resolution && s.hand_sdf.resolution() == s.resolution &&
              s.touch.resolution == s.resolution,
          ErrorCode::kResolutionMismatch, dir.string() + ": bundle volumes disagree with scene.json");
  require(s.masks.object_full.width == s.canvas && s.masks.object_visible.width == s.canvas &&
              s.masks.hand.width == s.canvas,
          ErrorCode::kFormat, dir.string() + ": bundle masks disagree with scene.json");
  return s;
}

}  // namespace touchsdf
