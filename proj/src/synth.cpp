#include "visgeom/synth.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <type_traits>
#include <vector>

#include "json_camera.hpp"
#include "visgeom/errors.hpp"
#include "visgeom/parallel.hpp"
#include "visgeom/rng.hpp"
#include "visgeom/serial.hpp"

namespace visgeom {

namespace {

constexpr double kMinHit = 1e-12;
constexpr double kMiss = std::numeric_limits<double>::infinity();

double hit_plane(const Plane& plane, const Vec3& o, const Vec3& d) {
  const double denom = plane.n.dot(d);
  if (denom == 0.0) return kMiss;
  const double t = (plane.d - plane.n.dot(o)) / denom;
  return t > kMinHit ? t : kMiss;
}

double hit_sphere(const Sphere& sphere, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - sphere.c;
  const double a = d.squaredNorm();
  const double b = 2.0 * d.dot(oc);
  const double c = oc.squaredNorm() - sphere.r * sphere.r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0 || a == 0.0) return kMiss;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  if (t0 > kMinHit) return t0;
  const double t1 = (-b + sq) / (2.0 * a);
  return t1 > kMinHit ? t1 : kMiss;
}

double hit_box(const Box& box, const Vec3& o, const Vec3& d) {
  double t0 = -kMiss, t1 = kMiss;
  for (int a = 0; a < 3; ++a) {
    if (d(a) == 0.0) {
      if (o(a) < box.min(a) || o(a) > box.max(a)) return kMiss;
      continue;
    }
    double ta = (box.min(a) - o(a)) / d(a);
    double tb = (box.max(a) - o(a)) / d(a);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return kMiss;
  if (t0 > kMinHit) return t0;
  return t1 > kMinHit ? t1 : kMiss;
}

double hit_primitive(const Primitive& prim, const Vec3& o, const Vec3& d) {
  return std::visit(
      [&](const auto& shape) -> double {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return hit_plane(shape, o, d);
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return hit_sphere(shape, o, d);
        } else {
          return hit_box(shape, o, d);
        }
      },
      prim);
}

// Camera-to-world rotation looking from `eye` toward `target` (camera +z
// forward, +x right, +y down-ish; up reference picked to avoid degeneracy).
Mat3 look_at_rotation(const Vec3& eye, const Vec3& target) {
  const Vec3 f = (target - eye).normalized();
  Vec3 ref(0, 0, 1);
  if (std::abs(f.dot(ref)) > 0.9) ref = Vec3(0, 1, 0);
  const Vec3 x = ref.cross(f).normalized();
  const Vec3 y = f.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = f;
  return r;
}

}  // namespace

DepthMap render_depth(const SynthScene& scene, std::size_t camera_index) {
  if (camera_index >= scene.cameras.size())
    throw Error("render_depth: camera index out of range");
  const auto& [intr, extr] = scene.cameras[camera_index];
  const RayMap rays = build_ray_map(intr, extr);

  DepthMap depth(intr.width, intr.height);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 o = rays.origin_at(v, u);
      const Vec3 d = rays.direction_at(v, u);
      double best = kMiss;
      for (const Primitive& prim : scene.primitives)
        best = std::min(best, hit_primitive(prim, o, d));
      if (best < kMiss)
        depth.set(v, u, best);
      else
        depth.set_invalid(v, u);
    }
  return depth;
}

SynthScene perturb_scene(const SynthScene& scene, const NoiseSpec& noise,
                         std::uint64_t seed) {
  if (noise.pose_rot_sigma_deg < 0.0 || noise.pose_trans_sigma < 0.0)
    throw Error("perturb_scene: sigmas must be >= 0");
  SynthScene out = scene;
  if (noise.pose_rot_sigma_deg == 0.0 && noise.pose_trans_sigma == 0.0)
    return out;

  Xoshiro256 rng(seed);
  // Half-normal mean is sigma*sqrt(2/pi); widen so E|angle| = sigma.
  const double angle_scale = noise.pose_rot_sigma_deg *
                             (std::numbers::pi / 180.0) *
                             std::sqrt(std::numbers::pi / 2.0);
  for (auto& [intr, extr] : out.cameras) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 axis(rho * std::cos(phi), rho * std::sin(phi), z);
    const double angle = angle_scale * rng.normal();
    const Mat3 r_noise = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    const Vec3 dt = noise.pose_trans_sigma *
                    Vec3(rng.normal(), rng.normal(), rng.normal());
    extr = CameraExtrinsics::from_rotation(r_noise * extr.rotation(),
                                           extr.t + dt);
  }
  return out;
}

DepthMap perturb_depth(const DepthMap& depth, const NoiseSpec& noise,
                       std::uint64_t seed) {
  if (noise.depth_sigma < 0.0 || noise.outlier_fraction < 0.0 ||
      noise.outlier_fraction > 1.0)
    throw Error("perturb_depth: invalid noise spec");
  DepthMap out = depth;
  if (noise.depth_sigma == 0.0 && noise.outlier_fraction == 0.0) return out;

  Xoshiro256 rng(seed);
  std::vector<std::size_t> valid_flat;
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(v, u)) {
        if (noise.depth_sigma > 0.0)
          out.set(v, u, out.at(v, u) * std::exp(noise.depth_sigma *
                                                rng.normal()));
        valid_flat.push_back(static_cast<std::size_t>(v) * out.width + u);
      }

  if (noise.outlier_fraction > 0.0 && !valid_flat.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const std::size_t f : valid_flat) {
      lo = std::min(lo, out.values[f]);
      hi = std::max(hi, out.values[f]);
    }
    const auto count = static_cast<std::size_t>(
        noise.outlier_fraction * static_cast<double>(valid_flat.size()));
    std::vector<std::size_t> pick =
        rng.sample_without_replacement(valid_flat.size(), count);
    std::sort(pick.begin(), pick.end());
    for (const std::size_t p : pick)
      out.values[valid_flat[p]] = rng.uniform(0.5 * lo, 2.0 * hi);
  }
  return out;
}

SynthScene make_benchmark_scene(std::uint64_t seed, int camera_count,
                                int width, int height) {
  if (camera_count < 3)
    throw Error("make_benchmark_scene: need at least 3 cameras");
  if (width < 8 || height < 8)
    throw Error("make_benchmark_scene: image must be at least 8x8");

  SynthScene scene;
  scene.seed = seed;
  // Floor plus a shallow spherical bump: the sphere sits mostly below the
  // plane so the visible cap meets the floor at a crease, never a depth
  // discontinuity, and near-vertical cameras cannot self-occlude it.
  const double radius = 0.5;
  scene.primitives.push_back(Plane{Vec3(0, 0, 1), 0.0});
  scene.primitives.push_back(Sphere{Vec3(0, 0, -0.85 * radius), radius});

  Xoshiro256 rng(seed);
  for (int m = 0; m < camera_count; ++m) {
    CameraIntrinsics intr;
    intr.width = width;
    intr.height = height;
    intr.fx = intr.fy = 1.4 * width;
    intr.cx = width / 2.0;
    intr.cy = height / 2.0;

    const double angle = 2.0 * std::numbers::pi * m / camera_count +
                         0.1 * rng.uniform(-1.0, 1.0);
    const double ring = 0.4 * (1.0 + 0.1 * rng.uniform(-1.0, 1.0));
    const double h = 1.6 + 0.1 * rng.uniform(-1.0, 1.0);
    const Vec3 eye(ring * std::cos(angle), ring * std::sin(angle), h);
    const Mat3 r = look_at_rotation(eye, Vec3::Zero());
    scene.cameras.emplace_back(intr, CameraExtrinsics::from_rotation(r, eye));
  }
  return scene;
}

std::string scene_to_json(const SynthScene& scene) {
  detail::ordered_json j;
  j["seed"] = scene.seed;
  j["primitives"] = detail::ordered_json::array();
  for (const Primitive& prim : scene.primitives) {
    detail::ordered_json p;
    if (const Plane* plane = std::get_if<Plane>(&prim)) {
      p["type"] = "plane";
      p["n"] = {plane->n(0), plane->n(1), plane->n(2)};
      p["d"] = plane->d;
    } else if (const Sphere* sphere = std::get_if<Sphere>(&prim)) {
      p["type"] = "sphere";
      p["c"] = {sphere->c(0), sphere->c(1), sphere->c(2)};
      p["r"] = sphere->r;
    } else if (const Box* box = std::get_if<Box>(&prim)) {
      p["type"] = "box";
      p["min"] = {box->min(0), box->min(1), box->min(2)};
      p["max"] = {box->max(0), box->max(1), box->max(2)};
    }
    j["primitives"].push_back(std::move(p));
  }
  j["cameras"] = detail::ordered_json::array();
  for (const auto& [intr, extr] : scene.cameras)
    j["cameras"].push_back(detail::camera_to_json(intr, extr));
  return j.dump();
}

SynthScene scene_from_json(const std::string& text) {
  detail::ordered_json j;
  try {
    j = detail::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte > 0 ? e.byte - 1 : 0, "valid scene JSON",
                     e.what());
  }
  auto vec3_of = [](const detail::ordered_json& a, const char* what) {
    if (!a.is_array() || a.size() != 3)
      throw ParseError(0, std::string("3-element array for ") + what,
                       "wrong arity");
    return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  };

  SynthScene scene;
  try {
    scene.seed = j.value("seed", std::uint64_t{0});
    for (const auto& p : j.value("primitives", detail::ordered_json::array())) {
      const std::string type = p.value("type", "");
      if (type == "plane") {
        scene.primitives.push_back(
            Plane{vec3_of(p.at("n"), "plane n"), p.at("d").get<double>()});
      } else if (type == "sphere") {
        scene.primitives.push_back(
            Sphere{vec3_of(p.at("c"), "sphere c"), p.at("r").get<double>()});
      } else if (type == "box") {
        scene.primitives.push_back(Box{vec3_of(p.at("min"), "box min"),
                                       vec3_of(p.at("max"), "box max")});
      } else {
        throw ParseError(0, "primitive type plane|sphere|box",
                         type.empty() ? "missing type" : type);
      }
    }
    for (const auto& c : j.value("cameras", detail::ordered_json::array())) {
      CameraIntrinsics intr;
      CameraExtrinsics extr;
      detail::camera_from_json(c, intr, extr);
      scene.cameras.emplace_back(intr, extr);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "well-formed scene fields", e.what());
  }
  return scene;
}

// Serial reference renderer (declared in visgeom/serial.hpp); lives here to
// share the ray-primitive intersection helpers. Identical per-pixel
// arithmetic to render_depth above.
namespace serial {

DepthMap render_depth(const SynthScene& scene, std::size_t camera_index) {
  if (camera_index >= scene.cameras.size())
    throw Error("render_depth: camera index out of range");
  const auto& [intr, extr] = scene.cameras[camera_index];
  const RayMap rays = serial::build_ray_map(intr, extr);

  DepthMap depth(intr.width, intr.height);
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 o = rays.origin_at(v, u);
      const Vec3 d = rays.direction_at(v, u);
      double best = kMiss;
      for (const Primitive& prim : scene.primitives)
        best = std::min(best, hit_primitive(prim, o, d));
      if (best < kMiss)
        depth.set(v, u, best);
      else
        depth.set_invalid(v, u);
    }
  return depth;
}

}  // namespace serial

}  // namespace visgeom
