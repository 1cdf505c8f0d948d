#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "visgeom/geometry.hpp"

namespace visgeom {

// Closed-form-intersectable primitives so rendered ground truth is exact.
struct Plane {
  Vec3 n = Vec3(0, 0, 1);  // surface satisfies n . x = d
  double d = 0.0;
};

struct Sphere {
  Vec3 c = Vec3::Zero();
  double r = 1.0;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
};

using Primitive = std::variant<Plane, Sphere, Box>;

struct SynthScene {
  std::vector<Primitive> primitives;
  std::vector<std::pair<CameraIntrinsics, CameraExtrinsics>> cameras;
  std::uint64_t seed = 0;
};

// Per-pixel nearest-hit z-depth (the D with P = origin + D * direction on a
// surface) along the camera's ray map; misses are invalid.
DepthMap render_depth(const SynthScene& scene, std::size_t camera_index);

struct NoiseSpec {
  double pose_rot_sigma_deg = 0.0;  // mean geodesic perturbation in degrees
  double pose_trans_sigma = 0.0;    // per-axis Gaussian sigma, world units
  double depth_sigma = 0.0;         // multiplicative: D *= exp(sigma * z)
  double outlier_fraction = 0.0;    // exact floor(frac * N_valid) pixels
};

// Seeded pose perturbation of every camera; zero spec returns a bitwise
// copy. Rotation: uniform random axis, angle ~ N(0, (sigma*sqrt(pi/2))^2) so
// the mean |angle| equals pose_rot_sigma_deg.
SynthScene perturb_scene(const SynthScene& scene, const NoiseSpec& noise,
                         std::uint64_t seed);

// Seeded depth perturbation: multiplicative log-normal noise, then exactly
// floor(outlier_fraction * N_valid) valid pixels replaced by uniform junk in
// [0.5 * min_valid, 2 * max_valid].
DepthMap perturb_depth(const DepthMap& depth, const NoiseSpec& noise,
                       std::uint64_t seed);

// Reference benchmark scene: a plane with a shallow spherical bump viewed by
// `camera_count` inward-looking cameras from above. Free of depth
// discontinuities, so clean TSDF fusion reaches F1 = 100 at 2 voxels.
SynthScene make_benchmark_scene(std::uint64_t seed, int camera_count = 6,
                                int width = 48, int height = 48);

// JSON round-trip of the scene description for reproducible fixtures.
std::string scene_to_json(const SynthScene& scene);
SynthScene scene_from_json(const std::string& text);

}  // namespace visgeom
