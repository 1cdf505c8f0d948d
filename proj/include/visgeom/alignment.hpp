#pragma once

#include <cstdint>
#include <vector>

#include "visgeom/geometry.hpp"

namespace visgeom {

// 1-D affine depth alignment: metric = s * pred + t.
struct ScaleShift {
  double s = 1.0;
  double t = 0.0;

  double apply(double depth) const { return s * depth + t; }
};

// Similarity transform g(x) = s * R * x + t with s > 0, det(R) = +1.
struct Sim3 {
  double s = 1.0;
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return s * (r * p) + t; }
  // Aligned camera-to-world pose: rotation R*R_pose, center g(center).
  // Depth/structure attached to the pose must be scaled by s separately.
  CameraExtrinsics apply(const CameraExtrinsics& pose) const;
  Sim3 inverse() const;
};

struct RansacConfig {
  int iterations = 256;
  // 0 = minimal model size (2 for scale-shift, max(3, ceil(N/5)) for
  // trajectory alignment).
  int sample_size = 0;
  std::uint64_t seed = 0;
  // Enforced by ransac_scale_shift: the winner must cover at least this
  // fraction of the valid pixels.
  double min_inlier_fraction = 0.2;
};

// Trajectory RANSAC uses more iterations by default; models are cheap.
inline RansacConfig trajectory_ransac_defaults(std::uint64_t seed = 0) {
  RansacConfig cfg;
  cfg.iterations = 512;
  cfg.seed = seed;
  return cfg;
}

struct RansacScaleShift {
  ScaleShift model;
  // H*W row-major; 1 marks a jointly-valid pixel in the winning inlier set.
  std::vector<std::uint8_t> inliers;
  std::size_t inlier_count = 0;
  std::size_t valid_count = 0;
};

// Closed-form (s, t) = argmin sum_p m_p (s*pred_p + t - gt_p)^2 over jointly
// valid pixels via the 2x2 normal equations; s clamped to >= 1e-12.
// Throws DegenerateFit on < 2 valid pixels or constant pred.
ScaleShift fit_scale_shift_lsq(const DepthMap& pred, const DepthMap& gt);

// RANSAC wrapper around the exact 2-point fit. Residual r_p = s*pred_p + t -
// gt_p over all valid pixels; inliers satisfy |r_p - median(r)| <=
// mean|r_p - median(r)|. The max-inlier candidate (ties: lowest inlier RMSE,
// then earliest iteration) is refit by LSQ on its inlier set. Deterministic
// for a fixed cfg.seed.
RansacScaleShift ransac_scale_shift(const DepthMap& pred, const DepthMap& gt,
                                    const RansacConfig& cfg);

// Closed-form least-squares similarity src -> dst (Umeyama 1991): centroids,
// covariance SVD, reflection-corrected rotation, scale = trace(DS)/var_src
// when with_scale, else 1. Throws DegenerateFit on < 3 or collinear points.
Sim3 umeyama_sim3(const PointCloud& src, const PointCloud& dst,
                  bool with_scale = true);

// Robust Sim3 between equal-length pose lists: repeatedly fit umeyama_sim3 on
// a random subset of camera centers (size max(3, ceil(N/5)) unless
// cfg.sample_size > 0), count inliers whose center error under the candidate
// is strictly below the median of all N errors, keep the best candidate and
// refit on its inliers (kept as-is when fewer than 3).
Sim3 ransac_trajectory_align(const std::vector<CameraExtrinsics>& pred,
                             const std::vector<CameraExtrinsics>& gt,
                             const RansacConfig& cfg);

}  // namespace visgeom
