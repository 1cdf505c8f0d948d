#include "visgeom/serial.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "visgeom/errors.hpp"

namespace visgeom::serial {

RayMap build_ray_map(const CameraIntrinsics& intr,
                     const CameraExtrinsics& extr) {
  intr.validate();
  RayMap rays(intr.width, intr.height);
  const Mat3 k_inv = intr.inverse_matrix();
  const Mat3 r = extr.rotation();
  const Mat3 rk_inv = r * k_inv;
  const Vec3 t = extr.t;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 d = rk_inv * Vec3(u, v, 1.0);
      rays.set_origin(v, u, t);
      rays.set_direction(v, u, d);
    }
  }
  return rays;
}

PointCloud unproject(const DepthMap& depth, const RayMap& rays) {
  if (depth.width != rays.width || depth.height != rays.height)
    throw ShapeMismatch("unproject: depth and ray map sizes differ");
  PointCloud cloud;
  cloud.points.reserve(depth.valid_count());
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u)
      if (depth.valid(v, u))
        cloud.points.push_back(rays.origin_at(v, u) +
                               depth.at(v, u) * rays.direction_at(v, u));
  return cloud;
}

PointCloud unproject_via_matrix(const DepthMap& depth,
                                const CameraIntrinsics& intr,
                                const CameraExtrinsics& extr) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height)
    throw ShapeMismatch("unproject_via_matrix: depth and camera sizes differ");
  const Mat3 k_inv = intr.inverse_matrix();
  const Mat3 r = extr.rotation();
  const Vec3 t = extr.t;
  PointCloud cloud;
  cloud.points.reserve(depth.valid_count());
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.valid(v, u)) continue;
      const Vec3 cam_pt = depth.at(v, u) * (k_inv * Vec3(u, v, 1.0));
      cloud.points.push_back(r * cam_pt + t);
    }
  return cloud;
}

void tsdf_integrate(TsdfVolume& vol, const DepthMap& depth,
                    const CameraIntrinsics& intr,
                    const CameraExtrinsics& extr) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height)
    throw ShapeMismatch("tsdf_integrate: depth and intrinsics sizes differ");

  const Mat3 r_wc = extr.rotation().transpose();
  const Vec3 cam_center = extr.t;
  const double fx = intr.fx, fy = intr.fy, cx = intr.cx, cy = intr.cy,
               skew = intr.skew;
  const double trunc = vol.truncation;
  const std::size_t count = vol.voxel_count();
  const std::size_t slab = static_cast<std::size_t>(vol.nx) * vol.ny;

  for (std::size_t idx = 0; idx < count; ++idx) {
    const std::size_t rem = idx % slab;
    const int k = static_cast<int>(idx / slab);
    const int j = static_cast<int>(rem / static_cast<std::size_t>(vol.nx));
    const int i = static_cast<int>(rem % static_cast<std::size_t>(vol.nx));

    const Vec3 p_cam = r_wc * (vol.voxel_center(i, j, k) - cam_center);
    const double z = p_cam.z();
    if (!(z > 0.0)) continue;
    const int u = static_cast<int>(
        std::llround((fx * p_cam.x() + skew * p_cam.y()) / z + cx));
    const int v = static_cast<int>(std::llround(fy * p_cam.y() / z + cy));
    if (u < 0 || u >= depth.width || v < 0 || v >= depth.height) continue;
    if (!depth.valid(v, u)) continue;

    const double sdf = depth.at(v, u) - z;
    if (sdf < -trunc) continue;
    const double value = std::clamp(sdf / trunc, -1.0, 1.0);
    const double w_old = vol.weight[idx];
    vol.tsdf[idx] =
        static_cast<float>((vol.tsdf[idx] * w_old + value) / (w_old + 1.0));
    vol.weight[idx] = static_cast<std::uint8_t>(
        std::min<double>(w_old + 1.0, 255.0));
  }
}

std::vector<double> cloud_nn_distances(const PointCloud& from,
                                       const PointCloud& to) {
  if (from.points.empty() || to.points.empty())
    throw DegenerateFit("cloud_nn_distances: empty point cloud");
  std::vector<double> dist(from.points.size());
  for (std::size_t i = 0; i < from.points.size(); ++i) {
    const Vec3 q = from.points[i];
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : to.points)
      best = std::min(best, (q - p).squaredNorm());
    dist[i] = std::sqrt(best);
  }
  return dist;
}

}  // namespace visgeom::serial
