#include "visgeom/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "visgeom/errors.hpp"
#include "visgeom/parallel.hpp"

namespace visgeom {

TsdfVolume tsdf_new(const Vec3& bounds_min, const Vec3& bounds_max,
                    double voxel_size, double truncation,
                    std::size_t voxel_budget) {
  if (!(voxel_size > 0.0)) throw Error("tsdf_new: voxel_size must be > 0");
  for (int a = 0; a < 3; ++a)
    if (!(bounds_max(a) > bounds_min(a)))
      throw Error("tsdf_new: bounds_max must exceed bounds_min");
  if (truncation <= 0.0) truncation = 4.0 * voxel_size;
  if (truncation < voxel_size)
    throw Error("tsdf_new: truncation must be >= voxel_size");

  TsdfVolume vol;
  vol.origin = bounds_min;
  vol.voxel_size = voxel_size;
  vol.truncation = truncation;
  int dims[3];
  for (int a = 0; a < 3; ++a) {
    dims[a] = std::max(
        1, static_cast<int>(
               std::ceil((bounds_max(a) - bounds_min(a)) / voxel_size)));
  }
  vol.nx = dims[0];
  vol.ny = dims[1];
  vol.nz = dims[2];
  const std::size_t count = static_cast<std::size_t>(vol.nx) *
                            static_cast<std::size_t>(vol.ny) *
                            static_cast<std::size_t>(vol.nz);
  if (count > voxel_budget)
    throw VolumeTooLarge("tsdf_new: volume exceeds the voxel budget");
  vol.tsdf.assign(count, 1.0f);
  vol.weight.assign(count, 0);
  return vol;
}

void tsdf_integrate(TsdfVolume& vol, const DepthMap& depth,
                    const CameraIntrinsics& intr,
                    const CameraExtrinsics& extr) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height)
    throw ShapeMismatch("tsdf_integrate: depth and intrinsics sizes differ");

  const Mat3 r_wc = extr.rotation().transpose();  // world -> camera
  const Vec3 cam_center = extr.t;
  const double fx = intr.fx, fy = intr.fy, cx = intr.cx, cy = intr.cy,
               skew = intr.skew;
  const double trunc = vol.truncation;
  const std::ptrdiff_t count =
      static_cast<std::ptrdiff_t>(vol.voxel_count());
  const std::size_t slab = static_cast<std::size_t>(vol.nx) * vol.ny;

#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t idx = 0; idx < count; ++idx) {
    const std::size_t rem = static_cast<std::size_t>(idx) % slab;
    const int k = static_cast<int>(static_cast<std::size_t>(idx) / slab);
    const int j = static_cast<int>(rem / static_cast<std::size_t>(vol.nx));
    const int i = static_cast<int>(rem % static_cast<std::size_t>(vol.nx));

    const Vec3 p_cam = r_wc * (vol.voxel_center(i, j, k) - cam_center);
    const double z = p_cam.z();
    if (!(z > 0.0)) continue;  // behind or in the camera plane
    const int u = static_cast<int>(
        std::llround((fx * p_cam.x() + skew * p_cam.y()) / z + cx));
    const int v = static_cast<int>(std::llround(fy * p_cam.y() / z + cy));
    if (u < 0 || u >= depth.width || v < 0 || v >= depth.height) continue;
    if (!depth.valid(v, u)) continue;

    const double sdf = depth.at(v, u) - z;
    if (sdf < -trunc) continue;  // occluded beyond the truncation band
    const double value = std::clamp(sdf / trunc, -1.0, 1.0);
    const double w_old = vol.weight[idx];
    vol.tsdf[idx] =
        static_cast<float>((vol.tsdf[idx] * w_old + value) / (w_old + 1.0));
    vol.weight[idx] = static_cast<std::uint8_t>(
        std::min<double>(w_old + 1.0, 255.0));
  }
}

PointCloud tsdf_extract_points(const TsdfVolume& vol) {
  std::vector<Vec3> points;
  const int nx = vol.nx, ny = vol.ny, nz = vol.nz;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t idx = vol.index(i, j, k);
        if (vol.weight[idx] == 0) continue;
        const float a = vol.tsdf[idx];
        const Vec3 ca = vol.voxel_center(i, j, k);
        const int di[3] = {1, 0, 0};
        const int dj[3] = {0, 1, 0};
        const int dk[3] = {0, 0, 1};
        for (int axis = 0; axis < 3; ++axis) {
          const int ii = i + di[axis], jj = j + dj[axis], kk = k + dk[axis];
          if (ii >= nx || jj >= ny || kk >= nz) continue;
          const std::size_t nidx = vol.index(ii, jj, kk);
          if (vol.weight[nidx] == 0) continue;
          const float b = vol.tsdf[nidx];
          if ((a < 0.0f) == (b < 0.0f)) continue;  // no sign change
          const double t = static_cast<double>(a) /
                           (static_cast<double>(a) - static_cast<double>(b));
          const Vec3 cb = vol.voxel_center(ii, jj, kk);
          points.push_back(ca + t * (cb - ca));
        }
      }

  std::sort(points.begin(), points.end(), [](const Vec3& p, const Vec3& q) {
    if (p.x() != q.x()) return p.x() < q.x();
    if (p.y() != q.y()) return p.y() < q.y();
    return p.z() < q.z();
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec3& p, const Vec3& q) {
                             return p.x() == q.x() && p.y() == q.y() &&
                                    p.z() == q.z();
                           }),
               points.end());

  PointCloud cloud;
  cloud.points = std::move(points);
  return cloud;
}

const std::vector<DatasetPreset>& dataset_presets() {
  static const std::vector<DatasetPreset> presets = {
      {"hiroom", 0.05, 0.007},
      {"eth3d", 0.25, 0.039},
      {"7scenes", 0.05, 0.007},
      {"scannetpp", 0.05, 0.02},
  };
  return presets;
}

const DatasetPreset* find_dataset_preset(std::string_view name) {
  for (const DatasetPreset& preset : dataset_presets())
    if (preset.name == name) return &preset;
  return nullptr;
}

}  // namespace visgeom
