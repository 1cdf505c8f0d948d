#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "visgeom/geometry.hpp"

namespace visgeom {

// Truncated signed-distance voxel grid. tsdf stores distance normalized by
// the truncation band, so values live in [-1, 1]; weight counts integrated
// observations (saturating at 255). Storage is x-fastest:
// index = i + nx * (j + ny * k).
struct TsdfVolume {
  Vec3 origin = Vec3::Zero();  // world position of the grid's min corner
  double voxel_size = 0.0;
  double truncation = 0.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> tsdf;
  std::vector<std::uint8_t> weight;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
};

inline constexpr std::size_t kDefaultVoxelBudget =
    std::size_t{512} * 512 * 512;

// Volume covering [bounds_min, bounds_max] with ceil-sized dims, tsdf
// initialized to 1 (free space) and weight to 0. truncation <= 0 selects the
// default 4 * voxel_size. Throws VolumeTooLarge past the voxel budget.
TsdfVolume tsdf_new(const Vec3& bounds_min, const Vec3& bounds_max,
                    double voxel_size, double truncation = 0.0,
                    std::size_t voxel_budget = kDefaultVoxelBudget);

// Projective TSDF update: each voxel center is projected into the camera
// (nearest pixel); sdf = D(u,v) - z_cam; voxels behind the surface beyond
// the truncation band are skipped, others blend clamp(sdf/truncation, -1, 1)
// into the running weighted average with unit frame weight.
void tsdf_integrate(TsdfVolume& vol, const DepthMap& depth,
                    const CameraIntrinsics& intr, const CameraExtrinsics& extr);

// Zero crossings of the tsdf field along +x/+y/+z edges between observed
// voxels (both weights > 0), linearly interpolated; exact duplicates removed.
// Output is sorted lexicographically, hence deterministic.
PointCloud tsdf_extract_points(const TsdfVolume& vol);

// Published per-dataset benchmark parameters.
struct DatasetPreset {
  std::string_view name;
  double f1_threshold;  // distance threshold d for precision/recall/F1
  double voxel_size;
};

// All bundled presets: hiroom, eth3d, 7scenes, scannetpp.
const std::vector<DatasetPreset>& dataset_presets();
// nullptr when the name is unknown.
const DatasetPreset* find_dataset_preset(std::string_view name);

}  // namespace visgeom
