#pragma once

#include <vector>

#include "visgeom/fusion.hpp"
#include "visgeom/geometry.hpp"
#include "visgeom/synth.hpp"

namespace visgeom::serial {

// Single-threaded reference implementations of every OpenMP kernel. Each one
// performs the identical per-element arithmetic as its parallel counterpart
// and must produce bitwise-equal results; they exist as test oracles and as
// the baseline side of the kernel benchmarks.

RayMap build_ray_map(const CameraIntrinsics& intr,
                     const CameraExtrinsics& extr);

PointCloud unproject(const DepthMap& depth, const RayMap& rays);

PointCloud unproject_via_matrix(const DepthMap& depth,
                                const CameraIntrinsics& intr,
                                const CameraExtrinsics& extr);

void tsdf_integrate(TsdfVolume& vol, const DepthMap& depth,
                    const CameraIntrinsics& intr,
                    const CameraExtrinsics& extr);

// Brute-force O(N*M) nearest neighbors using the same squared-distance
// expression as the KD-tree implementation.
std::vector<double> cloud_nn_distances(const PointCloud& from,
                                       const PointCloud& to);

DepthMap render_depth(const SynthScene& scene, std::size_t camera_index);

}  // namespace visgeom::serial
