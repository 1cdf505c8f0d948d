#pragma once

#include <utility>

#include "visgeom/geometry.hpp"

namespace visgeom {

// Frobenius-normalized 3x3 homography with positive determinant.
struct Homography3 {
  Mat3 h = Mat3::Identity() / std::sqrt(3.0);
};

struct DltOptions {
  // Ray maps larger than 64x64 are uniformly subsampled on a 2D grid down to
  // at most max_pixels before solving; the system stays heavily
  // over-determined either way.
  bool subsample = true;
  int max_pixels = 4096;
};

// Camera center as the mean of all per-pixel ray origins.
Vec3 recover_center(const RayMap& rays);

// H minimizing sum ||H * p x d||^2 subject to ||H||_F = 1, via SVD of the
// stacked two-row cross-product constraints. Pixel coordinates are
// Hartley-normalized and directions scaled by their mean norm before the
// solve; the result is denormalized. Throws DegenerateRays when the
// constraint matrix is rank-deficient.
Homography3 solve_homography_dlt(const RayMap& rays,
                                 const DltOptions& options = {});

// H = K * R (up to sign) with K upper-triangular, diag(K) > 0, det(R) = +1.
// K is returned normalized so K(2,2) = 1. Throws DegenerateRays for singular
// input.
std::pair<Mat3, Mat3> rq_decompose(const Mat3& h);

// Full camera recovery: center averaging, DLT, RQ.
std::pair<CameraIntrinsics, CameraExtrinsics> recover_camera(
    const RayMap& rays, const DltOptions& options = {});

}  // namespace visgeom
