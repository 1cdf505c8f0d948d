#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace visgeom {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

// Pinhole intrinsics. As a 3x3 matrix K is upper-triangular with K(2,2)=1.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;
  int width = 1;
  int height = 1;

  Mat3 matrix() const;
  // Closed-form inverse of the upper-triangular K.
  Mat3 inverse_matrix() const;
  // Horizontal/vertical field of view in radians: 2*atan(size / (2*focal)).
  Eigen::Vector2d fov() const;

  // Throws std::invalid_argument unless fx,fy > 0 and width,height >= 1.
  void validate() const;
};

// Camera-to-world pose: X_world = R * X_cam + t. The quaternion is stored as
// (w, x, y, z), unit norm, hemisphere-normalized so w >= 0 (ties at w == 0
// broken by the first nonzero component being positive).
struct CameraExtrinsics {
  Vec4 q = Vec4(1, 0, 0, 0);
  Vec3 t = Vec3::Zero();

  Mat3 rotation() const;
  static CameraExtrinsics from_rotation(const Mat3& r, const Vec3& t);
};

// 9-DoF camera vector: translation, quaternion, FOV parameters (radians).
struct Camera9Dof {
  Vec3 t = Vec3::Zero();
  Vec4 q = Vec4(1, 0, 0, 0);
  Eigen::Vector2d f = Eigen::Vector2d::Zero();

  // Flattened as (t0,t1,t2, qw,qx,qy,qz, fx_fov,fy_fov).
  std::array<double, 9> vector() const;
};

Camera9Dof to_camera9dof(const CameraIntrinsics& intr,
                         const CameraExtrinsics& extr);
// Inverse of to_camera9dof given the image size; the principal point is
// placed at (width/2, height/2) and skew is zero.
std::pair<CameraIntrinsics, CameraExtrinsics> from_camera9dof(
    const Camera9Dof& cam, int width, int height);

// Per-pixel ray field. Directions are intentionally NOT unit-normalized:
// their magnitude carries the projection scale, so depth D means
// P = origin + D * direction with D equal to z-depth in the camera frame.
struct RayMap {
  int width = 0;
  int height = 0;
  std::vector<double> origins;     // H*W*3, row-major
  std::vector<double> directions;  // H*W*3, row-major

  RayMap() = default;
  RayMap(int width, int height);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  Vec3 origin_at(int v, int u) const;
  Vec3 direction_at(int v, int u) const;
  void set_origin(int v, int u, const Vec3& o);
  void set_direction(int v, int u, const Vec3& d);
};

// Depth with validity mask. Invalid pixels hold NaN and mask 0; operations
// never read values at masked-out pixels.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  DepthMap() = default;
  DepthMap(int width, int height);
  static DepthMap constant(int width, int height, double value);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t valid_count() const;
  bool valid(int v, int u) const {
    return mask[static_cast<std::size_t>(v) * width + u] != 0;
  }
  double at(int v, int u) const {
    return values[static_cast<std::size_t>(v) * width + u];
  }
  void set(int v, int u, double value);
  void set_invalid(int v, int u);
};

struct PointCloud {
  std::vector<Vec3> points;
  // Either empty or one RGB triplet per point.
  std::vector<std::array<std::uint8_t, 3>> colors;

  std::size_t size() const { return points.size(); }
};

// Quaternion (w,x,y,z) <-> rotation matrix. matrix_to_quat throws if the
// input deviates from an orthonormal det=+1 matrix by more than 1e-6.
Mat3 quat_to_matrix(const Vec4& q_wxyz);
Vec4 matrix_to_quat(const Mat3& r);
Vec4 canonical_quat(Vec4 q);

// Geodesic distance between rotations in degrees, clamped to [0, 180].
double rotation_geodesic_deg(const Mat3& ra, const Mat3& rb);

// Per-pixel rays for a camera: direction d = R * K^-1 * (u, v, 1), origin t.
// Pixels are addressed at integer indices (u = column, v = row, no half-pixel
// offset).
RayMap build_ray_map(const CameraIntrinsics& intr,
                     const CameraExtrinsics& extr);

// P = origin + D(u,v) * direction per valid pixel, row-major order.
PointCloud unproject(const DepthMap& depth, const RayMap& rays);

// P = R * (D(u,v) * K^-1 * p) + t per valid pixel; agrees with
// unproject(depth, build_ray_map(intr, extr)) to within 1e-12.
PointCloud unproject_via_matrix(const DepthMap& depth,
                                const CameraIntrinsics& intr,
                                const CameraExtrinsics& extr);

}  // namespace visgeom
