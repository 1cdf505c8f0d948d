#include "visgeom/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "visgeom/errors.hpp"
#include "visgeom/parallel.hpp"

namespace visgeom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 inv;
  inv << 1.0 / fx, -skew / (fx * fy), (skew * cy - cx * fy) / (fx * fy),  //
      0.0, 1.0 / fy, -cy / fy,                                            //
      0.0, 0.0, 1.0;
  return inv;
}

Eigen::Vector2d CameraIntrinsics::fov() const {
  return {2.0 * std::atan(width / (2.0 * fx)),
          2.0 * std::atan(height / (2.0 * fy))};
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width < 1 || height < 1)
    throw std::invalid_argument("intrinsics: image size must be >= 1x1");
}

Mat3 CameraExtrinsics::rotation() const { return quat_to_matrix(q); }

CameraExtrinsics CameraExtrinsics::from_rotation(const Mat3& r,
                                                 const Vec3& t) {
  CameraExtrinsics e;
  e.q = matrix_to_quat(r);
  e.t = t;
  return e;
}

std::array<double, 9> Camera9Dof::vector() const {
  return {t.x(), t.y(), t.z(), q(0), q(1), q(2), q(3), f.x(), f.y()};
}

Camera9Dof to_camera9dof(const CameraIntrinsics& intr,
                         const CameraExtrinsics& extr) {
  Camera9Dof cam;
  cam.t = extr.t;
  cam.q = canonical_quat(extr.q);
  cam.f = intr.fov();
  return cam;
}

std::pair<CameraIntrinsics, CameraExtrinsics> from_camera9dof(
    const Camera9Dof& cam, int width, int height) {
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.fx = width / (2.0 * std::tan(cam.f.x() / 2.0));
  intr.fy = height / (2.0 * std::tan(cam.f.y() / 2.0));
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  intr.skew = 0.0;
  intr.validate();
  CameraExtrinsics extr;
  extr.q = canonical_quat(cam.q);
  extr.t = cam.t;
  return {intr, extr};
}

RayMap::RayMap(int width, int height) : width(width), height(height) {
  origins.assign(pixel_count() * 3, 0.0);
  directions.assign(pixel_count() * 3, 0.0);
}

Vec3 RayMap::origin_at(int v, int u) const {
  const std::size_t i = (static_cast<std::size_t>(v) * width + u) * 3;
  return {origins[i], origins[i + 1], origins[i + 2]};
}

Vec3 RayMap::direction_at(int v, int u) const {
  const std::size_t i = (static_cast<std::size_t>(v) * width + u) * 3;
  return {directions[i], directions[i + 1], directions[i + 2]};
}

void RayMap::set_origin(int v, int u, const Vec3& o) {
  const std::size_t i = (static_cast<std::size_t>(v) * width + u) * 3;
  origins[i] = o.x();
  origins[i + 1] = o.y();
  origins[i + 2] = o.z();
}

void RayMap::set_direction(int v, int u, const Vec3& d) {
  const std::size_t i = (static_cast<std::size_t>(v) * width + u) * 3;
  directions[i] = d.x();
  directions[i + 1] = d.y();
  directions[i + 2] = d.z();
}

DepthMap::DepthMap(int width, int height) : width(width), height(height) {
  values.assign(pixel_count(), kNaN);
  mask.assign(pixel_count(), 0);
}

DepthMap DepthMap::constant(int width, int height, double value) {
  DepthMap d(width, height);
  for (std::size_t i = 0; i < d.pixel_count(); ++i) {
    d.values[i] = value;
    d.mask[i] = 1;
  }
  return d;
}

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (std::uint8_t m : mask) n += m != 0;
  return n;
}

void DepthMap::set(int v, int u, double value) {
  const std::size_t i = static_cast<std::size_t>(v) * width + u;
  values[i] = value;
  mask[i] = 1;
}

void DepthMap::set_invalid(int v, int u) {
  const std::size_t i = static_cast<std::size_t>(v) * width + u;
  values[i] = kNaN;
  mask[i] = 0;
}

Vec4 canonical_quat(Vec4 q) {
  const double n = q.norm();
  if (n > 0.0) q /= n;
  if (q(0) < 0.0) return -q;
  if (q(0) > 0.0) return q;
  // w == 0: first nonzero of (x, y, z) made positive.
  for (int i = 1; i < 4; ++i) {
    if (q(i) != 0.0) return q(i) > 0.0 ? q : Vec4(-q);
  }
  return q;
}

Mat3 quat_to_matrix(const Vec4& q_wxyz) {
  const double n = q_wxyz.norm();
  if (std::abs(n - 1.0) > 1e-9)
    throw std::invalid_argument("quat_to_matrix: quaternion must be unit norm");
  return Eigen::Quaterniond(q_wxyz(0), q_wxyz(1), q_wxyz(2), q_wxyz(3))
      .toRotationMatrix();
}

Vec4 matrix_to_quat(const Mat3& r) {
  if ((r.transpose() * r - Mat3::Identity()).norm() > 1e-6 ||
      r.determinant() < 0.0)
    throw std::invalid_argument("matrix_to_quat: not a rotation matrix");
  const Eigen::Quaterniond q(r);
  return canonical_quat(Vec4(q.w(), q.x(), q.y(), q.z()));
}

double rotation_geodesic_deg(const Mat3& ra, const Mat3& rb) {
  if ((ra.transpose() * ra - Mat3::Identity()).norm() > 1e-6 ||
      (rb.transpose() * rb - Mat3::Identity()).norm() > 1e-6)
    throw std::invalid_argument("rotation_geodesic_deg: inputs must be "
                                "orthonormal");
  // Chord form: |Ra - Rb|_F = 2*sqrt(2)*sin(theta/2). Unlike acos of the
  // trace it is exact for identical inputs and keeps full precision on
  // small angles; past 90 degrees (trace < 1, chord^2 > 4) acos of the
  // trace is the well-conditioned branch.
  const double chord = (ra - rb).norm();
  double theta;
  if (chord * chord <= 4.0) {
    theta = 2.0 * std::asin(std::min(1.0, chord / (2.0 * std::numbers::sqrt2)));
  } else {
    const double c = ((ra.transpose() * rb).trace() - 1.0) / 2.0;
    theta = std::acos(std::min(1.0, std::max(-1.0, c)));
  }
  return theta * 180.0 / std::numbers::pi;
}

RayMap build_ray_map(const CameraIntrinsics& intr,
                     const CameraExtrinsics& extr) {
  intr.validate();
  RayMap rays(intr.width, intr.height);
  const Mat3 k_inv = intr.inverse_matrix();
  const Mat3 r = extr.rotation();
  const Mat3 rk_inv = r * k_inv;
  const Vec3 t = extr.t;
  const int h = intr.height, w = intr.width;
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
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
  const int h = depth.height, w = depth.width;
  std::vector<Vec3> buffer(depth.pixel_count());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!depth.valid(v, u)) continue;
      buffer[static_cast<std::size_t>(v) * w + u] =
          rays.origin_at(v, u) + depth.at(v, u) * rays.direction_at(v, u);
    }
  }
  PointCloud cloud;
  cloud.points.reserve(depth.valid_count());
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (depth.valid(v, u))
        cloud.points.push_back(buffer[static_cast<std::size_t>(v) * w + u]);
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
  const int h = depth.height, w = depth.width;
  std::vector<Vec3> buffer(depth.pixel_count());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!depth.valid(v, u)) continue;
      const Vec3 cam_pt = depth.at(v, u) * (k_inv * Vec3(u, v, 1.0));
      buffer[static_cast<std::size_t>(v) * w + u] = r * cam_pt + t;
    }
  }
  PointCloud cloud;
  cloud.points.reserve(depth.valid_count());
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (depth.valid(v, u))
        cloud.points.push_back(buffer[static_cast<std::size_t>(v) * w + u]);
  return cloud;
}

}  // namespace visgeom
