#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "visgeom/errors.hpp"
#include "visgeom/geometry.hpp"
#include "visgeom/rng.hpp"

using namespace visgeom;

namespace {

Mat3 rot_z(double deg) {
  const double a = deg * std::numbers::pi / 180.0;
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

CameraIntrinsics identity_intrinsics(int width, int height) {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 1.0;
  intr.cx = intr.cy = 0.0;
  intr.width = width;
  intr.height = height;
  return intr;
}

CameraIntrinsics random_intrinsics(Xoshiro256& rng, int width, int height) {
  CameraIntrinsics intr;
  intr.fx = rng.uniform(100.0, 2000.0);
  intr.fy = rng.uniform(100.0, 2000.0);
  intr.cx = rng.uniform(0.3, 0.7) * width;
  intr.cy = rng.uniform(0.3, 0.7) * height;
  intr.width = width;
  intr.height = height;
  return intr;
}

CameraExtrinsics random_extrinsics(Xoshiro256& rng) {
  Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  CameraExtrinsics extr;
  extr.q = canonical_quat(q);
  extr.t = Vec3(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0),
                rng.uniform(-5.0, 5.0));
  return extr;
}

}  // namespace

TEST_CASE("build_ray_map identity camera") {
  const RayMap rays = build_ray_map(identity_intrinsics(5, 4), {});
  CHECK(rays.width == 5);
  CHECK(rays.height == 4);
  // pixel (u=3, v=2) -> direction (3,2,1), origin (0,0,0)
  CHECK(rays.direction_at(2, 3) == Vec3(3, 2, 1));
  CHECK(rays.origin_at(2, 3) == Vec3(0, 0, 0));
}

TEST_CASE("build_ray_map principal point maps to optical axis") {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 2.0;
  intr.cx = intr.cy = 1.0;
  intr.width = intr.height = 3;
  CameraExtrinsics extr;
  extr.t = Vec3(5, 0, 0);
  const RayMap rays = build_ray_map(intr, extr);
  CHECK(rays.direction_at(1, 1).isApprox(Vec3(0, 0, 1), 1e-15));
  CHECK(rays.origin_at(1, 1) == Vec3(5, 0, 0));
}

TEST_CASE("ray map origins are constant and equal the camera center") {
  Xoshiro256 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const CameraIntrinsics intr = random_intrinsics(rng, 17, 13);
    const CameraExtrinsics extr = random_extrinsics(rng);
    const RayMap rays = build_ray_map(intr, extr);
    for (int v = 0; v < rays.height; ++v)
      for (int u = 0; u < rays.width; ++u)
        CHECK(rays.origin_at(v, u) == extr.t);
    // Direction at the principal point is the third column of R: K^-1 *
    // (cx, cy, 1) = (0, 0, 1). The principal point is non-integral here, so
    // evaluate through the matrices directly.
    const Vec3 d = extr.rotation() * intr.inverse_matrix() *
                   Vec3(intr.cx, intr.cy, 1.0);
    CHECK(d.isApprox(extr.rotation().col(2), 1e-12));
  }
}

TEST_CASE("directions are not unit-normalized") {
  const RayMap rays = build_ray_map(identity_intrinsics(8, 8), {});
  CHECK(rays.direction_at(7, 7).norm() > 1.5);
}

TEST_CASE("unproject constant depth on identity camera") {
  const RayMap rays = build_ray_map(identity_intrinsics(4, 3), {});
  const DepthMap depth = DepthMap::constant(4, 3, 1.0);
  const PointCloud cloud = unproject(depth, rays);
  REQUIRE(cloud.size() == 12);
  std::size_t i = 0;
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 4; ++u) CHECK(cloud.points[i++] == Vec3(u, v, 1));
}

TEST_CASE("unproject single hand ray") {
  RayMap rays(1, 1);
  rays.set_origin(0, 0, Vec3(1, 0, 0));
  rays.set_direction(0, 0, Vec3(0, 0, 1));
  const DepthMap depth = DepthMap::constant(1, 1, 2.0);
  const PointCloud cloud = unproject(depth, rays);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0] == Vec3(1, 0, 2));
}

TEST_CASE("unproject skips invalid pixels in row-major order") {
  const RayMap rays = build_ray_map(identity_intrinsics(3, 3), {});
  DepthMap depth = DepthMap::constant(3, 3, 1.0);
  depth.set_invalid(0, 1);
  depth.set_invalid(2, 2);
  const PointCloud cloud = unproject(depth, rays);
  REQUIRE(cloud.size() == 7);
  CHECK(cloud.points[0] == Vec3(0, 0, 1));
  CHECK(cloud.points[1] == Vec3(2, 0, 1));  // (1,0) was dropped
  CHECK(cloud.points.back() == Vec3(1, 2, 1));
}

TEST_CASE("unproject shape mismatch throws") {
  const RayMap rays = build_ray_map(identity_intrinsics(3, 3), {});
  const DepthMap depth = DepthMap::constant(2, 3, 1.0);
  CHECK_THROWS_AS(unproject(depth, rays), ShapeMismatch);
}

TEST_CASE("unproject depth linearity") {
  Xoshiro256 rng(12);
  const CameraIntrinsics intr = random_intrinsics(rng, 9, 7);
  const CameraExtrinsics extr = random_extrinsics(rng);
  const RayMap rays = build_ray_map(intr, extr);
  DepthMap depth(9, 7);
  for (int v = 0; v < 7; ++v)
    for (int u = 0; u < 9; ++u) depth.set(v, u, rng.uniform(0.5, 3.0));
  const double alpha = 2.25;
  DepthMap scaled = depth;
  for (int v = 0; v < 7; ++v)
    for (int u = 0; u < 9; ++u) scaled.set(v, u, alpha * depth.at(v, u));
  const PointCloud base = unproject(depth, rays);
  const PointCloud big = unproject(scaled, rays);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const Vec3 expected = extr.t + alpha * (base.points[i] - extr.t);
    CHECK((big.points[i] - expected).norm() < 1e-9);
  }
}

TEST_CASE("unproject_via_matrix trivial cases") {
  // identity camera, D = 1 -> grid points
  const PointCloud grid = unproject_via_matrix(DepthMap::constant(3, 2, 1.0),
                                               identity_intrinsics(3, 2), {});
  REQUIRE(grid.size() == 6);
  CHECK(grid.points[4] == Vec3(1, 1, 1));

  // R = 90 degrees about z, pixel (1,0), D = 1 -> (0,1,1)
  CameraExtrinsics extr = CameraExtrinsics::from_rotation(rot_z(90.0), {0, 0, 0});
  const PointCloud rotated = unproject_via_matrix(
      DepthMap::constant(2, 1, 1.0), identity_intrinsics(2, 1), extr);
  REQUIRE(rotated.size() == 2);
  CHECK((rotated.points[1] - Vec3(0, 1, 1)).norm() < 1e-15);
}

TEST_CASE("unproject_via_matrix equals unproject of build_ray_map") {
  Xoshiro256 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const CameraIntrinsics intr = random_intrinsics(rng, 12, 10);
    const CameraExtrinsics extr = random_extrinsics(rng);
    DepthMap depth(12, 10);
    for (int v = 0; v < 10; ++v)
      for (int u = 0; u < 12; ++u) depth.set(v, u, rng.uniform(0.2, 8.0));
    depth.set_invalid(3, 4);
    const PointCloud a = unproject_via_matrix(depth, intr, extr);
    const PointCloud b = unproject(depth, build_ray_map(intr, extr));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK((a.points[i] - b.points[i]).norm() < 1e-12);
  }
}

TEST_CASE("quaternion to matrix trivia") {
  CHECK(quat_to_matrix(Vec4(1, 0, 0, 0)) == Mat3::Identity());
  CHECK(rotation_geodesic_deg(rot_z(77), rot_z(77)) == 0.0);
  CHECK(rotation_geodesic_deg(Mat3::Identity(), rot_z(30)) ==
        doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("quaternion round trip is hemisphere-canonical") {
  Xoshiro256 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    const Vec4 back = matrix_to_quat(quat_to_matrix(q));
    CHECK((back - canonical_quat(q)).norm() < 1e-9);
    CHECK(back(0) >= 0.0);
  }
}

TEST_CASE("canonical_quat tie-breaking at w == 0") {
  const Vec4 q = canonical_quat(Vec4(0.0, -1.0, 0.0, 0.0));
  CHECK(q == Vec4(0, 1, 0, 0));
  const Vec4 r = canonical_quat(Vec4(0.0, 0.0, -0.6, -0.8));
  CHECK(r(2) == doctest::Approx(0.6));
  CHECK(r(3) == doctest::Approx(0.8));
}

TEST_CASE("matrix_to_quat rejects non-orthonormal input") {
  CHECK_THROWS_AS(matrix_to_quat(Mat3::Identity() * 2.0),
                  std::invalid_argument);
  Mat3 reflection = Mat3::Identity();
  reflection(2, 2) = -1.0;
  CHECK_THROWS_AS(matrix_to_quat(reflection), std::invalid_argument);
}

TEST_CASE("quat_to_matrix rejects non-unit quaternions") {
  CHECK_THROWS_AS(quat_to_matrix(Vec4(2, 0, 0, 0)), std::invalid_argument);
}

TEST_CASE("intrinsics validate and inverse") {
  CameraIntrinsics bad;
  bad.fx = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  Xoshiro256 rng(15);
  CameraIntrinsics intr = random_intrinsics(rng, 64, 48);
  intr.skew = 3.5;
  CHECK((intr.matrix() * intr.inverse_matrix() - Mat3::Identity()).norm() <
        1e-12);
}

TEST_CASE("field of view formula") {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 100.0;
  intr.width = 200;
  intr.height = 100;
  const Eigen::Vector2d fov = intr.fov();
  CHECK(fov(0) == doctest::Approx(2.0 * std::atan(1.0)).epsilon(1e-14));
  CHECK(fov(1) == doctest::Approx(2.0 * std::atan(0.5)).epsilon(1e-14));
}

TEST_CASE("Camera9Dof round trip") {
  Xoshiro256 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    CameraIntrinsics intr = random_intrinsics(rng, 80, 60);
    intr.cx = 40.0;  // the 9-DoF vector assumes a centered principal point
    intr.cy = 30.0;
    const CameraExtrinsics extr = random_extrinsics(rng);
    const Camera9Dof v = to_camera9dof(intr, extr);
    const auto [intr2, extr2] = from_camera9dof(v, 80, 60);
    CHECK(intr2.fx == doctest::Approx(intr.fx).epsilon(1e-12));
    CHECK(intr2.fy == doctest::Approx(intr.fy).epsilon(1e-12));
    CHECK(intr2.cx == 40.0);
    CHECK(intr2.cy == 30.0);
    CHECK((extr2.q - extr.q).norm() < 1e-12);
    CHECK((extr2.t - extr.t).norm() == 0.0);
  }
}

TEST_CASE("DepthMap invalid pixels hold NaN and mask zero") {
  DepthMap depth(2, 2);
  CHECK(depth.valid_count() == 0);
  CHECK(std::isnan(depth.at(0, 0)));
  depth.set(0, 0, 1.5);
  CHECK(depth.valid_count() == 1);
  depth.set_invalid(0, 0);
  CHECK(!depth.valid(0, 0));
  CHECK(std::isnan(depth.at(0, 0)));
}
