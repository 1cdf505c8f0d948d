#include "visgeom/camera_recovery.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "visgeom/errors.hpp"

namespace visgeom {

namespace {

// Uniform 2D grid of pixel indices covering the full extent, at most
// max_pixels entries, aspect-preserving.
std::vector<std::pair<int, int>> grid_subsample(int width, int height,
                                                int max_pixels) {
  const double total = static_cast<double>(width) * height;
  int ny = height, nx = width;
  if (total > max_pixels) {
    ny = std::max(
        2, static_cast<int>(std::floor(std::sqrt(max_pixels * height /
                                                 static_cast<double>(width)))));
    ny = std::min(ny, height);
    nx = std::max(2, std::min(width, max_pixels / ny));
  }
  std::vector<std::pair<int, int>> pixels;
  pixels.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < ny; ++i) {
    const int v = ny == 1 ? 0
                          : static_cast<int>(std::llround(
                                i * (height - 1) / double(ny - 1)));
    for (int j = 0; j < nx; ++j) {
      const int u = nx == 1 ? 0
                            : static_cast<int>(std::llround(
                                  j * (width - 1) / double(nx - 1)));
      pixels.emplace_back(v, u);
    }
  }
  return pixels;
}

}  // namespace

Vec3 recover_center(const RayMap& rays) {
  if (rays.pixel_count() == 0)
    throw DegenerateRays("recover_center: empty ray map");
  Vec3 sum = Vec3::Zero();
  for (int v = 0; v < rays.height; ++v)
    for (int u = 0; u < rays.width; ++u) sum += rays.origin_at(v, u);
  return sum / static_cast<double>(rays.pixel_count());
}

Homography3 solve_homography_dlt(const RayMap& rays,
                                 const DltOptions& options) {
  if (rays.pixel_count() < 4)
    throw DegenerateRays("solve_homography_dlt: need at least 4 pixels");

  std::vector<std::pair<int, int>> pixels;
  if (options.subsample && rays.width > 64 && rays.height > 64) {
    pixels = grid_subsample(rays.width, rays.height, options.max_pixels);
  } else {
    pixels.reserve(rays.pixel_count());
    for (int v = 0; v < rays.height; ++v)
      for (int u = 0; u < rays.width; ++u) pixels.emplace_back(v, u);
  }
  const std::size_t n = pixels.size();

  // Hartley normalization of pixel coordinates: center at the centroid and
  // scale so the mean distance is sqrt(2).
  double mu = 0.0, mv = 0.0;
  for (const auto& [v, u] : pixels) {
    mu += u;
    mv += v;
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double mean_dist = 0.0;
  for (const auto& [v, u] : pixels)
    mean_dist += std::hypot(u - mu, v - mv);
  mean_dist /= static_cast<double>(n);
  const double scale =
      mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 norm_t;
  norm_t << scale, 0.0, -scale * mu, 0.0, scale, -scale * mv, 0.0, 0.0, 1.0;

  // Direction magnitudes balanced by their mean norm; H is norm-constrained
  // so this does not change the solution direction.
  double mean_dir_norm = 0.0;
  for (const auto& [v, u] : pixels)
    mean_dir_norm += rays.direction_at(v, u).norm();
  mean_dir_norm /= static_cast<double>(n);
  if (!(mean_dir_norm > 0.0))
    throw DegenerateRays("solve_homography_dlt: zero ray directions");

  Eigen::MatrixXd a(2 * n, 9);
  std::size_t row = 0;
  for (const auto& [v, u] : pixels) {
    const Vec3 p = norm_t * Vec3(u, v, 1.0);
    const Vec3 d = rays.direction_at(v, u) / mean_dir_norm;
    // (H p) x d = 0, first two components.
    a.row(row) << 0.0, 0.0, 0.0,  //
        d.z() * p.x(), d.z() * p.y(), d.z() * p.z(),  //
        -d.y() * p.x(), -d.y() * p.y(), -d.y() * p.z();
    a.row(row + 1) << -d.z() * p.x(), -d.z() * p.y(), -d.z() * p.z(),  //
        0.0, 0.0, 0.0,  //
        d.x() * p.x(), d.x() * p.y(), d.x() * p.z();
    row += 2;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(7) < 1e-10 * sv(0) || !(sv(0) > 0.0))
    throw DegenerateRays(
        "solve_homography_dlt: rank-deficient constraint matrix");

  const Eigen::VectorXd h_vec = svd.matrixV().col(8);
  Mat3 h_norm;
  h_norm << h_vec(0), h_vec(1), h_vec(2), h_vec(3), h_vec(4), h_vec(5),
      h_vec(6), h_vec(7), h_vec(8);

  Mat3 h = h_norm * norm_t;
  if (std::abs(h.determinant()) < 1e-14 * std::pow(h.norm(), 3))
    throw DegenerateRays("solve_homography_dlt: homography is singular");
  h /= h.norm();
  if (h.determinant() < 0.0) h = -h;
  return Homography3{h};
}

std::pair<Mat3, Mat3> rq_decompose(const Mat3& h) {
  const double det = h.determinant();
  if (std::abs(det) < 1e-14 * std::pow(std::max(h.norm(), 1e-300), 3))
    throw DegenerateRays("rq_decompose: singular matrix");

  // Factor A (= +-H with det > 0) as upper-triangular times rotation using
  // Givens rotations that zero A(2,1), A(2,0), A(1,0) in turn.
  Mat3 a = det > 0.0 ? h : Mat3(-h);

  auto givens = [](double num, double den) {
    // c, s with num*c + den*s = 0, c^2 + s^2 = 1, and -num*s + den*c >= 0.
    const double r = std::hypot(num, den);
    if (r == 0.0) return std::make_pair(1.0, 0.0);
    return std::make_pair(den / r, -num / r);
  };

  // Qx acts on columns 1,2 and zeroes A(2,1).
  auto [cx, sx] = givens(a(2, 1), a(2, 2));
  Mat3 qx = Mat3::Identity();
  qx(1, 1) = cx;
  qx(1, 2) = -sx;
  qx(2, 1) = sx;
  qx(2, 2) = cx;
  a = a * qx;

  // Qy acts on columns 0,2 and zeroes A(2,0).
  auto [cy, sy] = givens(-a(2, 0), a(2, 2));
  Mat3 qy = Mat3::Identity();
  qy(0, 0) = cy;
  qy(0, 2) = sy;
  qy(2, 0) = -sy;
  qy(2, 2) = cy;
  a = a * qy;

  // Qz acts on columns 0,1 and zeroes A(1,0).
  auto [cz, sz] = givens(a(1, 0), a(1, 1));
  Mat3 qz = Mat3::Identity();
  qz(0, 0) = cz;
  qz(0, 1) = -sz;
  qz(1, 0) = sz;
  qz(1, 1) = cz;
  Mat3 k = a * qz;
  Mat3 r = (qx * qy * qz).transpose();

  // Force positive diagonal on K, compensating in R (D^2 = I).
  Mat3 d = Mat3::Identity();
  for (int i = 0; i < 3; ++i)
    if (k(i, i) < 0.0) d(i, i) = -1.0;
  k = k * d;
  r = d * r;
  if (r.determinant() < 0.0) {
    // Cannot occur for det(A) > 0 with diag(K) > 0; guard regardless.
    k = -k;
    r = -r;
  }

  // Clean the structurally-zero entries and normalize K(2,2) = 1.
  k(1, 0) = k(2, 0) = k(2, 1) = 0.0;
  if (!(k(2, 2) > 0.0))
    throw DegenerateRays("rq_decompose: singular matrix");
  k /= k(2, 2);
  return {k, r};
}

std::pair<CameraIntrinsics, CameraExtrinsics> recover_camera(
    const RayMap& rays, const DltOptions& options) {
  const Vec3 center = recover_center(rays);
  const Homography3 h = solve_homography_dlt(rays, options);
  // Directions satisfy d ~ R K^-1 p, so the intrinsics sit in the inverse:
  // H^-1 ~ K R^T, which RQ splits into the calibration and the transposed
  // camera rotation.
  const auto [k, rt] = rq_decompose(h.h.inverse());

  CameraIntrinsics intr;
  intr.fx = k(0, 0);
  intr.skew = k(0, 1);
  intr.cx = k(0, 2);
  intr.fy = k(1, 1);
  intr.cy = k(1, 2);
  intr.width = rays.width;
  intr.height = rays.height;
  intr.validate();

  CameraExtrinsics extr = CameraExtrinsics::from_rotation(rt.transpose(),
                                                          center);
  return {intr, extr};
}

}  // namespace visgeom
