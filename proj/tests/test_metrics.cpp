#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "visgeom/alignment.hpp"
#include "visgeom/geometry.hpp"
#include "visgeom/errors.hpp"
#include "visgeom/metrics.hpp"
#include "visgeom/rng.hpp"
#include "visgeom/serial.hpp"

using namespace visgeom;

namespace {

Mat3 rot_z(double deg) {
  const double a = deg * std::numbers::pi / 180.0;
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

std::vector<CameraExtrinsics> random_trajectory(Xoshiro256& rng, int n) {
  std::vector<CameraExtrinsics> poses(n);
  for (CameraExtrinsics& p : poses) {
    Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    p.q = canonical_quat(q.normalized());
    p.t = Vec3(rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0),
               rng.uniform(-4.0, 4.0));
  }
  return poses;
}

PointCloud random_cloud(Xoshiro256& rng, int n) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.emplace_back(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                          rng.uniform(-3.0, 3.0));
  return c;
}

}  // namespace

TEST_CASE("relative_pose_errors trivia") {
  Xoshiro256 rng(51);
  const auto gt = random_trajectory(rng, 6);
  for (const auto& [rra, rta] : relative_pose_errors(gt, gt)) {
    CHECK(rra == 0.0);
    CHECK(rta == 0.0);
  }

  // A global similarity on the full pred set leaves all errors at zero.
  Sim3 g;
  g.s = 2.5;
  g.r = quat_to_matrix(canonical_quat(Vec4(1, 2, 3, 4).normalized()));
  g.t = Vec3(0.5, -2.0, 1.0);
  std::vector<CameraExtrinsics> pred(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) pred[i] = g.apply(gt[i]);
  // The chord-form angles keep ulp-level noise at ulp-level output, so a
  // similarity transform leaves errors at ~1e-13 degrees, not exact zero.
  for (const auto& [rra, rta] : relative_pose_errors(pred, gt)) {
    CHECK(rra < 1e-11);
    CHECK(rta < 1e-11);
  }
}

TEST_CASE("relative_pose_errors hand-built rotation perturbation") {
  std::vector<CameraExtrinsics> gt(3), pred(3);
  for (int i = 0; i < 3; ++i) {
    gt[i].t = Vec3(i, 0, 0);
    pred[i].t = Vec3(i, 0, 0);
  }
  pred[1] = CameraExtrinsics::from_rotation(rot_z(10.0), pred[1].t);
  const auto errors = relative_pose_errors(pred, gt);
  REQUIRE(errors.size() == 3);  // pairs (0,1), (0,2), (1,2)
  CHECK(errors[0].first == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(errors[1].first == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(errors[2].first == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("relative_pose_errors translation degeneracy rules") {
  // Identical centers in both -> rta 0; identical centers in gt only -> 180.
  std::vector<CameraExtrinsics> gt(2), pred(2);
  auto errors = relative_pose_errors(pred, gt);
  CHECK(errors[0].second == 0.0);

  pred[1].t = Vec3(1, 0, 0);
  errors = relative_pose_errors(pred, gt);
  CHECK(errors[0].second == 180.0);

  CHECK_THROWS_AS(
      relative_pose_errors(pred, std::vector<CameraExtrinsics>(3)),
      ShapeMismatch);
}

TEST_CASE("pose_auc trivia") {
  Xoshiro256 rng(52);
  const auto gt = random_trajectory(rng, 5);
  const PoseAucReport rep = pose_auc(gt, gt, 30.0);
  CHECK(rep.auc == 100.0);
  for (std::size_t i = 1; i < rep.curve.size(); ++i)
    CHECK(rep.curve[i] >= rep.curve[i - 1]);
}

TEST_CASE("pose_auc step function at half the threshold") {
  // Two poses; pred relative rotation off by exactly 15 degrees, centers
  // matching: curve = acc_R, auc = fraction of the grid at tau >= 15.
  std::vector<CameraExtrinsics> gt(2), pred(2);
  gt[1].t = pred[1].t = Vec3(1, 0, 0);
  pred[1] = CameraExtrinsics::from_rotation(rot_z(15.0), pred[1].t);
  const PoseAucReport rep = pose_auc(pred, gt, 30.0);
  CHECK(std::abs(rep.auc - 50.0) <= 0.1 + 1e-9);
}

TEST_CASE("pose_auc min of the two accuracies dominates") {
  // Rotations agree (acc_R = 1); the single pair's translations are opposite
  // (rta = 180) so acc_T = 0 everywhere below 180.
  std::vector<CameraExtrinsics> gt(2), pred(2);
  gt[1].t = Vec3(1, 0, 0);
  pred[1].t = Vec3(-1, 0, 0);
  const PoseAucReport rep = pose_auc(pred, gt, 30.0);
  CHECK(rep.auc == 0.0);
}

TEST_CASE("cloud_nn_distances trivia and brute-force equivalence") {
  Xoshiro256 rng(53);
  const PointCloud a = random_cloud(rng, 500);
  for (const double d : cloud_nn_distances(a, a)) CHECK(d == 0.0);

  PointCloud q, b;
  q.points = {Vec3(0, 0, 0)};
  b.points = {Vec3(1, 0, 0), Vec3(0, 2, 0)};
  const auto d = cloud_nn_distances(q, b);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == 1.0);

  const PointCloud c = random_cloud(rng, 377);
  const auto fast = cloud_nn_distances(a, c);
  const auto slow = serial::cloud_nn_distances(a, c);
  REQUIRE(fast.size() == slow.size());
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == slow[i]);

  CHECK_THROWS_AS(cloud_nn_distances(PointCloud{}, b), DegenerateFit);
  CHECK_THROWS_AS(cloud_nn_distances(q, PointCloud{}), DegenerateFit);
}

TEST_CASE("recon_metrics trivia") {
  Xoshiro256 rng(54);
  const PointCloud gt = random_cloud(rng, 60);
  const ReconReport same = recon_metrics(gt, gt, 0.05);
  CHECK(same.precision == 100.0);
  CHECK(same.recall == 100.0);
  CHECK(same.f1 == 100.0);
  CHECK(same.chamfer == 0.0);
  CHECK(same.threshold == 0.05);
}

TEST_CASE("recon_metrics shifted sparse cloud scores zero") {
  // Grid spacing 1 with threshold d = 0.2: shifting by 2d = 0.4 puts every
  // point farther than d from the other cloud.
  PointCloud gt;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gt.points.emplace_back(i, j, 0.0);
  PointCloud shifted = gt;
  for (Vec3& p : shifted.points) p.x() += 0.4;
  const ReconReport rep = recon_metrics(shifted, gt, 0.2);
  CHECK(rep.precision == 0.0);
  CHECK(rep.recall == 0.0);
  CHECK(rep.f1 == 0.0);
}

TEST_CASE("recon_metrics hand-counted outlier") {
  Xoshiro256 rng(55);
  PointCloud gt = random_cloud(rng, 9);
  PointCloud recon = gt;
  recon.points.emplace_back(100.0, 100.0, 100.0);
  const ReconReport rep = recon_metrics(recon, gt, 0.01);
  CHECK(rep.precision == doctest::Approx(90.0).epsilon(1e-12));
  CHECK(rep.recall == 100.0);
  const double f1 = 2.0 * 90.0 * 100.0 / 190.0;
  CHECK(rep.f1 == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("recon_metrics swap symmetry") {
  Xoshiro256 rng(56);
  const PointCloud a = random_cloud(rng, 80);
  const PointCloud b = random_cloud(rng, 70);
  const ReconReport ab = recon_metrics(a, b, 0.5);
  const ReconReport ba = recon_metrics(b, a, 0.5);
  CHECK(ab.precision == ba.recall);
  CHECK(ab.recall == ba.precision);
  CHECK(ab.accuracy_mean == ba.completeness_mean);
  CHECK(ab.completeness_mean == ba.accuracy_mean);
  CHECK(ab.chamfer == ba.chamfer);
  CHECK(ab.chamfer ==
        doctest::Approx((ab.accuracy_mean + ab.completeness_mean) / 2.0)
            .epsilon(1e-15));
}

TEST_CASE("depth_metrics trivia and hand arithmetic") {
  DepthMap gt(2, 1);
  gt.set(0, 0, 2.0);
  gt.set(0, 1, 2.0);

  const DepthReport same = depth_metrics(gt, gt);
  CHECK(same.delta1 == 1.0);
  CHECK(same.absrel == 0.0);
  CHECK(same.sqrel == 0.0);

  DepthMap scaled = gt;
  scaled.set(0, 0, 2.0 * 1.3);
  scaled.set(0, 1, 2.0 * 1.3);
  const DepthReport thirty = depth_metrics(scaled, gt);
  CHECK(thirty.delta1 == 0.0);
  CHECK(thirty.absrel == doctest::Approx(0.3).epsilon(1e-12));

  DepthMap pred(2, 1);
  pred.set(0, 0, 1.0);
  pred.set(0, 1, 2.0);
  const DepthReport hand = depth_metrics(pred, gt);
  CHECK(hand.absrel == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(hand.sqrel == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(hand.delta1 == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("depth_metrics ignores invalid pixels entirely") {
  Xoshiro256 rng(57);
  DepthMap pred(6, 6), gt(6, 6);
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 6; ++u) {
      pred.set(v, u, rng.uniform(1.0, 5.0));
      gt.set(v, u, rng.uniform(1.0, 5.0));
    }
  const DepthReport base = depth_metrics(pred, gt);

  // Invalidate a pixel in gt and plant garbage in pred there: no effect
  // beyond removing the pixel; planting garbage at a removed pixel of pred
  // changes nothing at all.
  DepthMap gt2 = gt;
  gt2.set_invalid(2, 3);
  DepthMap pred2 = pred;
  pred2.set(2, 3, 1e12);
  const DepthReport without = depth_metrics(pred2, gt2);
  DepthMap pred3 = pred;
  pred3.set_invalid(2, 3);
  const DepthReport without2 = depth_metrics(pred3, gt2);
  CHECK(without.delta1 == without2.delta1);
  CHECK(without.absrel == without2.absrel);
  CHECK(without.sqrel == without2.sqrel);
  CHECK(base.absrel != without.absrel);  // the pixel did participate before

  DepthMap empty(3, 3);
  CHECK_THROWS_AS(depth_metrics(empty, empty), DegenerateFit);
}

TEST_CASE("depth_metrics counts non-positive predictions as inaccurate") {
  DepthMap pred(2, 1), gt(2, 1);
  pred.set(0, 0, -1.0);
  pred.set(0, 1, 2.0);
  gt.set(0, 0, 2.0);
  gt.set(0, 1, 2.0);
  const DepthReport rep = depth_metrics(pred, gt);
  CHECK(rep.delta1 == 0.5);
}
