#pragma once

#include <utility>
#include <vector>

#include "visgeom/geometry.hpp"

namespace visgeom {

struct PoseAucReport {
  double auc = 0.0;            // percentage in [0, 100]
  double threshold_deg = 0.0;  // tau_max of the grid
  // curve[k] = min(acc_R, acc_T) at tau = tau_max * (k+1) / grid size.
  std::vector<double> curve;
};

struct ReconReport {
  double accuracy_mean = 0.0;      // mean dist(recon -> gt)
  double completeness_mean = 0.0;  // mean dist(gt -> recon)
  double chamfer = 0.0;            // (accuracy + completeness) / 2
  double precision = 0.0;          // percent of recon points within d of gt
  double recall = 0.0;             // percent of gt points within d of recon
  double f1 = 0.0;                 // harmonic mean, 0 when p + r = 0
  double threshold = 0.0;          // the distance threshold d
};

struct DepthReport {
  double delta1 = 0.0;  // fraction with max(pred/gt, gt/pred) < 1.25
  double absrel = 0.0;  // mean |pred - gt| / gt
  double sqrel = 0.0;   // mean (pred - gt)^2 / gt
};

// (rra_deg, rta_deg) for every unordered pair i < j in lexicographic order.
// Relative rotation R_i^-1 R_j and relative translation R_i^T (t_j - t_i) are
// compared between pred and gt; rta is the angle between the unit relative
// translations (0 deg when both norms < 1e-12, 180 deg when exactly one is).
std::vector<std::pair<double, double>> relative_pose_errors(
    const std::vector<CameraExtrinsics>& pred,
    const std::vector<CameraExtrinsics>& gt);

// Accuracy-threshold curve over a uniform grid of `grid_steps` thresholds up
// to tau_max_deg; acc(tau) counts pairs with error <= tau; auc = 100 * mean
// of min(acc_R, acc_T) over the grid.
PoseAucReport pose_auc(const std::vector<CameraExtrinsics>& pred,
                       const std::vector<CameraExtrinsics>& gt,
                       double tau_max_deg, int grid_steps = 1000);

// Exact Euclidean distance from each point of `a` to its nearest neighbor in
// `b` (KD-tree accelerated; equal to brute force).
std::vector<double> cloud_nn_distances(const PointCloud& a,
                                       const PointCloud& b);

// Point-cloud benchmark metrics at distance threshold d (strict <).
ReconReport recon_metrics(const PointCloud& recon, const PointCloud& gt,
                          double d);

// delta1 / AbsRel / SqRel over jointly-valid pixels.
DepthReport depth_metrics(const DepthMap& pred, const DepthMap& gt);

}  // namespace visgeom
