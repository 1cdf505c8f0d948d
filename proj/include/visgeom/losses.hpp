#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "visgeom/geometry.hpp"

namespace visgeom {

// Value plus analytic gradient with respect to the prediction. Gradients are
// zero at masked-out entries. grad_conf is filled only by conf_depth_loss.
struct LossOutput {
  double value = 0.0;
  std::vector<double> grad_pred;
  std::vector<double> grad_conf;
};

// Four unnormalized normals sampled around a center pixel.
struct NeighborNormals {
  std::array<Vec3, 4> n;
};

// Mean L2 norm of all points across the given views; divides ground-truth
// signals before loss evaluation. Throws DegenerateFit when empty.
double scale_normalizer(const std::vector<PointCloud>& views);

// L_D = (1/Z) sum_p m_p (conf_p |pred_p - gt_p| - lambda_c log conf_p) over
// jointly-valid pixels. grad_pred = m conf sign(delta)/Z (sign(0) = 0);
// grad_conf = m (|delta| - lambda_c/conf)/Z. conf must be positive on the
// valid set.
LossOutput conf_depth_loss(const DepthMap& pred, const DepthMap& gt,
                           const std::vector<double>& conf, double lambda_c);

// Mean l1 over entries with mask != 0; subgradient sign(delta)/count.
LossOutput l1_map_loss(const std::vector<double>& pred,
                       const std::vector<double>& gt,
                       const std::vector<std::uint8_t>& mask);

// Forward-difference gradient matching: mean l1 of (dx pred - dx gt) over
// x-pairs with both pixels jointly valid, plus the analogous y term. A term
// with no valid pairs contributes 0; throws DegenerateFit when both are
// empty.
LossOutput gradient_loss(const DepthMap& pred, const DepthMap& gt);

// w_i = (sum_j ||n_j||) - ||n_i|| over all four normals, zeros included.
Eigen::Vector4d normal_weights(const NeighborNormals& nn);

// n_m = sum_i w_i n_i/||n_i|| where zero-norm normals are dropped from both
// the weight sum and the mean. Throws DegenerateFit when all four are zero.
Vec3 mean_normal(const NeighborNormals& nn);

// Distance-weighted normal loss: at each pixel whose 4-neighborhood is
// jointly valid, normals are cross products of consecutive neighbor
// differences ((E-C)x(N-C), (N-C)x(W-C), (W-C)x(S-C), (S-C)x(E-C)) of the
// unprojected points; the per-pixel term is E(nm_pred, nm_gt) + sum_i
// E(n_pred_i, n_gt_i) with E = arccos of the clamped cosine (radians), and
// the value is the mean over eligible pixels. Pixels where any normal or
// mean normal (either side) has zero norm are skipped. Gradient with respect
// to pred depth via the exact chain rule (forward-mode differentiation); the
// arccos derivative factor is clamped at |cos| <= 1 - 1e-9.
LossOutput normal_loss(const DepthMap& pred_depth, const DepthMap& gt_depth,
                       const RayMap& rays);

// Mean squared error over all entries; grad = 2 (pred - gt)/count.
LossOutput mask_mse_loss(const std::vector<double>& pred_mask,
                         const std::vector<double>& gt_mask);

struct Da3LossWeights {
  double alpha = 1.0;   // weight of L_grad
  double beta = 1.0;    // weight of L_C
  double lambda_c = 0.2;
};

// Inputs for the student objective. Ground-truth signals are expected
// pre-divided by scale_normalizer.
struct Da3LossInputs {
  DepthMap pred_depth, gt_depth;
  std::vector<double> conf;  // H*W, positive on the valid set
  RayMap pred_rays, gt_rays;
  // Dense point map H*W*3 row-major with a per-pixel mask (empty = all on).
  std::vector<double> pred_points, gt_points;
  std::vector<std::uint8_t> point_mask;
  Camera9Dof pred_camera, gt_camera;
};

struct Da3LossTerms {
  double total = 0.0;  // L_D + L_M + L_P + beta*L_C + alpha*L_grad
  LossOutput depth;    // L_D (grad_conf populated)
  // L_M gradient layout: all origin components (H*W*3 row-major) followed by
  // all direction components.
  LossOutput raymap;
  LossOutput points;  // L_P over the point map values
  LossOutput camera;  // L_C: mean l1 over the 9-DoF vector
  LossOutput grad;    // L_grad over pred depth
};

Da3LossTerms total_da3_loss(const Da3LossInputs& in,
                            const Da3LossWeights& weights = {});

struct TeacherLossInputs {
  DepthMap pred_depth, gt_depth;
  RayMap rays;
  std::vector<double> pred_sky, gt_sky;  // H*W, [0,1] vs binary
  std::vector<double> pred_obj, gt_obj;
};

struct TeacherLossTerms {
  double total = 0.0;  // 0.5 * L_grad + L_N + L_sky + L_obj
  LossOutput grad, normal, sky, obj;
  // The global-local alignment term is defined externally and not computed.
  bool gl_term_omitted = true;
};

TeacherLossTerms teacher_loss(const TeacherLossInputs& in);

// Values multiplied by f_c / f (mask unchanged). Default canonical focal
// length 300 pixels.
DepthMap canonical_depth_transform(const DepthMap& depth, double f,
                                   double f_c = 300.0);

// Natural-log parameterization of depth. Encoded maps hold log-depth, which
// may be non-positive; exp_decode restores metric depth.
DepthMap exp_encode(const DepthMap& depth);
DepthMap exp_decode(const DepthMap& encoded);

}  // namespace visgeom
