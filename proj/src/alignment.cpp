#include "visgeom/alignment.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "visgeom/errors.hpp"
#include "visgeom/rng.hpp"

namespace visgeom {

namespace {

struct JointSamples {
  std::vector<double> pred, gt;
  std::vector<std::size_t> pixel;  // flat row-major index into the maps
};

JointSamples collect_joint_valid(const DepthMap& pred, const DepthMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw ShapeMismatch("scale-shift alignment: depth map shapes differ");
  JointSamples s;
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u)
      if (pred.valid(v, u) && gt.valid(v, u)) {
        s.pred.push_back(pred.at(v, u));
        s.gt.push_back(gt.at(v, u));
        s.pixel.push_back(static_cast<std::size_t>(v) * pred.width + u);
      }
  return s;
}

// Unclamped affine LSQ through the paired samples, centered for stability.
// The slope may come out non-positive; callers apply their own policy.
ScaleShift fit_affine_raw(const std::vector<double>& p,
                          const std::vector<double>& g) {
  const std::size_t n = p.size();
  if (n < 2)
    throw DegenerateFit("scale-shift fit: fewer than 2 valid pixels");
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  if (*lo == *hi)
    throw DegenerateFit("scale-shift fit: constant prediction");
  double mp = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += p[i];
    mg += g[i];
  }
  mp /= static_cast<double>(n);
  mg /= static_cast<double>(n);
  double spp = 0.0, spg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = p[i] - mp;
    spp += dp * dp;
    spg += dp * (g[i] - mg);
  }
  if (!(spp > 0.0))
    throw DegenerateFit("scale-shift fit: zero prediction variance");
  const double s = spg / spp;
  return ScaleShift{s, mg - s * mp};
}

ScaleShift clamp_scale(ScaleShift f, double mp, double mg) {
  if (f.s < 1e-12) {
    f.s = 1e-12;
    f.t = mg - f.s * mp;  // best shift for the clamped slope
  }
  return f;
}

ScaleShift fit_affine_clamped(const std::vector<double>& p,
                              const std::vector<double>& g) {
  const ScaleShift raw = fit_affine_raw(p, g);
  double mp = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mp += p[i];
    mg += g[i];
  }
  const double n = static_cast<double>(p.size());
  return clamp_scale(raw, mp / n, mg / n);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CameraExtrinsics Sim3::apply(const CameraExtrinsics& pose) const {
  return CameraExtrinsics::from_rotation(r * pose.rotation(),
                                         s * (r * pose.t) + t);
}

Sim3 Sim3::inverse() const {
  Sim3 inv;
  inv.s = 1.0 / s;
  inv.r = r.transpose();
  inv.t = -(inv.r * t) / s;
  return inv;
}

ScaleShift fit_scale_shift_lsq(const DepthMap& pred, const DepthMap& gt) {
  const JointSamples samples = collect_joint_valid(pred, gt);
  return fit_affine_clamped(samples.pred, samples.gt);
}

RansacScaleShift ransac_scale_shift(const DepthMap& pred, const DepthMap& gt,
                                    const RansacConfig& cfg) {
  if (cfg.iterations < 1)
    throw Error("ransac_scale_shift: iterations must be >= 1");
  const JointSamples samples = collect_joint_valid(pred, gt);
  const std::size_t n = samples.pred.size();
  if (n < 2)
    throw DegenerateFit("ransac_scale_shift: fewer than 2 valid pixels");
  const std::size_t sample_size =
      cfg.sample_size > 0 ? static_cast<std::size_t>(cfg.sample_size) : 2;
  if (sample_size < 2 || sample_size > n)
    throw Error("ransac_scale_shift: invalid sample size");

  Xoshiro256 rng(cfg.seed);

  bool have_best = false;
  std::size_t best_count = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  ScaleShift best_model;
  std::vector<std::uint8_t> best_inliers;

  std::vector<double> sub_p(sample_size), sub_g(sample_size);
  std::vector<double> residual(n), deviation(n);
  std::vector<std::uint8_t> inlier(n);

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::vector<std::size_t> pick =
        rng.sample_without_replacement(n, sample_size);
    for (std::size_t i = 0; i < sample_size; ++i) {
      sub_p[i] = samples.pred[pick[i]];
      sub_g[i] = samples.gt[pick[i]];
    }
    ScaleShift cand;
    try {
      cand = fit_affine_raw(sub_p, sub_g);
    } catch (const DegenerateFit&) {
      continue;  // coincident prediction values in the sample
    }
    if (!(cand.s > 0.0) || !std::isfinite(cand.s) || !std::isfinite(cand.t))
      continue;

    for (std::size_t i = 0; i < n; ++i)
      residual[i] = cand.s * samples.pred[i] + cand.t - samples.gt[i];
    const double med = median_of(residual);
    double mad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      deviation[i] = std::abs(residual[i] - med);
      mad += deviation[i];
    }
    mad /= static_cast<double>(n);

    std::size_t count = 0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inlier[i] = deviation[i] <= mad ? 1 : 0;
      if (inlier[i]) {
        ++count;
        sq_sum += residual[i] * residual[i];
      }
    }
    const double rmse =
        count > 0 ? std::sqrt(sq_sum / static_cast<double>(count)) : 0.0;

    if (!have_best || count > best_count ||
        (count == best_count && rmse < best_rmse)) {
      have_best = true;
      best_count = count;
      best_rmse = rmse;
      best_model = cand;
      best_inliers = inlier;
    }
  }

  if (!have_best)
    throw DegenerateFit(
        "ransac_scale_shift: no sample yielded a positive finite scale");
  const auto min_inliers = static_cast<std::size_t>(
      std::ceil(cfg.min_inlier_fraction * static_cast<double>(n)));
  if (best_count < std::max<std::size_t>(2, min_inliers))
    throw DegenerateFit("ransac_scale_shift: inlier fraction below minimum");

  // Refit on the winning inlier set; keep the candidate if the refit is
  // degenerate (e.g. the inliers share one prediction value).
  std::vector<double> in_p, in_g;
  in_p.reserve(best_count);
  in_g.reserve(best_count);
  for (std::size_t i = 0; i < n; ++i)
    if (best_inliers[i]) {
      in_p.push_back(samples.pred[i]);
      in_g.push_back(samples.gt[i]);
    }
  ScaleShift refit = best_model;
  try {
    refit = fit_affine_clamped(in_p, in_g);
  } catch (const DegenerateFit&) {
  }

  RansacScaleShift result;
  result.model = refit;
  result.inlier_count = best_count;
  result.valid_count = n;
  result.inliers.assign(
      static_cast<std::size_t>(pred.width) * pred.height, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (best_inliers[i]) result.inliers[samples.pixel[i]] = 1;
  return result;
}

Sim3 umeyama_sim3(const PointCloud& src, const PointCloud& dst,
                  bool with_scale) {
  const std::size_t n = src.points.size();
  if (n != dst.points.size())
    throw ShapeMismatch("umeyama_sim3: point counts differ");
  if (n < 3)
    throw DegenerateFit("umeyama_sim3: need at least 3 correspondences");

  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += src.points[i];
    mu_d += dst.points[i];
  }
  mu_s /= static_cast<double>(n);
  mu_d /= static_cast<double>(n);

  double var_s = 0.0;
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 xs = src.points[i] - mu_s;
    const Vec3 yd = dst.points[i] - mu_d;
    var_s += xs.squaredNorm();
    cov += yd * xs.transpose();
  }
  var_s /= static_cast<double>(n);
  cov /= static_cast<double>(n);
  if (!(var_s > 0.0))
    throw DegenerateFit("umeyama_sim3: coincident source points");

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0))
    throw DegenerateFit("umeyama_sim3: degenerate (collinear) points");

  // Reflection correction: flip the smallest singular direction when the
  // plain product would be a reflection.
  double d3 = 1.0;
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    d3 = -1.0;
  Mat3 s_fix = Mat3::Identity();
  s_fix(2, 2) = d3;

  Sim3 out;
  out.r = svd.matrixU() * s_fix * svd.matrixV().transpose();
  out.s = with_scale ? (sv(0) + sv(1) + d3 * sv(2)) / var_s : 1.0;
  if (!(out.s > 0.0))
    throw DegenerateFit("umeyama_sim3: non-positive scale");
  out.t = mu_d - out.s * (out.r * mu_s);
  return out;
}

Sim3 ransac_trajectory_align(const std::vector<CameraExtrinsics>& pred,
                             const std::vector<CameraExtrinsics>& gt,
                             const RansacConfig& cfg) {
  if (cfg.iterations < 1)
    throw Error("ransac_trajectory_align: iterations must be >= 1");
  const std::size_t n = pred.size();
  if (n != gt.size())
    throw ShapeMismatch("ransac_trajectory_align: trajectory lengths differ");
  if (n < 3)
    throw DegenerateFit("ransac_trajectory_align: need at least 3 poses");

  std::vector<Vec3> pred_c(n), gt_c(n);
  for (std::size_t i = 0; i < n; ++i) {
    pred_c[i] = pred[i].t;
    gt_c[i] = gt[i].t;
  }

  std::size_t m = cfg.sample_size > 0 ? static_cast<std::size_t>(cfg.sample_size)
                                      : std::max<std::size_t>(3, (n + 4) / 5);
  if (m < 3 || m > n)
    throw Error("ransac_trajectory_align: invalid sample size");

  Xoshiro256 rng(cfg.seed);

  bool have_best = false;
  std::size_t best_count = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  Sim3 best_model;
  std::vector<std::size_t> best_inlier_idx;

  PointCloud sub_src, sub_dst;
  sub_src.points.resize(m);
  sub_dst.points.resize(m);
  std::vector<double> err(n);

  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<std::size_t> pick = rng.sample_without_replacement(n, m);
    // Canonical subset order so the fit is independent of draw order.
    std::sort(pick.begin(), pick.end());
    for (std::size_t i = 0; i < m; ++i) {
      sub_src.points[i] = pred_c[pick[i]];
      sub_dst.points[i] = gt_c[pick[i]];
    }
    Sim3 cand;
    try {
      cand = umeyama_sim3(sub_src, sub_dst, /*with_scale=*/true);
    } catch (const DegenerateFit&) {
      continue;
    }

    for (std::size_t i = 0; i < n; ++i)
      err[i] = (cand.apply(pred_c[i]) - gt_c[i]).norm();
    const double med = median_of(err);

    std::vector<std::size_t> inlier_idx;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (err[i] < med) {
        inlier_idx.push_back(i);
        sq_sum += err[i] * err[i];
      }
    const double rmse =
        inlier_idx.empty()
            ? 0.0
            : std::sqrt(sq_sum / static_cast<double>(inlier_idx.size()));

    if (!have_best || inlier_idx.size() > best_count ||
        (inlier_idx.size() == best_count && rmse < best_rmse)) {
      have_best = true;
      best_count = inlier_idx.size();
      best_rmse = rmse;
      best_model = cand;
      best_inlier_idx = std::move(inlier_idx);
    }
  }

  if (!have_best)
    throw DegenerateFit("ransac_trajectory_align: no valid candidate");

  if (best_count >= 3) {
    PointCloud in_src, in_dst;
    in_src.points.reserve(best_count);
    in_dst.points.reserve(best_count);
    for (const std::size_t i : best_inlier_idx) {
      in_src.points.push_back(pred_c[i]);
      in_dst.points.push_back(gt_c[i]);
    }
    try {
      return umeyama_sim3(in_src, in_dst, /*with_scale=*/true);
    } catch (const DegenerateFit&) {
    }
  }
  return best_model;
}

}  // namespace visgeom
