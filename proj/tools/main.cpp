// visgeom: command-line frontend for the depth-ray geometry toolkit.
//
// Every command reads/writes the documented file formats (docs/FORMATS.md),
// prints a single JSON document (or JSON lines for `qa score`) to stdout, and
// exits 0 on success, 2 on a ParseError, 3 on degenerate geometry, 1 on any
// other failure. Given the same inputs, flags, seed, and any GEOM_THREADS
// value, output bytes are identical.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "visgeom/alignment.hpp"
#include "visgeom/camera_recovery.hpp"
#include "visgeom/dataqa.hpp"
#include "visgeom/errors.hpp"
#include "visgeom/fusion.hpp"
#include "visgeom/geometry.hpp"
#include "visgeom/io.hpp"
#include "visgeom/losses.hpp"
#include "visgeom/metrics.hpp"
#include "visgeom/rng.hpp"
#include "visgeom/synth.hpp"

namespace {

using nlohmann::ordered_json;
using namespace visgeom;

// JSON object key for a threshold: integral values print without a decimal
// point ("3", "30"), anything else uses shortest round-trip formatting.
std::string tau_key(double tau) {
  if (tau == std::floor(tau) && std::abs(tau) < 1e15)
    return std::to_string(static_cast<long long>(tau));
  return nlohmann::json(tau).dump();
}

void emit(const ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump() + "\n";
  std::cout << text;
  if (!out_path.empty()) write_file_text(out_path, text);
}

ordered_json sim3_to_json(const Sim3& g) {
  const Vec4 q = matrix_to_quat(g.r);
  ordered_json j;
  j["scale"] = g.s;
  j["quat"] = {q(0), q(1), q(2), q(3)};
  j["t"] = {g.t.x(), g.t.y(), g.t.z()};
  return j;
}

Sim3 sim3_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(e.byte > 0 ? e.byte - 1 : 0, "well-formed Sim3 JSON",
                     "malformed JSON");
  }
  try {
    Sim3 g;
    g.s = j.at("scale").get<double>();
    const auto& q = j.at("quat");
    const auto& t = j.at("t");
    if (!q.is_array() || q.size() != 4 || !t.is_array() || t.size() != 3)
      throw ParseError(0, "quat[4] and t[3] arrays", "wrong arity");
    Vec4 quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
              q[3].get<double>());
    g.r = quat_to_matrix(quat / quat.norm());
    g.t = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    if (!(g.s > 0.0))
      throw ParseError(0, "positive scale", std::to_string(g.s));
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "Sim3 fields {scale, quat, t}", e.what());
  }
}

std::vector<CameraExtrinsics> extrinsics_of(
    const std::vector<CameraRecord>& frames) {
  std::vector<CameraExtrinsics> out;
  out.reserve(frames.size());
  for (const CameraRecord& f : frames) out.push_back(f.extrinsics);
  return out;
}

DepthMap scale_depth_values(const DepthMap& depth, double s) {
  DepthMap out = depth;
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(v, u)) out.set(v, u, out.at(v, u) * s);
  return out;
}

// ---------------------------------------------------------------------------
// Fusion pipeline shared by `fuse` and `e2e-synth`: align every frame by the
// Sim3 (pose composed, depth scaled), size the volume to the union of the
// aligned point clouds padded by truncation + 2 voxels, then integrate in
// frame order.

struct FuseFrame {
  DepthMap depth;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

TsdfVolume fuse_frames(std::vector<FuseFrame> frames, const Sim3& sim3,
                       double voxel_size, double truncation) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  bool any = false;
  for (FuseFrame& f : frames) {
    f.extrinsics = sim3.apply(f.extrinsics);
    f.depth = scale_depth_values(f.depth, sim3.s);
    const PointCloud cloud =
        unproject(f.depth, build_ray_map(f.intrinsics, f.extrinsics));
    for (const Vec3& p : cloud.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      any = true;
    }
  }
  if (!any) throw DegenerateFit("fuse: no valid depth samples in any frame");

  const Vec3 pad = Vec3::Constant(truncation + 2.0 * voxel_size);
  TsdfVolume vol = tsdf_new(lo - pad, hi + pad, voxel_size, truncation);
  for (const FuseFrame& f : frames)
    tsdf_integrate(vol, f.depth, f.intrinsics, f.extrinsics);
  return vol;
}

// ---------------------------------------------------------------------------
// Finite-difference verification of every analytic loss gradient (the
// `losses check` command). Instances are seeded 8x8 maps; prediction offsets
// are quantized multiples of 0.05 so every l1 term sits either exactly on a
// kink (where sign(0) = 0 matches the symmetric difference) or far from one.

struct FdCheck {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = true;
};

double rel_gap(double analytic, double fd) {
  const double scale = std::max(std::abs(analytic), std::abs(fd));
  if (scale < 1e-6) return std::abs(analytic - fd) < 1e-9 ? 0.0 : 1.0;
  return std::abs(analytic - fd) / scale;
}

struct LossInstance {
  DepthMap gt;
  DepthMap pred;
  DepthMap pred_smooth;  // smooth offsets, for the normal loss
  std::vector<double> conf;
  RayMap rays;
};

LossInstance make_loss_instance(std::uint64_t seed) {
  const int n = 8;
  Xoshiro256 rng(seed);
  LossInstance inst;
  inst.gt = DepthMap(n, n);
  inst.pred = DepthMap(n, n);
  inst.pred_smooth = DepthMap(n, n);
  inst.conf.resize(static_cast<std::size_t>(n) * n);
  const double p1 = rng.uniform(0.0, 6.28);
  const double p2 = rng.uniform(0.0, 6.28);
  const double amp = 0.05 * rng.uniform(0.8, 1.2);
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) {
      const double base =
          2.0 + 0.4 * std::sin(0.9 * v + 1.3 * u + p1) +
          0.3 * std::cos(0.5 * v - 0.7 * u + p2);
      inst.gt.set(v, u, base);
      // The (2u + 3v) mod 5 pattern differs between any two 4-neighbors, so
      // every pred-gt delta and every forward-difference pair delta stays at
      // least `amp` away from the l1 kink at zero — far beyond the FD step.
      inst.pred.set(v, u, base + amp * (1.0 + (2 * u + 3 * v) % 5));
      inst.pred_smooth.set(
          v, u, base + 0.15 + 0.1 * std::sin(1.1 * v - 0.8 * u + p2));
      inst.conf[static_cast<std::size_t>(v) * n + u] = rng.uniform(0.4, 2.0);
    }

  CameraIntrinsics intr;
  intr.fx = intr.fy = 10.0;
  intr.cx = intr.cy = n / 2.0;
  intr.width = intr.height = n;
  CameraExtrinsics extr;
  extr.t = Vec3(0.3, -0.2, 1.5);
  inst.rays = build_ray_map(intr, extr);
  return inst;
}

// Central finite difference of `value(pred)` with respect to every pred
// pixel, compared against `grad` elementwise.
double fd_grad_gap(const std::function<double(const DepthMap&)>& value,
                   const DepthMap& pred, const std::vector<double>& grad) {
  const double h = 1e-6;
  double worst = 0.0;
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u) {
      DepthMap plus = pred, minus = pred;
      plus.set(v, u, pred.at(v, u) + h);
      minus.set(v, u, pred.at(v, u) - h);
      const double fd = (value(plus) - value(minus)) / (2.0 * h);
      worst = std::max(
          worst, rel_gap(grad[static_cast<std::size_t>(v) * pred.width + u],
                         fd));
    }
  return worst;
}

std::vector<FdCheck> run_loss_checks(std::uint64_t seed, int instances) {
  std::vector<FdCheck> checks = {
      {"conf_depth_pred", 0.0, true}, {"conf_depth_conf", 0.0, true},
      {"l1_map", 0.0, true},          {"gradient", 0.0, true},
      {"normal", 0.0, true},          {"mask_mse", 0.0, true},
      {"conf_stationarity", 0.0, true}};
  FdCheck& cd_pred = checks[0];
  FdCheck& cd_conf = checks[1];
  FdCheck& l1m = checks[2];
  FdCheck& grl = checks[3];
  FdCheck& nrm = checks[4];
  FdCheck& mse = checks[5];
  FdCheck& stat = checks[6];

  const double lambda_c = Da3LossWeights{}.lambda_c;
  for (int k = 0; k < instances; ++k) {
    const LossInstance inst = make_loss_instance(seed + 1000 + k);

    // conf_depth_loss, d/d pred
    {
      const LossOutput out =
          conf_depth_loss(inst.pred, inst.gt, inst.conf, lambda_c);
      cd_pred.max_rel_error = std::max(
          cd_pred.max_rel_error,
          fd_grad_gap(
              [&](const DepthMap& p) {
                return conf_depth_loss(p, inst.gt, inst.conf, lambda_c).value;
              },
              inst.pred, out.grad_pred));
      // d/d conf
      const double h = 1e-6;
      double worst = 0.0;
      for (std::size_t i = 0; i < inst.conf.size(); ++i) {
        std::vector<double> plus = inst.conf, minus = inst.conf;
        plus[i] += h;
        minus[i] -= h;
        const double fd =
            (conf_depth_loss(inst.pred, inst.gt, plus, lambda_c).value -
             conf_depth_loss(inst.pred, inst.gt, minus, lambda_c).value) /
            (2.0 * h);
        worst = std::max(worst, rel_gap(out.grad_conf[i], fd));
      }
      cd_conf.max_rel_error = std::max(cd_conf.max_rel_error, worst);
    }

    // l1_map_loss over the flattened depth values
    {
      std::vector<double> pv = inst.pred.values, gv = inst.gt.values;
      std::vector<std::uint8_t> mask(pv.size(), 1);
      const LossOutput out = l1_map_loss(pv, gv, mask);
      const double h = 1e-6;
      double worst = 0.0;
      for (std::size_t i = 0; i < pv.size(); ++i) {
        std::vector<double> plus = pv, minus = pv;
        plus[i] += h;
        minus[i] -= h;
        const double fd = (l1_map_loss(plus, gv, mask).value -
                           l1_map_loss(minus, gv, mask).value) /
                          (2.0 * h);
        worst = std::max(worst, rel_gap(out.grad_pred[i], fd));
      }
      l1m.max_rel_error = std::max(l1m.max_rel_error, worst);
    }

    // gradient_loss
    {
      const LossOutput out = gradient_loss(inst.pred, inst.gt);
      grl.max_rel_error = std::max(
          grl.max_rel_error,
          fd_grad_gap(
              [&](const DepthMap& p) { return gradient_loss(p, inst.gt).value; },
              inst.pred, out.grad_pred));
    }

    // normal_loss (smooth offsets; tolerance is looser, see below)
    {
      const LossOutput out = normal_loss(inst.pred_smooth, inst.gt, inst.rays);
      nrm.max_rel_error = std::max(
          nrm.max_rel_error,
          fd_grad_gap(
              [&](const DepthMap& p) {
                return normal_loss(p, inst.gt, inst.rays).value;
              },
              inst.pred_smooth, out.grad_pred));
    }

    // mask_mse_loss
    {
      std::vector<double> pv = inst.pred.values, gv = inst.gt.values;
      const LossOutput out = mask_mse_loss(pv, gv);
      const double h = 1e-6;
      double worst = 0.0;
      for (std::size_t i = 0; i < pv.size(); ++i) {
        std::vector<double> plus = pv, minus = pv;
        plus[i] += h;
        minus[i] -= h;
        const double fd =
            (mask_mse_loss(plus, gv).value - mask_mse_loss(minus, gv).value) /
            (2.0 * h);
        worst = std::max(worst, rel_gap(out.grad_pred[i], fd));
      }
      mse.max_rel_error = std::max(mse.max_rel_error, worst);
    }

    // Confidence stationarity: at c = lambda_c / |delta| the confidence
    // gradient vanishes and the per-pixel objective is at its minimum.
    {
      std::vector<double> copt(inst.conf.size());
      for (std::size_t i = 0; i < copt.size(); ++i)
        copt[i] =
            lambda_c / std::abs(inst.pred.values[i] - inst.gt.values[i]);
      const LossOutput out =
          conf_depth_loss(inst.pred, inst.gt, copt, lambda_c);
      double worst = 0.0;
      for (const double g : out.grad_conf)
        worst = std::max(worst, std::abs(g));
      const double v0 = out.value;
      std::vector<double> bumped = copt;
      for (double& c : bumped) c *= 1.001;
      const double v_up =
          conf_depth_loss(inst.pred, inst.gt, bumped, lambda_c).value;
      for (std::size_t i = 0; i < bumped.size(); ++i)
        bumped[i] = copt[i] * 0.999;
      const double v_dn =
          conf_depth_loss(inst.pred, inst.gt, bumped, lambda_c).value;
      if (v_up <= v0 || v_dn <= v0) worst = 1.0;
      stat.max_rel_error = std::max(stat.max_rel_error, worst);
    }
  }

  cd_pred.pass = cd_pred.max_rel_error < 1e-5;
  cd_conf.pass = cd_conf.max_rel_error < 1e-5;
  l1m.pass = l1m.max_rel_error < 1e-5;
  grl.pass = grl.max_rel_error < 1e-5;
  nrm.pass = nrm.max_rel_error < 1e-4;
  mse.pass = mse.max_rel_error < 1e-5;
  stat.pass = stat.max_rel_error < 1e-10;
  return checks;
}

// ---------------------------------------------------------------------------
// Command implementations

int cmd_raymap(const std::string& camera_path, const std::string& out_path) {
  const auto [intr, extr] = read_camera_json(camera_path);
  const RayMap rays = build_ray_map(intr, extr);
  write_raymap(out_path, rays);
  ordered_json j;
  j["width"] = rays.width;
  j["height"] = rays.height;
  j["out"] = out_path;
  emit(j, "");
  return 0;
}

int cmd_recover(const std::string& rays_path, const std::string& out_path) {
  const RayMap rays = read_raymap(rays_path);
  const auto [intr, extr] = recover_camera(rays);
  const std::string text = serialize_camera_json(intr, extr);
  std::cout << text;
  if (!out_path.empty()) write_file_text(out_path, text);
  return 0;
}

int cmd_unproject(const std::string& depth_path, const std::string& rays_path,
                  const std::string& out_path) {
  const DepthMap depth = read_depth(depth_path);
  const RayMap rays = read_raymap(rays_path);
  const PointCloud cloud = unproject(depth, rays);
  write_ply(out_path, cloud);
  ordered_json j;
  j["points"] = cloud.points.size();
  j["out"] = out_path;
  emit(j, "");
  return 0;
}

int cmd_align_depth(const std::string& pred_path, const std::string& gt_path,
                    const std::string& mode, std::uint64_t seed,
                    int iterations, const std::string& apply_path) {
  const DepthMap pred = read_depth(pred_path);
  const DepthMap gt = read_depth(gt_path);

  ScaleShift model;
  std::size_t inliers = 0;
  if (mode == "lsq") {
    model = fit_scale_shift_lsq(pred, gt);
    // For the closed-form fit every jointly-valid pixel participates.
    for (int v = 0; v < pred.height; ++v)
      for (int u = 0; u < pred.width; ++u)
        if (pred.valid(v, u) && gt.valid(v, u)) ++inliers;
  } else {
    RansacConfig cfg;
    cfg.seed = seed;
    cfg.iterations = iterations;
    const RansacScaleShift fit = ransac_scale_shift(pred, gt, cfg);
    model = fit.model;
    inliers = fit.inlier_count;
  }

  ordered_json j;
  j["s"] = model.s;
  j["t"] = model.t;
  j["inliers"] = inliers;
  emit(j, "");
  if (!apply_path.empty()) {
    DepthMap aligned = pred;
    for (int v = 0; v < aligned.height; ++v)
      for (int u = 0; u < aligned.width; ++u)
        if (aligned.valid(v, u))
          aligned.set(v, u, model.apply(aligned.at(v, u)));
    write_depth(apply_path, aligned);
  }
  return 0;
}

int cmd_align_traj(const std::string& pred_path, const std::string& gt_path,
                   std::uint64_t seed, const std::string& out_path) {
  const auto pred = read_trajectory(pred_path);
  const auto gt = read_trajectory(gt_path);
  const Sim3 g = ransac_trajectory_align(extrinsics_of(pred),
                                         extrinsics_of(gt),
                                         trajectory_ransac_defaults(seed));
  emit(sim3_to_json(g), out_path);
  return 0;
}

int cmd_eval_pose(const std::string& pred_path, const std::string& gt_path,
                  std::vector<double> taus, const std::string& out_path) {
  const auto pred = extrinsics_of(read_trajectory(pred_path));
  const auto gt = extrinsics_of(read_trajectory(gt_path));
  if (taus.empty()) taus = {3.0, 30.0};
  ordered_json auc;
  for (const double tau : taus) auc[tau_key(tau)] = pose_auc(pred, gt, tau).auc;
  ordered_json j;
  j["auc"] = auc;
  emit(j, out_path);
  return 0;
}

int cmd_eval_depth(const std::string& pred_path, const std::string& gt_path,
                   const std::string& align, std::uint64_t seed,
                   const std::string& out_path) {
  DepthMap pred = read_depth(pred_path);
  const DepthMap gt = read_depth(gt_path);

  ScaleShift model;  // identity
  if (align == "lsq") {
    model = fit_scale_shift_lsq(pred, gt);
  } else if (align == "ransac") {
    RansacConfig cfg;
    cfg.seed = seed;
    model = ransac_scale_shift(pred, gt, cfg).model;
  }
  if (align != "none")
    for (int v = 0; v < pred.height; ++v)
      for (int u = 0; u < pred.width; ++u)
        if (pred.valid(v, u)) pred.set(v, u, model.apply(pred.at(v, u)));

  const DepthReport rep = depth_metrics(pred, gt);
  ordered_json j;
  j["delta1"] = rep.delta1;
  j["absrel"] = rep.absrel;
  j["sqrel"] = rep.sqrel;
  emit(j, out_path);
  return 0;
}

int cmd_fuse(const std::string& depths_dir, const std::string& traj_path,
             const std::string& sim3_path, const std::string& preset_name,
             double voxel_flag, double trunc_flag, int stride,
             const std::string& out_path) {
  double voxel_size = voxel_flag;
  if (!preset_name.empty()) {
    const DatasetPreset* preset = find_dataset_preset(preset_name);
    if (preset == nullptr) throw Error("unknown preset: " + preset_name);
    voxel_size = preset->voxel_size;
  }
  if (!(voxel_size > 0.0))
    throw Error("fuse: provide --preset or a positive --voxel");
  const double truncation = trunc_flag > 0.0 ? trunc_flag : 4.0 * voxel_size;

  Sim3 g;
  if (!sim3_path.empty()) g = sim3_from_json_text(read_file_text(sim3_path));

  const auto frames = read_trajectory(traj_path);
  std::vector<FuseFrame> fuse_input;
  for (std::size_t i = 0; i < frames.size();
       i += static_cast<std::size_t>(stride)) {
    FuseFrame f;
    f.depth = read_depth(depths_dir + "/" + frames[i].frame_id + ".dam1");
    f.intrinsics = frames[i].intrinsics;
    f.extrinsics = frames[i].extrinsics;
    fuse_input.push_back(std::move(f));
  }
  const std::size_t used = fuse_input.size();
  const TsdfVolume vol =
      fuse_frames(std::move(fuse_input), g, voxel_size, truncation);
  write_tsdf(out_path, vol);

  ordered_json j;
  j["frames"] = used;
  j["dims"] = {vol.nx, vol.ny, vol.nz};
  j["voxel_size"] = vol.voxel_size;
  j["truncation"] = vol.truncation;
  j["out"] = out_path;
  emit(j, "");
  return 0;
}

ordered_json recon_report_json(const ReconReport& rep) {
  ordered_json j;
  j["accuracy"] = rep.accuracy_mean;
  j["completeness"] = rep.completeness_mean;
  j["chamfer"] = rep.chamfer;
  j["precision"] = rep.precision;
  j["recall"] = rep.recall;
  j["f1"] = rep.f1;
  j["threshold"] = rep.threshold;
  return j;
}

int cmd_eval_recon(const std::string& recon_path, const std::string& gt_path,
                   double threshold, const std::string& out_path) {
  PointCloud recon;
  if (recon_path.size() >= 5 &&
      recon_path.compare(recon_path.size() - 5, 5, ".tsd1") == 0) {
    recon = tsdf_extract_points(read_tsdf(recon_path));
  } else {
    recon = read_ply(recon_path);
  }
  const PointCloud gt = read_ply(gt_path);
  emit(recon_report_json(recon_metrics(recon, gt, threshold)), out_path);
  return 0;
}

int cmd_losses_check(std::uint64_t seed, int instances,
                     const std::string& out_path) {
  const std::vector<FdCheck> checks = run_loss_checks(seed, instances);
  ordered_json arr = ordered_json::array();
  bool all_pass = true;
  for (const FdCheck& c : checks) {
    ordered_json j;
    j["name"] = c.name;
    j["max_rel_error"] = c.max_rel_error;
    j["pass"] = c.pass;
    arr.push_back(j);
    all_pass = all_pass && c.pass;
  }
  ordered_json j;
  j["seed"] = seed;
  j["instances"] = instances;
  j["checks"] = arr;
  j["all_pass"] = all_pass;
  emit(j, out_path);
  return all_pass ? 0 : 1;
}

int cmd_qa_score(const std::string& pairs_path, double threshold,
                 const std::string& out_path) {
  const std::string list = read_file_text(pairs_path);
  std::string out_text;
  std::size_t pos = 0;
  while (pos < list.size()) {
    const std::size_t nl = list.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? list.size() : nl;
    std::string line = list.substr(pos, end - pos);
    pos = nl == std::string::npos ? list.size() : nl + 1;
    const std::size_t split = line.find(' ');
    if (line.empty()) continue;
    if (split == std::string::npos)
      throw Error("qa score: each line must be '<image.pgm> <depth.dam1>'");
    const std::string img_path = line.substr(0, split);
    const std::string depth_path = line.substr(split + 1);

    const GrayImage img = read_pgm(img_path);
    const DepthMap depth = read_depth(depth_path);
    const EdgeMap img_edges = canny_edges(img.pixels, img.width, img.height);
    const EdgeMap depth_edges =
        canny_edges(log_scale_depth(depth), depth.width, depth.height);
    const AlignmentScore score = alignment_score(img_edges, depth_edges);

    ordered_json j;
    j["path"] = img_path;
    j["score"] = score.score;
    j["i1"] = score.i1;
    j["i3"] = score.i3;
    j["pass"] = !score.degenerate && score.score >= threshold;
    out_text += j.dump() + "\n";
  }
  std::cout << out_text;
  if (!out_path.empty()) write_file_text(out_path, out_text);
  return 0;
}

int cmd_e2e_synth(std::uint64_t seed, int cameras, int size, double rot_sigma,
                  double trans_sigma, double depth_sigma,
                  double outlier_fraction, double voxel_size,
                  const std::string& out_path) {
  const SynthScene scene = make_benchmark_scene(seed, cameras, size, size);
  NoiseSpec noise;
  noise.pose_rot_sigma_deg = rot_sigma;
  noise.pose_trans_sigma = trans_sigma;
  noise.depth_sigma = depth_sigma;
  noise.outlier_fraction = outlier_fraction;
  const SynthScene noisy = perturb_scene(scene, noise, seed + 1);

  std::vector<DepthMap> gt_depths, pred_depths;
  std::vector<CameraExtrinsics> gt_extr, pred_extr;
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    gt_depths.push_back(render_depth(scene, i));
    pred_depths.push_back(
        perturb_depth(gt_depths.back(), noise, seed + 2 + i));
    gt_extr.push_back(scene.cameras[i].second);
    pred_extr.push_back(noisy.cameras[i].second);
  }

  // 1) Robust Sim3 from predicted camera centers to ground truth.
  const Sim3 g = ransac_trajectory_align(pred_extr, gt_extr,
                                         trajectory_ransac_defaults(seed));

  // 2) Fuse the aligned predicted depths into a TSDF and extract a surface.
  std::vector<FuseFrame> fuse_input;
  for (std::size_t i = 0; i < scene.cameras.size(); ++i)
    fuse_input.push_back(
        {pred_depths[i], scene.cameras[i].first, pred_extr[i]});
  const double truncation = 4.0 * voxel_size;
  const TsdfVolume vol =
      fuse_frames(std::move(fuse_input), g, voxel_size, truncation);
  const PointCloud recon = tsdf_extract_points(vol);

  // 3) Ground-truth surface cloud: union of unprojected clean renders.
  PointCloud gt_cloud;
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    const PointCloud c = unproject(
        gt_depths[i],
        build_ray_map(scene.cameras[i].first, scene.cameras[i].second));
    gt_cloud.points.insert(gt_cloud.points.end(), c.points.begin(),
                           c.points.end());
  }

  const double f1_threshold = 2.0 * voxel_size;
  const ReconReport recon_rep = recon_metrics(recon, gt_cloud, f1_threshold);

  // 4) Pose AUC (invariant to the global similarity).
  ordered_json auc;
  for (const double tau : {3.0, 30.0})
    auc[tau_key(tau)] = pose_auc(pred_extr, gt_extr, tau).auc;

  // 5) Depth metrics of the scale-aligned predictions, averaged over frames.
  double delta1 = 0.0, absrel = 0.0, sqrel = 0.0;
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    const DepthReport rep =
        depth_metrics(scale_depth_values(pred_depths[i], g.s), gt_depths[i]);
    delta1 += rep.delta1;
    absrel += rep.absrel;
    sqrel += rep.sqrel;
  }
  const double nf = static_cast<double>(scene.cameras.size());

  ordered_json j;
  j["seed"] = seed;
  j["cameras"] = cameras;
  j["size"] = size;
  ordered_json jn;
  jn["pose_rot_sigma_deg"] = rot_sigma;
  jn["pose_trans_sigma"] = trans_sigma;
  jn["depth_sigma"] = depth_sigma;
  jn["outlier_fraction"] = outlier_fraction;
  j["noise"] = jn;
  j["voxel_size"] = voxel_size;
  j["sim3"] = sim3_to_json(g);
  j["pose"] = ordered_json{{"auc", auc}};
  j["recon"] = recon_report_json(recon_rep);
  ordered_json jd;
  jd["delta1"] = delta1 / nf;
  jd["absrel"] = absrel / nf;
  jd["sqrel"] = sqrel / nf;
  j["depth"] = jd;
  emit(j, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"visual-geometry toolkit: depth-ray representation, camera "
               "recovery, robust alignment, and reconstruction benchmarks"};
  app.require_subcommand(1);

  // raymap
  std::string rm_camera, rm_out;
  CLI::App* raymap = app.add_subcommand("raymap", "build a ray map from a "
                                                  "camera JSON file");
  raymap->add_option("--camera", rm_camera, "camera JSON")->required();
  raymap->add_option("--out", rm_out, "output .ray1")->required();

  // recover
  std::string rc_rays, rc_out;
  CLI::App* recover = app.add_subcommand("recover", "recover the camera from "
                                                    "a ray map");
  recover->add_option("--rays", rc_rays, "input .ray1")->required();
  recover->add_option("--out", rc_out, "output camera JSON");

  // unproject
  std::string up_depth, up_rays, up_out;
  CLI::App* unproj = app.add_subcommand("unproject", "lift a depth map "
                                                     "through a ray map");
  unproj->add_option("--depth", up_depth, "input .dam1")->required();
  unproj->add_option("--rays", up_rays, "input .ray1")->required();
  unproj->add_option("--out", up_out, "output .ply")->required();

  // align-depth
  std::string ad_pred, ad_gt, ad_mode = "lsq", ad_apply;
  std::uint64_t ad_seed = 0;
  int ad_iters = 256;
  CLI::App* adepth = app.add_subcommand("align-depth", "scale-shift depth "
                                                       "alignment");
  adepth->add_option("--pred", ad_pred, "predicted .dam1")->required();
  adepth->add_option("--gt", ad_gt, "ground-truth .dam1")->required();
  adepth->add_option("--mode", ad_mode, "lsq|ransac")
      ->check(CLI::IsMember({"lsq", "ransac"}));
  adepth->add_option("--seed", ad_seed, "RANSAC seed");
  adepth->add_option("--iterations", ad_iters, "RANSAC iterations");
  adepth->add_option("--apply", ad_apply, "write aligned depth here");

  // align-traj
  std::string at_pred, at_gt, at_out;
  std::uint64_t at_seed = 0;
  CLI::App* atraj = app.add_subcommand("align-traj", "robust Sim3 trajectory "
                                                     "alignment");
  atraj->add_option("--pred", at_pred, "predicted trajectory .jsonl")
      ->required();
  atraj->add_option("--gt", at_gt, "ground-truth trajectory .jsonl")
      ->required();
  atraj->add_option("--seed", at_seed, "RANSAC seed");
  atraj->add_option("--out", at_out, "output Sim3 JSON");

  // eval-pose
  std::string ep_pred, ep_gt, ep_out;
  std::vector<double> ep_taus;
  CLI::App* epose = app.add_subcommand("eval-pose", "relative pose AUC");
  epose->add_option("--pred", ep_pred, "predicted trajectory")->required();
  epose->add_option("--gt", ep_gt, "ground-truth trajectory")->required();
  epose->add_option("--tau", ep_taus, "threshold in degrees (repeatable; "
                                      "default 3 and 30)");
  epose->add_option("--out", ep_out, "also write the report here");

  // eval-depth
  std::string ed_pred, ed_gt, ed_align = "none", ed_out;
  std::uint64_t ed_seed = 0;
  CLI::App* edepth = app.add_subcommand("eval-depth", "depth accuracy "
                                                      "metrics");
  edepth->add_option("--pred", ed_pred, "predicted .dam1")->required();
  edepth->add_option("--gt", ed_gt, "ground-truth .dam1")->required();
  edepth->add_option("--align", ed_align, "none|lsq|ransac")
      ->check(CLI::IsMember({"none", "lsq", "ransac"}));
  edepth->add_option("--seed", ed_seed, "RANSAC seed");
  edepth->add_option("--out", ed_out, "also write the report here");

  // fuse
  std::string fu_depths, fu_traj, fu_sim3, fu_preset, fu_out;
  double fu_voxel = 0.0, fu_trunc = 0.0;
  int fu_stride = 1;
  CLI::App* fuse = app.add_subcommand("fuse", "TSDF-fuse aligned depth maps");
  fuse->add_option("--depths", fu_depths,
                   "directory of <frame_id>.dam1 files")
      ->required();
  fuse->add_option("--traj", fu_traj, "trajectory .jsonl")->required();
  fuse->add_option("--sim3", fu_sim3, "Sim3 JSON from align-traj");
  fuse->add_option("--preset", fu_preset, "dataset preset (hiroom, eth3d, "
                                          "7scenes, scannetpp)");
  fuse->add_option("--voxel", fu_voxel, "voxel size (overridden by --preset)");
  fuse->add_option("--truncation", fu_trunc, "truncation (default 4*voxel)");
  fuse->add_option("--stride", fu_stride, "frame subsample stride")
      ->check(CLI::PositiveNumber);
  fuse->add_option("--out", fu_out, "output .tsd1")->required();

  // eval-recon
  std::string er_recon, er_gt, er_out;
  double er_threshold = 0.0;
  CLI::App* erecon = app.add_subcommand("eval-recon", "point-cloud "
                                                      "reconstruction metrics");
  erecon->add_option("--recon", er_recon, "reconstruction (.tsd1 or .ply)")
      ->required();
  erecon->add_option("--gt", er_gt, "ground-truth .ply")->required();
  erecon->add_option("--threshold", er_threshold, "F1 distance threshold")
      ->required()
      ->check(CLI::PositiveNumber);
  erecon->add_option("--out", er_out, "also write the report here");

  // losses check
  std::uint64_t lc_seed = 0;
  int lc_instances = 5;
  std::string lc_out;
  CLI::App* losses = app.add_subcommand("losses", "loss-function utilities");
  losses->require_subcommand(1);
  CLI::App* lcheck = losses->add_subcommand("check", "finite-difference "
                                                     "gradient verification");
  lcheck->add_option("--seed", lc_seed, "instance seed");
  lcheck->add_option("--instances", lc_instances, "instances per loss")
      ->check(CLI::PositiveNumber);
  lcheck->add_option("--out", lc_out, "also write the report here");

  // qa score
  std::string qa_pairs, qa_out;
  double qa_threshold = 0.6;
  CLI::App* qa = app.add_subcommand("qa", "data quality checks");
  qa->require_subcommand(1);
  CLI::App* qscore = qa->add_subcommand("score", "edge-alignment scoring of "
                                                 "image/depth pairs");
  qscore->add_option("--pairs", qa_pairs, "text file: '<image.pgm> "
                                          "<depth.dam1>' per line")
      ->required();
  qscore->add_option("--threshold", qa_threshold, "pass threshold");
  qscore->add_option("--out", qa_out, "also write the JSON lines here");

  // e2e-synth
  std::uint64_t e2_seed = 0;
  int e2_cameras = 6, e2_size = 48;
  double e2_rot = 0.0, e2_trans = 0.0, e2_depth = 0.0, e2_outliers = 0.0,
         e2_voxel = 0.03;
  std::string e2_out;
  CLI::App* e2e = app.add_subcommand("e2e-synth", "synthetic end-to-end "
                                                  "benchmark pipeline");
  e2e->add_option("--seed", e2_seed, "scene seed");
  e2e->add_option("--cameras", e2_cameras, "camera count")
      ->check(CLI::Range(3, 64));
  e2e->add_option("--size", e2_size, "image width and height")
      ->check(CLI::Range(8, 512));
  e2e->add_option("--rot-sigma", e2_rot, "pose rotation noise (degrees)");
  e2e->add_option("--trans-sigma", e2_trans, "pose translation noise");
  e2e->add_option("--depth-sigma", e2_depth, "multiplicative depth noise");
  e2e->add_option("--outlier-fraction", e2_outliers, "depth outlier fraction");
  e2e->add_option("--voxel", e2_voxel, "fusion voxel size")
      ->check(CLI::PositiveNumber);
  e2e->add_option("--out", e2_out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*raymap) return cmd_raymap(rm_camera, rm_out);
    if (*recover) return cmd_recover(rc_rays, rc_out);
    if (*unproj) return cmd_unproject(up_depth, up_rays, up_out);
    if (*adepth)
      return cmd_align_depth(ad_pred, ad_gt, ad_mode, ad_seed, ad_iters,
                             ad_apply);
    if (*atraj) return cmd_align_traj(at_pred, at_gt, at_seed, at_out);
    if (*epose) return cmd_eval_pose(ep_pred, ep_gt, ep_taus, ep_out);
    if (*edepth)
      return cmd_eval_depth(ed_pred, ed_gt, ed_align, ed_seed, ed_out);
    if (*fuse)
      return cmd_fuse(fu_depths, fu_traj, fu_sim3, fu_preset, fu_voxel,
                      fu_trunc, fu_stride, fu_out);
    if (*erecon) return cmd_eval_recon(er_recon, er_gt, er_threshold, er_out);
    if (*lcheck) return cmd_losses_check(lc_seed, lc_instances, lc_out);
    if (*qscore) return cmd_qa_score(qa_pairs, qa_threshold, qa_out);
    if (*e2e)
      return cmd_e2e_synth(e2_seed, e2_cameras, e2_size, e2_rot, e2_trans,
                           e2_depth, e2_outliers, e2_voxel, e2_out);
    std::cerr << "error: no command selected\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateFit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateRays& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
