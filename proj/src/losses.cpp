#include "visgeom/losses.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "visgeom/errors.hpp"

namespace visgeom {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_same_shape(const DepthMap& a, const DepthMap& b,
                      const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw ShapeMismatch(std::string(what) + ": depth map shapes differ");
}

// ---------------------------------------------------------------------------
// Forward-mode scalar for the normal-loss chain rule: value plus derivative
// with respect to one active depth input.

struct Dual {
  double v = 0.0;
  double d = 0.0;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
Dual dual_sqrt(Dual a) {
  const double s = std::sqrt(a.v);
  return {s, s > 0.0 ? a.d / (2.0 * s) : 0.0};
}

struct DVec3 {
  Dual x, y, z;
};

DVec3 operator-(const DVec3& a, const DVec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
DVec3 operator+(const DVec3& a, const DVec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
DVec3 cross(const DVec3& a, const DVec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}
Dual dot(const DVec3& a, const DVec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
Dual norm(const DVec3& a) { return dual_sqrt(dot(a, a)); }
DVec3 scale(Dual s, const DVec3& a) {
  return {s * a.x, s * a.y, s * a.z};
}

constexpr double kCosClamp = 1.0 - 1e-9;

// Angle to a constant reference vector; the arccos value clamps the cosine to
// [-1, 1] while the derivative factor clamps at |cos| <= 1 - 1e-9.
Dual angle_to(const DVec3& a, const Vec3& b) {
  const Dual na = norm(a);
  const double nb = b.norm();
  const Dual c =
      (a.x * Dual{b.x(), 0.0} + a.y * Dual{b.y(), 0.0} +
       a.z * Dual{b.z(), 0.0}) /
      (na * Dual{nb, 0.0});
  const double cv = std::clamp(c.v, -1.0, 1.0);
  const double cd = std::clamp(c.v, -kCosClamp, kCosClamp);
  return {std::acos(cv), -c.d / std::sqrt(1.0 - cd * cd)};
}

// Plain-double normals of the 4-neighborhood point set {C,E,N,W,S}.
std::array<Vec3, 4> neighbor_normals(const std::array<Vec3, 5>& p) {
  const Vec3 e = p[1] - p[0], n = p[2] - p[0], w = p[3] - p[0],
             s = p[4] - p[0];
  return {e.cross(n), n.cross(w), w.cross(s), s.cross(e)};
}

}  // namespace

double scale_normalizer(const std::vector<PointCloud>& views) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const PointCloud& view : views) {
    for (const Vec3& p : view.points) sum += p.norm();
    count += view.points.size();
  }
  if (count == 0) throw DegenerateFit("scale_normalizer: no valid points");
  return sum / static_cast<double>(count);
}

LossOutput conf_depth_loss(const DepthMap& pred, const DepthMap& gt,
                           const std::vector<double>& conf, double lambda_c) {
  check_same_shape(pred, gt, "conf_depth_loss");
  if (conf.size() != pred.pixel_count())
    throw ShapeMismatch("conf_depth_loss: confidence size differs");

  std::size_t z = 0;
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u) {
      if (!pred.valid(v, u) || !gt.valid(v, u)) continue;
      const std::size_t f = static_cast<std::size_t>(v) * pred.width + u;
      if (!(conf[f] > 0.0))
        throw Error("conf_depth_loss: non-positive confidence");
      ++z;
    }
  if (z == 0) throw DegenerateFit("conf_depth_loss: no jointly-valid pixels");

  LossOutput out;
  out.grad_pred.assign(pred.pixel_count(), 0.0);
  out.grad_conf.assign(pred.pixel_count(), 0.0);
  const double inv_z = 1.0 / static_cast<double>(z);
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u) {
      if (!pred.valid(v, u) || !gt.valid(v, u)) continue;
      const std::size_t f = static_cast<std::size_t>(v) * pred.width + u;
      const double delta = pred.at(v, u) - gt.at(v, u);
      const double c = conf[f];
      out.value += (c * std::abs(delta) - lambda_c * std::log(c)) * inv_z;
      out.grad_pred[f] = c * sign_of(delta) * inv_z;
      out.grad_conf[f] = (std::abs(delta) - lambda_c / c) * inv_z;
    }
  return out;
}

LossOutput l1_map_loss(const std::vector<double>& pred,
                       const std::vector<double>& gt,
                       const std::vector<std::uint8_t>& mask) {
  if (pred.size() != gt.size() || pred.size() != mask.size())
    throw ShapeMismatch("l1_map_loss: array sizes differ");
  std::size_t count = 0;
  for (const std::uint8_t m : mask)
    if (m) ++count;
  if (count == 0) throw DegenerateFit("l1_map_loss: empty mask");

  LossOutput out;
  out.grad_pred.assign(pred.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    const double delta = pred[i] - gt[i];
    out.value += std::abs(delta) * inv;
    out.grad_pred[i] = sign_of(delta) * inv;
  }
  return out;
}

LossOutput gradient_loss(const DepthMap& pred, const DepthMap& gt) {
  check_same_shape(pred, gt, "gradient_loss");
  if (pred.width < 2 || pred.height < 2)
    throw Error("gradient_loss: image must be at least 2x2");

  auto pair_valid = [&](int v, int u, int v2, int u2) {
    return pred.valid(v, u) && pred.valid(v2, u2) && gt.valid(v, u) &&
           gt.valid(v2, u2);
  };

  std::size_t nx = 0, ny = 0;
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u + 1 < pred.width; ++u)
      if (pair_valid(v, u, v, u + 1)) ++nx;
  for (int v = 0; v + 1 < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u)
      if (pair_valid(v, u, v + 1, u)) ++ny;
  if (nx + ny == 0)
    throw DegenerateFit("gradient_loss: no valid difference pairs");

  LossOutput out;
  out.grad_pred.assign(pred.pixel_count(), 0.0);
  auto flat = [&](int v, int u) {
    return static_cast<std::size_t>(v) * pred.width + u;
  };
  if (nx > 0) {
    const double inv = 1.0 / static_cast<double>(nx);
    for (int v = 0; v < pred.height; ++v)
      for (int u = 0; u + 1 < pred.width; ++u) {
        if (!pair_valid(v, u, v, u + 1)) continue;
        const double delta = (pred.at(v, u + 1) - pred.at(v, u)) -
                             (gt.at(v, u + 1) - gt.at(v, u));
        out.value += std::abs(delta) * inv;
        const double g = sign_of(delta) * inv;
        out.grad_pred[flat(v, u + 1)] += g;
        out.grad_pred[flat(v, u)] -= g;
      }
  }
  if (ny > 0) {
    const double inv = 1.0 / static_cast<double>(ny);
    for (int v = 0; v + 1 < pred.height; ++v)
      for (int u = 0; u < pred.width; ++u) {
        if (!pair_valid(v, u, v + 1, u)) continue;
        const double delta = (pred.at(v + 1, u) - pred.at(v, u)) -
                             (gt.at(v + 1, u) - gt.at(v, u));
        out.value += std::abs(delta) * inv;
        const double g = sign_of(delta) * inv;
        out.grad_pred[flat(v + 1, u)] += g;
        out.grad_pred[flat(v, u)] -= g;
      }
  }
  return out;
}

Eigen::Vector4d normal_weights(const NeighborNormals& nn) {
  Eigen::Vector4d norms;
  for (int i = 0; i < 4; ++i) norms(i) = nn.n[i].norm();
  return Eigen::Vector4d::Constant(norms.sum()) - norms;
}

Vec3 mean_normal(const NeighborNormals& nn) {
  double total = 0.0;
  int used = 0;
  for (const Vec3& n : nn.n) {
    const double len = n.norm();
    if (len > 0.0) {
      total += len;
      ++used;
    }
  }
  if (used == 0) throw DegenerateFit("mean_normal: all normals are zero");
  Vec3 mean = Vec3::Zero();
  for (const Vec3& n : nn.n) {
    const double len = n.norm();
    if (len > 0.0) mean += (total - len) * (n / len);
  }
  return mean;
}

LossOutput normal_loss(const DepthMap& pred_depth, const DepthMap& gt_depth,
                       const RayMap& rays) {
  check_same_shape(pred_depth, gt_depth, "normal_loss");
  if (rays.width != pred_depth.width || rays.height != pred_depth.height)
    throw ShapeMismatch("normal_loss: ray map shape differs");
  const int w = pred_depth.width, h = pred_depth.height;

  LossOutput out;
  out.grad_pred.assign(pred_depth.pixel_count(), 0.0);
  std::size_t count = 0;

  // Pixel offsets C, E, N, W, S.
  const int du[5] = {0, 1, 0, -1, 0};
  const int dv[5] = {0, 0, -1, 0, 1};

  for (int v = 1; v + 1 < h; ++v)
    for (int u = 1; u + 1 < w; ++u) {
      bool eligible = true;
      std::array<Vec3, 5> origin, dir;
      std::array<double, 5> dp, dg;
      for (int k = 0; k < 5 && eligible; ++k) {
        const int uu = u + du[k], vv = v + dv[k];
        if (!pred_depth.valid(vv, uu) || !gt_depth.valid(vv, uu)) {
          eligible = false;
          break;
        }
        origin[k] = rays.origin_at(vv, uu);
        dir[k] = rays.direction_at(vv, uu);
        dp[k] = pred_depth.at(vv, uu);
        dg[k] = gt_depth.at(vv, uu);
      }
      if (!eligible) continue;

      std::array<Vec3, 5> pp, pg;
      for (int k = 0; k < 5; ++k) {
        pp[k] = origin[k] + dp[k] * dir[k];
        pg[k] = origin[k] + dg[k] * dir[k];
      }
      const std::array<Vec3, 4> np = neighbor_normals(pp);
      const std::array<Vec3, 4> ng = neighbor_normals(pg);
      for (int i = 0; i < 4 && eligible; ++i)
        if (!(np[i].norm() > 0.0) || !(ng[i].norm() > 0.0)) eligible = false;
      if (!eligible) continue;
      const Vec3 nm_p = mean_normal(NeighborNormals{np});
      const Vec3 nm_g = mean_normal(NeighborNormals{ng});
      if (!(nm_p.norm() > 0.0) || !(nm_g.norm() > 0.0)) continue;

      // One forward pass per active depth: pass 0 also supplies the value.
      for (int active = 0; active < 5; ++active) {
        std::array<DVec3, 5> p;
        for (int k = 0; k < 5; ++k) {
          const double seed = k == active ? 1.0 : 0.0;
          p[k] = DVec3{Dual{origin[k].x() + dp[k] * dir[k].x(),
                            seed * dir[k].x()},
                       Dual{origin[k].y() + dp[k] * dir[k].y(),
                            seed * dir[k].y()},
                       Dual{origin[k].z() + dp[k] * dir[k].z(),
                            seed * dir[k].z()}};
        }
        const DVec3 e = p[1] - p[0], n = p[2] - p[0], wv = p[3] - p[0],
                    s = p[4] - p[0];
        const std::array<DVec3, 4> nd = {cross(e, n), cross(n, wv),
                                         cross(wv, s), cross(s, e)};
        std::array<Dual, 4> len;
        Dual total{0.0, 0.0};
        for (int i = 0; i < 4; ++i) {
          len[i] = norm(nd[i]);
          total = total + len[i];
        }
        DVec3 nm{Dual{}, Dual{}, Dual{}};
        for (int i = 0; i < 4; ++i)
          nm = nm + scale((total - len[i]) / len[i], nd[i]);

        Dual term = angle_to(nm, nm_g);
        for (int i = 0; i < 4; ++i) term = term + angle_to(nd[i], ng[i]);

        if (active == 0) out.value += term.v;
        const std::size_t f =
            static_cast<std::size_t>(v + dv[active]) * w + (u + du[active]);
        out.grad_pred[f] += term.d;
      }
      ++count;
    }

  if (count == 0) throw DegenerateFit("normal_loss: no eligible pixels");
  const double inv = 1.0 / static_cast<double>(count);
  out.value *= inv;
  for (double& g : out.grad_pred) g *= inv;
  return out;
}

LossOutput mask_mse_loss(const std::vector<double>& pred_mask,
                         const std::vector<double>& gt_mask) {
  if (pred_mask.size() != gt_mask.size())
    throw ShapeMismatch("mask_mse_loss: array sizes differ");
  if (pred_mask.empty()) throw DegenerateFit("mask_mse_loss: empty input");

  LossOutput out;
  out.grad_pred.assign(pred_mask.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(pred_mask.size());
  for (std::size_t i = 0; i < pred_mask.size(); ++i) {
    const double delta = pred_mask[i] - gt_mask[i];
    out.value += delta * delta * inv;
    out.grad_pred[i] = 2.0 * delta * inv;
  }
  return out;
}

Da3LossTerms total_da3_loss(const Da3LossInputs& in,
                            const Da3LossWeights& weights) {
  Da3LossTerms terms;
  terms.depth =
      conf_depth_loss(in.pred_depth, in.gt_depth, in.conf, weights.lambda_c);

  if (in.pred_rays.width != in.gt_rays.width ||
      in.pred_rays.height != in.gt_rays.height)
    throw ShapeMismatch("total_da3_loss: ray map shapes differ");
  std::vector<double> pred_ray(in.pred_rays.origins);
  pred_ray.insert(pred_ray.end(), in.pred_rays.directions.begin(),
                  in.pred_rays.directions.end());
  std::vector<double> gt_ray(in.gt_rays.origins);
  gt_ray.insert(gt_ray.end(), in.gt_rays.directions.begin(),
                in.gt_rays.directions.end());
  terms.raymap = l1_map_loss(pred_ray, gt_ray,
                             std::vector<std::uint8_t>(pred_ray.size(), 1));

  if (in.pred_points.size() != in.gt_points.size())
    throw ShapeMismatch("total_da3_loss: point map sizes differ");
  std::vector<std::uint8_t> point_mask3;
  if (in.point_mask.empty()) {
    point_mask3.assign(in.pred_points.size(), 1);
  } else {
    if (in.point_mask.size() * 3 != in.pred_points.size())
      throw ShapeMismatch("total_da3_loss: point mask size differs");
    point_mask3.reserve(in.pred_points.size());
    for (const std::uint8_t m : in.point_mask)
      for (int c = 0; c < 3; ++c) point_mask3.push_back(m);
  }
  terms.points = l1_map_loss(in.pred_points, in.gt_points, point_mask3);

  const std::array<double, 9> pv = in.pred_camera.vector();
  const std::array<double, 9> gv = in.gt_camera.vector();
  terms.camera = l1_map_loss(std::vector<double>(pv.begin(), pv.end()),
                             std::vector<double>(gv.begin(), gv.end()),
                             std::vector<std::uint8_t>(9, 1));

  terms.grad = gradient_loss(in.pred_depth, in.gt_depth);

  terms.total = terms.depth.value + terms.raymap.value + terms.points.value +
                weights.beta * terms.camera.value +
                weights.alpha * terms.grad.value;
  return terms;
}

TeacherLossTerms teacher_loss(const TeacherLossInputs& in) {
  TeacherLossTerms terms;
  terms.grad = gradient_loss(in.pred_depth, in.gt_depth);
  terms.normal = normal_loss(in.pred_depth, in.gt_depth, in.rays);
  terms.sky = mask_mse_loss(in.pred_sky, in.gt_sky);
  terms.obj = mask_mse_loss(in.pred_obj, in.gt_obj);
  terms.gl_term_omitted = true;
  terms.total = 0.5 * terms.grad.value + terms.normal.value +
                terms.sky.value + terms.obj.value;
  return terms;
}

DepthMap canonical_depth_transform(const DepthMap& depth, double f,
                                   double f_c) {
  if (!(f > 0.0) || !(f_c > 0.0))
    throw Error("canonical_depth_transform: focal lengths must be > 0");
  DepthMap out = depth;
  const double ratio = f_c / f;
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(v, u)) out.set(v, u, out.at(v, u) * ratio);
  return out;
}

DepthMap exp_encode(const DepthMap& depth) {
  DepthMap out = depth;
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(v, u)) {
        if (!(out.at(v, u) > 0.0))
          throw Error("exp_encode: depth must be positive");
        out.set(v, u, std::log(out.at(v, u)));
      }
  return out;
}

DepthMap exp_decode(const DepthMap& encoded) {
  DepthMap out = encoded;
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(v, u)) out.set(v, u, std::exp(out.at(v, u)));
  return out;
}

}  // namespace visgeom
