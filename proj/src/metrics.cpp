#include "visgeom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "visgeom/errors.hpp"
#include "visgeom/parallel.hpp"

namespace visgeom {

namespace {

double translation_angle_deg(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  const bool zero_a = na < 1e-12, zero_b = nb < 1e-12;
  if (zero_a && zero_b) return 0.0;
  if (zero_a || zero_b) return 180.0;  // degenerate on one side only
  // Chord form |ua - ub| = 2*sin(theta/2): exact for identical directions
  // and full-precision on small angles, where acos of the dot loses half
  // the significand; past 90 degrees the antipodal chord is the stable one.
  const Vec3 ua = a / na, ub = b / nb;
  double theta;
  if (ua.dot(ub) >= 0.0)
    theta = 2.0 * std::asin(std::min(1.0, (ua - ub).norm() / 2.0));
  else
    theta = std::numbers::pi -
            2.0 * std::asin(std::min(1.0, (ua + ub).norm() / 2.0));
  return theta * (180.0 / std::numbers::pi);
}

// Exact 3-D KD-tree over an immutable point list. Median splits on the
// widest dimension; queries return the exact minimal squared distance.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Vec3>& points)
      : points_(points), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points.size() / kLeafSize + 2);
    if (!points_.empty()) root_ = build(0, points_.size());
  }

  double nearest_sq(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
  }

 private:
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    double split = 0.0;
    int dim = -1;  // -1 marks a leaf
    int left = -1, right = -1;
    std::size_t begin = 0, end = 0;
  };

  int build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > kLeafSize) {
      Vec3 lo = points_[order_[begin]], hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
      }
      int dim = 0;
      const Vec3 extent = hi - lo;
      if (extent(1) > extent(dim)) dim = 1;
      if (extent(2) > extent(dim)) dim = 2;
      const std::size_t mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + begin, order_.begin() + mid,
                       order_.begin() + end,
                       [&](std::size_t a, std::size_t b) {
                         return points_[a](dim) < points_[b](dim);
                       });
      node.dim = dim;
      node.split = points_[order_[mid]](dim);
      const int self = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      const int left = build(begin, mid);
      const int right = build(mid, end);
      nodes_[self].left = left;
      nodes_[self].right = right;
      return self;
    }
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    return self;
  }

  void search(int index, const Vec3& q, double& best) const {
    const Node& node = nodes_[index];
    if (node.dim < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i)
        best = std::min(best, (points_[order_[i]] - q).squaredNorm());
      return;
    }
    const double diff = q(node.dim) - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (diff * diff <= best) search(far, q, best);
  }

  const std::vector<Vec3>& points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace

std::vector<std::pair<double, double>> relative_pose_errors(
    const std::vector<CameraExtrinsics>& pred,
    const std::vector<CameraExtrinsics>& gt) {
  if (pred.size() != gt.size())
    throw ShapeMismatch("relative_pose_errors: trajectory lengths differ");
  const std::size_t n = pred.size();
  if (n < 2)
    throw DegenerateFit("relative_pose_errors: need at least 2 poses");

  std::vector<Mat3> rp(n), rg(n);
  for (std::size_t i = 0; i < n; ++i) {
    rp[i] = pred[i].rotation();
    rg[i] = gt[i].rotation();
  }

  std::vector<std::pair<double, double>> errors;
  errors.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Mat3 rel_p = rp[i].transpose() * rp[j];
      const Mat3 rel_g = rg[i].transpose() * rg[j];
      const double rra = rotation_geodesic_deg(rel_p, rel_g);
      const Vec3 tp = rp[i].transpose() * (pred[j].t - pred[i].t);
      const Vec3 tg = rg[i].transpose() * (gt[j].t - gt[i].t);
      errors.emplace_back(rra, translation_angle_deg(tp, tg));
    }
  return errors;
}

PoseAucReport pose_auc(const std::vector<CameraExtrinsics>& pred,
                       const std::vector<CameraExtrinsics>& gt,
                       double tau_max_deg, int grid_steps) {
  if (!(tau_max_deg > 0.0)) throw Error("pose_auc: tau_max must be > 0");
  if (grid_steps < 1) throw Error("pose_auc: grid_steps must be >= 1");
  const auto errors = relative_pose_errors(pred, gt);
  const std::size_t pairs = errors.size();

  std::vector<double> rra(pairs), rta(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    rra[k] = errors[k].first;
    rta[k] = errors[k].second;
  }
  std::sort(rra.begin(), rra.end());
  std::sort(rta.begin(), rta.end());

  PoseAucReport report;
  report.threshold_deg = tau_max_deg;
  report.curve.resize(grid_steps);
  std::size_t ir = 0, it = 0;
  double sum = 0.0;
  for (int k = 0; k < grid_steps; ++k) {
    const double tau = tau_max_deg * (k + 1) / grid_steps;
    while (ir < pairs && rra[ir] <= tau) ++ir;
    while (it < pairs && rta[it] <= tau) ++it;
    const double acc_r = static_cast<double>(ir) / pairs;
    const double acc_t = static_cast<double>(it) / pairs;
    report.curve[k] = std::min(acc_r, acc_t);
    sum += report.curve[k];
  }
  report.auc = 100.0 * sum / grid_steps;
  return report;
}

std::vector<double> cloud_nn_distances(const PointCloud& a,
                                       const PointCloud& b) {
  if (a.points.empty() || b.points.empty())
    throw DegenerateFit("cloud_nn_distances: empty point cloud");
  const KdTree3 tree(b.points);
  const std::size_t n = a.points.size();
  std::vector<double> dist(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    dist[i] = std::sqrt(tree.nearest_sq(a.points[i]));
  return dist;
}

ReconReport recon_metrics(const PointCloud& recon, const PointCloud& gt,
                          double d) {
  if (!(d > 0.0)) throw Error("recon_metrics: threshold must be > 0");
  const std::vector<double> acc = cloud_nn_distances(recon, gt);
  const std::vector<double> comp = cloud_nn_distances(gt, recon);

  ReconReport report;
  report.threshold = d;
  double acc_sum = 0.0;
  std::size_t acc_hits = 0;
  for (const double x : acc) {
    acc_sum += x;
    if (x < d) ++acc_hits;
  }
  double comp_sum = 0.0;
  std::size_t comp_hits = 0;
  for (const double x : comp) {
    comp_sum += x;
    if (x < d) ++comp_hits;
  }
  report.accuracy_mean = acc_sum / static_cast<double>(acc.size());
  report.completeness_mean = comp_sum / static_cast<double>(comp.size());
  report.chamfer = (report.accuracy_mean + report.completeness_mean) / 2.0;
  report.precision = 100.0 * acc_hits / static_cast<double>(acc.size());
  report.recall = 100.0 * comp_hits / static_cast<double>(comp.size());
  report.f1 = report.precision + report.recall > 0.0
                  ? 2.0 * report.precision * report.recall /
                        (report.precision + report.recall)
                  : 0.0;
  return report;
}

DepthReport depth_metrics(const DepthMap& pred, const DepthMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw ShapeMismatch("depth_metrics: depth map shapes differ");
  std::size_t count = 0, accurate = 0;
  double absrel = 0.0, sqrel = 0.0;
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u) {
      if (!pred.valid(v, u) || !gt.valid(v, u)) continue;
      const double p = pred.at(v, u), g = gt.at(v, u);
      if (!(g > 0.0))
        throw Error("depth_metrics: non-positive ground-truth depth");
      ++count;
      // Non-positive predictions have unbounded ratio: never delta1-accurate.
      if (p > 0.0 && std::max(p / g, g / p) < 1.25) ++accurate;
      absrel += std::abs(p - g) / g;
      sqrel += (p - g) * (p - g) / g;
    }
  if (count == 0)
    throw DegenerateFit("depth_metrics: no jointly-valid pixels");
  DepthReport report;
  report.delta1 = static_cast<double>(accurate) / static_cast<double>(count);
  report.absrel = absrel / static_cast<double>(count);
  report.sqrel = sqrel / static_cast<double>(count);
  return report;
}

}  // namespace visgeom
