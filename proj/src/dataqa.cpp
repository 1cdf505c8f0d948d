#include "visgeom/dataqa.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "visgeom/errors.hpp"

namespace visgeom {

namespace {

// Separable Gaussian blur with replicate borders.
std::vector<double> gaussian_blur(const std::vector<double>& img, int w,
                                  int h, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  std::vector<double> tmp(img.size()), out(img.size());
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int uu = std::clamp(u + i, 0, w - 1);
        acc += kernel[i + radius] * img[static_cast<std::size_t>(v) * w + uu];
      }
      tmp[static_cast<std::size_t>(v) * w + u] = acc;
    }
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int vv = std::clamp(v + i, 0, h - 1);
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(vv) * w + u];
      }
      out[static_cast<std::size_t>(v) * w + u] = acc;
    }
  return out;
}

}  // namespace

EdgeMap canny_edges(const std::vector<double>& gray, int width, int height,
                    double sigma, double low, double high) {
  if (width < 3 || height < 3)
    throw Error("canny_edges: image must be at least 3x3");
  if (!(sigma > 0.0)) throw Error("canny_edges: sigma must be > 0");
  if (!(low >= 0.0) || !(low < high))
    throw Error("canny_edges: thresholds must satisfy 0 <= low < high");
  if (gray.size() != static_cast<std::size_t>(width) * height)
    throw ShapeMismatch("canny_edges: gray size differs from width*height");

  EdgeMap out;
  out.width = width;
  out.height = height;
  out.edges.assign(gray.size(), 0);

  const std::vector<double> blurred = gaussian_blur(gray, width, height, sigma);
  auto flat = [&](int v, int u) {
    return static_cast<std::size_t>(v) * width + u;
  };

  // Sobel gradients; border pixels keep zero magnitude.
  std::vector<double> gx(gray.size(), 0.0), gy(gray.size(), 0.0),
      mag(gray.size(), 0.0);
  double max_mag = 0.0;
  for (int v = 1; v + 1 < height; ++v)
    for (int u = 1; u + 1 < width; ++u) {
      const double sx = (blurred[flat(v - 1, u + 1)] +
                         2.0 * blurred[flat(v, u + 1)] +
                         blurred[flat(v + 1, u + 1)]) -
                        (blurred[flat(v - 1, u - 1)] +
                         2.0 * blurred[flat(v, u - 1)] +
                         blurred[flat(v + 1, u - 1)]);
      const double sy = (blurred[flat(v + 1, u - 1)] +
                         2.0 * blurred[flat(v + 1, u)] +
                         blurred[flat(v + 1, u + 1)]) -
                        (blurred[flat(v - 1, u - 1)] +
                         2.0 * blurred[flat(v - 1, u)] +
                         blurred[flat(v - 1, u + 1)]);
      gx[flat(v, u)] = sx;
      gy[flat(v, u)] = sy;
      mag[flat(v, u)] = std::hypot(sx, sy);
      max_mag = std::max(max_mag, mag[flat(v, u)]);
    }
  if (max_mag == 0.0) return out;  // constant image

  // Non-maximum suppression along the quantized gradient direction. The
  // forward neighbor lies in the direction the gradient points; plateau ties
  // keep the forward-most pixel (strict > forward, >= backward).
  std::vector<double> nms(gray.size(), 0.0);
  for (int v = 1; v + 1 < height; ++v)
    for (int u = 1; u + 1 < width; ++u) {
      const double m = mag[flat(v, u)];
      if (m == 0.0) continue;
      double angle = std::atan2(gy[flat(v, u)], gx[flat(v, u)]);
      if (angle < 0.0) angle += std::numbers::pi;
      int du = 1, dv = 0;  // bin 0: horizontal gradient
      const double step = std::numbers::pi / 8.0;
      if (angle >= step && angle < 3.0 * step) {
        du = 1;
        dv = 1;
      } else if (angle >= 3.0 * step && angle < 5.0 * step) {
        du = 0;
        dv = 1;
      } else if (angle >= 5.0 * step && angle < 7.0 * step) {
        du = -1;
        dv = 1;
      }
      const double forward = mag[flat(v + dv, u + du)];
      const double backward = mag[flat(v - dv, u - du)];
      if (m > forward && m >= backward) nms[flat(v, u)] = m;
    }

  // Double-threshold hysteresis: BFS from strong pixels across weak ones,
  // 8-connected.
  const double lo = low * max_mag;
  const double hi = high * max_mag;
  std::vector<std::size_t> stack;
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u)
      if (nms[flat(v, u)] >= hi && !out.edges[flat(v, u)]) {
        out.edges[flat(v, u)] = 1;
        stack.push_back(flat(v, u));
        while (!stack.empty()) {
          const std::size_t f = stack.back();
          stack.pop_back();
          const int cv = static_cast<int>(f / width);
          const int cu = static_cast<int>(f % width);
          for (int dv = -1; dv <= 1; ++dv)
            for (int du = -1; du <= 1; ++du) {
              const int nv = cv + dv, nu = cu + du;
              if (nv < 0 || nv >= height || nu < 0 || nu >= width) continue;
              const std::size_t nf = flat(nv, nu);
              if (!out.edges[nf] && nms[nf] >= lo) {
                out.edges[nf] = 1;
                stack.push_back(nf);
              }
            }
        }
      }
  return out;
}

EdgeMap dilate(const EdgeMap& edges, int radius) {
  if (radius < 0) throw Error("dilate: radius must be >= 0");
  if (radius == 0) return edges;

  // Separable binary dilation: horizontal OR pass then vertical OR pass.
  EdgeMap tmp = edges;
  for (int v = 0; v < edges.height; ++v)
    for (int u = 0; u < edges.width; ++u) {
      std::uint8_t hit = 0;
      for (int i = std::max(0, u - radius);
           i <= std::min(edges.width - 1, u + radius) && !hit; ++i)
        hit = edges.at(v, i);
      tmp.edges[static_cast<std::size_t>(v) * edges.width + u] = hit;
    }
  EdgeMap out = edges;
  for (int v = 0; v < edges.height; ++v)
    for (int u = 0; u < edges.width; ++u) {
      std::uint8_t hit = 0;
      for (int i = std::max(0, v - radius);
           i <= std::min(edges.height - 1, v + radius) && !hit; ++i)
        hit = tmp.at(i, u);
      out.edges[static_cast<std::size_t>(v) * edges.width + u] = hit;
    }
  return out;
}

AlignmentScore alignment_score(const EdgeMap& image_edges,
                               const EdgeMap& depth_edges) {
  if (image_edges.width != depth_edges.width ||
      image_edges.height != depth_edges.height)
    throw ShapeMismatch("alignment_score: edge map shapes differ");

  auto ratio = [&](int radius) {
    const EdgeMap di = dilate(image_edges, radius);
    const EdgeMap dd = dilate(depth_edges, radius);
    std::size_t inter = 0, denom = 0;
    for (std::size_t i = 0; i < dd.edges.size(); ++i) {
      if (dd.edges[i]) {
        ++denom;
        if (di.edges[i]) ++inter;
      }
    }
    return denom > 0
               ? static_cast<double>(inter) / static_cast<double>(denom)
               : 0.0;
  };

  AlignmentScore out;
  out.i1 = ratio(1);
  out.i3 = ratio(3);
  out.degenerate = out.i3 == 0.0;
  out.score = out.degenerate ? 0.0 : out.i1 / out.i3;
  return out;
}

std::vector<double> log_scale_depth(const DepthMap& depth) {
  std::vector<double> out(depth.pixel_count(), 0.0);
  double min_log = std::numeric_limits<double>::infinity();
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.valid(v, u)) continue;
      if (!(depth.at(v, u) > 0.0))
        throw Error("log_scale_depth: valid depths must be positive");
      const double lg = std::log(depth.at(v, u));
      out[static_cast<std::size_t>(v) * depth.width + u] = lg;
      min_log = std::min(min_log, lg);
    }
  if (!std::isfinite(min_log)) return out;  // no valid pixels: flat zeros
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u)
      if (!depth.valid(v, u))
        out[static_cast<std::size_t>(v) * depth.width + u] = min_log;
  return out;
}

DepthMap clip_depth(const DepthMap& depth, double max_depth) {
  if (!(max_depth > 0.0)) throw Error("clip_depth: max_depth must be > 0");
  DepthMap out = depth;
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      if (out.valid(v, u) && out.at(v, u) > max_depth) out.set_invalid(v, u);
  return out;
}

}  // namespace visgeom
