#pragma once

#include <cstdint>
#include <vector>

#include "visgeom/geometry.hpp"

namespace visgeom {

// Binary per-pixel edge indicator, same dims as the source image.
struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> edges;  // row-major, H*W, 0 or 1

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::uint8_t at(int v, int u) const {
    return edges[static_cast<std::size_t>(v) * width + u];
  }
};

// Canny edge detector: Gaussian blur (radius ceil(3*sigma), replicate
// borders), Sobel gradients (border magnitude zero), non-maximum suppression
// along the quantized gradient direction (a pixel survives when its magnitude
// is strictly greater than the forward neighbor and >= the backward neighbor,
// so plateau ties keep exactly one pixel), then double-threshold hysteresis
// with 8-connected BFS from strong pixels. `low` and `high` are fractions of
// the maximum Sobel magnitude; a pixel is weak when its suppressed magnitude
// is >= low*max and strong when >= high*max.
//
// Throws Error when the image is smaller than 3x3, sigma <= 0, low < 0, or
// low >= high; ShapeMismatch when gray.size() != width*height.
EdgeMap canny_edges(const std::vector<double>& gray, int width, int height,
                    double sigma = 1.4, double low = 0.1, double high = 0.3);

// Chebyshev-ball dilation (square structuring element of half-width radius).
// radius 0 is the identity. Throws Error when radius < 0.
EdgeMap dilate(const EdgeMap& edges, int radius);

struct AlignmentScore {
  double score = 0.0;
  double i1 = 0.0;
  double i3 = 0.0;
  // Set when I3 = 0 (in particular when the depth edge map is empty), i.e.
  // the ratio I1/I3 is undefined and reported as 0.
  bool degenerate = false;
};

// Spatial-misalignment score between image and depth edges:
//   I_r = |dilate(img, r) & dilate(dep, r)| / |dilate(dep, r)|  for r in {1,3}
//   score = I1 / I3 (0 when I3 = 0, with the degenerate flag set)
// Throws ShapeMismatch when dims differ.
AlignmentScore alignment_score(const EdgeMap& image_edges,
                               const EdgeMap& depth_edges);

// Intensity image for depth edge detection: log of the value at valid
// pixels; invalid pixels are filled with the minimum valid log-depth so they
// contribute no gradient of their own. Valid values must be positive
// (throws Error otherwise). A map with no valid pixels yields all zeros.
std::vector<double> log_scale_depth(const DepthMap& depth);

// Marks values strictly greater than max_depth invalid; everything else
// (including already-invalid pixels) is unchanged. Idempotent.
// Throws Error when max_depth <= 0.
DepthMap clip_depth(const DepthMap& depth, double max_depth);

}  // namespace visgeom
