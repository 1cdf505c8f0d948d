#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "visgeom/dataqa.hpp"
#include "visgeom/errors.hpp"
#include "visgeom/geometry.hpp"

using namespace visgeom;

namespace {

std::size_t count_edges(const EdgeMap& e) {
  return static_cast<std::size_t>(
      std::count(e.edges.begin(), e.edges.end(), std::uint8_t{1}));
}

// Vertical brightness step at column `split` in a w x h image.
std::vector<double> step_image(int w, int h, int split, double lo = 0.0,
                               double hi = 1.0) {
  std::vector<double> img(static_cast<std::size_t>(w) * h, lo);
  for (int v = 0; v < h; ++v)
    for (int u = split; u < w; ++u)
      img[static_cast<std::size_t>(v) * w + u] = hi;
  return img;
}

EdgeMap from_bits(int w, int h, const std::vector<std::uint8_t>& bits) {
  EdgeMap e;
  e.width = w;
  e.height = h;
  e.edges = bits;
  return e;
}

}  // namespace

TEST_CASE("canny on a constant image finds nothing") {
  const std::vector<double> flat(32 * 32, 0.7);
  const EdgeMap e = canny_edges(flat, 32, 32);
  CHECK(count_edges(e) == 0);
}

TEST_CASE("canny localizes a vertical step to one column") {
  const int w = 32, h = 32, split = 16;
  const EdgeMap e = canny_edges(step_image(w, h, split), w, h);
  CHECK(count_edges(e) > 0);
  // Non-maximum suppression keeps a single column; blur spreads the step
  // symmetrically so the surviving column sits at split-1 or split.
  for (int v = 0; v < h; ++v) {
    int row_edges = 0;
    for (int u = 0; u < w; ++u)
      if (e.at(v, u)) {
        ++row_edges;
        CHECK(u >= split - 1);
        CHECK(u <= split);
      }
    CHECK(row_edges <= 1);
  }
}

TEST_CASE("canny edge response is translation covariant") {
  const int w = 48, h = 16;
  const EdgeMap a = canny_edges(step_image(w, h, 20), w, h);
  const EdgeMap b = canny_edges(step_image(w, h, 25), w, h);
  // Shifting the step by 5 columns shifts every interior edge by 5.
  for (int v = 2; v < h - 2; ++v)
    for (int u = 0; u < w - 5; ++u) CHECK(a.at(v, u) == b.at(v, u + 5));
}

TEST_CASE("canny rejects bad parameters") {
  const std::vector<double> img(9, 0.0);
  CHECK_THROWS_AS(canny_edges(img, 3, 3, 0.0), Error);
  CHECK_THROWS_AS(canny_edges(img, 3, 3, 1.4, -0.1, 0.3), Error);
  CHECK_THROWS_AS(canny_edges(img, 3, 3, 1.4, 0.3, 0.3), Error);
  CHECK_THROWS_AS(canny_edges(img, 2, 2), Error);
  CHECK_THROWS_AS(canny_edges(img, 4, 3), ShapeMismatch);
}

TEST_CASE("dilate identity, block growth, and composition") {
  EdgeMap e = from_bits(5, 5, std::vector<std::uint8_t>(25, 0));
  e.edges[2 * 5 + 2] = 1;

  const EdgeMap same = dilate(e, 0);
  CHECK(same.edges == e.edges);

  const EdgeMap grown = dilate(e, 1);
  CHECK(count_edges(grown) == 9);
  for (int v = 0; v < 5; ++v)
    for (int u = 0; u < 5; ++u) {
      const bool in = std::abs(v - 2) <= 1 && std::abs(u - 2) <= 1;
      CHECK(grown.at(v, u) == (in ? 1 : 0));
    }

  // Dilating by a then b equals dilating by a + b (Chebyshev balls compose).
  const EdgeMap twice = dilate(dilate(e, 1), 1);
  const EdgeMap once = dilate(e, 2);
  CHECK(twice.edges == once.edges);

  // Clipping at the border: a corner pixel grows into a quarter ball.
  EdgeMap corner = from_bits(4, 4, std::vector<std::uint8_t>(16, 0));
  corner.edges[0] = 1;
  CHECK(count_edges(dilate(corner, 1)) == 4);

  CHECK_THROWS_AS(dilate(e, -1), Error);
}

TEST_CASE("dilate keeps disjoint blocks disjoint until they meet") {
  EdgeMap e = from_bits(9, 3, std::vector<std::uint8_t>(27, 0));
  e.edges[1 * 9 + 1] = 1;
  e.edges[1 * 9 + 7] = 1;
  CHECK(count_edges(dilate(e, 1)) == 18);  // two 3x3 blocks, no overlap
  const EdgeMap merged = dilate(e, 3);
  // Radius 3 spans columns [0,4] and [4,8]: the union covers every pixel.
  CHECK(count_edges(merged) == 27);
}

TEST_CASE("alignment_score identity and hand ratios") {
  const int w = 24, h = 24;
  const std::vector<double> img = step_image(w, h, 12);
  const EdgeMap e = canny_edges(img, w, h);
  REQUIRE(count_edges(e) > 0);

  const AlignmentScore same = alignment_score(e, e);
  CHECK(!same.degenerate);
  CHECK(same.i1 == 1.0);
  CHECK(same.i3 == 1.0);
  CHECK(same.score == 1.0);

  // A 3-pixel shift escapes radius-1 dilation but not radius-3: I1 = 0 while
  // I3 > 0, driving the score to zero without the degenerate flag.
  EdgeMap shifted = from_bits(w, h, std::vector<std::uint8_t>(e.edges.size(), 0));
  for (int v = 0; v < h; ++v)
    for (int u = 0; u + 6 < w; ++u)
      if (e.at(v, u + 6)) shifted.edges[static_cast<std::size_t>(v) * w + u] = 1;
  REQUIRE(count_edges(shifted) > 0);
  const AlignmentScore far = alignment_score(e, shifted);
  CHECK(!far.degenerate);
  CHECK(far.i1 == 0.0);
  CHECK(far.i3 > 0.0);
  CHECK(far.score == 0.0);

  // Empty depth edges: I3 = 0, degenerate, score 0.
  const EdgeMap empty = from_bits(w, h, std::vector<std::uint8_t>(e.edges.size(), 0));
  const AlignmentScore deg = alignment_score(e, empty);
  CHECK(deg.degenerate);
  CHECK(deg.score == 0.0);
  CHECK(deg.i3 == 0.0);

  EdgeMap other = from_bits(w, h - 1, std::vector<std::uint8_t>(
                                          static_cast<std::size_t>(w) * (h - 1), 0));
  CHECK_THROWS_AS(alignment_score(e, other), ShapeMismatch);
}

TEST_CASE("alignment_score decays monotonically with misalignment") {
  const int w = 40, h = 24;
  const std::vector<double> img = step_image(w, h, 20);
  const EdgeMap img_edges = canny_edges(img, w, h);
  double prev = 2.0;
  for (int shift = 0; shift <= 2; ++shift) {
    const std::vector<double> dep = step_image(w, h, 20 + shift);
    const AlignmentScore s =
        alignment_score(img_edges, canny_edges(dep, w, h));
    CHECK(!s.degenerate);
    CHECK(s.score <= prev + 1e-12);
    prev = s.score;
  }
  // Perfectly aligned scores 1; two pixels off must hurt.
  const AlignmentScore off =
      alignment_score(img_edges, canny_edges(step_image(w, h, 22), w, h));
  CHECK(off.score < 1.0);
}

TEST_CASE("log_scale_depth values and fill policy") {
  DepthMap depth(2, 2);
  depth.set(0, 0, 1.0);
  depth.set(0, 1, std::exp(2.0));
  depth.set_invalid(1, 0);
  depth.set(1, 1, std::exp(0.5));

  const std::vector<double> g = log_scale_depth(depth);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g[3] == doctest::Approx(0.5).epsilon(1e-15));
  // Invalid pixels take the minimum valid log-depth (here log(1) = 0).
  CHECK(g[2] == 0.0);

  DepthMap none(2, 2);
  const std::vector<double> zeros = log_scale_depth(none);
  CHECK(zeros == std::vector<double>(4, 0.0));

  DepthMap bad(1, 1);
  bad.set(0, 0, -1.0);
  CHECK_THROWS_AS(log_scale_depth(bad), Error);
  bad.set(0, 0, 0.0);
  CHECK_THROWS_AS(log_scale_depth(bad), Error);
}

TEST_CASE("clip_depth threshold semantics") {
  DepthMap depth(3, 1);
  depth.set(0, 0, 1.0);
  depth.set(0, 1, 50.0);
  depth.set(0, 2, 2000.0);

  const DepthMap clipped = clip_depth(depth, 1000.0);
  CHECK(clipped.valid(0, 0));
  CHECK(clipped.valid(0, 1));
  CHECK(!clipped.valid(0, 2));
  CHECK(clipped.at(0, 0) == 1.0);
  CHECK(clipped.at(0, 1) == 50.0);

  // Exactly at the threshold stays valid (strictly greater is clipped).
  const DepthMap exact = clip_depth(depth, 50.0);
  CHECK(exact.valid(0, 1));
  CHECK(!exact.valid(0, 2));

  // Idempotence, compared bitwise: invalid pixels hold NaN, which never
  // compares equal to itself through operator==.
  const DepthMap again = clip_depth(clipped, 1000.0);
  REQUIRE(again.values.size() == clipped.values.size());
  CHECK(std::memcmp(again.values.data(), clipped.values.data(),
                    clipped.values.size() * sizeof(double)) == 0);
  CHECK(again.mask == clipped.mask);

  CHECK_THROWS_AS(clip_depth(depth, 0.0), Error);
  CHECK_THROWS_AS(clip_depth(depth, -5.0), Error);
}

TEST_CASE("depth edges come from log space") {
  // Multiplicative depth structure: a ratio step of x2 produces the same
  // log-gradient regardless of absolute scale, so both scaled versions
  // yield identical edge maps. The mild tilt on each plateau breaks the
  // exact gradient-magnitude ties of a symmetric step, which the
  // non-maximum-suppression tie rules would otherwise resolve by ulp noise.
  const int w = 24, h = 16;
  DepthMap near(w, h), far(w, h);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const double tilt = 1.0 + 0.002 * u + 0.001 * v;
      const double base = (u < w / 2 ? 1.0 : 2.0) * tilt;
      near.set(v, u, base);
      far.set(v, u, base * 100.0);
    }
  const EdgeMap en = canny_edges(log_scale_depth(near), w, h);
  const EdgeMap ef = canny_edges(log_scale_depth(far), w, h);
  CHECK(en.edges == ef.edges);
  CHECK(count_edges(en) > 0);
}
