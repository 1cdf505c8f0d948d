#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "visgeom/errors.hpp"
#include "visgeom/fusion.hpp"
#include "visgeom/geometry.hpp"
#include "visgeom/io.hpp"
#include "visgeom/rng.hpp"

using namespace visgeom;

namespace {

DepthMap sample_depth() {
  DepthMap d(4, 3);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 4; ++u) d.set(v, u, 0.25f * (v * 4 + u + 1));
  d.set_invalid(1, 2);
  return d;
}

RayMap sample_rays() {
  CameraIntrinsics intr;
  intr.fx = 32.0;
  intr.fy = 30.0;
  intr.cx = 2.0;
  intr.cy = 1.5;
  intr.width = 4;
  intr.height = 3;
  CameraExtrinsics extr;
  extr.q = canonical_quat(Eigen::Vector4d(0.9, 0.1, -0.2, 0.3).normalized());
  extr.t = Vec3(0.5, -1.0, 2.0);
  return build_ray_map(intr, extr);
}

TsdfVolume sample_tsdf() {
  TsdfVolume vol = tsdf_new(Vec3(0, 0, 0), Vec3(0.3, 0.2, 0.1), 0.1);
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) {
    vol.tsdf[i] = static_cast<float>(std::sin(0.37 * static_cast<double>(i)));
    vol.weight[i] = static_cast<std::uint8_t>(i % 7);
  }
  return vol;
}

std::vector<CameraRecord> sample_trajectory() {
  std::vector<CameraRecord> frames;
  for (int i = 0; i < 3; ++i) {
    CameraRecord rec;
    rec.frame_id = "frame_" + std::to_string(i);
    rec.intrinsics.fx = 100.0 + i;
    rec.intrinsics.fy = 101.5 + i;
    rec.intrinsics.cx = 16.0;
    rec.intrinsics.cy = 12.25;
    rec.intrinsics.skew = i == 1 ? 0.125 : 0.0;
    rec.intrinsics.width = 32;
    rec.intrinsics.height = 24;
    rec.extrinsics.q = canonical_quat(
        Eigen::Vector4d(1.0, 0.1 * i, -0.05 * i, 0.2).normalized());
    rec.extrinsics.t = Vec3(0.1 * i, -0.3, 1.0 + i);
    frames.push_back(rec);
  }
  return frames;
}

// Every strict prefix of a binary buffer must parse as a truncation error
// whose offset is exactly the prefix length.
template <typename Parse>
void check_truncation_fuzz(const std::vector<std::uint8_t>& bytes,
                           Parse parse) {
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    const std::vector<std::uint8_t> prefix(bytes.begin(), bytes.begin() + len);
    bool threw = false;
    try {
      parse(prefix);
    } catch (const ParseError& e) {
      threw = true;
      // Offsets never point past the available bytes; pure truncation points
      // exactly at the end.
      CHECK(e.offset <= len);
      if (e.expected.find("byte") != std::string::npos ||
          e.expected.find("data") != std::string::npos)
        CHECK(e.offset == len);
    }
    CHECK(threw);
  }
}

}  // namespace

TEST_CASE("depth map binary round trip is bitwise") {
  const DepthMap d = sample_depth();
  const std::vector<std::uint8_t> bytes = serialize_depth(d);
  CHECK(bytes.size() == 4 + 4 + 4 + d.pixel_count() * 4);
  CHECK(bytes[0] == 'D');
  CHECK(bytes[1] == 'A');
  CHECK(bytes[2] == 'M');
  CHECK(bytes[3] == '1');

  const DepthMap back = parse_depth(bytes);
  CHECK(back.width == d.width);
  CHECK(back.height == d.height);
  CHECK(back.mask == d.mask);
  for (std::size_t i = 0; i < d.values.size(); ++i)
    if (d.mask[i]) CHECK(back.values[i] == d.values[i]);

  CHECK(serialize_depth(back) == bytes);
}

TEST_CASE("depth invalid pixels use one canonical NaN") {
  DepthMap d(2, 1);
  d.set(0, 0, 1.0);
  const std::vector<std::uint8_t> bytes = serialize_depth(d);
  // Second pixel starts at offset 12 + 4.
  std::uint32_t word = 0;
  for (int b = 0; b < 4; ++b)
    word |= static_cast<std::uint32_t>(bytes[16 + b]) << (8 * b);
  CHECK(word == 0x7FC00000u);
}

TEST_CASE("depth reader treats any non-finite as invalid") {
  DepthMap d(2, 1);
  d.set(0, 0, 1.0);
  d.set(0, 1, 2.0);
  std::vector<std::uint8_t> bytes = serialize_depth(d);
  const float inf = std::numeric_limits<float>::infinity();
  std::uint32_t word;
  std::memcpy(&word, &inf, 4);
  for (int b = 0; b < 4; ++b)
    bytes[16 + b] = static_cast<std::uint8_t>(word >> (8 * b));
  const DepthMap back = parse_depth(bytes);
  CHECK(back.valid(0, 0));
  CHECK(!back.valid(0, 1));
}

TEST_CASE("depth parser rejects malformed input") {
  const std::vector<std::uint8_t> good = serialize_depth(sample_depth());

  std::vector<std::uint8_t> bad_magic = good;
  bad_magic[2] = 'X';
  CHECK_THROWS_AS(parse_depth(bad_magic), ParseError);
  try {
    parse_depth(bad_magic);
  } catch (const ParseError& e) {
    CHECK(e.offset == 0);
  }

  std::vector<std::uint8_t> trailing = good;
  trailing.push_back(0);
  try {
    parse_depth(trailing);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.offset == good.size());
  }

  // Huge dims must fail fast instead of attempting the allocation.
  std::vector<std::uint8_t> bomb = {'D', 'A', 'M', '1',
                                    0xFF, 0xFF, 0xFF, 0xFF,
                                    0xFF, 0xFF, 0xFF, 0xFF};
  CHECK_THROWS_AS(parse_depth(bomb), ParseError);

  check_truncation_fuzz(good, [](const std::vector<std::uint8_t>& b) {
    return parse_depth(b);
  });
}

TEST_CASE("raymap round trip and fuzz") {
  const RayMap rays = sample_rays();
  const std::vector<std::uint8_t> bytes = serialize_raymap(rays);
  CHECK(bytes.size() == 12 + rays.pixel_count() * 24);
  CHECK(bytes[0] == 'R');
  CHECK(bytes[3] == '1');

  const RayMap back = parse_raymap(bytes);
  CHECK(back.width == rays.width);
  CHECK(back.height == rays.height);
  for (int v = 0; v < rays.height; ++v)
    for (int u = 0; u < rays.width; ++u) {
      // Values pass through f32; re-serializing must reproduce the bytes.
      CHECK((back.origin_at(v, u) -
             rays.origin_at(v, u).cast<float>().cast<double>())
                .norm() == 0.0);
      CHECK((back.direction_at(v, u) -
             rays.direction_at(v, u).cast<float>().cast<double>())
                .norm() == 0.0);
    }
  CHECK(serialize_raymap(back) == bytes);

  check_truncation_fuzz(bytes, [](const std::vector<std::uint8_t>& b) {
    return parse_raymap(b);
  });

  std::vector<std::uint8_t> trailing = bytes;
  trailing.push_back(7);
  try {
    parse_raymap(trailing);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.offset == bytes.size());
  }
}

TEST_CASE("tsdf round trip and fuzz") {
  const TsdfVolume vol = sample_tsdf();
  const std::vector<std::uint8_t> bytes = serialize_tsdf(vol);
  const TsdfVolume back = parse_tsdf(bytes);
  CHECK(back.nx == vol.nx);
  CHECK(back.ny == vol.ny);
  CHECK(back.nz == vol.nz);
  CHECK(back.tsdf == vol.tsdf);
  CHECK(back.weight == vol.weight);
  CHECK(static_cast<float>(back.voxel_size) ==
        static_cast<float>(vol.voxel_size));
  CHECK(serialize_tsdf(back) == bytes);

  check_truncation_fuzz(bytes, [](const std::vector<std::uint8_t>& b) {
    return parse_tsdf(b);
  });
}

TEST_CASE("ply binary round trip with and without colors") {
  PointCloud cloud;
  cloud.points = {Vec3(0.5, -1.25, 2.0), Vec3(3.0, 4.0, -5.5)};
  const std::vector<std::uint8_t> bytes = serialize_ply(cloud);
  const std::string header(bytes.begin(),
                           bytes.begin() + std::min<std::size_t>(200, bytes.size()));
  CHECK(header.find("ply\n") == 0);
  CHECK(header.find("format binary_little_endian 1.0") != std::string::npos);
  CHECK(header.find("element vertex 2") != std::string::npos);

  const PointCloud back = parse_ply(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back.colors.empty());
  for (int i = 0; i < 2; ++i)
    CHECK((back.points[i] - cloud.points[i].cast<float>().cast<double>())
              .norm() == 0.0);
  CHECK(serialize_ply(back) == bytes);

  PointCloud colored = cloud;
  colored.colors = {{255, 0, 10}, {1, 2, 3}};
  const std::vector<std::uint8_t> cbytes = serialize_ply(colored);
  const PointCloud cback = parse_ply(cbytes);
  REQUIRE(cback.colors.size() == 2);
  CHECK(cback.colors[0] == colored.colors[0]);
  CHECK(cback.colors[1] == colored.colors[1]);
}

TEST_CASE("ply ascii parsing") {
  const std::string text =
      "ply\n"
      "format ascii 1.0\n"
      "comment made by hand\n"
      "element vertex 2\n"
      "property float x\n"
      "property float y\n"
      "property float z\n"
      "end_header\n"
      "1 2 3\n"
      "-0.5 0.25 10\n";
  const PointCloud cloud =
      parse_ply(std::vector<std::uint8_t>(text.begin(), text.end()));
  REQUIRE(cloud.size() == 2);
  CHECK(cloud.points[0] == Vec3(1, 2, 3));
  CHECK(cloud.points[1] == Vec3(-0.5, 0.25, 10));
}

TEST_CASE("ply parser rejects malformed input") {
  const std::string bad_format =
      "ply\nformat binary_big_endian 1.0\nelement vertex 0\n"
      "property float x\nproperty float y\nproperty float z\nend_header\n";
  CHECK_THROWS_AS(
      parse_ply(std::vector<std::uint8_t>(bad_format.begin(), bad_format.end())),
      ParseError);

  const std::string bad_props =
      "ply\nformat ascii 1.0\nelement vertex 1\n"
      "property float y\nproperty float x\nproperty float z\nend_header\n1 2 3\n";
  CHECK_THROWS_AS(
      parse_ply(std::vector<std::uint8_t>(bad_props.begin(), bad_props.end())),
      ParseError);

  PointCloud cloud;
  cloud.points = {Vec3(1, 2, 3)};
  std::vector<std::uint8_t> truncated = serialize_ply(cloud);
  truncated.pop_back();
  try {
    parse_ply(truncated);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.offset == truncated.size());
  }

  std::vector<std::uint8_t> trailing = serialize_ply(cloud);
  const std::size_t clean_size = trailing.size();
  trailing.push_back(0x42);
  try {
    parse_ply(trailing);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.offset == clean_size);
  }
}

TEST_CASE("trajectory JSONL round trip is lossless") {
  const std::vector<CameraRecord> frames = sample_trajectory();
  const std::string text = serialize_trajectory(frames);
  // One line per frame, each a self-contained JSON object.
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("\"convention\":\"cam2world\"") != std::string::npos);

  const std::vector<CameraRecord> back = parse_trajectory(text);
  REQUIRE(back.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(back[i].frame_id == frames[i].frame_id);
    CHECK(back[i].intrinsics.fx == frames[i].intrinsics.fx);
    CHECK(back[i].intrinsics.fy == frames[i].intrinsics.fy);
    CHECK(back[i].intrinsics.cx == frames[i].intrinsics.cx);
    CHECK(back[i].intrinsics.cy == frames[i].intrinsics.cy);
    CHECK(back[i].intrinsics.skew == frames[i].intrinsics.skew);
    CHECK(back[i].intrinsics.width == frames[i].intrinsics.width);
    CHECK(back[i].intrinsics.height == frames[i].intrinsics.height);
    CHECK(back[i].extrinsics.q == frames[i].extrinsics.q);
    CHECK(back[i].extrinsics.t == frames[i].extrinsics.t);
  }
  CHECK(serialize_trajectory(back) == text);
}

TEST_CASE("trajectory truncated at a line boundary parses shorter") {
  const std::string text = serialize_trajectory(sample_trajectory());
  const std::size_t first_nl = text.find('\n');
  const std::vector<CameraRecord> one = parse_trajectory(text.substr(0, first_nl + 1));
  CHECK(one.size() == 1);
  // Without the final newline the last line still counts.
  const std::vector<CameraRecord> all = parse_trajectory(text.substr(0, text.size() - 1));
  CHECK(all.size() == 3);
  CHECK(parse_trajectory("").empty());
}

TEST_CASE("trajectory rejects malformed lines") {
  const std::string good = serialize_trajectory(sample_trajectory());
  // Truncation inside a line is malformed JSON.
  CHECK_THROWS_AS(parse_trajectory(good.substr(0, good.find('\n') - 5)),
                  ParseError);

  std::string wrong_convention = good;
  const std::size_t pos = wrong_convention.find("cam2world");
  wrong_convention.replace(pos, 9, "world2cam");
  CHECK_THROWS_AS(parse_trajectory(wrong_convention), ParseError);

  CHECK_THROWS_AS(parse_trajectory("{\"frame_id\":\"a\"}\n"), ParseError);
  CHECK_THROWS_AS(parse_trajectory("not json\n"), ParseError);

  // Unknown keys are rejected, not ignored.
  std::string extra_key = good.substr(0, good.find('\n'));
  extra_key.insert(extra_key.size() - 1, ",\"bogus\":1");
  extra_key.push_back('\n');
  CHECK_THROWS_AS(parse_trajectory(extra_key), ParseError);

  // Non-normalized quaternions are invalid on read.
  std::string bad_quat = good;
  const std::size_t qpos = bad_quat.find("\"quat\":[");
  const std::size_t qend = bad_quat.find(']', qpos);
  bad_quat.replace(qpos, qend - qpos + 1, "\"quat\":[2.0,0.0,0.0,0.0]");
  CHECK_THROWS_AS(parse_trajectory(bad_quat), ParseError);
}

TEST_CASE("camera json round trip and optional fields") {
  CameraIntrinsics intr;
  intr.fx = 128.0;
  intr.fy = 130.5;
  intr.cx = 20.0;
  intr.cy = 15.0;
  intr.skew = 0.25;
  intr.width = 40;
  intr.height = 30;
  CameraExtrinsics extr;
  extr.q = canonical_quat(Eigen::Vector4d(0.8, -0.1, 0.3, 0.2).normalized());
  extr.t = Vec3(1.0, 2.0, 3.0);

  const std::string text = serialize_camera_json(intr, extr);
  const auto [bi, be] = parse_camera_json(text);
  CHECK(bi.fx == intr.fx);
  CHECK(bi.fy == intr.fy);
  CHECK(bi.cx == intr.cx);
  CHECK(bi.cy == intr.cy);
  CHECK(bi.skew == intr.skew);
  CHECK(bi.width == intr.width);
  CHECK(bi.height == intr.height);
  CHECK(be.q == extr.q);
  CHECK(be.t == extr.t);

  // frame_id and convention are optional on read.
  const std::string minimal =
      "{\"width\":8,\"height\":6,\"fx\":10.0,\"fy\":11.0,\"cx\":4.0,"
      "\"cy\":3.0,\"skew\":0.0,\"quat\":[1.0,0.0,0.0,0.0],"
      "\"t\":[0.0,0.0,0.0]}";
  const auto [mi, me] = parse_camera_json(minimal);
  CHECK(mi.width == 8);
  CHECK(me.t == Vec3::Zero());

  CHECK_THROWS_AS(parse_camera_json("{}"), ParseError);
  CHECK_THROWS_AS(parse_camera_json("[1,2,3]"), ParseError);
  std::string bad_conv = minimal;
  bad_conv.insert(bad_conv.size() - 1, ",\"convention\":\"other\"");
  CHECK_THROWS_AS(parse_camera_json(bad_conv), ParseError);
}

TEST_CASE("pgm P5 single and double byte samples") {
  const std::string header = "P5\n# comment\n3 2\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (int i = 0; i < 6; ++i) bytes.push_back(static_cast<std::uint8_t>(10 * i));
  const GrayImage img = parse_pgm(bytes);
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.pixels[0] == 0.0);
  CHECK(img.pixels[5] == 50.0);

  // maxval >= 256 switches to 2-byte big-endian samples.
  const std::string header16 = "P5\n2 1\n65535\n";
  std::vector<std::uint8_t> wide(header16.begin(), header16.end());
  wide.insert(wide.end(), {0x01, 0x00, 0xFF, 0xFF});
  const GrayImage img16 = parse_pgm(wide);
  CHECK(img16.pixels[0] == 256.0);
  CHECK(img16.pixels[1] == 65535.0);

  // Trailing bytes after the raster are rejected.
  std::vector<std::uint8_t> trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(parse_pgm(trailing), ParseError);

  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 1);
  try {
    parse_pgm(truncated);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.offset == truncated.size());
  }
}

TEST_CASE("pgm P2 ascii") {
  const std::string text = "P2\n3 1\n255\n0 128 255\n";
  const GrayImage img = parse_pgm({text.begin(), text.end()});
  CHECK(img.width == 3);
  CHECK(img.pixels == std::vector<double>({0.0, 128.0, 255.0}));

  // Sample above maxval is malformed.
  const std::string over = "P2\n1 1\n100\n101\n";
  CHECK_THROWS_AS(parse_pgm({over.begin(), over.end()}), ParseError);

  const std::string bad_magic = "P6\n1 1\n255\nx";
  CHECK_THROWS_AS(parse_pgm({bad_magic.begin(), bad_magic.end()}), ParseError);
}

TEST_CASE("file wrappers distinguish missing from malformed") {
  CHECK_THROWS_AS(read_depth("/nonexistent/path/a.dam1"), Error);
  bool parse_error_is_not_plain = true;
  try {
    read_depth("/nonexistent/path/a.dam1");
  } catch (const ParseError&) {
    parse_error_is_not_plain = false;
  } catch (const Error&) {
  }
  CHECK(parse_error_is_not_plain);

  const std::string dir = "/tmp/visgeom_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/roundtrip.dam1";
  const DepthMap d = sample_depth();
  write_depth(path, d);
  const DepthMap back = read_depth(path);
  CHECK(serialize_depth(back) == serialize_depth(d));

  write_file_text(dir + "/garbage.dam1", "not a depth map");
  CHECK_THROWS_AS(read_depth(dir + "/garbage.dam1"), ParseError);
}

TEST_CASE("random byte fuzz never crashes the binary parsers") {
  Xoshiro256 rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint8_t> junk(rng.bounded(64));
    for (std::uint8_t& b : junk)
      b = static_cast<std::uint8_t>(rng.bounded(256));
    for (int which = 0; which < 4; ++which) {
      try {
        switch (which) {
          case 0: parse_depth(junk); break;
          case 1: parse_raymap(junk); break;
          case 2: parse_tsdf(junk); break;
          case 3: parse_ply(junk); break;
        }
      } catch (const ParseError&) {
      }
    }
  }
  CHECK(true);
}
