#include "visgeom/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "visgeom/errors.hpp"
#include "json_camera.hpp"

namespace visgeom {

namespace {

constexpr std::uint32_t kCanonicalNanBits = 0x7FC00000u;

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t x) {
  buf.push_back(static_cast<std::uint8_t>(x & 0xFF));
  buf.push_back(static_cast<std::uint8_t>((x >> 8) & 0xFF));
  buf.push_back(static_cast<std::uint8_t>((x >> 16) & 0xFF));
  buf.push_back(static_cast<std::uint8_t>((x >> 24) & 0xFF));
}

void put_f32(std::vector<std::uint8_t>& buf, float f) {
  put_u32(buf, std::bit_cast<std::uint32_t>(f));
}

std::string printable(std::string_view raw) {
  std::string out = "'";
  for (const char c : raw) {
    if (std::isprint(static_cast<unsigned char>(c))) {
      out += c;
    } else {
      char hex[8];
      std::snprintf(hex, sizeof hex, "\\x%02X",
                    static_cast<unsigned>(static_cast<std::uint8_t>(c)));
      out += hex;
    }
  }
  return out + "'";
}

// Sequential reader over a byte buffer; every failure carries the offset of
// the first byte that is missing or inconsistent.
struct Cursor {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  std::size_t remaining() const { return buf.size() - pos; }

  void need(std::size_t n, const std::string& what) const {
    if (remaining() < n) throw ParseError(buf.size(), what, "end of file");
  }
  // Overflow-free check that `count` elements of `elem_size` bytes remain.
  void need_elems(std::uint64_t count, std::size_t elem_size,
                  const std::string& what) const {
    if (count > remaining() / elem_size)
      throw ParseError(buf.size(), what, "end of file");
  }

  void magic(std::string_view tag) {
    need(tag.size(), "magic " + printable(tag));
    const std::string_view found(reinterpret_cast<const char*>(&buf[pos]),
                                 tag.size());
    if (found != tag)
      throw ParseError(pos, "magic " + printable(tag), printable(found));
    pos += tag.size();
  }

  std::uint8_t u8(const std::string& what) {
    need(1, what);
    return buf[pos++];
  }

  std::uint32_t u32(const std::string& what) {
    need(4, what);
    const std::uint32_t x = static_cast<std::uint32_t>(buf[pos]) |
                            static_cast<std::uint32_t>(buf[pos + 1]) << 8 |
                            static_cast<std::uint32_t>(buf[pos + 2]) << 16 |
                            static_cast<std::uint32_t>(buf[pos + 3]) << 24;
    pos += 4;
    return x;
  }

  float f32(const std::string& what) {
    return std::bit_cast<float>(u32(what));
  }

  int dim(const std::string& what) {
    const std::size_t at = pos;
    const std::uint32_t x = u32(what);
    if (x > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
      throw ParseError(at, what + " within int range", std::to_string(x));
    return static_cast<int>(x);
  }

  void expect_end() const {
    if (pos != buf.size())
      throw ParseError(pos, "end of file",
                       std::to_string(buf.size() - pos) + " trailing bytes");
  }
};

using detail::ordered_json;

// Key-set check for camera/trajectory JSON objects.
void check_known_keys(const ordered_json& j, bool allow_frame_id,
                      std::size_t line_offset) {
  static const char* known[] = {"width", "height", "fx",   "fy",
                                "cx",    "cy",     "skew", "quat",
                                "t",     "convention"};
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (allow_frame_id && k == "frame_id") continue;
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok)
      throw ParseError(line_offset, "known camera record key",
                       "unknown key '" + k + "'");
  }
}

void check_convention(const ordered_json& j, bool required,
                      std::size_t line_offset) {
  if (!j.contains("convention")) {
    if (required)
      throw ParseError(line_offset, "field 'convention'", "missing key");
    return;
  }
  if (!j["convention"].is_string() ||
      j["convention"].get<std::string>() != "cam2world")
    throw ParseError(line_offset, "convention 'cam2world'",
                     j["convention"].dump());
}

}  // namespace

// ---------------------------------------------------------------------------
// DAM1 depth maps

std::vector<std::uint8_t> serialize_depth(const DepthMap& depth) {
  if (depth.values.size() != depth.pixel_count() ||
      depth.mask.size() != depth.pixel_count())
    throw ShapeMismatch("serialize_depth: inconsistent buffer sizes");
  std::vector<std::uint8_t> buf;
  buf.reserve(12 + depth.pixel_count() * 4);
  buf.insert(buf.end(), {'D', 'A', 'M', '1'});
  put_u32(buf, static_cast<std::uint32_t>(depth.width));
  put_u32(buf, static_cast<std::uint32_t>(depth.height));
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    if (depth.mask[i])
      put_f32(buf, static_cast<float>(depth.values[i]));
    else
      put_u32(buf, kCanonicalNanBits);
  }
  return buf;
}

DepthMap parse_depth(const std::vector<std::uint8_t>& bytes) {
  Cursor c{bytes};
  c.magic("DAM1");
  DepthMap d;
  d.width = c.dim("u32 width");
  d.height = c.dim("u32 height");
  const std::uint64_t count =
      static_cast<std::uint64_t>(d.width) * static_cast<std::uint64_t>(d.height);
  c.need_elems(count, 4, "f32 depth samples");
  d.values.resize(count);
  d.mask.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float f = c.f32("f32 depth sample");
    if (std::isfinite(f)) {
      d.values[i] = f;
      d.mask[i] = 1;
    } else {
      d.values[i] = std::numeric_limits<double>::quiet_NaN();
      d.mask[i] = 0;
    }
  }
  c.expect_end();
  return d;
}

void write_depth(const std::string& path, const DepthMap& depth) {
  write_file_bytes(path, serialize_depth(depth));
}

DepthMap read_depth(const std::string& path) {
  return parse_depth(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// RAY1 ray maps

std::vector<std::uint8_t> serialize_raymap(const RayMap& rays) {
  if (rays.origins.size() != rays.pixel_count() * 3 ||
      rays.directions.size() != rays.pixel_count() * 3)
    throw ShapeMismatch("serialize_raymap: inconsistent buffer sizes");
  std::vector<std::uint8_t> buf;
  buf.reserve(12 + rays.pixel_count() * 24);
  buf.insert(buf.end(), {'R', 'A', 'Y', '1'});
  put_u32(buf, static_cast<std::uint32_t>(rays.width));
  put_u32(buf, static_cast<std::uint32_t>(rays.height));
  for (std::size_t i = 0; i < rays.pixel_count(); ++i) {
    for (int k = 0; k < 3; ++k)
      put_f32(buf, static_cast<float>(rays.origins[3 * i + k]));
    for (int k = 0; k < 3; ++k)
      put_f32(buf, static_cast<float>(rays.directions[3 * i + k]));
  }
  return buf;
}

RayMap parse_raymap(const std::vector<std::uint8_t>& bytes) {
  Cursor c{bytes};
  c.magic("RAY1");
  RayMap r;
  r.width = c.dim("u32 width");
  r.height = c.dim("u32 height");
  const std::uint64_t count =
      static_cast<std::uint64_t>(r.width) * static_cast<std::uint64_t>(r.height);
  c.need_elems(count, 24, "f32 ray samples");
  r.origins.resize(count * 3);
  r.directions.resize(count * 3);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (int k = 0; k < 3; ++k)
      r.origins[3 * i + k] = c.f32("f32 ray origin");
    for (int k = 0; k < 3; ++k)
      r.directions[3 * i + k] = c.f32("f32 ray direction");
  }
  c.expect_end();
  return r;
}

void write_raymap(const std::string& path, const RayMap& rays) {
  write_file_bytes(path, serialize_raymap(rays));
}

RayMap read_raymap(const std::string& path) {
  return parse_raymap(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// PLY point clouds

std::vector<std::uint8_t> serialize_ply(const PointCloud& cloud) {
  const bool with_color = !cloud.colors.empty();
  if (with_color && cloud.colors.size() != cloud.points.size())
    throw ShapeMismatch("serialize_ply: color count differs from point count");

  std::string header = "ply\nformat binary_little_endian 1.0\n";
  header += "element vertex " + std::to_string(cloud.points.size()) + "\n";
  header += "property float x\nproperty float y\nproperty float z\n";
  if (with_color)
    header +=
        "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  header += "end_header\n";

  std::vector<std::uint8_t> buf(header.begin(), header.end());
  buf.reserve(buf.size() + cloud.points.size() * (with_color ? 15 : 12));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    for (int k = 0; k < 3; ++k)
      put_f32(buf, static_cast<float>(cloud.points[i](k)));
    if (with_color)
      for (int k = 0; k < 3; ++k) buf.push_back(cloud.colors[i][k]);
  }
  return buf;
}

namespace {

struct PlyHeader {
  bool ascii = false;
  bool with_color = false;
  std::uint64_t vertex_count = 0;
  std::size_t body_offset = 0;
};

PlyHeader parse_ply_header(const std::vector<std::uint8_t>& bytes) {
  PlyHeader h;
  std::size_t pos = 0;
  bool have_element = false;
  int properties = 0;
  static const char* expected_props[] = {"float x",    "float y",
                                         "float z",    "uchar red",
                                         "uchar green", "uchar blue"};

  auto next_line = [&](std::string& line) {
    if (pos >= bytes.size())
      throw ParseError(bytes.size(), "PLY header line", "end of file");
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size())
      throw ParseError(bytes.size(), "newline-terminated header line",
                       "end of file");
    line.assign(reinterpret_cast<const char*>(&bytes[start]), pos - start);
    ++pos;
    return start;
  };

  std::string line;
  std::size_t at = next_line(line);
  if (line != "ply") throw ParseError(at, "'ply'", printable(line));
  at = next_line(line);
  if (line == "format binary_little_endian 1.0") {
    h.ascii = false;
  } else if (line == "format ascii 1.0") {
    h.ascii = true;
  } else {
    throw ParseError(at, "'format binary_little_endian 1.0' or 'format ascii 1.0'",
                     printable(line));
  }

  for (;;) {
    at = next_line(line);
    if (line == "end_header") break;
    if (line.rfind("comment", 0) == 0) continue;
    if (line.rfind("element ", 0) == 0) {
      if (have_element)
        throw ParseError(at, "a single 'element vertex' declaration",
                         printable(line));
      const std::string rest = line.substr(8);
      if (rest.rfind("vertex ", 0) != 0)
        throw ParseError(at, "'element vertex N'", printable(line));
      const std::string num = rest.substr(7);
      if (num.empty() ||
          !std::all_of(num.begin(), num.end(),
                       [](char ch) { return ch >= '0' && ch <= '9'; }))
        throw ParseError(at, "decimal vertex count", printable(num));
      h.vertex_count = std::strtoull(num.c_str(), nullptr, 10);
      have_element = true;
      continue;
    }
    if (line.rfind("property ", 0) == 0) {
      if (!have_element)
        throw ParseError(at, "'element vertex' before properties",
                         printable(line));
      if (properties >= 6)
        throw ParseError(at, "at most 6 properties", printable(line));
      if (line.substr(9) != expected_props[properties])
        throw ParseError(at,
                         std::string("'property ") +
                             expected_props[properties] + "'",
                         printable(line));
      ++properties;
      continue;
    }
    throw ParseError(at, "header line (element/property/comment/end_header)",
                     printable(line));
  }
  if (!have_element)
    throw ParseError(at, "'element vertex N' declaration", "end_header");
  if (properties != 3 && properties != 6)
    throw ParseError(at, "3 (xyz) or 6 (xyz rgb) properties",
                     std::to_string(properties) + " properties");
  h.with_color = properties == 6;
  h.body_offset = pos;
  return h;
}

// Whitespace-separated ascii token scanner with byte offsets.
struct AsciiScanner {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos;

  void skip_ws() {
    while (pos < buf.size() &&
           std::isspace(static_cast<unsigned char>(buf[pos])))
      ++pos;
  }

  // Returns the token start offset; the token itself lands in `tok`.
  std::size_t token(std::string& tok, const std::string& what) {
    skip_ws();
    if (pos >= buf.size())
      throw ParseError(buf.size(), what, "end of file");
    const std::size_t start = pos;
    while (pos < buf.size() &&
           !std::isspace(static_cast<unsigned char>(buf[pos])))
      ++pos;
    tok.assign(reinterpret_cast<const char*>(&buf[start]), pos - start);
    return start;
  }

  double number(const std::string& what) {
    std::string tok;
    const std::size_t at = token(tok, what);
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty())
      throw ParseError(at, what, printable(tok));
    return x;
  }

  std::uint8_t byte_value(const std::string& what) {
    std::string tok;
    const std::size_t at = token(tok, what);
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) {
          return ch >= '0' && ch <= '9';
        }))
      throw ParseError(at, what, printable(tok));
    const unsigned long x = std::strtoul(tok.c_str(), nullptr, 10);
    if (x > 255) throw ParseError(at, what + " in [0,255]", tok);
    return static_cast<std::uint8_t>(x);
  }

  void expect_end() {
    skip_ws();
    if (pos != buf.size())
      throw ParseError(pos, "end of file",
                       std::to_string(buf.size() - pos) + " trailing bytes");
  }
};

}  // namespace

PointCloud parse_ply(const std::vector<std::uint8_t>& bytes) {
  const PlyHeader h = parse_ply_header(bytes);
  PointCloud cloud;
  if (h.ascii) {
    AsciiScanner s{bytes, h.body_offset};
    for (std::uint64_t i = 0; i < h.vertex_count; ++i) {
      Vec3 p;
      for (int k = 0; k < 3; ++k) p(k) = s.number("vertex coordinate");
      cloud.points.push_back(p);
      if (h.with_color) {
        std::array<std::uint8_t, 3> c{};
        for (int k = 0; k < 3; ++k) c[k] = s.byte_value("color component");
        cloud.colors.push_back(c);
      }
    }
    s.expect_end();
  } else {
    Cursor c{bytes, h.body_offset};
    c.need_elems(h.vertex_count, h.with_color ? 15 : 12, "vertex records");
    cloud.points.reserve(h.vertex_count);
    if (h.with_color) cloud.colors.reserve(h.vertex_count);
    for (std::uint64_t i = 0; i < h.vertex_count; ++i) {
      Vec3 p;
      for (int k = 0; k < 3; ++k) p(k) = c.f32("f32 vertex coordinate");
      cloud.points.push_back(p);
      if (h.with_color) {
        std::array<std::uint8_t, 3> col{};
        for (int k = 0; k < 3; ++k) col[k] = c.u8("u8 color component");
        cloud.colors.push_back(col);
      }
    }
    c.expect_end();
  }
  return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  write_file_bytes(path, serialize_ply(cloud));
}

PointCloud read_ply(const std::string& path) {
  return parse_ply(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// JSONL trajectories

std::string serialize_trajectory(const std::vector<CameraRecord>& frames) {
  std::string out;
  for (const CameraRecord& rec : frames) {
    ordered_json j;
    j["frame_id"] = rec.frame_id;
    const ordered_json cam = detail::camera_to_json(rec.intrinsics,
                                                    rec.extrinsics);
    for (const auto& item : cam.items()) j[item.key()] = item.value();
    j["convention"] = "cam2world";
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<CameraRecord> parse_trajectory(const std::string& text) {
  std::vector<CameraRecord> frames;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? text.size() : nl;
    const std::string line = text.substr(pos, end - pos);
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      throw ParseError(pos, "JSON camera record", "blank line");

    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error& e) {
      throw ParseError(pos + (e.byte > 0 ? e.byte - 1 : 0),
                       "well-formed JSON camera record", "malformed JSON");
    }
    if (!j.is_object())
      throw ParseError(pos, "JSON object", "non-object JSON value");
    check_known_keys(j, true, pos);
    if (!j.contains("frame_id") || !j["frame_id"].is_string())
      throw ParseError(pos, "string field 'frame_id'", "missing or non-string");
    check_convention(j, true, pos);

    CameraRecord rec;
    rec.frame_id = j["frame_id"].get<std::string>();
    try {
      detail::camera_from_json(j, rec.intrinsics, rec.extrinsics);
    } catch (const ParseError& e) {
      throw ParseError(pos, e.expected, e.found);
    }
    frames.push_back(std::move(rec));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return frames;
}

void write_trajectory(const std::string& path,
                      const std::vector<CameraRecord>& frames) {
  write_file_text(path, serialize_trajectory(frames));
}

std::vector<CameraRecord> read_trajectory(const std::string& path) {
  return parse_trajectory(read_file_text(path));
}

// ---------------------------------------------------------------------------
// TSD1 volumes

std::vector<std::uint8_t> serialize_tsdf(const TsdfVolume& vol) {
  if (vol.tsdf.size() != vol.voxel_count() ||
      vol.weight.size() != vol.voxel_count())
    throw ShapeMismatch("serialize_tsdf: inconsistent buffer sizes");
  std::vector<std::uint8_t> buf;
  buf.reserve(36 + vol.voxel_count() * 5);
  buf.insert(buf.end(), {'T', 'S', 'D', '1'});
  put_u32(buf, static_cast<std::uint32_t>(vol.nx));
  put_u32(buf, static_cast<std::uint32_t>(vol.ny));
  put_u32(buf, static_cast<std::uint32_t>(vol.nz));
  for (int k = 0; k < 3; ++k)
    put_f32(buf, static_cast<float>(vol.origin(k)));
  put_f32(buf, static_cast<float>(vol.voxel_size));
  put_f32(buf, static_cast<float>(vol.truncation));
  for (const float f : vol.tsdf) put_f32(buf, f);
  buf.insert(buf.end(), vol.weight.begin(), vol.weight.end());
  return buf;
}

TsdfVolume parse_tsdf(const std::vector<std::uint8_t>& bytes) {
  Cursor c{bytes};
  c.magic("TSD1");
  TsdfVolume vol;
  vol.nx = c.dim("u32 nx");
  vol.ny = c.dim("u32 ny");
  vol.nz = c.dim("u32 nz");
  for (int k = 0; k < 3; ++k)
    vol.origin(k) = c.f32("f32 origin component");
  vol.voxel_size = c.f32("f32 voxel size");
  vol.truncation = c.f32("f32 truncation");
  if (!(vol.voxel_size > 0.0f))
    throw ParseError(c.pos - 8, "positive voxel size",
                     std::to_string(vol.voxel_size));
  if (!(vol.truncation > 0.0f))
    throw ParseError(c.pos - 4, "positive truncation",
                     std::to_string(vol.truncation));
  std::uint64_t count = static_cast<std::uint64_t>(vol.nx) * vol.ny;
  if (vol.ny != 0 && count / vol.ny != static_cast<std::uint64_t>(vol.nx))
    throw ParseError(bytes.size(), "tsdf samples", "end of file");
  const std::uint64_t count2 = count * static_cast<std::uint64_t>(vol.nz);
  if (vol.nz != 0 && count != 0 && count2 / vol.nz != count)
    throw ParseError(bytes.size(), "tsdf samples", "end of file");
  count = count2;
  c.need_elems(count, 5, "tsdf and weight samples");
  vol.tsdf.resize(count);
  vol.weight.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    vol.tsdf[i] = c.f32("f32 tsdf sample");
  for (std::uint64_t i = 0; i < count; ++i)
    vol.weight[i] = c.u8("u8 weight sample");
  c.expect_end();
  return vol;
}

void write_tsdf(const std::string& path, const TsdfVolume& vol) {
  write_file_bytes(path, serialize_tsdf(vol));
}

TsdfVolume read_tsdf(const std::string& path) {
  return parse_tsdf(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Single-camera JSON

std::string serialize_camera_json(const CameraIntrinsics& intr,
                                  const CameraExtrinsics& extr) {
  ordered_json j = detail::camera_to_json(intr, extr);
  j["convention"] = "cam2world";
  return j.dump() + "\n";
}

std::pair<CameraIntrinsics, CameraExtrinsics> parse_camera_json(
    const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(e.byte > 0 ? e.byte - 1 : 0, "well-formed JSON camera",
                     "malformed JSON");
  }
  if (!j.is_object()) throw ParseError(0, "JSON object", "non-object value");
  check_known_keys(j, true, 0);
  check_convention(j, false, 0);
  std::pair<CameraIntrinsics, CameraExtrinsics> out;
  detail::camera_from_json(j, out.first, out.second);
  return out;
}

void write_camera_json(const std::string& path, const CameraIntrinsics& intr,
                       const CameraExtrinsics& extr) {
  write_file_text(path, serialize_camera_json(intr, extr));
}

std::pair<CameraIntrinsics, CameraExtrinsics> read_camera_json(
    const std::string& path) {
  return parse_camera_json(read_file_text(path));
}

// ---------------------------------------------------------------------------
// PGM images

GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2)
    throw ParseError(bytes.size(), "magic 'P5' or 'P2'", "end of file");
  const char m0 = static_cast<char>(bytes[0]);
  const char m1 = static_cast<char>(bytes[1]);
  if (m0 != 'P' || (m1 != '5' && m1 != '2'))
    throw ParseError(0, "magic 'P5' or 'P2'",
                     printable({reinterpret_cast<const char*>(&bytes[0]), 2}));
  const bool raw = m1 == '5';
  std::size_t pos = 2;

  auto skip_ws_comments = [&]() {
    for (;;) {
      while (pos < bytes.size() &&
             std::isspace(static_cast<unsigned char>(bytes[pos])))
        ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      return;
    }
  };
  auto header_int = [&](const std::string& what) -> long {
    skip_ws_comments();
    if (pos >= bytes.size()) throw ParseError(bytes.size(), what, "end of file");
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') ++pos;
    if (pos == start)
      throw ParseError(start, what,
                       printable({reinterpret_cast<const char*>(&bytes[start]),
                                  1}));
    const std::string tok(reinterpret_cast<const char*>(&bytes[start]),
                          pos - start);
    if (tok.size() > 9) throw ParseError(start, what + " within range", tok);
    return std::strtol(tok.c_str(), nullptr, 10);
  };

  GrayImage img;
  const long w = header_int("decimal width");
  const long h = header_int("decimal height");
  const long maxval = header_int("decimal maxval");
  if (w < 1 || h < 1)
    throw ParseError(2, "positive dimensions",
                     std::to_string(w) + "x" + std::to_string(h));
  if (maxval < 1 || maxval > 65535)
    throw ParseError(2, "maxval in [1,65535]", std::to_string(maxval));
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  const std::size_t count = static_cast<std::size_t>(w) * h;

  if (raw) {
    if (pos >= bytes.size())
      throw ParseError(bytes.size(), "single whitespace after maxval",
                       "end of file");
    if (!std::isspace(static_cast<unsigned char>(bytes[pos])))
      throw ParseError(pos, "single whitespace after maxval",
                       printable({reinterpret_cast<const char*>(&bytes[pos]),
                                  1}));
    ++pos;
    const int bytes_per = maxval < 256 ? 1 : 2;
    if (count > (bytes.size() - pos) / bytes_per)
      throw ParseError(bytes.size(), "raw pixel data", "end of file");
    img.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      long v;
      if (bytes_per == 1) {
        v = bytes[pos];
      } else {
        v = (static_cast<long>(bytes[pos]) << 8) | bytes[pos + 1];
      }
      if (v > maxval)
        throw ParseError(pos, "sample <= maxval", std::to_string(v));
      img.pixels[i] = static_cast<double>(v);
      pos += bytes_per;
    }
    if (pos != bytes.size())
      throw ParseError(pos, "end of file",
                       std::to_string(bytes.size() - pos) + " trailing bytes");
  } else {
    // Each ascii sample needs at least one digit plus a separator, so this
    // bound rejects absurd header dimensions before allocating.
    if (count > (bytes.size() - pos + 1) / 2)
      throw ParseError(bytes.size(), "ascii pixel data", "end of file");
    img.pixels.resize(count);
    AsciiScanner s{bytes, pos};
    for (std::size_t i = 0; i < count; ++i) {
      std::string tok;
      const std::size_t at = s.token(tok, "ascii sample");
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) {
            return ch >= '0' && ch <= '9';
          }))
        throw ParseError(at, "decimal sample", printable(tok));
      if (tok.size() > 9) throw ParseError(at, "sample within range", tok);
      const long v = std::strtol(tok.c_str(), nullptr, 10);
      if (v > maxval)
        throw ParseError(at, "sample <= maxval", std::to_string(v));
      img.pixels[i] = static_cast<double>(v);
    }
    s.expect_end();
  }
  return img;
}

GrayImage read_pgm(const std::string& path) {
  return parse_pgm(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// File helpers

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for reading: " + path);
  std::vector<std::uint8_t> buf(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("read failure: " + path);
  return buf;
}

void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failure: " + path);
}

std::string read_file_text(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace visgeom
