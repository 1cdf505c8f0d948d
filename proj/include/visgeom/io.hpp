#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "visgeom/fusion.hpp"
#include "visgeom/geometry.hpp"

namespace visgeom {

// One trajectory frame: camera intrinsics plus cam2world extrinsics.
struct CameraRecord {
  std::string frame_id;
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

// Grayscale image as read from PGM; pixel values are the raw sample values
// (0..maxval), row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
};

// All binary formats are explicit little-endian and platform-independent.
// Readers reject trailing garbage and report the byte offset of the first
// inconsistency; truncation reports the offset of the first missing byte
// (i.e. the input size). serialize_*/parse_* work on in-memory buffers; the
// read_*/write_* wrappers add file access (an unreadable/unwritable path
// throws Error, malformed content throws ParseError).

// "DAM1": magic, u32 width, u32 height, f32 row-major values. Invalid pixels
// are stored as a canonical quiet NaN; any non-finite value reads back as
// invalid.
std::vector<std::uint8_t> serialize_depth(const DepthMap& depth);
DepthMap parse_depth(const std::vector<std::uint8_t>& bytes);
void write_depth(const std::string& path, const DepthMap& depth);
DepthMap read_depth(const std::string& path);

// "RAY1": magic, u32 width, u32 height, f32 H*W*6 row-major — per pixel the
// origin triplet then the direction triplet.
std::vector<std::uint8_t> serialize_raymap(const RayMap& rays);
RayMap parse_raymap(const std::vector<std::uint8_t>& bytes);
void write_raymap(const std::string& path, const RayMap& rays);
RayMap read_raymap(const std::string& path);

// PLY: writes binary_little_endian 1.0 with f32 x y z and, when the cloud
// carries colors, u8 red green blue. Reads both that binary layout and ascii
// PLY with the same property order.
std::vector<std::uint8_t> serialize_ply(const PointCloud& cloud);
PointCloud parse_ply(const std::vector<std::uint8_t>& bytes);
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

// Trajectory: JSON lines, one CameraRecord per line in frame order. Keys per
// line: frame_id, width, height, fx, fy, cx, cy, skew, quat [w,x,y,z],
// t [x,y,z], convention "cam2world". Numbers round-trip losslessly
// (shortest round-trip formatting on write, exact parsing on read).
std::string serialize_trajectory(const std::vector<CameraRecord>& frames);
std::vector<CameraRecord> parse_trajectory(const std::string& text);
void write_trajectory(const std::string& path,
                      const std::vector<CameraRecord>& frames);
std::vector<CameraRecord> read_trajectory(const std::string& path);

// "TSD1": magic, u32 nx ny nz, f32 origin xyz, f32 voxel_size, f32
// truncation, f32 tsdf[nx*ny*nz], u8 weight[nx*ny*nz].
std::vector<std::uint8_t> serialize_tsdf(const TsdfVolume& vol);
TsdfVolume parse_tsdf(const std::vector<std::uint8_t>& bytes);
void write_tsdf(const std::string& path, const TsdfVolume& vol);
TsdfVolume read_tsdf(const std::string& path);

// Single-camera JSON file (same keys as a trajectory record; frame_id
// optional, convention optional but must be "cam2world" when present).
std::string serialize_camera_json(const CameraIntrinsics& intr,
                                  const CameraExtrinsics& extr);
std::pair<CameraIntrinsics, CameraExtrinsics> parse_camera_json(
    const std::string& text);
void write_camera_json(const std::string& path, const CameraIntrinsics& intr,
                       const CameraExtrinsics& extr);
std::pair<CameraIntrinsics, CameraExtrinsics> read_camera_json(
    const std::string& path);

// PGM reader: P5 (raw, 1 byte/sample for maxval < 256, 2 bytes big-endian
// otherwise) and P2 (ascii). '#' comments allowed in the header.
GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes);
GrayImage read_pgm(const std::string& path);

// Whole-file helpers used by the wrappers above and by the CLI.
std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

}  // namespace visgeom
