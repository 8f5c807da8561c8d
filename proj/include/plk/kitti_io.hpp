#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "plk/detection_eval.hpp"
#include "plk/pseudolidar.hpp"

namespace plk {

// Named 3x4 projection matrices, row-major.
struct CalibrationFile {
  std::map<std::string, std::array<double, 12>> matrices;

  bool has(const std::string& key) const { return matrices.count(key) != 0; }
};

// Generic "KEY: v0 v1 ... v11" parser. Throws ParseError on malformed
// numeric tokens; unknown keys and extra lines are kept verbatim.
CalibrationFile parse_calib_file(const std::string& text);

// Extracts the pinhole parameters from the P2 matrix: f = P2[0][0],
// cu = P2[0][2], cv = P2[1][2]. Image dimensions are not stored in KITTI
// calibration, so the caller supplies them (0 means "fill in later").
// Warns into `warnings` when |P2[0][0] - P2[1][1]| / P2[0][0] > 1e-3, since
// downstream code assumes a single focal length. Throws FormatError when
// P2 is missing.
CameraIntrinsics parse_calib(const std::string& text, int width = 0, int height = 0,
                             std::vector<std::string>* warnings = nullptr);

struct ParsedLabels {
  std::vector<GtObject> gts;        // 15-field lines
  std::vector<Detection> dets;      // 16-field lines (trailing score)
};

// KITTI object label format, whitespace-delimited:
//   type trunc occ alpha left top right bottom h w l x y z ry [score]
// "DontCare" lines parse with their sentinel dimensions and are excluded
// from counted GT downstream. Throws ParseError naming the line on a
// wrong field count or a bad token.
ParsedLabels parse_labels(const std::string& text);

std::string serialize_label(const GtObject& gt);
std::string serialize_label(const Detection& det);
std::string serialize_labels(const ParsedLabels& labels);

// 16-bit grayscale PNG; depth = raw / 256.0 m, raw 0 marks an invalid
// pixel. Throws FormatError on any other bit depth or channel count.
DepthMap read_depth_image(const std::vector<std::uint8_t>& png_bytes);
std::vector<std::uint8_t> write_depth_image(const DepthMap& d);

// 8-bit grayscale PNG, 0/255, for visual inspection of sampling masks.
std::vector<std::uint8_t> write_mask_image(const SampleMask& mask);
SampleMask read_mask_image(const std::vector<std::uint8_t>& png_bytes);

// Flat little-endian float32 (x, y, z, intensity) records; read/write is a
// bit-exact round trip. Throws FormatError when the byte length is not a
// multiple of 16.
std::vector<std::uint8_t> write_pointcloud(const PointCloud& cloud);
PointCloud read_pointcloud(const std::vector<std::uint8_t>& bytes);

using SplitList = std::vector<std::string>;

// One frame id per line; duplicates are a ValidationError.
SplitList parse_split(const std::string& text);

// Rigid transform (rotation + translation), used to re-express camera-frame
// clouds in the LiDAR frame via the inverse of Tr_velo_to_cam.
struct RigidTransform {
  std::array<double, 9> r = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  std::array<double, 3> t = {0, 0, 0};

  static RigidTransform from_calib(const CalibrationFile& calib, const std::string& key);
  RigidTransform inverse() const;
  Point3 apply(const Point3& p) const;
};

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& tf);

// Small file helpers shared by the CLI and tests.
std::string read_file_text(const std::filesystem::path& path);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_text(const std::filesystem::path& path, const std::string& text);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace plk
