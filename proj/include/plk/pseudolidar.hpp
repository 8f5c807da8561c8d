#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "plk/geometry.hpp"

namespace plk {

// Per-pixel metric depth with validity mask. Invalid pixels carry depth 0.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;   // row-major, meters
  std::vector<std::uint8_t> valid;

  static DepthMap from_values(int width, int height, std::vector<float> values);

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool same_shape(int w, int h) const { return width == w && height == h; }
};

struct PointXYZI {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;
};

struct PointCloud {
  std::vector<PointXYZI> points;
};

struct AngleInterval {
  double lo = 0.0;  // radians
  double hi = 0.0;
};

// Virtual rotational-LiDAR sampling lattice. When the angular extents are
// absent they are derived from the camera frustum so the rays cover the
// full image area below the r_min cutoff.
struct LidarSamplingSpec {
  int n_beams = 64;
  std::optional<AngleInterval> v_extent;   // elevation range (down-positive)
  std::optional<AngleInterval> h_extent;   // azimuth range
  double h_res = 0.0;                      // azimuth step, radians
  double d_max = 80.0;                     // meters
  double h_max = 1.0;                      // max height above camera, meters
  double r_min_frac = 0.4;                 // fraction of top rows discarded
  std::optional<double> v_fov_clamp;       // optional cap on the derived vertical FOV

  void validate() const;  // throws ValidationError
};

struct SampleMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> selected;
  int r_min_row = 0;  // rows with index < r_min_row are discarded

  std::size_t count() const;
  bool at(int u, int v) const { return selected[static_cast<std::size_t>(v) * width + u] != 0; }
};

// Row cutoff: rows with index < ceil(frac * height) are discarded.
int r_min_row(double r_min_frac, int height);

// Frustum-derived angular extents used when a spec leaves them unset.
AngleInterval derived_h_extent(const CameraIntrinsics& k);
AngleInterval derived_v_extent(const CameraIntrinsics& k, double r_min_frac);

// One point per valid pixel via backproject; intensity 1.0. Bounds are
// opt-in: depth cap, height-above-camera cap, top-row cutoff.
PointCloud dense_cloud(const DepthMap& d, const CameraIntrinsics& k,
                       std::optional<double> d_max = std::nullopt,
                       std::optional<double> h_max = std::nullopt,
                       std::optional<double> r_min_frac = std::nullopt);

// Deterministic ray-sampling mask: for each beam elevation and azimuth
// step, the ray direction (cos(psi)sin(phi), sin(psi), cos(psi)cos(phi))
// is projected through the pinhole and snapped to the nearest pixel.
SampleMask build_sample_mask(const CameraIntrinsics& k, const LidarSamplingSpec& spec);

// Back-projects masked valid pixels, then filters z <= d_max and
// height-above-camera <= h_max.
PointCloud sampled_cloud(const DepthMap& d, const CameraIntrinsics& k,
                         const LidarSamplingSpec& spec);

// HDL-64E-style preset: 64 beams, 0.08 deg azimuth step, 80 m depth cap,
// 1 m height cap, top 40% of rows discarded; extents fixed to the camera
// frustum of `k`.
LidarSamplingSpec kitti_velodyne_spec(const CameraIntrinsics& k);

}  // namespace plk
