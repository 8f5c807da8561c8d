#include "plk/pseudolidar.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace plk {

namespace {

void check_shape(const DepthMap& d, const CameraIntrinsics& k) {
  if (!d.same_shape(k.width, k.height)) {
    std::ostringstream msg;
    msg << "depth map is " << d.width << "x" << d.height << " but intrinsics expect " << k.width
        << "x" << k.height;
    throw ShapeError(msg.str());
  }
}

}  // namespace

DepthMap DepthMap::from_values(int width, int height, std::vector<float> values) {
  if (static_cast<std::size_t>(width) * height != values.size())
    throw ShapeError("depth values do not match the stated dimensions");
  DepthMap d;
  d.width = width;
  d.height = height;
  d.values = std::move(values);
  d.valid.resize(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.valid[i] = d.values[i] > 0.0f ? 1 : 0;
    if (!d.valid[i]) d.values[i] = 0.0f;
  }
  return d;
}

void LidarSamplingSpec::validate() const {
  if (n_beams < 1) throw ValidationError("sampling spec: n_beams must be at least 1");
  if (!(h_res > 0.0)) throw ValidationError("sampling spec: h_res must be positive");
  if (!(d_max > 0.0)) throw ValidationError("sampling spec: d_max must be positive");
  if (!(r_min_frac >= 0.0 && r_min_frac < 1.0))
    throw ValidationError("sampling spec: r_min_frac must lie in [0, 1)");
}

std::size_t SampleMask::count() const {
  std::size_t n = 0;
  for (auto s : selected) n += s != 0;
  return n;
}

int r_min_row(double r_min_frac, int height) {
  return static_cast<int>(std::ceil(r_min_frac * height));
}

AngleInterval derived_h_extent(const CameraIntrinsics& k) {
  return {std::atan((0.5 - k.cu) / k.f), std::atan((k.width - 0.5 - k.cu) / k.f)};
}

AngleInterval derived_v_extent(const CameraIntrinsics& k, double r_min_frac) {
  const int row0 = r_min_row(r_min_frac, k.height);
  return {std::atan((row0 - k.cv) / k.f), std::atan((k.height - 0.5 - k.cv) / k.f)};
}

PointCloud dense_cloud(const DepthMap& d, const CameraIntrinsics& k, std::optional<double> d_max,
                       std::optional<double> h_max, std::optional<double> r_min_frac) {
  check_shape(d, k);
  const int row0 = r_min_frac ? r_min_row(*r_min_frac, d.height) : 0;
  PointCloud cloud;
  for (int v = row0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const std::size_t i = d.index(u, v);
      if (!d.valid[i]) continue;
      const double z = d.values[i];
      if (d_max && z > *d_max) continue;
      const Point3 p = backproject(u, v, z, k);
      if (h_max && -p.y > *h_max) continue;
      cloud.points.push_back({static_cast<float>(p.x), static_cast<float>(p.y),
                              static_cast<float>(p.z), 1.0f});
    }
  }
  return cloud;
}

SampleMask build_sample_mask(const CameraIntrinsics& k, const LidarSamplingSpec& spec) {
  k.validate();
  spec.validate();

  const int row0 = r_min_row(spec.r_min_frac, k.height);
  AngleInterval ve = spec.v_extent ? *spec.v_extent : derived_v_extent(k, spec.r_min_frac);
  if (spec.v_fov_clamp && ve.hi - ve.lo > *spec.v_fov_clamp) ve.hi = ve.lo + *spec.v_fov_clamp;
  const AngleInterval he = spec.h_extent ? *spec.h_extent : derived_h_extent(k);

  SampleMask mask;
  mask.width = k.width;
  mask.height = k.height;
  mask.r_min_row = row0;
  mask.selected.assign(static_cast<std::size_t>(k.width) * k.height, 0);

  const double h_fov = he.hi - he.lo;
  const long n_az = h_fov > 0.0 ? static_cast<long>(std::ceil(h_fov / spec.h_res)) : 0;
  // Power-of-two beam counts divide the extent exactly, which is what makes
  // the 16-beam lattice a literal subset of the 64-beam one.
  const double v_step = (ve.hi - ve.lo) / spec.n_beams;

  for (int i = 0; i < spec.n_beams; ++i) {
    const double psi = ve.lo + i * v_step;
    const double sp = std::sin(psi);
    const double cp = std::cos(psi);
    for (long j = 0; j < n_az; ++j) {
      const double phi = he.lo + j * spec.h_res;
      const Point3 ray{cp * std::sin(phi), sp, cp * std::cos(phi)};
      if (ray.z <= 0.0) continue;  // ray leaves the forward half-space
      const Pixel px = project(ray, k);
      const long iu = std::lround(px.u);  // round half away from zero
      const long iv = std::lround(px.v);
      if (iu < 0 || iu >= k.width || iv < row0 || iv >= k.height) continue;
      mask.selected[static_cast<std::size_t>(iv) * k.width + iu] = 1;
    }
  }
  return mask;
}

PointCloud sampled_cloud(const DepthMap& d, const CameraIntrinsics& k,
                         const LidarSamplingSpec& spec) {
  check_shape(d, k);
  const SampleMask mask = build_sample_mask(k, spec);
  PointCloud cloud;
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const std::size_t i = d.index(u, v);
      if (!mask.selected[i] || !d.valid[i]) continue;
      const double z = d.values[i];
      if (z > spec.d_max) continue;
      const Point3 p = backproject(u, v, z, k);
      if (-p.y > spec.h_max) continue;
      cloud.points.push_back({static_cast<float>(p.x), static_cast<float>(p.y),
                              static_cast<float>(p.z), 1.0f});
    }
  }
  return cloud;
}

LidarSamplingSpec kitti_velodyne_spec(const CameraIntrinsics& k) {
  LidarSamplingSpec spec;
  spec.n_beams = 64;
  spec.h_res = 0.08 * std::numbers::pi / 180.0;
  spec.d_max = 80.0;
  spec.h_max = 1.0;
  spec.r_min_frac = 0.4;
  spec.v_extent = derived_v_extent(k, spec.r_min_frac);
  spec.h_extent = derived_h_extent(k);
  return spec;
}

}  // namespace plk
