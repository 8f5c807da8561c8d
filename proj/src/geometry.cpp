#include "plk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace plk {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double signed_area(const Polygon2& poly) {
  if (poly.size() < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

// Intersection of segment p->q with the infinite line through a->b.
// Only called when p and q sit on opposite sides, so the denominator is
// nonzero.
Vec2 line_intersect(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
  const double dp = cross(a, b, p);
  const double dq = cross(a, b, q);
  const double t = dp / (dp - dq);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

void check_box(const RotatedBevBox& b) {
  if (!(b.l > 0.0) || !(b.w > 0.0) || !std::isfinite(b.l) || !std::isfinite(b.w) ||
      b.l * b.w < kDegenerateArea) {
    std::ostringstream msg;
    msg << "degenerate BEV box: l=" << b.l << " w=" << b.w;
    throw DegenerateGeometryError(msg.str());
  }
}

}  // namespace

std::vector<std::string> CameraIntrinsics::validate() const {
  if (!(f > 0.0) || !std::isfinite(f))
    throw std::invalid_argument("camera intrinsics: focal length must be positive");
  if (width < 1 || height < 1)
    throw std::invalid_argument("camera intrinsics: image dimensions must be at least 1x1");
  std::vector<std::string> warnings;
  if (cu < 0.0 || cu >= width || cv < 0.0 || cv >= height) {
    std::ostringstream msg;
    msg << "principal point (" << cu << ", " << cv << ") lies outside the " << width << "x"
        << height << " image";
    warnings.push_back(msg.str());
  }
  return warnings;
}

double normalize_yaw(double yaw) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double y = std::fmod(yaw, two_pi);
  if (y <= -std::numbers::pi) y += two_pi;
  if (y > std::numbers::pi) y -= two_pi;
  return y;
}

Point3 backproject(double u, double v, double z, const CameraIntrinsics& k) {
  if (!std::isfinite(z) || z <= 0.0) {
    std::ostringstream msg;
    msg << "backproject: depth must be finite and positive, got " << z;
    throw InvalidDepthError(msg.str());
  }
  const double s = z / k.f;
  return {s * (u - k.cu), s * (v - k.cv), z};
}

Pixel project(const Point3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) {
    std::ostringstream msg;
    msg << "project: point lies behind the camera (z=" << p.z << ")";
    throw BehindCameraError(msg.str());
  }
  return {k.cu + k.f * p.x / p.z, k.cv + k.f * p.y / p.z};
}

double polygon_area(const Polygon2& poly) { return std::abs(signed_area(poly)); }

Polygon2 convex_clip(const Polygon2& subject, const Polygon2& clip) {
  if (clip.size() < 3 || std::abs(signed_area(clip)) < kDegenerateArea)
    throw DegenerateGeometryError("convex_clip: clip polygon is degenerate");
  if (subject.size() < 3) return {};

  // The inside test assumes a counter-clockwise clip polygon.
  Polygon2 cl = clip;
  if (signed_area(cl) < 0.0) std::reverse(cl.begin(), cl.end());

  Polygon2 out = subject;
  for (std::size_t e = 0, n = cl.size(); e < n && !out.empty(); ++e) {
    const Vec2& a = cl[e];
    const Vec2& b = cl[(e + 1) % n];
    Polygon2 in;
    in.swap(out);
    for (std::size_t i = 0, m = in.size(); i < m; ++i) {
      const Vec2& prev = in[(i + m - 1) % m];
      const Vec2& cur = in[i];
      const bool prev_in = cross(a, b, prev) >= 0.0;
      const bool cur_in = cross(a, b, cur) >= 0.0;
      if (cur_in) {
        if (!prev_in) out.push_back(line_intersect(prev, cur, a, b));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(line_intersect(prev, cur, a, b));
      }
    }
  }
  if (out.size() < 3) return {};
  return out;
}

Polygon2 box_corners(const RotatedBevBox& b) {
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  // KITTI rotation about the down axis: heading (cos, -sin), lateral
  // (sin, cos) in the x-z plane. This ordering is counter-clockwise.
  const double hx = c * b.l * 0.5, hz = -s * b.l * 0.5;
  const double tx = s * b.w * 0.5, tz = c * b.w * 0.5;
  return {{b.cx + hx + tx, b.cz + hz + tz},
          {b.cx - hx + tx, b.cz - hz + tz},
          {b.cx - hx - tx, b.cz - hz - tz},
          {b.cx + hx - tx, b.cz + hz - tz}};
}

double bev_iou(const RotatedBevBox& a, const RotatedBevBox& b) {
  check_box(a);
  check_box(b);
  const double inter = polygon_area(convex_clip(box_corners(a), box_corners(b)));
  const double area_a = a.l * a.w;
  const double area_b = b.l * b.w;
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D& a, const Box3D& b) {
  check_box(a.bev);
  check_box(b.bev);
  if (!(a.h > 0.0) || !(b.h > 0.0))
    throw DegenerateGeometryError("iou_3d: box height must be positive");
  const double y_hi = std::min(a.y_bottom, b.y_bottom);
  const double y_lo = std::max(a.y_bottom - a.h, b.y_bottom - b.h);
  const double overlap = std::max(0.0, y_hi - y_lo);
  if (overlap == 0.0) return 0.0;
  const double inter = polygon_area(convex_clip(box_corners(a.bev), box_corners(b.bev))) * overlap;
  const double vol_a = a.bev.l * a.bev.w * a.h;
  const double vol_b = b.bev.l * b.bev.w * b.h;
  return std::clamp(inter / (vol_a + vol_b - inter), 0.0, 1.0);
}

}  // namespace plk
