#pragma once

#include <string>
#include <vector>

#include "plk/errors.hpp"

namespace plk {

// Camera frame follows the KITTI convention throughout: x right, y down,
// z forward. The BEV plane is x-z; yaw rotates about the vertical (down)
// axis and matches KITTI rotation_y.

struct CameraIntrinsics {
  double cu = 0.0;  // optical-center column, pixels
  double cv = 0.0;  // optical-center row, pixels
  double f = 0.0;   // focal length, pixels
  int width = 0;    // image columns
  int height = 0;   // image rows

  // Throws std::invalid_argument on hard violations (f <= 0, empty image).
  // A principal point outside the image is legal (cropped images exist)
  // and only produces a warning string.
  std::vector<std::string> validate() const;
};

struct Point3 {
  double x = 0.0;  // meters, right-positive
  double y = 0.0;  // meters, down-positive
  double z = 0.0;  // meters, forward-positive
};

struct Pixel {
  double u = 0.0;  // real-valued column
  double v = 0.0;  // real-valued row
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

using Polygon2 = std::vector<Vec2>;

// BEV footprint on the ground (x-z) plane.
struct RotatedBevBox {
  double cx = 0.0;   // center, meters
  double cz = 0.0;
  double l = 0.0;    // extent along heading, meters
  double w = 0.0;    // extent across heading, meters
  double yaw = 0.0;  // radians
};

// Upright 3D box: BEV footprint plus vertical extent. y grows downward,
// y_bottom is the bottom face, so the box spans [y_bottom - h, y_bottom].
struct Box3D {
  RotatedBevBox bev;
  double y_bottom = 0.0;
  double h = 0.0;
};

inline constexpr double kDegenerateArea = 1e-12;  // m^2

// Wraps an angle into (-pi, pi].
double normalize_yaw(double yaw);

// Pixel (u, v) at depth z -> 3D point: x = (z/f)(u - cu), y = (z/f)(v - cv).
// Throws InvalidDepthError unless z is finite and positive.
Point3 backproject(double u, double v, double z, const CameraIntrinsics& k);

// Inverse of backproject; returns sub-pixel coordinates (rounding is the
// caller's concern). Throws BehindCameraError for z <= 0.
Pixel project(const Point3& p, const CameraIntrinsics& k);

// Unsigned shoelace area; 0 for fewer than 3 vertices.
double polygon_area(const Polygon2& poly);

// Sutherland-Hodgman intersection of `subject` with a convex `clip`
// polygon. Returns the (possibly empty) intersection; vertex order follows
// the subject's winding. Throws DegenerateGeometryError when the clip
// polygon has area below kDegenerateArea.
Polygon2 convex_clip(const Polygon2& subject, const Polygon2& clip);

// Corner polygon of a BEV box, counter-clockwise in the x-z plane.
Polygon2 box_corners(const RotatedBevBox& b);

// Rotated-rectangle IoU on the ground plane, in [0, 1].
double bev_iou(const RotatedBevBox& a, const RotatedBevBox& b);

// Volumetric IoU of two upright boxes; reduces to bev_iou when the
// vertical extents coincide.
double iou_3d(const Box3D& a, const Box3D& b);

}  // namespace plk
