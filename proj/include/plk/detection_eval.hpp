#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plk/geometry.hpp"

namespace plk {

enum class Difficulty { easy = 0, moderate = 1, hard = 2 };

struct Bbox2D {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double height() const { return bottom - top; }
};

// One KITTI label line: class, truncation/occlusion, 2D box, 3D box.
// `location` is the bottom-face center in the camera frame.
struct GtObject {
  std::string class_name;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Bbox2D bbox;
  double h = 0.0;
  double w = 0.0;
  double l = 0.0;
  Point3 location;
  double rotation_y = 0.0;

  RotatedBevBox bev_box() const {
    return {location.x, location.z, l, w, normalize_yaw(rotation_y)};
  }
  Box3D box_3d() const { return {bev_box(), location.y, h}; }
};

struct Detection {
  GtObject box;
  double score = 0.0;
};

// Thresholds indexed by Difficulty; hard admits a superset of moderate,
// which admits a superset of easy.
struct DifficultyRules {
  std::array<double, 3> min_height = {40.0, 25.0, 25.0};   // 2D box height, pixels
  std::array<int, 3> max_occlusion = {0, 1, 2};
  std::array<double, 3> max_truncation = {0.15, 0.30, 0.50};
};

// Easiest difficulty the object qualifies for; nullopt when it fails even
// the hard thresholds (the object is ignored).
std::optional<Difficulty> assign_difficulty(const GtObject& gt,
                                            const DifficultyRules& rules = {});

enum class MatchFlag { tp, fp, ignored };

struct FrameMatchResult {
  std::vector<MatchFlag> flags;  // one per detection, in input order
  int counted_gt = 0;            // GTs with difficulty <= the evaluated one
};

using IouFn = std::function<double(const GtObject&, const GtObject&)>;

// Greedy score-ordered matching of one frame: each detection takes the
// unmatched target-class GT with maximal IoU. A match at or above the
// threshold is a TP when the GT is counted, and neither TP nor FP when the
// GT is ignored or harder than the evaluated difficulty. Ties are broken
// by input order (detections) and lowest index (GTs).
FrameMatchResult match_frame(const std::vector<Detection>& dets,
                             const std::vector<GtObject>& gts, const std::string& class_name,
                             Difficulty difficulty, const IouFn& iou, double iou_threshold,
                             const DifficultyRules& rules = {});

enum class ApMode { r11, r40 };

struct ScoredFlag {
  double score = 0.0;
  MatchFlag flag = MatchFlag::fp;
};

// Interpolated average precision over the pooled detections, in percent.
// R11 averages the precision envelope over recall {0, 0.1, ..., 1.0};
// R40 over {1/40, ..., 40/40}. Throws UndefinedRecallError when
// counted_gt == 0.
double average_precision(std::vector<ScoredFlag> scored_flags, std::uint64_t counted_gt,
                         ApMode mode);

enum class IouPolicy {
  per_difficulty,  // 0.7 easy, 0.5 moderate/hard
  strict_07,       // 0.7 everywhere (stock KITTI car evaluation)
};

struct DetectionEvalOptions {
  std::string class_name = "Car";
  DifficultyRules rules;
  ApMode mode = ApMode::r11;
  IouPolicy iou_policy = IouPolicy::per_difficulty;
};

double iou_threshold_for(Difficulty d, IouPolicy policy);

struct ApEntry {
  std::optional<double> ap_bev;  // percent; absent when the difficulty has no counted GT
  std::optional<double> ap_3d;
};

struct APReport {
  std::string class_name;
  ApMode mode = ApMode::r11;
  std::array<ApEntry, 3> per_difficulty;  // indexed by Difficulty
  std::vector<std::string> warnings;
};

// Frame-aligned evaluation: match_frame per difficulty for both BEV and 3D
// overlap, then AP over the pooled flags.
APReport evaluate(const std::vector<std::vector<Detection>>& dets_per_frame,
                  const std::vector<std::vector<GtObject>>& gts_per_frame,
                  const DetectionEvalOptions& opt = {});

}  // namespace plk
