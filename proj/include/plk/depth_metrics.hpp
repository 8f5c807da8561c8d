#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "plk/pseudolidar.hpp"

namespace plk {

// Thresholds for the delta inlier ratios: 1.25, 1.25^2, 1.25^3.
inline constexpr std::array<double, 3> kDeltaThresholds = {1.25, 1.5625, 1.953125};

// Pixel rectangle [left, right) x [top, bottom).
struct CropRect {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;
};

struct DepthEvalOptions {
  double cap = 80.0;          // ground-truth depth cap, meters
  double clamp_min = 1e-3;    // predictions are clamped to [clamp_min, cap]
  std::optional<CropRect> crop;
  bool median_scaling = false;  // per-frame median(gt)/median(pred) rescaling

  void validate() const;  // throws ValidationError
};

// Mergeable sums over the pooled valid pixels of a dataset.
struct MetricAccumulator {
  std::uint64_t n = 0;
  double abs_rel_sum = 0.0;
  double sq_rel_sum = 0.0;
  double sq_err_sum = 0.0;
  double sq_log_err_sum = 0.0;
  std::array<std::uint64_t, 3> inliers{0, 0, 0};

  MetricAccumulator& merge(const MetricAccumulator& other);
};

struct DepthMetricReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rms = 0.0;      // meters
  double rms_log = 0.0;  // log-meters
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::uint64_t n = 0;
  double cap = 0.0;
  double clamp_min = 0.0;  // clamp policy surfaced so comparisons are explicit
};

// Pools pixels where gt is valid and gt <= cap; predictions are clamped to
// [clamp_min, cap] (never skipped, so n is stable). Throws ShapeError on
// dimension mismatch.
MetricAccumulator accumulate(const DepthMap& pred, const DepthMap& gt,
                             const DepthEvalOptions& opt = {});

// Divides the pooled sums by the global pixel count (dataset-level
// pooling). Throws EmptyEvaluationError when n == 0.
DepthMetricReport finalize(const MetricAccumulator& acc, const DepthEvalOptions& opt = {});

// Fold of accumulate over aligned frame sequences, then finalize. Shape
// errors are rethrown with the offending frame index attached.
DepthMetricReport evaluate_dataset(const std::vector<DepthMap>& preds,
                                   const std::vector<DepthMap>& gts,
                                   const DepthEvalOptions& opt = {});

}  // namespace plk
