#include "plk/depth_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plk {

namespace {

bool in_crop(const std::optional<CropRect>& crop, int u, int v) {
  if (!crop) return true;
  return u >= crop->left && u < crop->right && v >= crop->top && v < crop->bottom;
}

bool pooled(const DepthMap& gt, const DepthEvalOptions& opt, int u, int v) {
  const std::size_t i = gt.index(u, v);
  return gt.valid[i] && gt.values[i] <= opt.cap && in_crop(opt.crop, u, v);
}

double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

}  // namespace

void DepthEvalOptions::validate() const {
  if (!(cap > 0.0)) throw ValidationError("depth metrics: cap must be positive");
  if (!(clamp_min > 0.0) || clamp_min > cap)
    throw ValidationError("depth metrics: clamp_min must lie in (0, cap]");
}

MetricAccumulator& MetricAccumulator::merge(const MetricAccumulator& other) {
  n += other.n;
  abs_rel_sum += other.abs_rel_sum;
  sq_rel_sum += other.sq_rel_sum;
  sq_err_sum += other.sq_err_sum;
  sq_log_err_sum += other.sq_log_err_sum;
  for (std::size_t i = 0; i < inliers.size(); ++i) inliers[i] += other.inliers[i];
  return *this;
}

MetricAccumulator accumulate(const DepthMap& pred, const DepthMap& gt,
                             const DepthEvalOptions& opt) {
  opt.validate();
  if (!pred.same_shape(gt.width, gt.height)) {
    std::ostringstream msg;
    msg << "prediction is " << pred.width << "x" << pred.height << " but ground truth is "
        << gt.width << "x" << gt.height;
    throw ShapeError(msg.str());
  }

  double scale = 1.0;
  if (opt.median_scaling) {
    std::vector<double> gs, ps;
    for (int v = 0; v < gt.height; ++v)
      for (int u = 0; u < gt.width; ++u)
        if (pooled(gt, opt, u, v)) {
          gs.push_back(gt.values[gt.index(u, v)]);
          ps.push_back(std::max<double>(pred.values[pred.index(u, v)], opt.clamp_min));
        }
    if (!gs.empty()) scale = median_of(gs) / median_of(ps);
  }

  MetricAccumulator acc;
  for (int v = 0; v < gt.height; ++v) {
    for (int u = 0; u < gt.width; ++u) {
      if (!pooled(gt, opt, u, v)) continue;
      const double g = gt.values[gt.index(u, v)];
      const double p = std::clamp(pred.values[pred.index(u, v)] * scale, opt.clamp_min, opt.cap);
      const double err = g - p;
      acc.n += 1;
      acc.abs_rel_sum += std::abs(err) / g;
      acc.sq_rel_sum += err * err / g;
      acc.sq_err_sum += err * err;
      const double log_err = std::log(g) - std::log(p);
      acc.sq_log_err_sum += log_err * log_err;
      const double ratio = std::max(p / g, g / p);
      for (std::size_t t = 0; t < kDeltaThresholds.size(); ++t)
        if (ratio < kDeltaThresholds[t]) acc.inliers[t] += 1;  // strict comparison
    }
  }
  return acc;
}

DepthMetricReport finalize(const MetricAccumulator& acc, const DepthEvalOptions& opt) {
  if (acc.n == 0) throw EmptyEvaluationError("depth metrics: no valid pixels were pooled");
  const double n = static_cast<double>(acc.n);
  DepthMetricReport r;
  r.abs_rel = acc.abs_rel_sum / n;
  r.sq_rel = acc.sq_rel_sum / n;
  r.rms = std::sqrt(acc.sq_err_sum / n);
  r.rms_log = std::sqrt(acc.sq_log_err_sum / n);
  r.delta1 = static_cast<double>(acc.inliers[0]) / n;
  r.delta2 = static_cast<double>(acc.inliers[1]) / n;
  r.delta3 = static_cast<double>(acc.inliers[2]) / n;
  r.n = acc.n;
  r.cap = opt.cap;
  r.clamp_min = opt.clamp_min;
  return r;
}

DepthMetricReport evaluate_dataset(const std::vector<DepthMap>& preds,
                                   const std::vector<DepthMap>& gts,
                                   const DepthEvalOptions& opt) {
  if (preds.size() != gts.size()) {
    std::ostringstream msg;
    msg << "got " << preds.size() << " predictions for " << gts.size() << " ground-truth frames";
    throw ShapeError(msg.str());
  }
  MetricAccumulator acc;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    try {
      acc.merge(accumulate(preds[i], gts[i], opt));
    } catch (const ShapeError& e) {
      std::ostringstream msg;
      msg << "frame " << i << ": " << e.what();
      throw ShapeError(msg.str());
    }
  }
  return finalize(acc, opt);
}

}  // namespace plk
