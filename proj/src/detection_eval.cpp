#include "plk/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace plk {

std::optional<Difficulty> assign_difficulty(const GtObject& gt, const DifficultyRules& rules) {
  for (int d = 0; d < 3; ++d) {
    if (gt.bbox.height() >= rules.min_height[d] && gt.occlusion <= rules.max_occlusion[d] &&
        gt.truncation <= rules.max_truncation[d])
      return static_cast<Difficulty>(d);
  }
  return std::nullopt;
}

FrameMatchResult match_frame(const std::vector<Detection>& dets,
                             const std::vector<GtObject>& gts, const std::string& class_name,
                             Difficulty difficulty, const IouFn& iou, double iou_threshold,
                             const DifficultyRules& rules) {
  // Target-class GTs only; everything else is invisible to the matcher.
  std::vector<std::size_t> gt_idx;
  std::vector<bool> counted;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].class_name != class_name) continue;
    gt_idx.push_back(i);
    const auto d = assign_difficulty(gts[i], rules);
    counted.push_back(d.has_value() && *d <= difficulty);
  }

  std::vector<std::size_t> det_order;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].box.class_name == class_name) det_order.push_back(i);
  std::stable_sort(det_order.begin(), det_order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  FrameMatchResult result;
  result.flags.assign(dets.size(), MatchFlag::ignored);
  result.counted_gt = static_cast<int>(std::count(counted.begin(), counted.end(), true));

  std::vector<bool> matched(gt_idx.size(), false);
  for (const std::size_t di : det_order) {
    double best_iou = -1.0;
    std::size_t best = gt_idx.size();
    for (std::size_t gi = 0; gi < gt_idx.size(); ++gi) {
      if (matched[gi]) continue;
      const double o = iou(dets[di].box, gts[gt_idx[gi]]);
      if (o > best_iou) {  // strict: equal IoU keeps the lowest GT index
        best_iou = o;
        best = gi;
      }
    }
    if (best < gt_idx.size() && best_iou >= iou_threshold) {
      matched[best] = true;
      result.flags[di] = counted[best] ? MatchFlag::tp : MatchFlag::ignored;
    } else {
      result.flags[di] = MatchFlag::fp;
    }
  }
  return result;
}

double average_precision(std::vector<ScoredFlag> scored_flags, std::uint64_t counted_gt,
                         ApMode mode) {
  if (counted_gt == 0)
    throw UndefinedRecallError("average_precision: no counted ground truth, recall is undefined");

  std::stable_sort(scored_flags.begin(), scored_flags.end(),
                   [](const ScoredFlag& a, const ScoredFlag& b) { return a.score > b.score; });

  // PR points in walk order; recall is non-decreasing along the walk.
  std::vector<double> recalls, precisions;
  std::uint64_t tp = 0, fp = 0;
  for (const auto& sf : scored_flags) {
    if (sf.flag == MatchFlag::ignored) continue;
    if (sf.flag == MatchFlag::tp) ++tp; else ++fp;
    recalls.push_back(static_cast<double>(tp) / static_cast<double>(counted_gt));
    precisions.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }

  // Precision envelope: max precision at recall >= r, via suffix maxima.
  std::vector<double> suffix_max(precisions.size());
  double running = 0.0;
  for (std::size_t i = precisions.size(); i-- > 0;) {
    running = std::max(running, precisions[i]);
    suffix_max[i] = running;
  }
  auto envelope = [&](double r) {
    const auto it = std::lower_bound(recalls.begin(), recalls.end(), r);
    if (it == recalls.end()) return 0.0;
    return suffix_max[static_cast<std::size_t>(it - recalls.begin())];
  };

  double sum = 0.0;
  int points = 0;
  if (mode == ApMode::r11) {
    for (int k = 0; k <= 10; ++k) sum += envelope(k / 10.0);
    points = 11;
  } else {
    for (int k = 1; k <= 40; ++k) sum += envelope(k / 40.0);
    points = 40;
  }
  return 100.0 * sum / points;
}

double iou_threshold_for(Difficulty d, IouPolicy policy) {
  if (policy == IouPolicy::strict_07) return 0.7;
  return d == Difficulty::easy ? 0.7 : 0.5;
}

APReport evaluate(const std::vector<std::vector<Detection>>& dets_per_frame,
                  const std::vector<std::vector<GtObject>>& gts_per_frame,
                  const DetectionEvalOptions& opt) {
  if (dets_per_frame.size() != gts_per_frame.size()) {
    std::ostringstream msg;
    msg << "got " << dets_per_frame.size() << " detection frames for " << gts_per_frame.size()
        << " ground-truth frames";
    throw ShapeError(msg.str());
  }

  const IouFn bev = [](const GtObject& a, const GtObject& b) {
    return bev_iou(a.bev_box(), b.bev_box());
  };
  const IouFn box3d = [](const GtObject& a, const GtObject& b) {
    return iou_3d(a.box_3d(), b.box_3d());
  };

  APReport report;
  report.class_name = opt.class_name;
  report.mode = opt.mode;

  for (int d = 0; d < 3; ++d) {
    const auto difficulty = static_cast<Difficulty>(d);
    const double threshold = iou_threshold_for(difficulty, opt.iou_policy);
    for (const bool use_3d : {false, true}) {
      std::vector<ScoredFlag> pooled;
      std::uint64_t total_gt = 0;
      for (std::size_t f = 0; f < dets_per_frame.size(); ++f) {
        const auto res = match_frame(dets_per_frame[f], gts_per_frame[f], opt.class_name,
                                     difficulty, use_3d ? box3d : bev, threshold, opt.rules);
        total_gt += static_cast<std::uint64_t>(res.counted_gt);
        for (std::size_t i = 0; i < res.flags.size(); ++i)
          pooled.push_back({dets_per_frame[f][i].score, res.flags[i]});
      }
      std::optional<double> ap;
      if (total_gt == 0) {
        if (!use_3d) {
          std::ostringstream msg;
          msg << "difficulty " << d << ": no counted ground truth, AP undefined";
          report.warnings.push_back(msg.str());
        }
      } else {
        ap = average_precision(std::move(pooled), total_gt, opt.mode);
      }
      if (use_3d)
        report.per_difficulty[d].ap_3d = ap;
      else
        report.per_difficulty[d].ap_bev = ap;
    }
  }
  return report;
}

}  // namespace plk
