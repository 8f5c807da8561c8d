#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plk/depth_metrics.hpp"
#include "oracles.hpp"

using namespace plk;

namespace {

DepthMap map_from(std::vector<float> v, int w, int h) {
  return DepthMap::from_values(w, h, std::move(v));
}

// The spec's two-pixel hand case: gt = [2, 4], pred = [1, 5].
const DepthMap kGt2 = map_from({2.0f, 4.0f}, 2, 1);
const DepthMap kPred2 = map_from({1.0f, 5.0f}, 2, 1);

struct RandomFrames {
  std::vector<DepthMap> preds, gts;
  std::vector<double> flat_gt, flat_pred;  // pooled pairs after cap + clamp
};

RandomFrames make_random_frames(int n_frames, std::uint64_t seed, double cap,
                                double clamp_min) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dw(3, 14), dh(2, 9);
  std::uniform_real_distribution<double> dg(0.5, 110.0);
  std::uniform_real_distribution<double> derr(-4.0, 4.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  RandomFrames out;
  for (int f = 0; f < n_frames; ++f) {
    const int w = dw(rng), h = dh(rng);
    std::vector<float> gt(static_cast<std::size_t>(w) * h);
    std::vector<float> pred(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (u01(rng) < 0.25) {
        gt[i] = 0.0f;  // invalid ground truth
        pred[i] = static_cast<float>(std::abs(derr(rng)));
        continue;
      }
      gt[i] = static_cast<float>(dg(rng));
      pred[i] = static_cast<float>(std::max(0.0, gt[i] + derr(rng)));
    }
    out.gts.push_back(map_from(gt, w, h));
    out.preds.push_back(map_from(pred, w, h));
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] <= 0.0f || gt[i] > cap) continue;
      out.flat_gt.push_back(gt[i]);
      out.flat_pred.push_back(std::clamp(static_cast<double>(pred[i]), clamp_min, cap));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("perfect predictions yield zero errors and unit deltas") {
  const MetricAccumulator acc = accumulate(kGt2, kGt2);
  CHECK(acc.n == 2);
  CHECK(acc.abs_rel_sum == 0.0);
  CHECK(acc.sq_err_sum == 0.0);
  const DepthMetricReport r = finalize(acc);
  CHECK(r.abs_rel == 0.0);
  CHECK(r.sq_rel == 0.0);
  CHECK(r.rms == 0.0);
  CHECK(r.rms_log == 0.0);
  CHECK(r.delta1 == 1.0);
  CHECK(r.delta2 == 1.0);
  CHECK(r.delta3 == 1.0);
}

TEST_CASE("two-pixel hand case: abs-rel 0.375, rms 1.0, strict delta") {
  const DepthMetricReport r = finalize(accumulate(kPred2, kGt2));
  CHECK(r.abs_rel == 0.375);
  CHECK(r.rms == 1.0);
  // Ratios are 2 and exactly 1.25; the comparison is strict, so both
  // pixels are delta1 outliers.
  CHECK(r.delta1 == 0.0);
  CHECK(r.sq_rel == 0.375);
  const double expected_rms_log =
      std::sqrt((std::pow(std::log(2.0), 2) + std::pow(std::log(1.25), 2)) / 2.0);
  CHECK(r.rms_log == doctest::Approx(expected_rms_log).epsilon(1e-12));
  CHECK(r.rms_log == doctest::Approx(0.5149).epsilon(1e-4));
  CHECK(r.delta2 == 0.5);
  CHECK(r.delta3 == 0.5);
  CHECK(r.n == 2);
}

TEST_CASE("finalize on an empty accumulator fails") {
  CHECK_THROWS_AS(finalize(MetricAccumulator{}), EmptyEvaluationError);
}

TEST_CASE("accumulate rejects mismatched shapes") {
  const DepthMap small = map_from({1.0f}, 1, 1);
  CHECK_THROWS_AS(accumulate(small, kGt2), ShapeError);
}

TEST_CASE("merging accumulators equals pooling the concatenated pixels") {
  const MetricAccumulator a = accumulate(kPred2, kGt2);
  const DepthMap gt4 = map_from({2.0f, 4.0f, 2.0f, 4.0f}, 4, 1);
  const DepthMap pred4 = map_from({1.0f, 5.0f, 1.0f, 5.0f}, 4, 1);
  MetricAccumulator twice = accumulate(kPred2, kGt2);
  twice.merge(a);
  const MetricAccumulator direct = accumulate(pred4, gt4);
  CHECK(twice.n == direct.n);
  CHECK(twice.abs_rel_sum == doctest::Approx(direct.abs_rel_sum).epsilon(1e-15));
  CHECK(twice.sq_err_sum == doctest::Approx(direct.sq_err_sum).epsilon(1e-15));
  CHECK(twice.inliers == direct.inliers);
}

TEST_CASE("ground truth above the cap is excluded from n") {
  const DepthMap gt = map_from({2.0f, 90.0f}, 2, 1);
  const DepthMap pred = map_from({2.0f, 90.0f}, 2, 1);
  const MetricAccumulator acc = accumulate(pred, gt);  // default cap 80
  CHECK(acc.n == 1);
}

TEST_CASE("non-positive predictions are clamped, not skipped") {
  const DepthMap gt = map_from({2.0f, 4.0f}, 2, 1);
  const DepthMap pred = map_from({0.0f, -3.0f}, 2, 1);
  // Invalid raw predictions carry value 0 after from_values; both pixels
  // still count and compare against the 1e-3 clamp floor.
  const MetricAccumulator acc = accumulate(pred, gt);
  CHECK(acc.n == 2);
  const DepthMetricReport r = finalize(acc);
  CHECK(r.abs_rel == doctest::Approx((1.999 / 2.0 + 3.999 / 4.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("evaluate_dataset: single frame equals accumulate+finalize") {
  const DepthMetricReport direct = finalize(accumulate(kPred2, kGt2));
  const DepthMetricReport ds = evaluate_dataset({kPred2}, {kGt2});
  CHECK(ds.abs_rel == direct.abs_rel);
  CHECK(ds.rms == direct.rms);
  CHECK(ds.n == direct.n);
}

TEST_CASE("evaluate_dataset is invariant to frame order") {
  const auto frames = make_random_frames(6, 99, 80.0, 1e-3);
  const DepthMetricReport fwd = evaluate_dataset(frames.preds, frames.gts);
  std::vector<DepthMap> rp(frames.preds.rbegin(), frames.preds.rend());
  std::vector<DepthMap> rg(frames.gts.rbegin(), frames.gts.rend());
  const DepthMetricReport rev = evaluate_dataset(rp, rg);
  CHECK(fwd.abs_rel == doctest::Approx(rev.abs_rel).epsilon(1e-15));
  CHECK(fwd.rms == doctest::Approx(rev.rms).epsilon(1e-15));
  CHECK(fwd.n == rev.n);
}

TEST_CASE("evaluate_dataset attaches the frame index to shape errors") {
  std::vector<DepthMap> preds{kPred2, map_from({1.0f}, 1, 1)};
  std::vector<DepthMap> gts{kGt2, kGt2};
  try {
    evaluate_dataset(preds, gts);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
  }
}

TEST_CASE("pooled metrics match the flat-array oracle on random frames") {
  const auto frames = make_random_frames(10, 4242, 80.0, 1e-3);
  const DepthMetricReport r = evaluate_dataset(frames.preds, frames.gts);
  const auto flat = oracle::flat_depth_metrics(frames.flat_gt, frames.flat_pred);
  CHECK(r.n == flat.n);
  CHECK(r.abs_rel == doctest::Approx(flat.abs_rel).epsilon(1e-12));
  CHECK(r.sq_rel == doctest::Approx(flat.sq_rel).epsilon(1e-12));
  CHECK(r.rms == doctest::Approx(flat.rms).epsilon(1e-12));
  CHECK(r.rms_log == doctest::Approx(flat.rms_log).epsilon(1e-12));
  CHECK(r.delta1 == doctest::Approx(flat.delta1).epsilon(1e-15));
  CHECK(r.delta2 == doctest::Approx(flat.delta2).epsilon(1e-15));
  CHECK(r.delta3 == doctest::Approx(flat.delta3).epsilon(1e-15));
}

TEST_CASE("scaling both inputs leaves relative metrics unchanged") {
  // Strictly positive predictions: the invariant holds when the clamp
  // floor never engages.
  auto frames = make_random_frames(4, 7, 1e9, 1e-9);
  for (auto& m : frames.preds)
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      if (m.values[i] <= 0.05f) m.values[i] = 0.05f;
      m.valid[i] = 1;
    }
  DepthEvalOptions opt;
  opt.cap = 1e9;      // keep every pixel in play under scaling
  opt.clamp_min = 1e-9;
  const double alpha = 3.25;
  std::vector<DepthMap> sp = frames.preds, sg = frames.gts;
  for (auto* set : {&sp, &sg})
    for (auto& m : *set)
      for (auto& v : m.values) v *= static_cast<float>(alpha);
  const DepthMetricReport base = evaluate_dataset(frames.preds, frames.gts, opt);
  const DepthMetricReport scaled = evaluate_dataset(sp, sg, opt);
  CHECK(scaled.abs_rel == doctest::Approx(base.abs_rel).epsilon(1e-6));
  CHECK(scaled.sq_rel == doctest::Approx(alpha * base.sq_rel).epsilon(1e-6));
  CHECK(scaled.rms == doctest::Approx(alpha * base.rms).epsilon(1e-6));
  CHECK(scaled.rms_log == doctest::Approx(base.rms_log).epsilon(1e-6));
  CHECK(scaled.delta1 == base.delta1);
  CHECK(scaled.delta2 == base.delta2);
  CHECK(scaled.delta3 == base.delta3);
}

TEST_CASE("delta thresholds are monotone") {
  const auto frames = make_random_frames(8, 12345, 80.0, 1e-3);
  const DepthMetricReport r = evaluate_dataset(frames.preds, frames.gts);
  CHECK(r.delta1 <= r.delta2);
  CHECK(r.delta2 <= r.delta3);
}

TEST_CASE("optional crop restricts pooling") {
  const DepthMap gt = map_from({2.0f, 4.0f, 6.0f, 8.0f}, 2, 2);
  const DepthMap pred = map_from({2.0f, 5.0f, 6.0f, 9.0f}, 2, 2);
  DepthEvalOptions opt;
  opt.crop = CropRect{0, 0, 1, 2};  // left column only
  const MetricAccumulator acc = accumulate(pred, gt, opt);
  CHECK(acc.n == 2);
  CHECK(acc.abs_rel_sum == 0.0);
}

TEST_CASE("median scaling is opt-in and rescales predictions per frame") {
  const DepthMap gt = map_from({4.0f, 8.0f, 12.0f}, 3, 1);
  const DepthMap pred = map_from({2.0f, 4.0f, 6.0f}, 3, 1);  // half scale
  DepthEvalOptions opt;
  opt.median_scaling = true;
  const DepthMetricReport r = finalize(accumulate(pred, gt, opt), opt);
  CHECK(r.abs_rel == doctest::Approx(0.0).epsilon(1e-12));

  const DepthMetricReport unscaled = finalize(accumulate(pred, gt));
  CHECK(unscaled.abs_rel == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("options validation") {
  DepthEvalOptions opt;
  opt.cap = 0.0;
  CHECK_THROWS_AS(accumulate(kPred2, kGt2, opt), ValidationError);
  opt.cap = 80.0;
  opt.clamp_min = 0.0;
  CHECK_THROWS_AS(accumulate(kPred2, kGt2, opt), ValidationError);
  opt.clamp_min = 100.0;
  CHECK_THROWS_AS(accumulate(kPred2, kGt2, opt), ValidationError);
}
