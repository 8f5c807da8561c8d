#include "plk/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "plk/depth_metrics.hpp"
#include "plk/detection_eval.hpp"
#include "plk/kitti_io.hpp"
#include "plk/pseudolidar.hpp"
#include "plk/ranking.hpp"

namespace plk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int classify(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FormatError*>(&e))
    return exit_code::parse;
  if (dynamic_cast<const AlignmentError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e))
    return exit_code::alignment;
  if (dynamic_cast<const EmptyEvaluationError*>(&e) ||
      dynamic_cast<const UndefinedRecallError*>(&e))
    return exit_code::empty;
  return exit_code::failure;
}

// Rethrows a worker exception with the frame id attached, keeping the
// error class (and with it the exit code) intact.
[[noreturn]] void rethrow_with_frame(const std::exception_ptr& eptr, const std::string& id) {
  try {
    std::rethrow_exception(eptr);
  } catch (const ParseError& e) {
    throw ParseError("frame " + id + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError("frame " + id + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError("frame " + id + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("frame " + id + ": " + e.what());
  } catch (const std::exception& e) {
    throw AlignmentError("frame " + id + ": " + e.what());
  }
}

// Frame-level fan-out with order-independent merging: results land in
// per-index slots, so the outcome does not depend on completion order.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min<std::size_t>(jobs, n);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<std::string> frame_ids(const RunConfig& config, const fs::path& fallback_dir) {
  if (!config.split.empty()) return parse_split(read_file_text(config.split));
  SplitList ids;
  for (const auto& entry : fs::directory_iterator(fallback_dir))
    if (entry.is_regular_file()) ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

LidarSamplingSpec spec_from_config(const RunConfig& config) {
  LidarSamplingSpec spec;  // extents stay derived from each frame's calibration
  spec.n_beams = config.beams;
  spec.h_res = config.h_res_deg * std::numbers::pi / 180.0;
  if (config.d_max) spec.d_max = *config.d_max;
  if (config.h_max) spec.h_max = *config.h_max;
  if (config.r_min_frac) spec.r_min_frac = *config.r_min_frac;
  return spec;
}

void write_report(const RunConfig& config, const json& report, std::ostream& log) {
  const std::string text = report.dump(2) + "\n";
  if (config.out.empty()) {
    log << text;
  } else {
    write_file_text(config.out, text);
  }
}

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  return out;
}

json ranking_json(const Ranking& r) {
  json j;
  j["metric"] = r.metric;
  j["direction"] = r.direction == Direction::lower_is_better ? "lower" : "higher";
  j["order"] = r.ordered_ids;
  j["had_ties"] = r.had_ties;
  return j;
}

}  // namespace

std::string fnv1a_digest(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

int cmd_convert(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (config.depth_dir.empty() || config.calib_dir.empty() || config.split.empty() ||
        config.out.empty())
      throw ValidationError("convert needs --depth-dir, --calib-dir, --split and --out");
    if (config.mode != "dense" && config.mode != "sampled")
      throw ValidationError("convert: --mode must be dense or sampled");
    if (config.frame != "camera" && config.frame != "lidar")
      throw ValidationError("convert: --frame must be camera or lidar");

    const auto ids = frame_ids(config, config.depth_dir);
    const LidarSamplingSpec base_spec = spec_from_config(config);
    fs::create_directories(config.out);

    struct FrameResult {
      bool ok = false;
      std::string error;
      std::size_t n_points = 0;
      std::string digest;
      std::vector<std::string> warnings;
    };
    std::vector<FrameResult> results(ids.size());

    parallel_for(ids.size(), config.jobs, [&](std::size_t i) {
      FrameResult& res = results[i];
      try {
        const fs::path depth_path = config.depth_dir / (ids[i] + ".png");
        const fs::path calib_path = config.calib_dir / (ids[i] + ".txt");
        const DepthMap depth = read_depth_image(read_file_bytes(depth_path));
        const std::string calib_text = read_file_text(calib_path);
        const CameraIntrinsics k =
            parse_calib(calib_text, depth.width, depth.height, &res.warnings);
        for (const auto& w : k.validate()) res.warnings.push_back(w);

        PointCloud cloud;
        if (config.mode == "sampled") {
          cloud = sampled_cloud(depth, k, base_spec);
        } else {
          cloud = dense_cloud(depth, k, config.d_max, config.h_max, config.r_min_frac);
        }
        if (config.frame == "lidar") {
          const CalibrationFile calib = parse_calib_file(calib_text);
          const RigidTransform velo_to_cam =
              RigidTransform::from_calib(calib, "Tr_velo_to_cam");
          cloud = transform_cloud(cloud, velo_to_cam.inverse());
        }
        const auto bytes = write_pointcloud(cloud);
        write_file_bytes(config.out / (ids[i] + ".bin"), bytes);
        res.n_points = cloud.points.size();
        res.digest = fnv1a_digest(bytes);
        res.ok = true;
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    });

    json manifest;
    manifest["mode"] = config.mode;
    manifest["frame"] = config.frame;
    if (config.mode == "sampled") {
      manifest["spec"] = {{"n_beams", base_spec.n_beams},
                          {"h_res_rad", base_spec.h_res},
                          {"d_max", base_spec.d_max},
                          {"h_max", base_spec.h_max},
                          {"r_min_frac", base_spec.r_min_frac}};
    } else {
      json bounds;
      bounds["d_max"] = config.d_max ? json(*config.d_max) : json(nullptr);
      bounds["h_max"] = config.h_max ? json(*config.h_max) : json(nullptr);
      bounds["r_min_frac"] = config.r_min_frac ? json(*config.r_min_frac) : json(nullptr);
      manifest["spec"] = bounds;
    }

    std::size_t failures = 0;
    json frames = json::array();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      json f;
      f["id"] = ids[i];
      if (results[i].ok) {
        f["status"] = "ok";
        f["file"] = ids[i] + ".bin";
        f["points"] = results[i].n_points;
        f["digest"] = results[i].digest;
      } else {
        f["status"] = "error";
        f["error"] = results[i].error;
        ++failures;
      }
      if (!results[i].warnings.empty()) f["warnings"] = results[i].warnings;
      frames.push_back(std::move(f));
    }
    manifest["frames"] = std::move(frames);
    manifest["failed"] = failures;
    write_file_text(config.out / "manifest.json", manifest.dump(2) + "\n");

    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (const auto& w : results[i].warnings) err << ids[i] << ": warning: " << w << "\n";
      if (!results[i].ok) err << ids[i] << ": error: " << results[i].error << "\n";
    }
    log << "converted " << ids.size() - failures << "/" << ids.size() << " frames to "
        << config.out.string() << "\n";
    return failures == 0 ? exit_code::ok : exit_code::partial;
  } catch (const std::exception& e) {
    err << "convert: " << e.what() << "\n";
    return classify(e);
  }
}

int cmd_sample_mask(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (config.calib_file.empty() || config.out.empty() || config.width <= 0 ||
        config.height <= 0)
      throw ValidationError("sample-mask needs --calib, --width, --height and --out");
    std::vector<std::string> warnings;
    const CameraIntrinsics k =
        parse_calib(read_file_text(config.calib_file), config.width, config.height, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    const SampleMask mask = build_sample_mask(k, spec_from_config(config));
    write_file_bytes(config.out, write_mask_image(mask));
    log << "wrote " << mask.count() << " selected pixels to " << config.out.string() << "\n";
    return exit_code::ok;
  } catch (const std::exception& e) {
    err << "sample-mask: " << e.what() << "\n";
    return classify(e);
  }
}

int cmd_eval_depth(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (config.depth_dir.empty() || config.gt_depth_dir.empty())
      throw ValidationError("eval-depth needs --depth-dir and --gt-depth-dir");
    const auto ids = frame_ids(config, config.gt_depth_dir);
    if (ids.empty()) throw EmptyEvaluationError("eval-depth: no frames to evaluate");

    DepthEvalOptions opt;
    opt.cap = config.cap;

    std::vector<MetricAccumulator> accs(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    parallel_for(ids.size(), config.jobs, [&](std::size_t i) {
      try {
        const DepthMap pred =
            read_depth_image(read_file_bytes(config.depth_dir / (ids[i] + ".png")));
        const DepthMap gt =
            read_depth_image(read_file_bytes(config.gt_depth_dir / (ids[i] + ".png")));
        accs[i] = accumulate(pred, gt, opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (errors[i]) rethrow_with_frame(errors[i], ids[i]);

    MetricAccumulator total;
    for (const auto& acc : accs) total.merge(acc);  // merged in frame order
    const DepthMetricReport r = finalize(total, opt);

    json report;
    report["abs_rel"] = r.abs_rel;
    report["sq_rel"] = r.sq_rel;
    report["rms"] = r.rms;
    report["rms_log"] = r.rms_log;
    report["delta1"] = r.delta1;
    report["delta2"] = r.delta2;
    report["delta3"] = r.delta3;
    report["n"] = r.n;
    report["cap"] = r.cap;
    report["clamp_min"] = r.clamp_min;
    report["frames"] = ids.size();
    write_report(config, report, log);
    if (config.human) {
      log << std::fixed << std::setprecision(4) << "abs-rel " << r.abs_rel << "  sq-rel "
          << r.sq_rel << "  rms " << r.rms << "  rms-log " << r.rms_log << "  d1 " << r.delta1
          << "  d2 " << r.delta2 << "  d3 " << r.delta3 << "  (n=" << r.n << ")\n";
    }
    return exit_code::ok;
  } catch (const std::exception& e) {
    err << "eval-depth: " << e.what() << "\n";
    return classify(e);
  }
}

int cmd_eval_det(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (config.labels_dir.empty() || config.dets_dir.empty())
      throw ValidationError("eval-det needs --labels-dir and --dets-dir");
    const auto ids = frame_ids(config, config.labels_dir);
    if (ids.empty()) throw EmptyEvaluationError("eval-det: no frames to evaluate");

    DetectionEvalOptions opt;
    opt.class_name = config.class_name;
    if (config.ap_mode == "r11")
      opt.mode = ApMode::r11;
    else if (config.ap_mode == "r40")
      opt.mode = ApMode::r40;
    else
      throw ValidationError("eval-det: --ap-mode must be r11 or r40");
    if (config.iou_policy == "paper")
      opt.iou_policy = IouPolicy::per_difficulty;
    else if (config.iou_policy == "kitti")
      opt.iou_policy = IouPolicy::strict_07;
    else
      throw ValidationError("eval-det: --iou-policy must be paper or kitti");

    std::vector<std::vector<GtObject>> gts(ids.size());
    std::vector<std::vector<Detection>> dets(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    parallel_for(ids.size(), config.jobs, [&](std::size_t i) {
      try {
        gts[i] = parse_labels(read_file_text(config.labels_dir / (ids[i] + ".txt"))).gts;
        dets[i] = parse_labels(read_file_text(config.dets_dir / (ids[i] + ".txt"))).dets;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (errors[i]) rethrow_with_frame(errors[i], ids[i]);

    const APReport r = evaluate(dets, gts, opt);

    json report;
    report["class"] = r.class_name;
    report["ap_mode"] = config.ap_mode;
    report["iou_policy"] = config.iou_policy;
    const char* names[3] = {"easy", "moderate", "hard"};
    json results;
    for (int d = 0; d < 3; ++d) {
      json entry;
      entry["ap_bev"] =
          r.per_difficulty[d].ap_bev ? json(*r.per_difficulty[d].ap_bev) : json(nullptr);
      entry["ap_3d"] =
          r.per_difficulty[d].ap_3d ? json(*r.per_difficulty[d].ap_3d) : json(nullptr);
      results[names[d]] = std::move(entry);
    }
    report["results"] = std::move(results);
    report["warnings"] = r.warnings;
    for (const auto& w : r.warnings) err << "eval-det: warning: " << w << "\n";
    write_report(config, report, log);
    if (config.human) {
      log << std::fixed << std::setprecision(2);
      for (int d = 0; d < 3; ++d) {
        log << names[d] << ": AP_BEV ";
        if (r.per_difficulty[d].ap_bev) log << *r.per_difficulty[d].ap_bev; else log << "n/a";
        log << "  AP_3D ";
        if (r.per_difficulty[d].ap_3d) log << *r.per_difficulty[d].ap_3d; else log << "n/a";
        log << "\n";
      }
    }
    return exit_code::ok;
  } catch (const std::exception& e) {
    err << "eval-det: " << e.what() << "\n";
    return classify(e);
  }
}

int cmd_rank(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (config.depth_table.empty() || config.det_tables.empty() || config.out.empty())
      throw ValidationError("rank needs --depth-table, at least one --det-table and --out");

    const MetricTable depth = parse_metric_table(read_file_text(config.depth_table));
    std::vector<std::pair<std::string, MetricTable>> detectors;
    for (const auto& [name, path] : config.det_tables)
      detectors.emplace_back(name, parse_metric_table(read_file_text(path)));

    const ConcordanceReport r = concordance_report(depth, detectors);

    fs::create_directories(config.out);
    json report;
    report["models"] = depth.model_ids;
    report["best_metric"] = r.best_metric;
    report["total_inversions"] = r.total_inversions;
    report["identical_detector_rankings"] = r.identical_detector_rankings;
    json pairs = json::array();
    for (const auto& p : r.pairs) {
      json pj;
      pj["depth_metric"] = p.depth_metric;
      pj["detector"] = p.detector;
      pj["inversions"] = p.inversions;
      pj["normalized_kendall_distance"] = p.normalized;
      pj["depth_ranking"] = ranking_json(p.depth_ranking);
      pj["detector_ranking"] = ranking_json(p.det_ranking);
      const std::string svg_name =
          sanitize(p.depth_metric) + "__" + sanitize(p.detector) + ".svg";
      write_file_text(config.out / svg_name, render_diagram(p.depth_ranking, p.det_ranking));
      pj["diagram"] = svg_name;
      pairs.push_back(std::move(pj));
    }
    report["pairs"] = std::move(pairs);
    write_file_text(config.out / "concordance.json", report.dump(2) + "\n");

    if (config.human) {
      for (const auto& p : r.pairs)
        log << p.depth_metric << " vs " << p.detector << ": " << p.inversions << " inversions ("
            << std::fixed << std::setprecision(3) << p.normalized << ")\n";
    }
    log << "best metric by total inversions: " << r.best_metric << "\n";
    return exit_code::ok;
  } catch (const std::exception& e) {
    err << "rank: " << e.what() << "\n";
    return classify(e);
  }
}

}  // namespace plk
