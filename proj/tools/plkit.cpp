#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "plk/cli.hpp"

namespace {

// "NAME=path" pairs for --det-table.
std::vector<std::pair<std::string, std::filesystem::path>> parse_det_tables(
    const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const auto& item : raw) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw CLI::ValidationError("--det-table", "expected NAME=path, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "plkit: Pseudo-LiDAR conversion and evaluation toolkit\n"
      "Converts depth maps to point clouds, scores depth estimation and 3D\n"
      "detection, and compares metric rankings."};
  app.require_subcommand(1);

  plk::RunConfig cfg;
  std::vector<std::string> det_table_args;
  double d_max_arg = -1, h_max_arg = -1, r_min_frac_arg = -1;

  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", cfg.jobs, "Worker threads (default: all cores)");
  };

  CLI::App* convert = app.add_subcommand("convert", "Depth maps -> point-cloud binaries");
  convert->add_option("--depth-dir", cfg.depth_dir, "Directory of <id>.png depth maps")
      ->required();
  convert->add_option("--calib-dir", cfg.calib_dir, "Directory of <id>.txt calibrations")
      ->required();
  convert->add_option("--split", cfg.split, "Frame id list, one per line")->required();
  convert->add_option("--out", cfg.out, "Output directory")->required();
  convert->add_option("--mode", cfg.mode, "dense|sampled (default sampled)");
  convert->add_option("--frame", cfg.frame, "Output frame: camera|lidar (default camera)");
  convert->add_option("--beams", cfg.beams, "Beam count (default 64)");
  convert->add_option("--h-res", cfg.h_res_deg, "Azimuth step, degrees (default 0.08)");
  convert->add_option("--d-max", d_max_arg, "Depth cap, meters (default 80 for sampled)");
  convert->add_option("--h-max", h_max_arg, "Height-above-camera cap, meters (default 1)");
  convert->add_option("--r-min-frac", r_min_frac_arg,
                      "Fraction of top rows discarded (default 0.4)");
  add_jobs(convert);

  CLI::App* mask = app.add_subcommand("sample-mask", "Write the ray-sampling mask as a PNG");
  mask->add_option("--calib", cfg.calib_file, "Calibration file")->required();
  mask->add_option("--width", cfg.width, "Image columns")->required();
  mask->add_option("--height", cfg.height, "Image rows")->required();
  mask->add_option("--out", cfg.out, "Output PNG path")->required();
  mask->add_option("--beams", cfg.beams, "Beam count (default 64; 16 for the sparse preset)");
  mask->add_option("--h-res", cfg.h_res_deg, "Azimuth step, degrees (default 0.08)");
  mask->add_option("--r-min-frac", r_min_frac_arg,
                   "Fraction of top rows discarded (default 0.4)");

  CLI::App* eval_depth = app.add_subcommand("eval-depth", "Pooled depth metrics over a dataset");
  eval_depth->add_option("--depth-dir", cfg.depth_dir, "Predicted depth maps")->required();
  eval_depth->add_option("--gt-depth-dir", cfg.gt_depth_dir, "Ground-truth depth maps")
      ->required();
  eval_depth->add_option("--split", cfg.split, "Frame id list (default: all gt frames)");
  eval_depth->add_option("--out", cfg.out, "Report JSON path (default: stdout)");
  eval_depth->add_option("--cap", cfg.cap, "Ground-truth depth cap, meters (default 80)");
  eval_depth->add_flag("--human", cfg.human, "Also print a human-readable summary");
  add_jobs(eval_depth);

  CLI::App* eval_det = app.add_subcommand("eval-det", "KITTI-style AP_BEV / AP_3D");
  eval_det->add_option("--labels-dir", cfg.labels_dir, "Ground-truth label files")->required();
  eval_det->add_option("--dets-dir", cfg.dets_dir, "Detection label files (with scores)")
      ->required();
  eval_det->add_option("--split", cfg.split, "Frame id list (default: all label frames)");
  eval_det->add_option("--out", cfg.out, "Report JSON path (default: stdout)");
  eval_det->add_option("--ap-mode", cfg.ap_mode, "r11|r40 (default r11)");
  eval_det->add_option("--class", cfg.class_name, "Evaluated class (default Car)");
  eval_det->add_option("--iou-policy", cfg.iou_policy,
                       "paper (0.7 easy, 0.5 mod/hard) | kitti (0.7 everywhere)");
  eval_det->add_flag("--human", cfg.human, "Also print a human-readable summary");
  add_jobs(eval_det);

  CLI::App* rank = app.add_subcommand("rank", "Ranking concordance report and diagrams");
  rank->add_option("--depth-table", cfg.depth_table, "Depth-metric table (CSV)")->required();
  rank->add_option("--det-table", det_table_args,
                   "Detector table as NAME=path (repeatable)")
      ->required();
  rank->add_option("--out", cfg.out, "Output directory")->required();
  rank->add_flag("--human", cfg.human, "Also print per-pair inversion counts");

  CLI11_PARSE(app, argc, argv);

  if (d_max_arg >= 0) cfg.d_max = d_max_arg;
  if (h_max_arg >= 0) cfg.h_max = h_max_arg;
  if (r_min_frac_arg >= 0) cfg.r_min_frac = r_min_frac_arg;

  try {
    cfg.det_tables = parse_det_tables(det_table_args);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return plk::exit_code::alignment;
  }

  if (convert->parsed()) return plk::cmd_convert(cfg, std::cout, std::cerr);
  if (mask->parsed()) return plk::cmd_sample_mask(cfg, std::cout, std::cerr);
  if (eval_depth->parsed()) return plk::cmd_eval_depth(cfg, std::cout, std::cerr);
  if (eval_det->parsed()) return plk::cmd_eval_det(cfg, std::cout, std::cerr);
  if (rank->parsed()) return plk::cmd_rank(cfg, std::cout, std::cerr);
  return plk::exit_code::failure;
}
