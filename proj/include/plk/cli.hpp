#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace plk {

// Exit-code contract shared by every subcommand.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;    // unexpected error
inline constexpr int parse = 2;      // parse / format errors
inline constexpr int alignment = 3;  // alignment / validation errors
inline constexpr int partial = 4;    // some frames failed, others were written
inline constexpr int empty = 5;      // empty evaluation / undefined recall
}  // namespace exit_code

struct RunConfig {
  // directories and files
  std::filesystem::path depth_dir;
  std::filesystem::path gt_depth_dir;
  std::filesystem::path calib_dir;
  std::filesystem::path labels_dir;
  std::filesystem::path dets_dir;
  std::filesystem::path split;
  std::filesystem::path out;

  // convert / sample-mask
  std::string mode = "sampled";   // dense | sampled
  std::string frame = "camera";   // camera | lidar
  int beams = 64;
  double h_res_deg = 0.08;
  std::optional<double> d_max;
  std::optional<double> h_max;
  std::optional<double> r_min_frac;
  std::filesystem::path calib_file;
  int width = 0;
  int height = 0;

  // eval-depth
  double cap = 80.0;

  // eval-det
  std::string ap_mode = "r11";        // r11 | r40
  std::string iou_policy = "paper";   // paper | kitti
  std::string class_name = "Car";

  // rank
  std::filesystem::path depth_table;
  std::vector<std::pair<std::string, std::filesystem::path>> det_tables;

  int jobs = 0;  // 0 = all available cores
  bool human = false;
};

int cmd_convert(const RunConfig& config, std::ostream& log, std::ostream& err);
int cmd_sample_mask(const RunConfig& config, std::ostream& log, std::ostream& err);
int cmd_eval_depth(const RunConfig& config, std::ostream& log, std::ostream& err);
int cmd_eval_det(const RunConfig& config, std::ostream& log, std::ostream& err);
int cmd_rank(const RunConfig& config, std::ostream& log, std::ostream& err);

// FNV-1a 64-bit content digest used in conversion manifests.
std::string fnv1a_digest(const std::vector<std::uint8_t>& bytes);

}  // namespace plk
