#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "plk/kitti_io.hpp"

using namespace plk;

namespace {
const std::string kCalibText =
    "P0: 700 0 600 0 0 700 180 0 0 0 1 0\n"
    "P2: 720 0 600 0 0 720 180 0 0 0 1 0\n"
    "Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0.27\n";
}

TEST_CASE("parse_calib extracts f, cu, cv from P2") {
  std::vector<std::string> warnings;
  const CameraIntrinsics k = parse_calib(kCalibText, 1242, 375, &warnings);
  CHECK(k.f == 720.0);
  CHECK(k.cu == 600.0);
  CHECK(k.cv == 180.0);
  CHECK(k.width == 1242);
  CHECK(k.height == 375);
  CHECK(warnings.empty());
}

TEST_CASE("parse_calib warns on mismatched focal lengths") {
  std::vector<std::string> warnings;
  const CameraIntrinsics k = parse_calib(
      "P2: 720 0 600 0 0 710 180 0 0 0 1 0\n", 1242, 375, &warnings);
  CHECK(k.f == 720.0);
  CHECK(k.cu == 600.0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("focal") != std::string::npos);
}

TEST_CASE("parse_calib errors") {
  CHECK_THROWS_AS(parse_calib("P0: 1 0 0 0 0 1 0 0 0 0 1 0\n"), FormatError);
  CHECK_THROWS_AS(parse_calib(""), FormatError);
  CHECK_THROWS_AS(parse_calib("P2: a b c d e f g h i j k l\n"), ParseError);
}

TEST_CASE("parse_labels maps the 15-field ground-truth line") {
  const ParsedLabels labels = parse_labels(
      "Car 0.0 0 -1.58 100 150 200 250 1.5 1.6 3.9 2.0 1.7 15.0 -1.6\n");
  REQUIRE(labels.gts.size() == 1);
  CHECK(labels.dets.empty());
  const GtObject& gt = labels.gts[0];
  CHECK(gt.class_name == "Car");
  CHECK(gt.truncation == 0.0);
  CHECK(gt.occlusion == 0);
  CHECK(gt.alpha == -1.58);
  CHECK(gt.bbox.left == 100.0);
  CHECK(gt.bbox.bottom == 250.0);
  CHECK(gt.h == 1.5);
  CHECK(gt.w == 1.6);
  CHECK(gt.l == 3.9);
  CHECK(gt.location.x == 2.0);
  CHECK(gt.location.y == 1.7);
  CHECK(gt.location.z == 15.0);
  CHECK(gt.rotation_y == -1.6);
}

TEST_CASE("parse_labels reads a trailing score as a detection") {
  const ParsedLabels labels = parse_labels(
      "Car 0.0 0 -1.58 100 150 200 250 1.5 1.6 3.9 2.0 1.7 15.0 -1.6 0.93\n");
  REQUIRE(labels.dets.size() == 1);
  CHECK(labels.gts.empty());
  CHECK(labels.dets[0].score == 0.93);
  CHECK(labels.dets[0].box.class_name == "Car");
}

TEST_CASE("parse_labels keeps DontCare sentinels") {
  const ParsedLabels labels = parse_labels(
      "DontCare -1 -1 -10 503.89 169.71 590.61 190.13 -1 -1 -1 -1000 -1000 -1000 -10\n");
  REQUIRE(labels.gts.size() == 1);
  CHECK(labels.gts[0].class_name == "DontCare");
  CHECK(labels.gts[0].h == -1.0);
}

TEST_CASE("parse_labels names the offending line on a wrong field count") {
  const std::string text =
      "Car 0.0 0 -1.58 100 150 200 250 1.5 1.6 3.9 2.0 1.7 15.0 -1.6\n"
      "Car 0.0 0 -1.58 100 150 200 250 1.5 1.6 3.9 2.0 15.0\n";
  try {
    parse_labels(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("label round trip preserves fields at printed precision") {
  const std::string text =
      "Car 0.12 1 -1.58 100.5 150.25 200 250 1.52 1.63 3.94 2.01 1.72 15.03 -1.61 0.93\n"
      "Pedestrian 0.0 0 0.5 10 20 30 40 1.8 0.6 0.9 -3.25 1.7 8.5 0.25\n";
  const ParsedLabels first = parse_labels(text);
  const ParsedLabels second = parse_labels(serialize_labels(first));
  REQUIRE(second.gts.size() == 1);
  REQUIRE(second.dets.size() == 1);
  CHECK(second.dets[0].score == first.dets[0].score);
  CHECK(second.dets[0].box.location.x == first.dets[0].box.location.x);
  CHECK(second.gts[0].rotation_y == first.gts[0].rotation_y);
  // A second cycle is the identity on the printed representation.
  CHECK(serialize_labels(second) == serialize_labels(first));
}

TEST_CASE("depth image decoding: raw/256 with zero as invalid") {
  DepthMap d;
  d.width = 3;
  d.height = 1;
  d.values = {100.0f, 0.0f, 0.25f};
  d.valid = {1, 0, 1};
  const auto png = write_depth_image(d);
  const DepthMap back = read_depth_image(png);
  CHECK(back.width == 3);
  CHECK(back.height == 1);
  CHECK(back.valid[0]);
  CHECK_FALSE(back.valid[1]);
  CHECK(back.values[0] == 100.0f);  // raw 25600
  CHECK(back.values[1] == 0.0f);
  CHECK(back.values[2] == 0.25f);   // raw 64
}

TEST_CASE("depth image round trip is exact at 1/256 quantization") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dd(0.01, 250.0);
  DepthMap d;
  d.width = 64;
  d.height = 32;
  d.values.resize(64 * 32);
  d.valid.resize(64 * 32);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.valid[i] = (i % 7 != 0) ? 1 : 0;
    d.values[i] = d.valid[i] ? static_cast<float>(dd(rng)) : 0.0f;
  }
  const DepthMap once = read_depth_image(write_depth_image(d));
  const DepthMap twice = read_depth_image(write_depth_image(once));
  CHECK(once.values == twice.values);  // quantization is idempotent
  CHECK(once.valid == twice.valid);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!d.valid[i]) continue;
    CHECK(std::abs(once.values[i] - d.values[i]) <= 0.5f / 256.0f);
  }
}

TEST_CASE("read_depth_image rejects 8-bit input") {
  SampleMask mask;
  mask.width = 4;
  mask.height = 2;
  mask.selected = {1, 0, 1, 0, 0, 1, 0, 1};
  const auto png8 = write_mask_image(mask);
  CHECK_THROWS_AS(read_depth_image(png8), FormatError);
  CHECK_THROWS_AS(read_depth_image({0x12, 0x34, 0x56}), FormatError);
}

TEST_CASE("mask image round trip") {
  SampleMask mask;
  mask.width = 5;
  mask.height = 3;
  mask.selected = {1, 0, 1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0, 1};
  const SampleMask back = read_mask_image(write_mask_image(mask));
  CHECK(back.width == mask.width);
  CHECK(back.selected == mask.selected);
}

TEST_CASE("point cloud codec: empty, single point, truncation") {
  CHECK(write_pointcloud({}).empty());
  PointCloud one;
  one.points.push_back({1.0f, 2.0f, 3.0f, 1.0f});
  const auto bytes = write_pointcloud(one);
  CHECK(bytes.size() == 16);
  const PointCloud back = read_pointcloud(bytes);
  REQUIRE(back.points.size() == 1);
  CHECK(back.points[0].x == 1.0f);
  CHECK(back.points[0].y == 2.0f);
  CHECK(back.points[0].z == 3.0f);
  CHECK(back.points[0].intensity == 1.0f);

  std::vector<std::uint8_t> bad(17, 0);
  CHECK_THROWS_AS(read_pointcloud(bad), FormatError);
}

TEST_CASE("point cloud round trip is bit-exact for arbitrary finite floats") {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::uint32_t> bits;
  PointCloud cloud;
  for (int i = 0; i < 4096; ++i) {
    auto f = [&]() {
      float v;
      do {
        const std::uint32_t u = bits(rng);
        std::memcpy(&v, &u, 4);
      } while (!std::isfinite(v));
      return v;
    };
    cloud.points.push_back({f(), f(), f(), f()});
  }
  const auto bytes = write_pointcloud(cloud);
  const PointCloud back = read_pointcloud(bytes);
  REQUIRE(back.points.size() == cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    CHECK(std::memcmp(&back.points[i], &cloud.points[i], 16) == 0);
  }
  // write(read(bytes)) is the identity on the byte stream.
  CHECK(write_pointcloud(back) == bytes);
}

TEST_CASE("parse_split basics") {
  const SplitList s = parse_split("000000\n000003\n");
  CHECK(s == SplitList{"000000", "000003"});
  CHECK(parse_split("").empty());
  CHECK_THROWS_AS(parse_split("000001\n000001\n"), ValidationError);
}

TEST_CASE("rigid transform inverse round trip") {
  const CalibrationFile calib = parse_calib_file(kCalibText);
  const RigidTransform tf = RigidTransform::from_calib(calib, "Tr_velo_to_cam");
  const RigidTransform inv = tf.inverse();
  const Point3 p{1.5, -2.0, 7.0};
  const Point3 q = inv.apply(tf.apply(p));
  CHECK(q.x == doctest::Approx(p.x).epsilon(1e-12));
  CHECK(q.y == doctest::Approx(p.y).epsilon(1e-12));
  CHECK(q.z == doctest::Approx(p.z).epsilon(1e-12));

  CHECK_THROWS_AS(RigidTransform::from_calib(calib, "Tr_imu_to_velo"), FormatError);
}
