#include "plk/kitti_io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace plk {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

double parse_double(const std::string& tok, const char* context, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << context << " line " << line_no << ": non-numeric token '" << tok << "'";
    throw ParseError(msg.str());
  }
}

// ---- PNG plumbing ---------------------------------------------------------

struct PngReadCtx {
  const std::uint8_t* data = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;
};

extern "C" void plk_png_read(png_structp png, png_bytep out, png_size_t n) {
  auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
  if (ctx->pos + n > ctx->size) png_error(png, "unexpected end of PNG stream");
  std::memcpy(out, ctx->data + ctx->pos, n);
  ctx->pos += n;
}

extern "C" void plk_png_write(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

extern "C" void plk_png_flush(png_structp) {}

// Route libpng failures through the setjmp path without printing to stderr.
extern "C" void plk_png_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
extern "C" void plk_png_warn(png_structp, png_const_charp) {}

struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> pixels;  // host order; 8-bit images widen
};

GrayImage decode_gray_png(const std::vector<std::uint8_t>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, plk_png_error, plk_png_warn);
  if (!png) throw FormatError("PNG decoder initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("PNG decoder initialization failed");
  }

  PngReadCtx ctx{bytes.data(), bytes.size(), 0};
  GrayImage img;
  std::vector<png_bytep> row_ptrs;
  std::vector<std::uint8_t> raw;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("not a decodable PNG stream");
  }

  png_set_read_fn(png, &ctx, plk_png_read);
  png_read_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::ostringstream msg;
    msg << "expected a single-channel grayscale PNG, got color type " << color_type;
    throw FormatError(msg.str());
  }
  if (img.bit_depth != 8 && img.bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::ostringstream msg;
    msg << "expected 8- or 16-bit grayscale, got " << img.bit_depth << "-bit";
    throw FormatError(msg.str());
  }
  if constexpr (std::endian::native == std::endian::little) {
    if (img.bit_depth == 16) png_set_swap(png);  // PNG stores 16-bit big-endian
  }

  const std::size_t stride = static_cast<std::size_t>(img.width) * (img.bit_depth / 8);
  raw.resize(stride * img.height);
  row_ptrs.resize(img.height);
  for (int y = 0; y < img.height; ++y) row_ptrs[y] = raw.data() + stride * y;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  if (img.bit_depth == 16) {
    std::memcpy(img.pixels.data(), raw.data(), raw.size());
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = raw[i];
  }
  return img;
}

std::vector<std::uint8_t> encode_gray_png(int width, int height, int bit_depth,
                                          const std::uint8_t* rows_host_order) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, plk_png_error, plk_png_warn);
  if (!png) throw FormatError("PNG encoder initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("PNG encoder initialization failed");
  }

  std::vector<std::uint8_t> out;
  std::vector<png_bytep> row_ptrs(height);
  const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
  for (int y = 0; y < height; ++y)
    row_ptrs[y] = const_cast<png_bytep>(rows_host_order + stride * y);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("PNG encoding failed");
  }

  png_set_write_fn(png, &out, plk_png_write, plk_png_flush);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if constexpr (std::endian::native == std::endian::little) {
    if (bit_depth == 16) png_set_swap(png);
  }
  png_write_image(png, row_ptrs.data());
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

// ---- calibration -----------------------------------------------------------

CalibrationFile parse_calib_file(const std::string& text) {
  CalibrationFile calib;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    const auto tokens = tokenize(line.substr(colon + 1));
    if (tokens.size() != 12) continue;  // R0_rect and friends have other arities
    std::array<double, 12> values{};
    for (std::size_t i = 0; i < 12; ++i)
      values[i] = parse_double(tokens[i], "calibration", line_no);
    calib.matrices[key] = values;
  }
  return calib;
}

CameraIntrinsics parse_calib(const std::string& text, int width, int height,
                             std::vector<std::string>* warnings) {
  const CalibrationFile calib = parse_calib_file(text);
  const auto it = calib.matrices.find("P2");
  if (it == calib.matrices.end())
    throw FormatError("calibration: missing P2 projection matrix");
  const auto& p2 = it->second;
  const double fu = p2[0];
  const double fv = p2[5];
  if (!(fu > 0.0)) throw FormatError("calibration: P2[0][0] must be positive");
  if (warnings && std::abs(fu - fv) / fu > 1e-3) {
    std::ostringstream msg;
    msg << "calibration: focal lengths differ (fu=" << fu << ", fv=" << fv
        << "); using fu as the single focal length";
    warnings->push_back(msg.str());
  }
  CameraIntrinsics k;
  k.f = fu;
  k.cu = p2[2];
  k.cv = p2[6];
  k.width = width;
  k.height = height;
  return k;
}

// ---- labels ----------------------------------------------------------------

ParsedLabels parse_labels(const std::string& text) {
  ParsedLabels out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 15 && tokens.size() != 16) {
      std::ostringstream msg;
      msg << "label line " << line_no << ": expected 15 or 16 fields, got " << tokens.size();
      throw ParseError(msg.str());
    }
    GtObject obj;
    obj.class_name = tokens[0];
    obj.truncation = parse_double(tokens[1], "label", line_no);
    obj.occlusion = static_cast<int>(parse_double(tokens[2], "label", line_no));
    obj.alpha = parse_double(tokens[3], "label", line_no);
    obj.bbox = {parse_double(tokens[4], "label", line_no),
                parse_double(tokens[5], "label", line_no),
                parse_double(tokens[6], "label", line_no),
                parse_double(tokens[7], "label", line_no)};
    obj.h = parse_double(tokens[8], "label", line_no);
    obj.w = parse_double(tokens[9], "label", line_no);
    obj.l = parse_double(tokens[10], "label", line_no);
    obj.location = {parse_double(tokens[11], "label", line_no),
                    parse_double(tokens[12], "label", line_no),
                    parse_double(tokens[13], "label", line_no)};
    obj.rotation_y = parse_double(tokens[14], "label", line_no);
    if (tokens.size() == 16) {
      Detection det;
      det.box = std::move(obj);
      det.score = parse_double(tokens[15], "label", line_no);
      out.dets.push_back(std::move(det));
    } else {
      out.gts.push_back(std::move(obj));
    }
  }
  return out;
}

namespace {

std::string format_label_fields(const GtObject& gt) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s %.6f %d %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f",
                gt.class_name.c_str(), gt.truncation, gt.occlusion, gt.alpha, gt.bbox.left,
                gt.bbox.top, gt.bbox.right, gt.bbox.bottom, gt.h, gt.w, gt.l, gt.location.x,
                gt.location.y, gt.location.z, gt.rotation_y);
  return buf;
}

}  // namespace

std::string serialize_label(const GtObject& gt) { return format_label_fields(gt); }

std::string serialize_label(const Detection& det) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), " %.6f", det.score);
  return format_label_fields(det.box) + buf;
}

std::string serialize_labels(const ParsedLabels& labels) {
  std::ostringstream out;
  for (const auto& gt : labels.gts) out << serialize_label(gt) << '\n';
  for (const auto& det : labels.dets) out << serialize_label(det) << '\n';
  return out.str();
}

// ---- depth images ----------------------------------------------------------

DepthMap read_depth_image(const std::vector<std::uint8_t>& png_bytes) {
  const GrayImage img = decode_gray_png(png_bytes);
  if (img.bit_depth != 16) {
    std::ostringstream msg;
    msg << "depth image: expected 16-bit grayscale, got " << img.bit_depth << "-bit";
    throw FormatError(msg.str());
  }
  DepthMap d;
  d.width = img.width;
  d.height = img.height;
  d.values.resize(img.pixels.size());
  d.valid.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    d.valid[i] = img.pixels[i] != 0;
    d.values[i] = static_cast<float>(img.pixels[i] / 256.0);
  }
  return d;
}

std::vector<std::uint8_t> write_depth_image(const DepthMap& d) {
  std::vector<std::uint16_t> raw(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!d.valid[i]) {
      raw[i] = 0;
      continue;
    }
    const long q = std::lround(static_cast<double>(d.values[i]) * 256.0);
    raw[i] = static_cast<std::uint16_t>(std::clamp(q, 1L, 65535L));
  }
  return encode_gray_png(d.width, d.height, 16,
                         reinterpret_cast<const std::uint8_t*>(raw.data()));
}

std::vector<std::uint8_t> write_mask_image(const SampleMask& mask) {
  std::vector<std::uint8_t> raw(mask.selected.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mask.selected[i] ? 255 : 0;
  return encode_gray_png(mask.width, mask.height, 8, raw.data());
}

SampleMask read_mask_image(const std::vector<std::uint8_t>& png_bytes) {
  const GrayImage img = decode_gray_png(png_bytes);
  if (img.bit_depth != 8) {
    std::ostringstream msg;
    msg << "mask image: expected 8-bit grayscale, got " << img.bit_depth << "-bit";
    throw FormatError(msg.str());
  }
  SampleMask mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.selected.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    mask.selected[i] = img.pixels[i] >= 128 ? 1 : 0;
  return mask;
}

// ---- point clouds ----------------------------------------------------------

std::vector<std::uint8_t> write_pointcloud(const PointCloud& cloud) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(cloud.points.size() * 16);
  auto put = [&bytes](float f) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    bytes.push_back(static_cast<std::uint8_t>(u));
    bytes.push_back(static_cast<std::uint8_t>(u >> 8));
    bytes.push_back(static_cast<std::uint8_t>(u >> 16));
    bytes.push_back(static_cast<std::uint8_t>(u >> 24));
  };
  for (const auto& p : cloud.points) {
    put(p.x);
    put(p.y);
    put(p.z);
    put(p.intensity);
  }
  return bytes;
}

PointCloud read_pointcloud(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 16 != 0) {
    std::ostringstream msg;
    msg << "point cloud: byte length " << bytes.size()
        << " is not a multiple of 16 (truncated record)";
    throw FormatError(msg.str());
  }
  PointCloud cloud;
  cloud.points.resize(bytes.size() / 16);
  auto get = [&bytes](std::size_t off) {
    const std::uint32_t u = static_cast<std::uint32_t>(bytes[off]) |
                            (static_cast<std::uint32_t>(bytes[off + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[off + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[off + 3]) << 24);
    return std::bit_cast<float>(u);
  };
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    cloud.points[i] = {get(i * 16), get(i * 16 + 4), get(i * 16 + 8), get(i * 16 + 12)};
  }
  return cloud;
}

// ---- splits ----------------------------------------------------------------

SplitList parse_split(const std::string& text) {
  SplitList list;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    if (line.empty()) continue;
    if (!seen.insert(line).second)
      throw ValidationError("split list: duplicate frame id '" + line + "'");
    list.push_back(line);
  }
  return list;
}

// ---- rigid transforms ------------------------------------------------------

RigidTransform RigidTransform::from_calib(const CalibrationFile& calib, const std::string& key) {
  const auto it = calib.matrices.find(key);
  if (it == calib.matrices.end()) throw FormatError("calibration: missing matrix " + key);
  const auto& m = it->second;
  RigidTransform tf;
  tf.r = {m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]};
  tf.t = {m[3], m[7], m[11]};
  return tf;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  // Rotation transpose; translation -R^T t.
  inv.r = {r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8]};
  for (int i = 0; i < 3; ++i)
    inv.t[i] = -(inv.r[i * 3] * t[0] + inv.r[i * 3 + 1] * t[1] + inv.r[i * 3 + 2] * t[2]);
  return inv;
}

Point3 RigidTransform::apply(const Point3& p) const {
  return {r[0] * p.x + r[1] * p.y + r[2] * p.z + t[0],
          r[3] * p.x + r[4] * p.y + r[5] * p.z + t[1],
          r[6] * p.x + r[7] * p.y + r[8] * p.z + t[2]};
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& tf) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    const Point3 q = tf.apply({p.x, p.y, p.z});
    out.points.push_back({static_cast<float>(q.x), static_cast<float>(q.y),
                          static_cast<float>(q.z), p.intensity});
  }
  return out;
}

// ---- files -----------------------------------------------------------------

std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << text;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace plk
