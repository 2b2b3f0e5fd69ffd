#include "rvqmotion/motion/mqm_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

using nlohmann::json;

void append_double(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

ParseError parse_error(const std::string& where, const std::string& what) {
  return ParseError("MQM parse error at " + where + ": " + what);
}

} // namespace

void write_clip(std::ostream& out, const MotionClip& clip) {
  clip.validate();
  json header;
  header["version"] = kMqmVersion;
  header["fps"] = clip.fps;
  header["joint_count"] = clip.skeleton.joint_count();
  header["frame_count"] = clip.frame_count();
  header["parent_index"] = clip.skeleton.parents;
  json offsets = json::array();
  for (const auto& o : clip.skeleton.rest_offsets) {
    offsets.push_back({o.x(), o.y(), o.z()});
  }
  header["rest_offset"] = offsets;
  if (clip.style_label) {
    header["style_label"] = *clip.style_label;
  }
  out << header.dump() << '\n';

  const FeatureMatrix features = assemble_features(clip);
  std::string line;
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    line.clear();
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (c > 0) {
        line.push_back(',');
      }
      append_double(line, features(t, c));
    }
    line.push_back('\n');
    out << line;
  }
}

MotionClip read_clip(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw parse_error("header", "missing header line");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw parse_error("header", e.what());
  }
  Skeleton skeleton;
  double fps = 0;
  int joints = 0;
  int frames = -1;
  std::optional<std::string> label;
  try {
    if (header.at("version").get<int>() != kMqmVersion) {
      throw parse_error("header", "unsupported version " + header.at("version").dump());
    }
    fps = header.at("fps").get<double>();
    joints = header.at("joint_count").get<int>();
    skeleton.parents = header.at("parent_index").get<std::vector<int>>();
    for (const auto& o : header.at("rest_offset")) {
      if (o.size() != 3) {
        throw parse_error("header", "rest_offset entries must have 3 components");
      }
      skeleton.rest_offsets.emplace_back(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    }
    if (header.contains("frame_count")) {
      frames = header.at("frame_count").get<int>();
    }
    if (header.contains("style_label")) {
      label = header.at("style_label").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw parse_error("header", e.what());
  }
  if (!(fps > 0) || !std::isfinite(fps)) {
    throw parse_error("header", "fps must be positive and finite");
  }
  if (joints <= 0 || static_cast<int>(skeleton.parents.size()) != joints ||
      static_cast<int>(skeleton.rest_offsets.size()) != joints) {
    throw parse_error("header", "joint_count does not match parent_index/rest_offset");
  }
  try {
    skeleton.validate();
  } catch (const StructuralError& e) {
    throw parse_error("header", e.what());
  }

  const int dim = FeatureLayout(joints).dim();
  std::vector<double> values;
  std::vector<std::vector<double>> rows;
  int frame = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::string where = "frame " + std::to_string(frame);
    values.clear();
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = std::find(p, end, ',');
      double v = 0;
      const auto res = std::from_chars(p, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw parse_error(where, "invalid number in field " + std::to_string(values.size()));
      }
      if (!std::isfinite(v)) {
        throw parse_error(where, "non-finite value in field " + std::to_string(values.size()));
      }
      values.push_back(v);
      p = comma + 1;
    }
    if (static_cast<int>(values.size()) != dim) {
      throw parse_error(where, "expected " + std::to_string(dim) + " values, found " + std::to_string(values.size()));
    }
    rows.push_back(values);
    ++frame;
  }
  if (frames >= 0 && frame != frames) {
    throw parse_error("frame " + std::to_string(frame),
                      "file truncated: header declares " + std::to_string(frames) + " frames");
  }
  if (rows.empty()) {
    throw parse_error("frame 0", "no frame records");
  }
  FeatureMatrix features(static_cast<Eigen::Index>(rows.size()), dim);
  for (size_t t = 0; t < rows.size(); ++t) {
    features.row(static_cast<Eigen::Index>(t)) = Eigen::Map<const Eigen::RowVectorXd>(rows[t].data(), dim);
  }
  return disassemble_features(features, skeleton, fps, label);
}

void save_clip(const MotionClip& clip, const std::filesystem::path& path) {
  std::ostringstream buffer;
  write_clip(buffer, clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << buffer.str();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

MotionClip load_clip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return read_clip(in);
}

} // namespace rvqmotion
