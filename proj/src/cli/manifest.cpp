#include "rvqmotion/cli/manifest.h"

#include <fstream>

#include <json.hpp>

#include "rvqmotion/common/errors.h"
#include "rvqmotion/motion/mqm_io.h"

namespace rvqmotion {

std::vector<ManifestEntry> Manifest::entries(const std::string& split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : clips) {
    if (e.split == split) {
      out.push_back(e);
    }
  }
  return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest " + path.string());
  }
  Manifest m;
  m.directory = path.parent_path();
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    m.seed = j.at("seed").get<uint64_t>();
    m.fps = j.at("fps").get<double>();
    m.frames = j.at("frames").get<int>();
    for (const auto& c : j.at("clips")) {
      m.clips.push_back({c.at("file").get<std::string>(), c.at("content").get<int>(), c.at("style").get<int>(),
                         c.at("label").get<std::string>(), c.at("split").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

std::vector<MotionClip> load_split(const Manifest& manifest, const std::string& split) {
  const auto entries = manifest.entries(split);
  if (entries.empty()) {
    throw ConfigError("manifest has no clips in split '" + split + "'");
  }
  std::vector<MotionClip> clips;
  for (const auto& e : entries) {
    MotionClip clip = load_clip(manifest.directory / e.file);
    if (!clip.style_label) {
      clip.style_label = e.label;
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

LabeledDataset windowed_dataset(const std::vector<MotionClip>& clips,
                                int window_len,
                                int stride,
                                int downsample_factor,
                                std::vector<std::string> alphabet) {
  std::vector<MotionClip> windows;
  std::vector<int> groups;
  for (size_t i = 0; i < clips.size(); ++i) {
    auto w = window_dataset({clips[i]}, window_len, stride, downsample_factor);
    groups.insert(groups.end(), w.size(), static_cast<int>(i));
    for (auto& c : w) {
      windows.push_back(std::move(c));
    }
  }
  if (windows.empty()) {
    throw ConfigError("no clip is long enough for windows of " + std::to_string(window_len) + " frames");
  }
  return make_labeled_dataset(windows, std::move(alphabet), groups);
}

} // namespace rvqmotion
