#include "rvqmotion/motion/dataset.h"

#include <algorithm>
#include <set>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

int window_count(int frames, int window_len, int stride) {
  if (window_len <= 0 || stride <= 0) {
    throw ConfigError("window length and stride must be positive");
  }
  if (frames < window_len) {
    return 0;
  }
  return (frames - window_len) / stride + 1;
}

std::vector<MotionClip> window_dataset(const std::vector<MotionClip>& clips,
                                       int window_len,
                                       int stride,
                                       int downsample_factor) {
  if (downsample_factor <= 0 || window_len % downsample_factor != 0) {
    throw ConfigError("window length " + std::to_string(window_len) + " is not divisible by downsample factor " +
                      std::to_string(downsample_factor));
  }
  std::vector<MotionClip> out;
  for (const auto& clip : clips) {
    const int n = window_count(clip.frame_count(), window_len, stride);
    for (int w = 0; w < n; ++w) {
      MotionClip win;
      win.skeleton = clip.skeleton;
      win.fps = clip.fps;
      win.style_label = clip.style_label;
      const auto first = clip.frames.begin() + static_cast<std::ptrdiff_t>(w) * stride;
      win.frames.assign(first, first + window_len);
      out.push_back(std::move(win));
    }
  }
  return out;
}

int label_index(const std::vector<std::string>& alphabet, const std::string& label) {
  const auto it = std::find(alphabet.begin(), alphabet.end(), label);
  if (it == alphabet.end()) {
    throw ConfigError("label '" + label + "' is not in the label alphabet");
  }
  return static_cast<int>(it - alphabet.begin());
}

LabeledDataset make_labeled_dataset(const std::vector<MotionClip>& clips,
                                    std::vector<std::string> alphabet,
                                    const std::vector<int>& groups) {
  if (clips.empty()) {
    throw StructuralError("cannot build a dataset from zero clips");
  }
  if (!groups.empty() && groups.size() != clips.size()) {
    throw StructuralError("group ids must align with clips");
  }
  if (alphabet.empty()) {
    std::set<std::string> seen;
    for (const auto& c : clips) {
      if (!c.style_label) {
        throw ConfigError("clip without a style label in a labeled dataset");
      }
      seen.insert(*c.style_label);
    }
    alphabet.assign(seen.begin(), seen.end());
  }
  LabeledDataset ds;
  ds.skeleton = clips.front().skeleton;
  ds.fps = clips.front().fps;
  ds.alphabet = std::move(alphabet);
  for (size_t i = 0; i < clips.size(); ++i) {
    const auto& c = clips[i];
    if (!c.style_label) {
      throw ConfigError("clip without a style label in a labeled dataset");
    }
    if (c.skeleton.joint_count() != ds.skeleton.joint_count()) {
      throw StructuralError("clips in a dataset must share a skeleton");
    }
    ds.features.push_back(assemble_features(c));
    ds.labels.push_back(label_index(ds.alphabet, *c.style_label));
    ds.groups.push_back(groups.empty() ? static_cast<int>(i) : groups[i]);
  }
  return ds;
}

} // namespace rvqmotion
