#pragma once

#include <string>
#include <vector>

#include "rvqmotion/motion/clip.h"

namespace rvqmotion {

// Cuts every clip into fixed-length windows; windows inherit the clip's
// label. A clip shorter than `window_len` contributes nothing. The window
// length must be divisible by `downsample_factor` (ConfigError otherwise).
std::vector<MotionClip> window_dataset(const std::vector<MotionClip>& clips,
                                       int window_len,
                                       int stride,
                                       int downsample_factor = 1);

// floor((T - window_len) / stride) + 1 for T >= window_len, else 0.
int window_count(int frames, int window_len, int stride);

// Feature matrices with integer labels into a shared alphabet. `groups`
// identifies the source clip of each sample so splits can avoid leaking
// overlapping windows.
struct LabeledDataset {
  Skeleton skeleton;
  double fps = 30.0;
  std::vector<FeatureMatrix> features;
  std::vector<int> labels;
  std::vector<int> groups;
  std::vector<std::string> alphabet;

  size_t size() const {
    return features.size();
  }
};

// Builds a labeled dataset. With an empty `alphabet` the sorted set of
// labels present is used. Unlabeled clips or labels outside a given
// alphabet raise ConfigError.
LabeledDataset make_labeled_dataset(const std::vector<MotionClip>& clips,
                                    std::vector<std::string> alphabet = {},
                                    const std::vector<int>& groups = {});

int label_index(const std::vector<std::string>& alphabet, const std::string& label);

} // namespace rvqmotion
