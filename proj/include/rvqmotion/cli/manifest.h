#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rvqmotion/motion/clip.h"
#include "rvqmotion/motion/dataset.h"

namespace rvqmotion {

// Dataset manifest written by gen-synth (JSON):
//   {"version":1, "seed":.., "fps":.., "frames":..,
//    "splits": {"train":[labels], "test":[labels], "unseen":[labels]},
//    "clips":[{"file":"c0_s1_k3.mqm", "content":0, "style":1,
//              "label":"wide_legs", "split":"train"}, ...]}
// File paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string file;
  int content = 0;
  int style = 0;
  std::string label;
  std::string split;
};

struct Manifest {
  std::filesystem::path directory;
  uint64_t seed = 0;
  double fps = 30.0;
  int frames = 0;
  std::vector<ManifestEntry> clips;

  std::vector<ManifestEntry> entries(const std::string& split) const;
};

Manifest load_manifest(const std::filesystem::path& path);

// Loads the clips of one split; unknown splits or an empty selection raise
// ConfigError.
std::vector<MotionClip> load_split(const Manifest& manifest, const std::string& split);

// Windows of every clip with the source clip index as group.
LabeledDataset windowed_dataset(const std::vector<MotionClip>& clips,
                                int window_len,
                                int stride,
                                int downsample_factor,
                                std::vector<std::string> alphabet = {});

} // namespace rvqmotion
