#pragma once

#include <filesystem>
#include <optional>

#include "rvqmotion/common/tensor_file.h"

#include "rvqmotion/codec/model.h"
#include "rvqmotion/codec/trainer.h"

namespace rvqmotion {

// Checkpoints use the tensor container of common/tensor_file.h with magic
// "RVQMCKPT". The JSON header holds the config, skeleton, fps, step,
// flags and, when saved from a training driver, the generator state and
// optimizer step count. Tensor names: "param/<layer>.<weight|bias>",
// "norm/mean", "norm/scale", "book<i>/codes", "book<i>/ema_count",
// "book<i>/ema_sum", "book<i>/usage", and "adam/m/<k>", "adam/v/<k>".
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const CodecModel& model,
                     const std::filesystem::path& path,
                     const TrainingState* state = nullptr);

struct LoadedCheckpoint {
  CodecModel model;
  std::optional<TrainingState> state;
};

// ParseError on bad magic, truncation, malformed headers or a version
// mismatch; StructuralError when tensor shapes disagree with the embedded
// config.
LoadedCheckpoint read_checkpoint(const std::filesystem::path& path);

CodecModel load_checkpoint(const std::filesystem::path& path);

// Loads and checks the stored architecture against `expected` (latent size,
// book count, codes per book, conv width). Mismatches raise StructuralError.
CodecModel load_checkpoint_as(const std::filesystem::path& path, const CodecConfig& expected);

} // namespace rvqmotion
