#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rvqmotion/codec/model.h"
#include "rvqmotion/common/random.h"
#include "rvqmotion/motion/dataset.h"
#include "rvqmotion/nn/adam.h"

namespace rvqmotion {

// Equal-length raw feature windows with integer style labels.
struct Batch {
  std::vector<FeatureMatrix> features;
  std::vector<int> labels;

  size_t size() const {
    return features.size();
  }
};

// Label-stratified sampling: picks up to batch_size / 2 distinct labels and
// fills the batch round-robin so every sampled label appears at least twice.
Batch sample_batch(const LabeledDataset& data, int batch_size, Rng& rng);

// Frozen code choices per batch item and layer (see residual_encode_with_indices).
using FrozenAssignments = std::vector<std::vector<std::vector<int>>>;

struct GradientResult {
  std::map<std::string, double> losses;  // rec fk vel acc commit con mi total
  nn::Gradients network;
  std::vector<Eigen::MatrixXd> codebooks;
  std::vector<QuantizationTrace> traces;
};

struct GradientOptions {
  const FrozenAssignments* frozen = nullptr;
  std::optional<LossCoefficients> coefficients;  // overrides the config's
};

// Loss values and gradients of the weighted total for one batch decoded from
// `active_layers` books. Does not modify the model.
GradientResult compute_gradients(const CodecModel& model,
                                 const Batch& batch,
                                 int active_layers,
                                 const GradientOptions& options = {});

// Optimizer and random state owned by the training driver.
struct TrainingState {
  nn::Adam optimizer;
  Rng rng;
};

TrainingState make_training_state(const CodecModel& model);

struct StepReport {
  int64_t step = 0;
  int active_layers = 0;
  std::map<std::string, double> losses;
  double grad_norm = 0.0;                  // before clipping
  std::vector<int> codes_used;             // distinct codes hit per book this step
  std::vector<std::vector<int>> codes_reset;

  nlohmann::json to_json() const;
};

// Called with "grad", "ema" and "reset" as the step passes each phase.
using PhaseHook = std::function<void(std::string_view)>;

// Replaces every codebook with X - 1 residuals of this batch at that layer
// plus the pinned zero code.
void seed_codebooks(CodecModel& model, const Batch& batch, Rng& rng);

// One optimization step: sample n, forward, losses, straight-through
// backward, global-norm clip, Adam on network and codebooks, then EMA on the
// used books, then the periodic dead-code reset. Non-finite losses raise
// NumericError naming the term.
StepReport train_step(CodecModel& model, TrainingState& state, const Batch& batch, const PhaseHook& hook = {});

// Samples a stratified batch from `data` with the state's generator first.
StepReport train_step(CodecModel& model, TrainingState& state, const LabeledDataset& data, const PhaseHook& hook = {});

// Continues training on `data` with a fresh optimizer state.
CodecModel fine_tune(const CodecModel& pretrained, const LabeledDataset& data, int steps, uint64_t seed);

} // namespace rvqmotion
