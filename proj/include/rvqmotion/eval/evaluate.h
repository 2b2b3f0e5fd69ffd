#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rvqmotion/codec/model.h"
#include "rvqmotion/eval/classifier.h"
#include "rvqmotion/eval/metrics.h"

namespace rvqmotion {

struct TransferEvalPlan {
  std::vector<MotionClip> contents;  // labeled clips
  std::vector<MotionClip> styles;    // labeled clips
  int pairs_per_content = 1;
  int k = 1;
  int s = 1;
  uint64_t seed = 0;
  std::string split = "test";
};

// Pairs every content clip with style clips of a different label (drawn
// with the plan's seed), transfers by code swapping and measures style
// accuracy, cross-classification, D_C of the transfers and of plain
// reconstructions, per-style deviations and the N-book L2P of the contents.
EvalReport evaluate_transfer(const CodecModel& model, const StyleClassifier& classifier, const TransferEvalPlan& plan);

// Normalized histogram of the code indices chosen by `book` (X entries).
Eigen::VectorXd code_histogram(const CodecModel& model, const MotionClip& clip, int book);

struct ProbeResult {
  double accuracy = 0.0;  // percent on the test clips
  double chance = 0.0;    // percent, 100 / number of labels
};

// Multinomial logistic regression from the code index of `book` at each
// latent slot to the clip's style label, trained on the slots of `train`
// and scored on the slots of `test`.
ProbeResult content_code_probe(const CodecModel& model,
                               const std::vector<MotionClip>& train,
                               const std::vector<MotionClip>& test,
                               int book = 0);

} // namespace rvqmotion
