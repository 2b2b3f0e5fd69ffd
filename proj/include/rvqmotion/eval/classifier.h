#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/motion/clip.h"
#include "rvqmotion/motion/dataset.h"
#include "rvqmotion/nn/layers.h"

namespace rvqmotion {

struct ClassifierConfig {
  int steps = 400;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double holdout_fraction = 0.25;  // share of source clips per label held out
  uint64_t seed = 0;
};

// Sequence classifier over feature windows: four stride-2 convolutions
// (64, 128, 256, 256 channels), three stride-2 transposed convolutions
// (128, 64, 32), temporal mean pooling and a linear layer. Inputs are
// cropped to a multiple of 16 frames.
struct StyleClassifier {
  std::vector<std::string> alphabet;
  Skeleton skeleton;
  Normalizer normalizer;
  nn::ParameterStore params;
  std::shared_ptr<const nn::Sequential> network;
  double heldout_accuracy = 0.0;  // percent; NaN when nothing was held out
  int heldout_count = 0;

  static constexpr int kFrameMultiple = 16;

  int label_count() const {
    return static_cast<int>(alphabet.size());
  }

  Eigen::VectorXd logits(const FeatureMatrix& features) const;
  // Softmax over the alphabet.
  Eigen::VectorXd probabilities(const FeatureMatrix& features) const;
  Eigen::VectorXd probabilities(const MotionClip& clip) const;
  int predict(const MotionClip& clip) const;
};

// Registers the classifier layers for `feature_dim` inputs and `labels`
// outputs.
void build_classifier_network(StyleClassifier& classifier, int feature_dim);

// Trains on `data` with whole source clips (dataset groups) held out per
// label for the reported accuracy. Deterministic in config.seed. Fewer than
// two labels raise ConfigError.
StyleClassifier train_classifier(const LabeledDataset& data, const ClassifierConfig& config);

// Top-1 accuracy (percent) on a labeled dataset using its alphabet indices.
double classifier_accuracy(const StyleClassifier& classifier, const LabeledDataset& data);

// Predicted label index for each window of `clip` (window_len frames apart
// by `stride`).
std::vector<int> window_predictions(const StyleClassifier& classifier, const MotionClip& clip, int window_len, int stride);

void save_classifier(const StyleClassifier& classifier, const std::filesystem::path& path);
StyleClassifier load_classifier(const std::filesystem::path& path);

} // namespace rvqmotion
