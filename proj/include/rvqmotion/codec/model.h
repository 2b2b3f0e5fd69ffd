#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Core>

#include "rvqmotion/codec/config.h"
#include "rvqmotion/motion/clip.h"
#include "rvqmotion/nn/layers.h"
#include "rvqmotion/rvq/residual_quantizer.h"

namespace rvqmotion {

// Convolutional autoencoder around an RVQ stack. Features enter and leave
// in raw units; the model normalizes internally.
struct CodecModel {
  CodecConfig config;
  Skeleton skeleton;
  double fps = 30.0;
  Normalizer normalizer;
  nn::ParameterStore params;
  std::shared_ptr<const nn::Sequential> encoder;
  std::shared_ptr<const nn::Sequential> decoder;
  RvqStack stack;
  int64_t step = 0;
  bool codebooks_seeded = false;

  int feature_dim() const {
    return FeatureLayout(skeleton.joint_count()).dim();
  }
};

// Registers the encoder/decoder parameters for `config` and the feature
// dimension of `skeleton` without initializing them.
void build_networks(CodecModel& model);

// Fresh model with weights and provisional codebooks drawn from config.seed.
// Codebooks are re-seeded from the first training batch.
CodecModel create_model(const CodecConfig& config, const Skeleton& skeleton, const Normalizer& normalizer, double fps);

// Network-level passes on normalized features (T x F) and latents (K x d).
Eigen::MatrixXd encode_normalized(const CodecModel& model, const FeatureMatrix& normalized, nn::Tape* tape = nullptr);
FeatureMatrix decode_normalized(const CodecModel& model, const Eigen::MatrixXd& z_sum, nn::Tape* tape = nullptr);

// r0 = E(normalize(features)), K = T / downsample_factor. T must be a
// positive multiple of the factor (StructuralError otherwise).
Eigen::MatrixXd encode(const CodecModel& model, const FeatureMatrix& features);

// denormalize(D(z_sum)), T = K * downsample_factor.
FeatureMatrix decode(const CodecModel& model, const Eigen::MatrixXd& z_sum);

// Encodes and quantizes with `n_layers` books (all books when n_layers < 0).
QuantizationTrace encode_trace(const CodecModel& model, const FeatureMatrix& features, int n_layers = -1);

// Decodes the sum of the first `n_layers` codes.
FeatureMatrix reconstruct_features(const CodecModel& model, const FeatureMatrix& features, int n_layers = -1);

} // namespace rvqmotion
