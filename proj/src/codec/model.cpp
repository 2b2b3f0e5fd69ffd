#include "rvqmotion/codec/model.h"

#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

using nn::Conv1d;
using nn::ConvTranspose1d;
using nn::LeakyRelu;
using nn::ResidualBlock;

void check_frames(const CodecModel& model, const FeatureMatrix& features) {
  const int factor = model.config.downsample_factor;
  if (features.rows() == 0 || features.rows() % factor != 0) {
    throw StructuralError("frame count " + std::to_string(features.rows()) + " is not a positive multiple of " +
                          std::to_string(factor));
  }
  if (features.cols() != model.feature_dim()) {
    throw StructuralError("feature dimension " + std::to_string(features.cols()) + " does not match the model's " +
                          std::to_string(model.feature_dim()));
  }
}

} // namespace

void build_networks(CodecModel& model) {
  const int f = model.feature_dim();
  const int c = model.config.conv_feature;
  const int d = model.config.latent_dim;
  auto& p = model.params;

  auto enc = std::make_shared<nn::Sequential>();
  enc->append(std::make_shared<Conv1d>(p, "enc.down0", f, c, 4, 2, 1));
  enc->append(std::make_shared<LeakyRelu>());
  enc->append(std::make_shared<Conv1d>(p, "enc.down1", c, c, 4, 2, 1));
  enc->append(std::make_shared<LeakyRelu>());
  enc->append(std::make_shared<ResidualBlock>(p, "enc.res0", c));
  enc->append(std::make_shared<Conv1d>(p, "enc.proj", c, d, 1, 1, 0, nn::Padding::kReplicate, false));

  auto dec = std::make_shared<nn::Sequential>();
  dec->append(std::make_shared<Conv1d>(p, "dec.proj", d, c, 1, 1, 0));
  dec->append(std::make_shared<LeakyRelu>());
  dec->append(std::make_shared<ResidualBlock>(p, "dec.res0", c));
  dec->append(std::make_shared<ConvTranspose1d>(p, "dec.up0", c, c, 4, 2, 1));
  dec->append(std::make_shared<LeakyRelu>());
  dec->append(std::make_shared<ConvTranspose1d>(p, "dec.up1", c, c, 4, 2, 1));
  dec->append(std::make_shared<LeakyRelu>());
  dec->append(std::make_shared<Conv1d>(p, "dec.out", c, f, 3, 1, 1));

  model.encoder = std::move(enc);
  model.decoder = std::move(dec);
}

CodecModel create_model(const CodecConfig& config, const Skeleton& skeleton, const Normalizer& normalizer, double fps) {
  config.validate();
  skeleton.validate();
  CodecModel model;
  model.config = config;
  model.skeleton = skeleton;
  model.fps = fps;
  model.normalizer = normalizer;
  if (normalizer.dim() != model.feature_dim()) {
    throw StructuralError("normalizer dimension does not match the skeleton's feature dimension");
  }
  build_networks(model);

  Rng rng(config.seed);
  model.encoder->init(model.params, rng);
  model.decoder->init(model.params, rng);

  model.stack.gamma = config.gamma;
  model.stack.content_cutoff = config.content_cutoff;
  for (int i = 0; i < config.n_books; ++i) {
    Eigen::MatrixXd codes(config.codes_per_book, config.latent_dim);
    for (Eigen::Index r = 0; r < codes.rows(); ++r) {
      for (Eigen::Index k = 0; k < codes.cols(); ++k) {
        codes(r, k) = r == 0 ? 0.0 : standard_normal(rng);
      }
    }
    model.stack.books.push_back(Codebook::from_codes(std::move(codes), true));
  }
  model.stack.validate();
  return model;
}

Eigen::MatrixXd encode_normalized(const CodecModel& model, const FeatureMatrix& normalized, nn::Tape* tape) {
  check_frames(model, normalized);
  return model.encoder->forward(model.params, normalized.transpose(), tape).transpose();
}

FeatureMatrix decode_normalized(const CodecModel& model, const Eigen::MatrixXd& z_sum, nn::Tape* tape) {
  if (z_sum.rows() == 0 || z_sum.cols() != model.config.latent_dim) {
    throw StructuralError("decoder input must be K x " + std::to_string(model.config.latent_dim) + " with K >= 1");
  }
  return model.decoder->forward(model.params, z_sum.transpose(), tape).transpose();
}

Eigen::MatrixXd encode(const CodecModel& model, const FeatureMatrix& features) {
  check_frames(model, features);
  return encode_normalized(model, model.normalizer.normalize(features));
}

FeatureMatrix decode(const CodecModel& model, const Eigen::MatrixXd& z_sum) {
  return model.normalizer.denormalize(decode_normalized(model, z_sum));
}

QuantizationTrace encode_trace(const CodecModel& model, const FeatureMatrix& features, int n_layers) {
  const int n = n_layers < 0 ? model.stack.layers() : n_layers;
  return residual_encode(model.stack, encode(model, features), n);
}

FeatureMatrix reconstruct_features(const CodecModel& model, const FeatureMatrix& features, int n_layers) {
  const QuantizationTrace trace = encode_trace(model, features, n_layers);
  return decode(model, sum_codes(trace, 0, trace.active_layers));
}

} // namespace rvqmotion
