#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rvqmotion {

struct LossCoefficients {
  double rec = 1.0;
  double fk = 0.01;
  double vel = 0.1;
  double acc = 0.05;
  double commit = 0.05;
  double con = 0.005;
  double mi = 0.02;
};

struct CodecConfig {
  std::string profile = "100style";

  int latent_dim = 256;
  int conv_feature = 512;
  int n_books = 8;
  int codes_per_book = 512;
  int downsample_factor = 4;

  double learning_rate = 1e-4;
  double grad_clip = 1.0;
  LossCoefficients coefficients;

  // Per-group feature weights of the reconstruction loss.
  double root_velocity_weight = 2.0;
  double up_weight = 2.0;

  int content_cutoff = 1;
  bool contrastive_all_layers = false;
  double tau_con = 0.1;
  double tau_mi = 1.0;
  double gamma = 0.99;

  int reset_window = 64;
  int64_t reset_threshold = 1;

  int batch_size = 32;
  int window_len = 64;
  int window_stride = 16;
  uint64_t seed = 0;

  // Built-in presets: "100style", "aberman", "synthetic".
  static CodecConfig from_profile(std::string_view name);
  static std::vector<std::string> profile_names();

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

nlohmann::json to_json(const CodecConfig& config);

// Every key must be present (ConfigError naming a missing key) unless
// "profile" names a preset, in which case the remaining keys override it.
CodecConfig config_from_json(const nlohmann::json& j);

} // namespace rvqmotion
