#include "rvqmotion/codec/config.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw ConfigError("invalid config: " + what);
  }
}

template <typename T>
void read_key(const json& j, const std::string& prefix, const char* key, T& out, bool required) {
  if (!j.contains(key)) {
    if (required) {
      throw ConfigError("missing config key '" + prefix + key + "'");
    }
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + prefix + key + "' has the wrong type");
  }
}

const std::set<std::string> kTopKeys = {
    "profile",        "latent_dim",           "conv_feature", "n_books",        "codes_per_book",
    "downsample_factor", "learning_rate",     "grad_clip",    "coefficients",   "root_velocity_weight",
    "up_weight",      "content_cutoff",       "contrastive_all_layers", "tau_con", "tau_mi",
    "gamma",          "reset_window",         "reset_threshold", "batch_size",  "window_len",
    "window_stride",  "seed"};

const std::set<std::string> kCoefficientKeys = {"rec", "fk", "vel", "acc", "commit", "con", "mi"};

} // namespace

std::vector<std::string> CodecConfig::profile_names() {
  return {"100style", "aberman", "synthetic"};
}

CodecConfig CodecConfig::from_profile(std::string_view name) {
  CodecConfig c;
  if (name == "100style") {
    return c;
  }
  if (name == "aberman") {
    c.profile = "aberman";
    c.n_books = 4;
    c.codes_per_book = 256;
    c.coefficients.con = 0.05;
    c.coefficients.mi = 0.12;
    return c;
  }
  if (name == "synthetic") {
    c.profile = "synthetic";
    c.latent_dim = 32;
    c.conv_feature = 64;
    c.n_books = 4;
    c.codes_per_book = 64;
    c.learning_rate = 1e-3;
    c.coefficients.con = 0.5;
    c.coefficients.mi = 0.5;
    c.tau_mi = 0.1;
    return c;
  }
  throw ConfigError("unknown profile '" + std::string(name) + "'");
}

void CodecConfig::validate() const {
  require(latent_dim >= 1, "latent_dim must be positive");
  require(conv_feature >= 1, "conv_feature must be positive");
  require(n_books >= 2, "n_books must be at least 2");
  require(codes_per_book >= 2, "codes_per_book must be at least 2");
  require(downsample_factor == 4, "downsample_factor must be 4 (two stride-2 stages)");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(grad_clip > 0.0, "grad_clip must be positive");
  const auto& k = coefficients;
  for (double v : {k.rec, k.fk, k.vel, k.acc, k.commit, k.con, k.mi}) {
    require(v >= 0.0 && std::isfinite(v), "loss coefficients must be non-negative");
  }
  require(root_velocity_weight > 0.0 && up_weight > 0.0, "feature weights must be positive");
  require(content_cutoff >= 1 && content_cutoff < n_books, "content_cutoff must satisfy 1 <= s < n_books");
  require(tau_con > 0.0, "tau_con must be positive");
  require(tau_mi > 0.0, "tau_mi must be positive");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(reset_window >= 1, "reset_window must be positive");
  require(reset_threshold >= 0, "reset_threshold must be non-negative");
  require(batch_size >= 2, "batch_size must be at least 2");
  require(window_len >= downsample_factor && window_len % downsample_factor == 0,
          "window_len must be a positive multiple of downsample_factor");
  require(window_stride >= 1, "window_stride must be positive");
}

json to_json(const CodecConfig& c) {
  const auto& k = c.coefficients;
  return json{
      {"profile", c.profile},
      {"latent_dim", c.latent_dim},
      {"conv_feature", c.conv_feature},
      {"n_books", c.n_books},
      {"codes_per_book", c.codes_per_book},
      {"downsample_factor", c.downsample_factor},
      {"learning_rate", c.learning_rate},
      {"grad_clip", c.grad_clip},
      {"coefficients",
       {{"rec", k.rec}, {"fk", k.fk}, {"vel", k.vel}, {"acc", k.acc}, {"commit", k.commit}, {"con", k.con}, {"mi", k.mi}}},
      {"root_velocity_weight", c.root_velocity_weight},
      {"up_weight", c.up_weight},
      {"content_cutoff", c.content_cutoff},
      {"contrastive_all_layers", c.contrastive_all_layers},
      {"tau_con", c.tau_con},
      {"tau_mi", c.tau_mi},
      {"gamma", c.gamma},
      {"reset_window", c.reset_window},
      {"reset_threshold", c.reset_threshold},
      {"batch_size", c.batch_size},
      {"window_len", c.window_len},
      {"window_stride", c.window_stride},
      {"seed", c.seed},
  };
}

CodecConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto& item : j.items()) {
    if (!kTopKeys.contains(item.key())) {
      throw ConfigError("unknown config key '" + item.key() + "'");
    }
  }
  // A preset profile supplies defaults; any other profile name is only a
  // label and every key must then be present.
  CodecConfig c;
  bool required = true;
  if (j.contains("profile")) {
    std::string name;
    read_key(j, "", "profile", name, true);
    const auto presets = CodecConfig::profile_names();
    if (std::find(presets.begin(), presets.end(), name) != presets.end()) {
      c = CodecConfig::from_profile(name);
      required = false;
    }
    c.profile = name;
  }
  read_key(j, "", "latent_dim", c.latent_dim, required);
  read_key(j, "", "conv_feature", c.conv_feature, required);
  read_key(j, "", "n_books", c.n_books, required);
  read_key(j, "", "codes_per_book", c.codes_per_book, required);
  read_key(j, "", "downsample_factor", c.downsample_factor, required);
  read_key(j, "", "learning_rate", c.learning_rate, required);
  read_key(j, "", "grad_clip", c.grad_clip, required);
  if (j.contains("coefficients")) {
    const json& cj = j.at("coefficients");
    if (!cj.is_object()) {
      throw ConfigError("config key 'coefficients' must be an object");
    }
    for (const auto& item : cj.items()) {
      if (!kCoefficientKeys.contains(item.key())) {
        throw ConfigError("unknown config key 'coefficients." + item.key() + "'");
      }
    }
    auto& k = c.coefficients;
    read_key(cj, "coefficients.", "rec", k.rec, required);
    read_key(cj, "coefficients.", "fk", k.fk, required);
    read_key(cj, "coefficients.", "vel", k.vel, required);
    read_key(cj, "coefficients.", "acc", k.acc, required);
    read_key(cj, "coefficients.", "commit", k.commit, required);
    read_key(cj, "coefficients.", "con", k.con, required);
    read_key(cj, "coefficients.", "mi", k.mi, required);
  } else if (required) {
    throw ConfigError("missing config key 'coefficients'");
  }
  read_key(j, "", "root_velocity_weight", c.root_velocity_weight, required);
  read_key(j, "", "up_weight", c.up_weight, required);
  read_key(j, "", "content_cutoff", c.content_cutoff, required);
  read_key(j, "", "contrastive_all_layers", c.contrastive_all_layers, required);
  read_key(j, "", "tau_con", c.tau_con, required);
  read_key(j, "", "tau_mi", c.tau_mi, required);
  read_key(j, "", "gamma", c.gamma, required);
  read_key(j, "", "reset_window", c.reset_window, required);
  read_key(j, "", "reset_threshold", c.reset_threshold, required);
  read_key(j, "", "batch_size", c.batch_size, required);
  read_key(j, "", "window_len", c.window_len, required);
  read_key(j, "", "window_stride", c.window_stride, required);
  read_key(j, "", "seed", c.seed, required);
  if (required) {
    c.profile = "custom";
  }
  c.validate();
  return c;
}

} // namespace rvqmotion
