#include "rvqmotion/codec/checkpoint.h"

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

using nlohmann::json;

constexpr FileMagic kMagic = {'R', 'V', 'Q', 'M', 'C', 'K', 'P', 'T'};

} // namespace

void save_checkpoint(const CodecModel& model, const std::filesystem::path& path, const TrainingState* state) {
  std::vector<NamedTensor> tensors;
  for (int i = 0; i < model.params.size(); ++i) {
    tensors.push_back({"param/" + model.params.name(i), model.params[i]});
  }
  tensors.push_back({"norm/mean", model.normalizer.mean});
  tensors.push_back({"norm/scale", model.normalizer.scale});
  for (int i = 0; i < model.stack.layers(); ++i) {
    const Codebook& b = model.stack.books[i];
    const std::string p = "book" + std::to_string(i) + "/";
    tensors.push_back({p + "codes", b.codes});
    tensors.push_back({p + "ema_count", b.ema_count});
    tensors.push_back({p + "ema_sum", b.ema_sum});
    Eigen::VectorXd usage(b.size());
    for (int c = 0; c < b.size(); ++c) {
      usage[c] = static_cast<double>(b.usage[c]);
    }
    tensors.push_back({p + "usage", usage});
  }

  json header;
  header["config"] = to_json(model.config);
  header["skeleton"]["parent_index"] = model.skeleton.parents;
  json offsets = json::array();
  for (const auto& o : model.skeleton.rest_offsets) {
    offsets.push_back({o.x(), o.y(), o.z()});
  }
  header["skeleton"]["rest_offset"] = offsets;
  header["fps"] = model.fps;
  header["step"] = model.step;
  header["codebooks_seeded"] = model.codebooks_seeded;
  header["gamma"] = model.stack.gamma;
  header["content_cutoff"] = model.stack.content_cutoff;
  if (state != nullptr) {
    const nn::Adam& opt = state->optimizer;
    header["training"] = {{"rng_state", rng_state(state->rng)},
                          {"adam_steps", opt.steps},
                          {"learning_rate", opt.learning_rate},
                          {"beta1", opt.beta1},
                          {"beta2", opt.beta2},
                          {"epsilon", opt.epsilon},
                          {"moments", opt.m.size()}};
    for (size_t k = 0; k < opt.m.size(); ++k) {
      tensors.push_back({"adam/m/" + std::to_string(k), opt.m[k]});
      tensors.push_back({"adam/v/" + std::to_string(k), opt.v[k]});
    }
  }
  write_tensor_file(path, kMagic, kCheckpointVersion, std::move(header), tensors);
}

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path) {
  const TensorFile file = read_tensor_file(path, kMagic, kCheckpointVersion);
  const json& header = file.header;

  LoadedCheckpoint loaded;
  CodecModel& model = loaded.model;
  try {
    model.config = config_from_json(header.at("config"));
    model.skeleton.parents = header.at("skeleton").at("parent_index").get<std::vector<int>>();
    for (const auto& o : header.at("skeleton").at("rest_offset")) {
      model.skeleton.rest_offsets.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
    }
    model.fps = header.at("fps").get<double>();
    model.step = header.at("step").get<int64_t>();
    model.codebooks_seeded = header.at("codebooks_seeded").get<bool>();
    model.stack.gamma = header.at("gamma").get<double>();
    model.stack.content_cutoff = header.at("content_cutoff").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint header: ") + e.what());
  }
  model.skeleton.validate();

  const int f = model.feature_dim();
  model.normalizer.mean = file.tensor("norm/mean", 1, f);
  model.normalizer.scale = file.tensor("norm/scale", 1, f);
  build_networks(model);
  for (int i = 0; i < model.params.size(); ++i) {
    const auto& p = model.params[i];
    model.params[i] = file.tensor("param/" + model.params.name(i), p.rows(), p.cols());
  }
  const int x = model.config.codes_per_book;
  const int d = model.config.latent_dim;
  for (int i = 0; i < model.config.n_books; ++i) {
    const std::string p = "book" + std::to_string(i) + "/";
    Codebook b;
    b.codes = file.tensor(p + "codes", x, d);
    b.ema_count = file.tensor(p + "ema_count", x, 1);
    b.ema_sum = file.tensor(p + "ema_sum", x, d);
    const Eigen::MatrixXd& usage = file.tensor(p + "usage", x, 1);
    b.usage.resize(x);
    for (int c = 0; c < x; ++c) {
      b.usage[c] = static_cast<int64_t>(usage(c, 0));
    }
    b.pinned_zero = true;
    model.stack.books.push_back(std::move(b));
  }
  model.stack.validate();

  if (header.contains("training")) {
    TrainingState state;
    try {
      const json& tj = header.at("training");
      set_rng_state(state.rng, tj.at("rng_state").get<std::string>());
      state.optimizer.steps = tj.at("adam_steps").get<int64_t>();
      state.optimizer.learning_rate = tj.at("learning_rate").get<double>();
      state.optimizer.beta1 = tj.at("beta1").get<double>();
      state.optimizer.beta2 = tj.at("beta2").get<double>();
      state.optimizer.epsilon = tj.at("epsilon").get<double>();
      const auto moments = tj.at("moments").get<size_t>();
      for (size_t k = 0; k < moments; ++k) {
        const std::string key = std::to_string(k);
        auto it = file.tensors.find("adam/m/" + key);
        if (it == file.tensors.end()) {
          throw ParseError("checkpoint optimizer moments are incomplete");
        }
        state.optimizer.m.push_back(it->second);
        state.optimizer.v.push_back(file.tensor("adam/v/" + key, it->second.rows(), it->second.cols()));
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed training state: ") + e.what());
    }
    loaded.state = std::move(state);
  }
  return loaded;
}

CodecModel load_checkpoint(const std::filesystem::path& path) {
  return read_checkpoint(path).model;
}

CodecModel load_checkpoint_as(const std::filesystem::path& path, const CodecConfig& expected) {
  CodecModel model = load_checkpoint(path);
  const CodecConfig& c = model.config;
  auto check = [](const char* what, int got, int want) {
    if (got != want) {
      throw StructuralError(std::string("checkpoint ") + what + " is " + std::to_string(got) + ", expected " +
                            std::to_string(want));
    }
  };
  check("codes_per_book", c.codes_per_book, expected.codes_per_book);
  check("n_books", c.n_books, expected.n_books);
  check("latent_dim", c.latent_dim, expected.latent_dim);
  check("conv_feature", c.conv_feature, expected.conv_feature);
  return model;
}

} // namespace rvqmotion
