#include "rvqmotion/eval/classifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "rvqmotion/common/errors.h"
#include "rvqmotion/common/random.h"
#include "rvqmotion/common/tensor_file.h"
#include "rvqmotion/nn/adam.h"

namespace rvqmotion {

namespace {

using nlohmann::json;

constexpr FileMagic kMagic = {'R', 'V', 'Q', 'M', 'C', 'L', 'S', 'F'};
constexpr uint32_t kVersion = 1;

FeatureMatrix crop(const FeatureMatrix& f) {
  const Eigen::Index usable = f.rows() - f.rows() % StyleClassifier::kFrameMultiple;
  if (usable == 0) {
    throw StructuralError("classifier input needs at least " + std::to_string(StyleClassifier::kFrameMultiple) +
                          " frames, got " + std::to_string(f.rows()));
  }
  return f.topRows(usable);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp().matrix();
  return p / p.sum();
}

} // namespace

void build_classifier_network(StyleClassifier& c, int feature_dim) {
  using namespace nn;
  auto& p = c.params;
  auto net = std::make_shared<Sequential>();
  const int widths[] = {feature_dim, 64, 128, 256, 256};
  for (int i = 0; i < 4; ++i) {
    net->append(std::make_shared<Conv1d>(p, "cls.conv" + std::to_string(i), widths[i], widths[i + 1], 4, 2, 1));
    net->append(std::make_shared<LeakyRelu>());
  }
  const int up[] = {256, 128, 64, 32};
  for (int i = 0; i < 3; ++i) {
    net->append(std::make_shared<ConvTranspose1d>(p, "cls.deconv" + std::to_string(i), up[i], up[i + 1], 4, 2, 1));
    net->append(std::make_shared<LeakyRelu>());
  }
  net->append(std::make_shared<TemporalMeanPool>());
  net->append(std::make_shared<Conv1d>(p, "cls.linear", 32, c.label_count(), 1, 1, 0));
  c.network = std::move(net);
}

Eigen::VectorXd StyleClassifier::logits(const FeatureMatrix& features) const {
  if (features.cols() != normalizer.dim()) {
    throw StructuralError("classifier expects " + std::to_string(normalizer.dim()) + " features per frame");
  }
  const FeatureMatrix x = normalizer.normalize(crop(features));
  return network->forward(params, x.transpose(), nullptr).col(0);
}

Eigen::VectorXd StyleClassifier::probabilities(const FeatureMatrix& features) const {
  return softmax(logits(features));
}

Eigen::VectorXd StyleClassifier::probabilities(const MotionClip& clip) const {
  return probabilities(assemble_features(clip));
}

int StyleClassifier::predict(const MotionClip& clip) const {
  Eigen::Index best = 0;
  probabilities(clip).maxCoeff(&best);
  return static_cast<int>(best);
}

StyleClassifier train_classifier(const LabeledDataset& data, const ClassifierConfig& config) {
  if (std::set<int>(data.labels.begin(), data.labels.end()).size() < 2) {
    throw ConfigError("classifier training needs at least two distinct labels");
  }
  if (config.steps < 0 || config.batch_size < 1 || !(config.learning_rate > 0.0) || config.holdout_fraction < 0.0 ||
      config.holdout_fraction >= 1.0) {
    throw ConfigError("invalid classifier training configuration");
  }
  Rng rng(config.seed);

  // Hold out whole source clips per label so overlapping windows never
  // straddle the split.
  std::map<int, std::vector<int>> groups_by_label;
  for (size_t i = 0; i < data.size(); ++i) {
    const int g = data.groups.empty() ? static_cast<int>(i) : data.groups[i];
    auto& v = groups_by_label[data.labels[i]];
    if (std::find(v.begin(), v.end(), g) == v.end()) {
      v.push_back(g);
    }
  }
  std::set<std::pair<int, int>> held;
  for (auto& [label, groups] : groups_by_label) {
    std::sort(groups.begin(), groups.end());
    for (size_t i = groups.size(); i > 1; --i) {
      std::swap(groups[i - 1], groups[uniform_int(rng, 0, static_cast<int64_t>(i) - 1)]);
    }
    const int n_hold = groups.size() < 2 ? 0 : std::max<int>(1, static_cast<int>(std::lround(config.holdout_fraction * groups.size())));
    for (int i = 0; i < n_hold && config.holdout_fraction > 0.0; ++i) {
      held.insert({label, groups[i]});
    }
  }
  std::vector<int> train_idx;
  std::vector<int> test_idx;
  for (size_t i = 0; i < data.size(); ++i) {
    const int g = data.groups.empty() ? static_cast<int>(i) : data.groups[i];
    (held.contains({data.labels[i], g}) ? test_idx : train_idx).push_back(static_cast<int>(i));
  }

  StyleClassifier c;
  c.alphabet = data.alphabet;
  c.skeleton = data.skeleton;
  {
    std::vector<FeatureMatrix> train_features;
    for (int i : train_idx) {
      train_features.push_back(data.features[i]);
    }
    c.normalizer = Normalizer::fit(train_features);
  }
  build_classifier_network(c, c.normalizer.dim());
  c.network->init(c.params, rng);

  nn::Adam opt;
  opt.learning_rate = config.learning_rate;
  std::vector<Eigen::MatrixXd*> params;
  for (int i = 0; i < c.params.size(); ++i) {
    params.push_back(&c.params[i]);
  }
  std::vector<FeatureMatrix> normalized(data.size());
  for (int i : train_idx) {
    normalized[i] = c.normalizer.normalize(crop(data.features[i])).transpose();
  }
  const double inv_b = 1.0 / config.batch_size;
  for (int step = 0; step < config.steps; ++step) {
    nn::Gradients grads = c.params.zeros_like();
    for (int b = 0; b < config.batch_size; ++b) {
      const int i = train_idx[uniform_int(rng, 0, static_cast<int64_t>(train_idx.size()) - 1)];
      nn::Tape tape;
      const Eigen::VectorXd z = c.network->forward(c.params, normalized[i], &tape).col(0);
      Eigen::VectorXd g = softmax(z);
      g[data.labels[i]] -= 1.0;
      c.network->backward(c.params, tape, g * inv_b, grads);
    }
    std::vector<const Eigen::MatrixXd*> gp;
    for (const auto& g : grads) {
      gp.push_back(&g);
    }
    opt.step(params, gp);
  }

  c.heldout_count = static_cast<int>(test_idx.size());
  if (test_idx.empty()) {
    c.heldout_accuracy = std::numeric_limits<double>::quiet_NaN();
  } else {
    int hits = 0;
    for (int i : test_idx) {
      Eigen::Index best = 0;
      c.logits(data.features[i]).maxCoeff(&best);
      hits += best == data.labels[i] ? 1 : 0;
    }
    c.heldout_accuracy = 100.0 * hits / static_cast<double>(test_idx.size());
  }
  return c;
}

double classifier_accuracy(const StyleClassifier& classifier, const LabeledDataset& data) {
  if (data.size() == 0) {
    throw NumericError("accuracy is undefined on an empty dataset");
  }
  int hits = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    Eigen::Index best = 0;
    classifier.logits(data.features[i]).maxCoeff(&best);
    const std::string& truth = data.alphabet.at(data.labels[i]);
    hits += classifier.alphabet.at(best) == truth ? 1 : 0;
  }
  return 100.0 * hits / static_cast<double>(data.size());
}

std::vector<int> window_predictions(const StyleClassifier& classifier, const MotionClip& clip, int window_len, int stride) {
  if (window_len < StyleClassifier::kFrameMultiple || stride < 1) {
    throw ConfigError("invalid classification window");
  }
  const FeatureMatrix f = assemble_features(clip);
  std::vector<int> out;
  for (Eigen::Index start = 0; start + window_len <= f.rows(); start += stride) {
    Eigen::Index best = 0;
    classifier.logits(f.middleRows(start, window_len)).maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

void save_classifier(const StyleClassifier& c, const std::filesystem::path& path) {
  std::vector<NamedTensor> tensors;
  for (int i = 0; i < c.params.size(); ++i) {
    tensors.push_back({"param/" + c.params.name(i), c.params[i]});
  }
  tensors.push_back({"norm/mean", c.normalizer.mean});
  tensors.push_back({"norm/scale", c.normalizer.scale});
  json header;
  header["alphabet"] = c.alphabet;
  header["skeleton"]["parent_index"] = c.skeleton.parents;
  json offsets = json::array();
  for (const auto& o : c.skeleton.rest_offsets) {
    offsets.push_back({o.x(), o.y(), o.z()});
  }
  header["skeleton"]["rest_offset"] = offsets;
  header["heldout_accuracy"] = std::isfinite(c.heldout_accuracy) ? json(c.heldout_accuracy) : json(nullptr);
  header["heldout_count"] = c.heldout_count;
  write_tensor_file(path, kMagic, kVersion, std::move(header), tensors);
}

StyleClassifier load_classifier(const std::filesystem::path& path) {
  const TensorFile file = read_tensor_file(path, kMagic, kVersion);
  StyleClassifier c;
  try {
    const json& h = file.header;
    c.alphabet = h.at("alphabet").get<std::vector<std::string>>();
    c.skeleton.parents = h.at("skeleton").at("parent_index").get<std::vector<int>>();
    for (const auto& o : h.at("skeleton").at("rest_offset")) {
      c.skeleton.rest_offsets.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
    }
    c.heldout_accuracy = h.at("heldout_accuracy").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                           : h.at("heldout_accuracy").get<double>();
    c.heldout_count = h.at("heldout_count").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed classifier header: ") + e.what());
  }
  if (c.alphabet.size() < 2) {
    throw ParseError("classifier alphabet needs at least two labels");
  }
  c.skeleton.validate();
  const int f = FeatureLayout(c.skeleton.joint_count()).dim();
  c.normalizer.mean = file.tensor("norm/mean", 1, f);
  c.normalizer.scale = file.tensor("norm/scale", 1, f);
  build_classifier_network(c, f);
  for (int i = 0; i < c.params.size(); ++i) {
    const auto& p = c.params[i];
    c.params[i] = file.tensor("param/" + c.params.name(i), p.rows(), p.cols());
  }
  return c;
}

} // namespace rvqmotion
