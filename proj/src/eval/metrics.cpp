#include "rvqmotion/eval/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rvqmotion/codec/losses.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/common/log.h"
#include "rvqmotion/disentangle/contrastive.h"
#include "rvqmotion/inference/operations.h"
#include "rvqmotion/motion/kinematics.h"

namespace rvqmotion {

namespace {

int rank_of(const Eigen::VectorXd& p, int target) {
  int rank = 0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (p[j] > p[target] || (p[j] == p[target] && j < target)) {
      ++rank;
    }
  }
  return rank;
}

void check_targets(const std::vector<Eigen::VectorXd>& probabilities, const std::vector<int>& targets) {
  if (probabilities.empty()) {
    throw NumericError("metric is undefined on an empty set");
  }
  if (probabilities.size() != targets.size()) {
    throw StructuralError("one target per prediction required");
  }
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= probabilities[i].size()) {
      throw ConfigError("target label index " + std::to_string(targets[i]) + " is outside the alphabet");
    }
  }
}

std::vector<int> to_indices(const StyleClassifier& classifier, const std::vector<std::string>& labels) {
  std::vector<int> out;
  for (const auto& l : labels) {
    auto it = std::find(classifier.alphabet.begin(), classifier.alphabet.end(), l);
    if (it == classifier.alphabet.end()) {
      throw ConfigError("label '" + l + "' is not in the classifier alphabet");
    }
    out.push_back(static_cast<int>(it - classifier.alphabet.begin()));
  }
  return out;
}

std::vector<Eigen::VectorXd> predict_all(const StyleClassifier& classifier, const std::vector<MotionClip>& clips) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(clips.size());
  for (const auto& c : clips) {
    out.push_back(classifier.probabilities(c));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace

double top_k_accuracy(const std::vector<Eigen::VectorXd>& probabilities, const std::vector<int>& targets, int k) {
  check_targets(probabilities, targets);
  if (k < 1) {
    throw ConfigError("k must be at least 1");
  }
  int hits = 0;
  for (size_t i = 0; i < targets.size(); ++i) {
    hits += rank_of(probabilities[i], targets[i]) < k ? 1 : 0;
  }
  return 100.0 * hits / static_cast<double>(targets.size());
}

StyleAccuracy style_accuracy(const StyleClassifier& classifier,
                             const std::vector<MotionClip>& generated,
                             const std::vector<std::string>& target_labels,
                             int k) {
  if (generated.empty()) {
    throw NumericError("style accuracy is undefined for an empty clip list");
  }
  if (generated.size() != target_labels.size()) {
    throw StructuralError("one target label per generated clip required");
  }
  const std::vector<int> targets = to_indices(classifier, target_labels);
  const auto probs = predict_all(classifier, generated);
  return {top_k_accuracy(probs, targets, 1), top_k_accuracy(probs, targets, k), k};
}

double cross_classification_rate(const std::vector<Eigen::VectorXd>& probabilities,
                                 const std::vector<int>& content_targets) {
  return top_k_accuracy(probabilities, content_targets, 1);
}

double cross_classification(const StyleClassifier& classifier,
                            const std::vector<MotionClip>& generated,
                            const std::vector<std::string>& content_labels) {
  if (generated.size() != content_labels.size()) {
    throw StructuralError("one content label per generated clip required");
  }
  const std::vector<int> targets = to_indices(classifier, content_labels);
  return cross_classification_rate(predict_all(classifier, generated), targets);
}

double trajectory_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0) {
    throw StructuralError("trajectories must be non-empty and share a shape");
  }
  return (a - b).rowwise().norm().mean();
}

double content_deviation(const MotionClip& generated, const MotionClip& content) {
  Eigen::MatrixXd a = root_trajectory(generated);
  Eigen::MatrixXd b = root_trajectory(content);
  if (a.rows() != b.rows()) {
    std::ostringstream msg;
    msg << "content deviation: clip lengths differ (" << a.rows() << " vs " << b.rows()
        << "); truncating to the shorter";
    warn(msg.str());
    const Eigen::Index t = std::min(a.rows(), b.rows());
    a.conservativeResize(t, Eigen::NoChange);
    b.conservativeResize(t, Eigen::NoChange);
  }
  return trajectory_deviation(a, b);
}

double l2p_error(const Skeleton& skeleton, const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0) {
    throw StructuralError("L2P inputs must be non-empty and share a shape");
  }
  const Eigen::MatrixXd pa = fk_positions(skeleton, a);
  const Eigen::MatrixXd pb = fk_positions(skeleton, b);
  const int j = skeleton.joint_count();
  double sum = 0.0;
  for (Eigen::Index t = 0; t < pa.rows(); ++t) {
    for (int k = 0; k < j; ++k) {
      sum += (pa.block<1, 3>(t, 3 * k) - pb.block<1, 3>(t, 3 * k)).norm();
    }
  }
  return sum / static_cast<double>(pa.rows() * j);
}

double reconstruction_l2p(const CodecModel& model, const std::vector<MotionClip>& clips, int n_books) {
  if (clips.empty()) {
    throw NumericError("reconstruction error is undefined for an empty clip list");
  }
  double sum = 0.0;
  for (const auto& clip : clips) {
    const FeatureMatrix target = assemble_features(clip);
    sum += l2p_error(model.skeleton, target, assemble_features(reconstruct(model, clip, n_books)));
  }
  return sum / static_cast<double>(clips.size());
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) {
    throw NumericError("mean of an empty set is undefined");
  }
  MeanStd out;
  for (double v : values) {
    out.mean += v;
  }
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) {
    ss += (v - out.mean) * (v - out.mean);
  }
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

PerStyleReport per_style_report(const std::map<std::string, std::vector<double>>& deviations_by_label) {
  PerStyleReport out;
  double total = 0.0;
  size_t count = 0;
  for (const auto& [label, values] : deviations_by_label) {
    if (values.empty()) {
      throw ConfigError("no samples for style '" + label + "'");
    }
    PerStyleRow row;
    row.label = label;
    row.count = static_cast<int>(values.size());
    for (double v : values) {
      row.mean += v;
      total += v;
    }
    row.mean /= static_cast<double>(values.size());
    count += values.size();
    out.rows.push_back(row);
  }
  if (count == 0) {
    throw NumericError("per-style report needs at least one sample");
  }
  out.subset_mean = total / static_cast<double>(count);
  for (auto& row : out.rows) {
    row.above_subset_mean = row.mean > out.subset_mean;
    out.above_count += row.above_subset_mean ? 1 : 0;
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) { return a.mean > b.mean; });
  return out;
}

nlohmann::json to_json(const PerStyleReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"label", r.label}, {"mean", r.mean}, {"count", r.count}, {"above_subset_mean", r.above_subset_mean}});
  }
  return {{"rows", rows}, {"subset_mean", report.subset_mean}, {"above_count", report.above_count}};
}

nlohmann::json EvalReport::to_json() const {
  return {{"split", split},
          {"seed", seed},
          {"pairs", pairs},
          {"k", k},
          {"style_acc_top1", style_acc_top1},
          {"style_acc_topk", style_acc_topk},
          {"content_dev", {{"mean", content_dev.mean}, {"std", content_dev.std}}},
          {"reconstruction_dev", {{"mean", reconstruction_dev.mean}, {"std", reconstruction_dev.std}}},
          {"cross_cls", cross_cls},
          {"rec_err_l2p", rec_err_l2p},
          {"per_style", rvqmotion::to_json(per_style)}};
}

std::vector<EmbeddingRow> embedding_rows(const CodecModel& model, const std::vector<MotionClip>& clips) {
  std::vector<EmbeddingRow> rows;
  for (const auto& clip : clips) {
    const QuantizationTrace t = encode_trace(model, assemble_features(clip));
    for (int layer = 0; layer <= t.layers(); ++layer) {
      rows.push_back({layer, clip.style_label.value_or(""), pool_residual(t, layer)});
    }
  }
  return rows;
}

void export_embeddings(const CodecModel& model, const std::vector<MotionClip>& clips, const std::filesystem::path& path) {
  const auto rows = embedding_rows(model, clips);
  for (const auto& r : rows) {
    if (r.label.find_first_of(",\n\"") != std::string::npos) {
      throw ConfigError("style label '" + r.label + "' cannot be written to CSV unquoted");
    }
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "layer,label";
  for (int k = 0; k < model.stack.dim(); ++k) {
    out << ",dim_" << k;
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r.layer << ',' << r.label;
    for (Eigen::Index k = 0; k < r.vector.size(); ++k) {
      out << ',' << format_double(r.vector[k]);
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::vector<EmbeddingRow> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("layer,label", 0) != 0) {
    throw ParseError(path.string() + ": missing 'layer,label,dim_*' header");
  }
  const auto dims = std::count(line.begin(), line.end(), ',') - 1;
  std::vector<EmbeddingRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
      fields.emplace_back();
    }
    if (static_cast<long>(fields.size()) != dims + 2) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + " has the wrong field count");
    }
    EmbeddingRow row;
    auto parse = [&](const std::string& s, auto& value) {
      auto res = std::from_chars(s.data(), s.data() + s.size(), value);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError(path.string() + ": bad number '" + s + "' on line " + std::to_string(line_no));
      }
    };
    parse(fields[0], row.layer);
    row.label = fields[1];
    row.vector.resize(dims);
    for (long k = 0; k < dims; ++k) {
      parse(fields[k + 2], row.vector[k]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace rvqmotion
