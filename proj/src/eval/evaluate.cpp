#include "rvqmotion/eval/evaluate.h"

#include <algorithm>
#include <map>

#include "rvqmotion/common/errors.h"
#include "rvqmotion/common/random.h"
#include "rvqmotion/inference/operations.h"

namespace rvqmotion {

namespace {

std::string label_of(const MotionClip& c) {
  if (!c.style_label) {
    throw ConfigError("evaluation clips must carry style labels");
  }
  return *c.style_label;
}

} // namespace

EvalReport evaluate_transfer(const CodecModel& model, const StyleClassifier& classifier, const TransferEvalPlan& plan) {
  if (plan.contents.empty() || plan.styles.empty()) {
    throw ConfigError("evaluation needs content and style clips");
  }
  if (plan.pairs_per_content < 1) {
    throw ConfigError("pairs_per_content must be positive");
  }
  Rng rng(plan.seed);
  std::vector<MotionClip> generated;
  std::vector<std::string> targets;
  std::vector<std::string> content_labels;
  std::vector<double> deviations;
  std::vector<double> recon_deviations;
  std::map<std::string, std::vector<double>> by_style;

  for (const auto& content : plan.contents) {
    const std::string cl = label_of(content);
    std::vector<const MotionClip*> candidates;
    for (const auto& s : plan.styles) {
      if (label_of(s) != cl) {
        candidates.push_back(&s);
      }
    }
    if (candidates.empty()) {
      continue;
    }
    recon_deviations.push_back(content_deviation(reconstruct(model, content), content));
    for (int p = 0; p < plan.pairs_per_content; ++p) {
      const MotionClip& style = *candidates[uniform_int(rng, 0, static_cast<int64_t>(candidates.size()) - 1)];
      MotionClip out = code_swap_transfer(model, content, style, plan.s);
      const double dc = content_deviation(out, content);
      deviations.push_back(dc);
      by_style[label_of(style)].push_back(dc);
      targets.push_back(label_of(style));
      content_labels.push_back(cl);
      generated.push_back(std::move(out));
    }
  }
  if (generated.empty()) {
    throw ConfigError("no content/style pair with different labels");
  }

  EvalReport report;
  report.split = plan.split;
  report.seed = plan.seed;
  report.pairs = static_cast<int>(generated.size());
  report.k = plan.k;
  const StyleAccuracy acc = style_accuracy(classifier, generated, targets, plan.k);
  report.style_acc_top1 = acc.top1;
  report.style_acc_topk = acc.topk;
  report.cross_cls = cross_classification(classifier, generated, content_labels);
  report.content_dev = mean_std(deviations);
  report.reconstruction_dev = mean_std(recon_deviations);
  report.rec_err_l2p = reconstruction_l2p(model, plan.contents, model.stack.layers());
  report.per_style = per_style_report(by_style);
  return report;
}

Eigen::VectorXd code_histogram(const CodecModel& model, const MotionClip& clip, int book) {
  if (book < 0 || book >= model.stack.layers()) {
    throw ConfigError("codebook index out of range");
  }
  const QuantizationTrace t = encode_trace(model, assemble_features(clip), book + 1);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.stack.codes_per_book());
  for (int idx : t.index[book]) {
    h[idx] += 1.0;
  }
  return h / static_cast<double>(t.slots());
}

ProbeResult content_code_probe(const CodecModel& model,
                               const std::vector<MotionClip>& train,
                               const std::vector<MotionClip>& test,
                               int book) {
  if (train.empty() || test.empty()) {
    throw ConfigError("probe needs training and test clips");
  }
  std::vector<std::string> alphabet;
  for (const auto& c : train) {
    alphabet.push_back(label_of(c));
  }
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  if (alphabet.size() < 2) {
    throw ConfigError("probe needs at least two labels");
  }
  const int l = static_cast<int>(alphabet.size());
  const int x = model.stack.codes_per_book();
  if (book < 0 || book >= model.stack.layers()) {
    throw ConfigError("codebook index out of range");
  }
  // One sample per latent slot: the one-hot code index plus a bias. With
  // one-hot inputs the data reduce to per-code label counts.
  auto count = [&](const std::vector<MotionClip>& clips) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(x, l);
    for (const auto& c : clips) {
      const QuantizationTrace t = encode_trace(model, assemble_features(c), book + 1);
      const int y = label_index(alphabet, label_of(c));
      for (int idx : t.index[book]) {
        counts(idx, y) += 1.0;
      }
    }
    return counts;
  };
  const Eigen::MatrixXd ctr = count(train);
  const Eigen::MatrixXd cte = count(test);
  const Eigen::VectorXd rows = ctr.rowwise().sum();
  const double inv_n = 1.0 / rows.sum();

  // Full-batch gradient descent on the softmax cross entropy with a small
  // L2 penalty.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(x, l);
  Eigen::RowVectorXd bias = Eigen::RowVectorXd::Zero(l);
  const double lr = 2.0;
  const double l2 = 1e-4;
  auto scores = [&] {
    Eigen::MatrixXd z = w;
    z.rowwise() += bias;
    return z;
  };
  for (int it = 0; it < 2000; ++it) {
    Eigen::MatrixXd p = scores();
    for (Eigen::Index r = 0; r < x; ++r) {
      p.row(r) = (p.row(r).array() - p.row(r).maxCoeff()).exp().matrix();
      p.row(r) /= p.row(r).sum();
    }
    const Eigen::MatrixXd g = inv_n * (rows.asDiagonal() * p - ctr);
    w -= lr * (g + l2 * w);
    bias -= lr * (g.colwise().sum() + l2 * bias);
  }
  const Eigen::MatrixXd z = scores();
  double hits = 0.0;
  for (Eigen::Index r = 0; r < x; ++r) {
    Eigen::Index best = 0;
    z.row(r).maxCoeff(&best);
    hits += cte(r, best);
  }
  const double total = cte.sum();
  if (total == 0.0) {
    throw ConfigError("probe test set produced no latent slots");
  }
  return {100.0 * hits / total, 100.0 / l};
}

} // namespace rvqmotion
