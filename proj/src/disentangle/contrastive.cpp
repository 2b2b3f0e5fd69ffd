#include "rvqmotion/disentangle/contrastive.h"

#include <cmath>
#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

Eigen::VectorXd pool_residual(const QuantizationTrace& trace, int layer) {
  if (layer < 0 || layer >= static_cast<int>(trace.r.size())) {
    throw ConfigError("residual layer " + std::to_string(layer) + " outside the trace");
  }
  return trace.r[layer].colwise().mean().transpose();
}

Eigen::VectorXd pool_style_embedding(const QuantizationTrace& trace, int content_cutoff) {
  if (trace.active_layers <= content_cutoff) {
    throw ConfigError("style embedding at layer " + std::to_string(content_cutoff) + " needs more than " +
                      std::to_string(content_cutoff) + " active layers, trace has " +
                      std::to_string(trace.active_layers));
  }
  return pool_residual(trace, content_cutoff);
}

double anchor_cross_entropy(const Eigen::VectorXd& logits, const Eigen::VectorXd& target) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  double h = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (target[i] != 0.0) {
      h -= target[i] * (logits[i] - lse);
    }
  }
  return h;
}

ContrastiveLoss multipos_contrastive(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels, double tau) {
  if (!(tau > 0.0)) {
    throw ConfigError("contrastive temperature must be positive");
  }
  const Eigen::Index b = embeddings.rows();
  if (static_cast<Eigen::Index>(labels.size()) != b) {
    throw StructuralError("contrastive loss needs one label per embedding");
  }
  ContrastiveLoss out;
  out.grad = Eigen::MatrixXd::Zero(b, embeddings.cols());
  if (b < 2) {
    throw NumericError("contrastive loss is undefined for fewer than 2 samples");
  }
  const Eigen::MatrixXd sim = embeddings * embeddings.transpose() / tau;
  Eigen::VectorXd logits(b - 1);
  Eigen::VectorXd target(b - 1);
  std::vector<Eigen::Index> others(b - 1);
  for (Eigen::Index a = 0; a < b; ++a) {
    Eigen::Index n = 0;
    double positives = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
      if (i == a) {
        continue;
      }
      others[n] = i;
      logits[n] = sim(a, i);
      target[n] = labels[i] == labels[a] ? 1.0 : 0.0;
      positives += target[n];
      ++n;
    }
    if (positives == 0.0) {
      continue;
    }
    target /= positives;
    ++out.valid_anchors;
    out.value += anchor_cross_entropy(logits, target);

    const double m = logits.maxCoeff();
    Eigen::VectorXd p = (logits.array() - m).exp().matrix();
    p /= p.sum();
    const Eigen::VectorXd g_logit = (p - target) / tau;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index i = others[j];
      out.grad.row(a) += g_logit[j] * embeddings.row(i);
      out.grad.row(i) += g_logit[j] * embeddings.row(a);
    }
  }
  if (out.valid_anchors == 0) {
    throw NumericError("contrastive loss undefined: no anchor has a positive in the batch");
  }
  out.value /= out.valid_anchors;
  out.grad /= out.valid_anchors;
  return out;
}

} // namespace rvqmotion
