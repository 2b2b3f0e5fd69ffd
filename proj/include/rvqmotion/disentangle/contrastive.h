#pragma once

#include <vector>

#include <Eigen/Core>

#include "rvqmotion/rvq/residual_quantizer.h"

namespace rvqmotion {

// Mean over time slots of the residual entering codebook s (r[s]). Requires
// a trace computed with more than s active layers (ConfigError otherwise).
Eigen::VectorXd pool_style_embedding(const QuantizationTrace& trace, int content_cutoff);

// Mean over slots of r[layer] without the activity precondition; used for
// exporting embeddings of every layer.
Eigen::VectorXd pool_residual(const QuantizationTrace& trace, int layer);

// H(target, softmax(logits)) = -sum_i target_i log softmax(logits)_i.
double anchor_cross_entropy(const Eigen::VectorXd& logits, const Eigen::VectorXd& target);

struct ContrastiveLoss {
  double value = 0.0;
  Eigen::MatrixXd grad;  // B x d, dL/d(embeddings)
  int valid_anchors = 0;
};

// Multi-positive contrastive loss over a batch of embeddings (one per row).
// For every anchor a, the logits a.b_i / tau over all other samples are
// compared against the uniform distribution on label-matching samples.
// Anchors without a positive are skipped; the result is the mean over the
// remaining anchors. Throws NumericError when no anchor is valid.
ContrastiveLoss multipos_contrastive(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels, double tau);

} // namespace rvqmotion
