#pragma once

#include <vector>

#include <Eigen/Core>

#include "rvqmotion/rvq/codebook.h"

namespace rvqmotion {

// I = sum p(z,l) log(p(z,l) / (p(z) p(l))) of a joint probability table,
// with 0 log 0 = 0.
double mutual_information(const Eigen::MatrixXd& joint);

struct MutualInfoLoss {
  double value = 0.0;
  Eigen::MatrixXd joint;       // X x L, columns in order of first appearance
  Eigen::MatrixXd grad_r;      // M x d
  Eigen::MatrixXd grad_codes;  // X x d
};

// Leakage between soft code assignments and labels. Each row of `residuals`
// is one (item, slot) sample with the matching entry of `labels`. The joint
// is the Monte-Carlo average of q(z | r) one-hot-weighted by label. Needs at
// least two distinct labels (ConfigError otherwise).
MutualInfoLoss mutual_info_loss(const Eigen::MatrixXd& residuals,
                                const std::vector<int>& labels,
                                const Codebook& book,
                                double tau);

} // namespace rvqmotion
