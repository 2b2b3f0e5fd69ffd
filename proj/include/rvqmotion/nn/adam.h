#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace rvqmotion::nn {

// Adaptive-moment optimizer state for a list of tensors.
struct Adam {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t steps = 0;
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;

  // Lazily sizes the moments to match `params` on the first step.
  void step(std::vector<Eigen::MatrixXd*> params, const std::vector<const Eigen::MatrixXd*>& grads);

  void reset() {
    steps = 0;
    m.clear();
    v.clear();
  }
};

} // namespace rvqmotion::nn
