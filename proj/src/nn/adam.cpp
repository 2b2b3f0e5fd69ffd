#include "rvqmotion/nn/adam.h"

#include <cmath>

#include "rvqmotion/common/errors.h"

namespace rvqmotion::nn {

void Adam::step(std::vector<Eigen::MatrixXd*> params, const std::vector<const Eigen::MatrixXd*>& grads) {
  if (params.size() != grads.size()) {
    throw StructuralError("optimizer received mismatched parameter and gradient lists");
  }
  if (m.empty()) {
    for (const auto* p : params) {
      m.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      v.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  if (m.size() != params.size()) {
    throw StructuralError("optimizer state does not match parameter list");
  }
  ++steps;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  const double lr = learning_rate * std::sqrt(c2) / c1;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& g = *grads[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    params[i]->array() -= lr * m[i].array() / (v[i].array().sqrt() + epsilon);
  }
}

} // namespace rvqmotion::nn
