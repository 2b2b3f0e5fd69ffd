#include "rvqmotion/nn/parameters.h"

#include <cmath>

#include "rvqmotion/common/errors.h"

namespace rvqmotion::nn {

int ParameterStore::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (find(name) >= 0) {
    throw StructuralError("duplicate parameter name " + name);
  }
  names_.push_back(std::move(name));
  values_.push_back(Eigen::MatrixXd::Zero(rows, cols));
  return static_cast<int>(values_.size()) - 1;
}

int ParameterStore::find(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<Eigen::MatrixXd> ParameterStore::zeros_like() const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(values_.size());
  for (const auto& v : values_) {
    out.push_back(Eigen::MatrixXd::Zero(v.rows(), v.cols()));
  }
  return out;
}

Eigen::Index ParameterStore::scalar_count() const {
  Eigen::Index n = 0;
  for (const auto& v : values_) {
    n += v.size();
  }
  return n;
}

void add_into(Gradients& acc, const Gradients& other) {
  if (acc.size() != other.size()) {
    throw StructuralError("gradient sets differ in size");
  }
  for (size_t i = 0; i < acc.size(); ++i) {
    acc[i] += other[i];
  }
}

double global_norm(const std::vector<const Gradients*>& groups) {
  double sq = 0.0;
  for (const auto* g : groups) {
    for (const auto& t : *g) {
      sq += t.squaredNorm();
    }
  }
  return std::sqrt(sq);
}

double clip_global_norm(const std::vector<Gradients*>& groups, double max_norm) {
  std::vector<const Gradients*> view(groups.begin(), groups.end());
  const double norm = global_norm(view);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto* g : groups) {
      for (auto& t : *g) {
        t *= scale;
      }
    }
  }
  return norm;
}

} // namespace rvqmotion::nn
