#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace rvqmotion::nn {

// Flat, ordered set of named parameter tensors. Layers refer to entries by
// index so one layer description can be shared across model copies.
class ParameterStore {
 public:
  int add(std::string name, Eigen::Index rows, Eigen::Index cols);

  int size() const {
    return static_cast<int>(values_.size());
  }
  const std::string& name(int i) const {
    return names_[i];
  }
  Eigen::MatrixXd& operator[](int i) {
    return values_[i];
  }
  const Eigen::MatrixXd& operator[](int i) const {
    return values_[i];
  }
  int find(const std::string& name) const;  // -1 when absent

  // Zero tensors with the same shapes.
  std::vector<Eigen::MatrixXd> zeros_like() const;

  Eigen::Index scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> values_;
};

using Gradients = std::vector<Eigen::MatrixXd>;

void add_into(Gradients& acc, const Gradients& other);

// Sqrt of the sum of squares over every tensor of every group.
double global_norm(const std::vector<const Gradients*>& groups);

// Scales all groups so their joint norm is at most `max_norm`; returns the
// norm before clipping.
double clip_global_norm(const std::vector<Gradients*>& groups, double max_norm);

} // namespace rvqmotion::nn
