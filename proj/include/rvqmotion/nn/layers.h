#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/common/random.h"
#include "rvqmotion/nn/parameters.h"

namespace rvqmotion::nn {

// Activations are channels x time matrices.
using Matrix = Eigen::MatrixXd;

// Stack of values saved by forward passes for the matching backward pass.
class Tape {
 public:
  void push(Matrix m) {
    saved_.push_back(std::move(m));
  }
  Matrix pop();
  bool empty() const {
    return saved_.empty();
  }

 private:
  std::vector<Matrix> saved_;
};

// Stateless layer description; weights live in a ParameterStore. Passing a
// null tape runs inference without recording.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const = 0;
  virtual Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const = 0;
  virtual void init(ParameterStore& params, Rng& rng) const = 0;
};

using LayerPtr = std::shared_ptr<const Layer>;

enum class Padding { kReplicate, kZero };

// 1D convolution. Output length is (T + 2 pad - kernel) / stride + 1.
class Conv1d final : public Layer {
 public:
  Conv1d(ParameterStore& params,
         const std::string& name,
         int in_channels,
         int out_channels,
         int kernel,
         int stride,
         int pad,
         Padding padding = Padding::kReplicate,
         bool bias = true);

  Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const override;
  Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const override;
  void init(ParameterStore& params, Rng& rng) const override;

  int output_length(int input_length) const;
  int weight_index() const {
    return weight_;
  }

 private:
  int in_, out_, kernel_, stride_, pad_;
  Padding padding_;
  int weight_ = -1;  // out x (kernel * in), kernel-major columns
  int bias_ = -1;    // out x 1, or -1
};

// Transposed 1D convolution. Output length is (T - 1) stride - 2 crop + kernel.
class ConvTranspose1d final : public Layer {
 public:
  ConvTranspose1d(ParameterStore& params,
                  const std::string& name,
                  int in_channels,
                  int out_channels,
                  int kernel,
                  int stride,
                  int crop);

  Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const override;
  Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const override;
  void init(ParameterStore& params, Rng& rng) const override;

  int output_length(int input_length) const;

 private:
  int in_, out_, kernel_, stride_, crop_;
  int weight_ = -1;  // (kernel * out) x in
  int bias_ = -1;
};

class LeakyRelu final : public Layer {
 public:
  explicit LeakyRelu(double slope = 0.2) : slope_(slope) {}

  Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const override;
  Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const override;
  void init(ParameterStore&, Rng&) const override {}

 private:
  double slope_;
};

// Mean over time: C x T -> C x 1.
class TemporalMeanPool final : public Layer {
 public:
  Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const override;
  Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const override;
  void init(ParameterStore&, Rng&) const override {}
};

class Sequential final : public Layer {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<LayerPtr> layers) : layers_(std::move(layers)) {}

  void append(LayerPtr layer) {
    layers_.push_back(std::move(layer));
  }

  Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const override;
  Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const override;
  void init(ParameterStore& params, Rng& rng) const override;

  const std::vector<LayerPtr>& layers() const {
    return layers_;
  }

 private:
  std::vector<LayerPtr> layers_;
};

// x + conv1x1(act(conv3(act(x)))), channel count preserved.
class ResidualBlock final : public Layer {
 public:
  ResidualBlock(ParameterStore& params, const std::string& name, int channels);

  Matrix forward(const ParameterStore& params, const Matrix& x, Tape* tape) const override;
  Matrix backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const override;
  void init(ParameterStore& params, Rng& rng) const override;

 private:
  Sequential body_;
};

} // namespace rvqmotion::nn
