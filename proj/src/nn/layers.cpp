#include "rvqmotion/nn/layers.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion::nn {

namespace {

void uniform_fill(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = (2.0 * uniform_unit(rng) - 1.0) * bound;
  }
}

void check_channels(const Matrix& x, int expected, const char* what) {
  if (x.rows() != expected) {
    throw StructuralError(std::string(what) + ": expected " + std::to_string(expected) + " input channels, got " +
                          std::to_string(x.rows()));
  }
}

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

} // namespace

Matrix Tape::pop() {
  if (saved_.empty()) {
    throw StructuralError("backward pass ran past the recorded tape");
  }
  Matrix m = std::move(saved_.back());
  saved_.pop_back();
  return m;
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(ParameterStore& params,
               const std::string& name,
               int in_channels,
               int out_channels,
               int kernel,
               int stride,
               int pad,
               Padding padding,
               bool bias)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride), pad_(pad), padding_(padding) {
  if (in_ <= 0 || out_ <= 0 || kernel_ <= 0 || stride_ <= 0 || pad_ < 0) {
    throw ConfigError("invalid convolution geometry for " + name);
  }
  weight_ = params.add(name + ".weight", out_, static_cast<Eigen::Index>(kernel_) * in_);
  if (bias) {
    bias_ = params.add(name + ".bias", out_, 1);
  }
}

int Conv1d::output_length(int input_length) const {
  return (input_length + 2 * pad_ - kernel_) / stride_ + 1;
}

void Conv1d::init(ParameterStore& params, Rng& rng) const {
  uniform_fill(params[weight_], std::sqrt(3.0 / (kernel_ * in_)), rng);
  if (bias_ >= 0) {
    params[bias_].setZero();
  }
}

Matrix Conv1d::forward(const ParameterStore& params, const Matrix& x, Tape* tape) const {
  check_channels(x, in_, "Conv1d");
  const int t_in = static_cast<int>(x.cols());
  const int t_out = output_length(t_in);
  if (t_out <= 0) {
    throw StructuralError("Conv1d input of length " + std::to_string(t_in) + " is too short");
  }
  Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(kernel_) * in_, t_out);
  for (int to = 0; to < t_out; ++to) {
    for (int kk = 0; kk < kernel_; ++kk) {
      int ti = to * stride_ + kk - pad_;
      if (ti < 0 || ti >= t_in) {
        if (padding_ == Padding::kZero) {
          continue;
        }
        ti = std::clamp(ti, 0, t_in - 1);
      }
      cols.block(static_cast<Eigen::Index>(kk) * in_, to, in_, 1) = x.col(ti);
    }
  }
  Matrix y = params[weight_] * cols;
  if (bias_ >= 0) {
    y.colwise() += params[bias_].col(0);
  }
  if (tape) {
    tape->push(std::move(cols));
    tape->push(scalar(t_in));
  }
  return y;
}

Matrix Conv1d::backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const {
  const int t_in = static_cast<int>(tape.pop()(0, 0));
  const Matrix cols = tape.pop();
  const int t_out = static_cast<int>(grad.cols());
  grads[weight_].noalias() += grad * cols.transpose();
  if (bias_ >= 0) {
    grads[bias_] += grad.rowwise().sum();
  }
  const Matrix gcols = params[weight_].transpose() * grad;
  Matrix gx = Matrix::Zero(in_, t_in);
  for (int to = 0; to < t_out; ++to) {
    for (int kk = 0; kk < kernel_; ++kk) {
      int ti = to * stride_ + kk - pad_;
      if (ti < 0 || ti >= t_in) {
        if (padding_ == Padding::kZero) {
          continue;
        }
        ti = std::clamp(ti, 0, t_in - 1);
      }
      gx.col(ti) += gcols.block(static_cast<Eigen::Index>(kk) * in_, to, in_, 1);
    }
  }
  return gx;
}

// ------------------------------------------------------- ConvTranspose1d

ConvTranspose1d::ConvTranspose1d(ParameterStore& params,
                                 const std::string& name,
                                 int in_channels,
                                 int out_channels,
                                 int kernel,
                                 int stride,
                                 int crop)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride), crop_(crop) {
  if (in_ <= 0 || out_ <= 0 || kernel_ <= 0 || stride_ <= 0 || crop_ < 0) {
    throw ConfigError("invalid transposed convolution geometry for " + name);
  }
  weight_ = params.add(name + ".weight", static_cast<Eigen::Index>(kernel_) * out_, in_);
  bias_ = params.add(name + ".bias", out_, 1);
}

int ConvTranspose1d::output_length(int input_length) const {
  return (input_length - 1) * stride_ - 2 * crop_ + kernel_;
}

void ConvTranspose1d::init(ParameterStore& params, Rng& rng) const {
  // Each output sample receives about kernel/stride input taps.
  const double fan_in = static_cast<double>(in_) * kernel_ / stride_;
  uniform_fill(params[weight_], std::sqrt(3.0 / fan_in), rng);
  params[bias_].setZero();
}

Matrix ConvTranspose1d::forward(const ParameterStore& params, const Matrix& x, Tape* tape) const {
  check_channels(x, in_, "ConvTranspose1d");
  const int t_in = static_cast<int>(x.cols());
  const int t_out = output_length(t_in);
  const Matrix taps = params[weight_] * x;
  Matrix y(out_, t_out);
  y.colwise() = params[bias_].col(0);
  for (int t = 0; t < t_in; ++t) {
    for (int kk = 0; kk < kernel_; ++kk) {
      const int to = t * stride_ + kk - crop_;
      if (to >= 0 && to < t_out) {
        y.col(to) += taps.block(static_cast<Eigen::Index>(kk) * out_, t, out_, 1);
      }
    }
  }
  if (tape) {
    tape->push(x);
  }
  return y;
}

Matrix ConvTranspose1d::backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const {
  const Matrix x = tape.pop();
  const int t_in = static_cast<int>(x.cols());
  const int t_out = static_cast<int>(grad.cols());
  Matrix gtaps = Matrix::Zero(static_cast<Eigen::Index>(kernel_) * out_, t_in);
  for (int t = 0; t < t_in; ++t) {
    for (int kk = 0; kk < kernel_; ++kk) {
      const int to = t * stride_ + kk - crop_;
      if (to >= 0 && to < t_out) {
        gtaps.block(static_cast<Eigen::Index>(kk) * out_, t, out_, 1) = grad.col(to);
      }
    }
  }
  grads[weight_].noalias() += gtaps * x.transpose();
  grads[bias_] += grad.rowwise().sum();
  return params[weight_].transpose() * gtaps;
}

// ------------------------------------------------------------ activations

Matrix LeakyRelu::forward(const ParameterStore&, const Matrix& x, Tape* tape) const {
  if (tape) {
    tape->push(x);
  }
  return x.unaryExpr([s = slope_](double v) { return v > 0.0 ? v : s * v; });
}

Matrix LeakyRelu::backward(const ParameterStore&, Tape& tape, const Matrix& grad, Gradients&) const {
  const Matrix x = tape.pop();
  return grad.binaryExpr(x, [s = slope_](double g, double v) { return v > 0.0 ? g : s * g; });
}

Matrix TemporalMeanPool::forward(const ParameterStore&, const Matrix& x, Tape* tape) const {
  if (tape) {
    tape->push(scalar(static_cast<double>(x.cols())));
  }
  return x.rowwise().mean();
}

Matrix TemporalMeanPool::backward(const ParameterStore&, Tape& tape, const Matrix& grad, Gradients&) const {
  const auto t = static_cast<Eigen::Index>(tape.pop()(0, 0));
  return (grad / static_cast<double>(t)).replicate(1, t);
}

// ------------------------------------------------------------ containers

Matrix Sequential::forward(const ParameterStore& params, const Matrix& x, Tape* tape) const {
  Matrix h = x;
  for (const auto& layer : layers_) {
    h = layer->forward(params, h, tape);
  }
  return h;
}

Matrix Sequential::backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const {
  Matrix g = grad;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(params, tape, g, grads);
  }
  return g;
}

void Sequential::init(ParameterStore& params, Rng& rng) const {
  for (const auto& layer : layers_) {
    layer->init(params, rng);
  }
}

ResidualBlock::ResidualBlock(ParameterStore& params, const std::string& name, int channels) {
  body_.append(std::make_shared<LeakyRelu>());
  body_.append(std::make_shared<Conv1d>(params, name + ".conv3", channels, channels, 3, 1, 1));
  body_.append(std::make_shared<LeakyRelu>());
  body_.append(std::make_shared<Conv1d>(params, name + ".conv1", channels, channels, 1, 1, 0));
}

Matrix ResidualBlock::forward(const ParameterStore& params, const Matrix& x, Tape* tape) const {
  return x + body_.forward(params, x, tape);
}

Matrix ResidualBlock::backward(const ParameterStore& params, Tape& tape, const Matrix& grad, Gradients& grads) const {
  return grad + body_.backward(params, tape, grad, grads);
}

void ResidualBlock::init(ParameterStore& params, Rng& rng) const {
  body_.init(params, rng);
}

} // namespace rvqmotion::nn
