#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/common/random.h"

namespace rvqmotion {

// X code vectors of dimension d (one per row) with exponential-moving-average
// statistics. When `pinned_zero` is set, code 0 is the zero vector and is
// never moved by EMA, gradients, or resets.
struct Codebook {
  Eigen::MatrixXd codes;       // X x d
  Eigen::VectorXd ema_count;   // N_i
  Eigen::MatrixXd ema_sum;     // mu_i, X x d
  std::vector<int64_t> usage;  // hits since the last reset
  bool pinned_zero = false;

  // EMA state starts at (N, mu) = (1, code).
  static Codebook from_codes(Eigen::MatrixXd codes, bool pinned_zero = false);

  int size() const {
    return static_cast<int>(codes.rows());
  }
  int dim() const {
    return static_cast<int>(codes.cols());
  }
  bool is_pinned(int index) const {
    return pinned_zero && index == 0;
  }

  // Throws unless X >= 2, codes are finite, and the EMA arrays agree in shape.
  void validate() const;
};

struct Assignment {
  int index = 0;
  Eigen::VectorXd code;
};

// Nearest code by squared Euclidean distance; ties go to the lowest index.
Assignment quantize_one(const Codebook& book, const Eigen::Ref<const Eigen::VectorXd>& r);

// Index-only variant used on hot paths.
int nearest_code(const Codebook& book, const Eigen::Ref<const Eigen::VectorXd>& r);

// N_i <- gN_i + (1-g)count_i, mu_i <- g mu_i + (1-g)sum_i, c_i <- mu_i/N_i
// for N_i > 0. Codes with N_i = 0 and the pinned code are left untouched.
// `residuals` holds one vector per row; gamma must lie in [0, 1].
void ema_update(Codebook& book,
                const Eigen::Ref<const Eigen::MatrixXd>& residuals,
                const std::vector<int>& assignments,
                double gamma);

// Records hits in the usage counters.
void record_usage(Codebook& book, const std::vector<int>& assignments);

// Replaces every code whose usage is below `usage_threshold` with a
// uniformly drawn row of `batch_residuals`, re-seeds its EMA state to
// (1, new code), then clears all usage counters. Returns the replaced indices.
std::vector<int> code_reset(Codebook& book,
                            const Eigen::Ref<const Eigen::MatrixXd>& batch_residuals,
                            int64_t usage_threshold,
                            Rng& rng);

// Re-derives mu from the current codes (mu_i = N_i c_i), e.g. after a
// gradient step moved the codes.
void sync_ema_to_codes(Codebook& book);

// Softmax of -||r - c_i||^2 / tau over the codes, with max subtraction.
Eigen::VectorXd soft_assignment(const Codebook& book, const Eigen::Ref<const Eigen::VectorXd>& r, double tau);

struct SoftAssignmentGrad {
  Eigen::VectorXd r;      // d
  Eigen::MatrixXd codes;  // X x d
};

// Vector-Jacobian product of soft_assignment given dL/dq.
SoftAssignmentGrad soft_assignment_backward(const Codebook& book,
                                            const Eigen::Ref<const Eigen::VectorXd>& r,
                                            const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& grad_q,
                                            double tau);

} // namespace rvqmotion
