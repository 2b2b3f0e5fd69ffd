#pragma once

#include <set>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/common/random.h"
#include "rvqmotion/rvq/codebook.h"

namespace rvqmotion {

// N codebooks applied in sequence to residuals. Books with index below
// `content_cutoff` hold content; the rest hold style.
struct RvqStack {
  std::vector<Codebook> books;
  double gamma = 0.99;
  int content_cutoff = 1;

  int layers() const {
    return static_cast<int>(books.size());
  }
  int dim() const {
    return books.empty() ? 0 : books.front().dim();
  }
  int codes_per_book() const {
    return books.empty() ? 0 : books.front().size();
  }

  // Throws unless 1 <= s < N and all books share X and d.
  void validate() const;
};

// Per-layer residuals, codes and indices for K latent slots.
// r[0] is the encoder output, r[i + 1] = r[i] - z[i]; layers at or beyond
// `active_layers` hold zero codes, index -1, and carry the last residual.
struct QuantizationTrace {
  std::vector<Eigen::MatrixXd> r;        // N + 1 entries, K x d
  std::vector<Eigen::MatrixXd> z;        // N entries, K x d
  std::vector<std::vector<int>> index;   // N entries, K each
  int active_layers = 0;

  int layers() const {
    return static_cast<int>(z.size());
  }
  int slots() const {
    return r.empty() ? 0 : static_cast<int>(r.front().rows());
  }
};

QuantizationTrace residual_encode(const RvqStack& stack, const Eigen::MatrixXd& r0, int active_layers);

// Same recursion with the code choices given instead of searched; used to
// freeze assignments (e.g. for finite-difference checks).
QuantizationTrace residual_encode_with_indices(const RvqStack& stack,
                                               const Eigen::MatrixXd& r0,
                                               const std::vector<std::vector<int>>& index,
                                               int active_layers);

// Element-wise sum of z over the given layers.
Eigen::MatrixXd sum_codes(const QuantizationTrace& trace, const std::set<int>& layers);

// Sum of z over layers [first, last).
Eigen::MatrixXd sum_codes(const QuantizationTrace& trace, int first, int last);

// Uniform on {1, ..., N}.
int sample_active_layers(int max_layers, Rng& rng);

struct CommitmentLoss {
  double value = 0.0;
  std::vector<Eigen::MatrixXd> grad_r;  // one K x d entry per active layer
};

// Mean over active layers and slots of ||r[i] - sg(z[i])||^2. Gradients flow
// to the residuals only.
CommitmentLoss commitment_loss(const QuantizationTrace& trace, int active_layers);

// Gradients of a loss w.r.t. the quantizer inputs under the straight-through
// rule: z_i passes its gradient to r_i unchanged and to the selected code,
// and r_{i+1} = r_i - z_i sends its gradient to r_i and -1x to z_i.
struct QuantizerGradient {
  Eigen::MatrixXd r0;                  // K x d
  std::vector<Eigen::MatrixXd> codes;  // per book, X x d
};

// grad_z[i]: dL/dz_i from the decoder input (K x d, may be empty for none).
// grad_r[i]: dL/dr_i from losses on residuals, i in [0, N] (may be empty).
QuantizerGradient straight_through_backward(const RvqStack& stack,
                                            const QuantizationTrace& trace,
                                            const std::vector<Eigen::MatrixXd>& grad_z,
                                            const std::vector<Eigen::MatrixXd>& grad_r);

} // namespace rvqmotion
