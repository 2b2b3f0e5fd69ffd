#include "rvqmotion/rvq/residual_quantizer.h"

#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

void RvqStack::validate() const {
  const int n = layers();
  if (n < 1) {
    throw StructuralError("RVQ stack has no codebooks");
  }
  if (content_cutoff < 1 || content_cutoff >= n) {
    throw ConfigError("content cutoff s=" + std::to_string(content_cutoff) + " must satisfy 1 <= s < N=" +
                      std::to_string(n));
  }
  for (const auto& b : books) {
    b.validate();
    if (b.dim() != dim() || b.size() != codes_per_book()) {
      throw StructuralError("all codebooks must share size and dimension");
    }
  }
}

namespace {

QuantizationTrace encode_impl(const RvqStack& stack,
                              const Eigen::MatrixXd& r0,
                              const std::vector<std::vector<int>>* fixed,
                              int active_layers) {
  const int n = stack.layers();
  if (active_layers < 1 || active_layers > n) {
    throw ConfigError("active layers " + std::to_string(active_layers) + " outside [1, " + std::to_string(n) + "]");
  }
  if (r0.cols() != stack.dim()) {
    throw StructuralError("latent dimension " + std::to_string(r0.cols()) + " does not match codebook dimension " +
                          std::to_string(stack.dim()));
  }
  const Eigen::Index k = r0.rows();
  if (fixed != nullptr && static_cast<int>(fixed->size()) < active_layers) {
    throw StructuralError("fixed assignments cover fewer layers than requested");
  }
  QuantizationTrace trace;
  trace.active_layers = active_layers;
  trace.r.reserve(n + 1);
  trace.r.push_back(r0);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& cur = trace.r.back();
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(k, stack.dim());
    std::vector<int> idx(k, -1);
    if (i < active_layers) {
      const Codebook& book = stack.books[i];
      if (fixed != nullptr && static_cast<Eigen::Index>((*fixed)[i].size()) != k) {
        throw StructuralError("fixed assignments do not match the slot count");
      }
      for (Eigen::Index s = 0; s < k; ++s) {
        idx[s] = fixed != nullptr ? (*fixed)[i][s] : nearest_code(book, cur.row(s).transpose());
        if (idx[s] < 0 || idx[s] >= book.size()) {
          throw StructuralError("code index " + std::to_string(idx[s]) + " outside codebook " + std::to_string(i));
        }
        z.row(s) = book.codes.row(idx[s]);
      }
    }
    trace.r.push_back(cur - z);
    trace.z.push_back(std::move(z));
    trace.index.push_back(std::move(idx));
  }
  return trace;
}

} // namespace

QuantizationTrace residual_encode(const RvqStack& stack, const Eigen::MatrixXd& r0, int active_layers) {
  return encode_impl(stack, r0, nullptr, active_layers);
}

QuantizationTrace residual_encode_with_indices(const RvqStack& stack,
                                               const Eigen::MatrixXd& r0,
                                               const std::vector<std::vector<int>>& index,
                                               int active_layers) {
  return encode_impl(stack, r0, &index, active_layers);
}

Eigen::MatrixXd sum_codes(const QuantizationTrace& trace, const std::set<int>& layers) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(trace.slots(), trace.r.empty() ? 0 : trace.r.front().cols());
  for (int i : layers) {
    if (i < 0 || i >= trace.layers()) {
      throw ConfigError("layer " + std::to_string(i) + " outside the trace");
    }
    out += trace.z[i];
  }
  return out;
}

Eigen::MatrixXd sum_codes(const QuantizationTrace& trace, int first, int last) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(trace.slots(), trace.r.empty() ? 0 : trace.r.front().cols());
  for (int i = first; i < last; ++i) {
    out += trace.z.at(i);
  }
  return out;
}

int sample_active_layers(int max_layers, Rng& rng) {
  if (max_layers < 1) {
    throw ConfigError("need at least one codebook");
  }
  return static_cast<int>(uniform_int(rng, 1, max_layers));
}

CommitmentLoss commitment_loss(const QuantizationTrace& trace, int active_layers) {
  CommitmentLoss out;
  const double count = static_cast<double>(active_layers) * trace.slots();
  if (count <= 0) {
    return out;
  }
  for (int i = 0; i < active_layers; ++i) {
    const Eigen::MatrixXd diff = trace.r[i] - trace.z[i];
    out.value += diff.squaredNorm();
    out.grad_r.push_back(2.0 * diff / count);
  }
  out.value /= count;
  return out;
}

QuantizerGradient straight_through_backward(const RvqStack& stack,
                                            const QuantizationTrace& trace,
                                            const std::vector<Eigen::MatrixXd>& grad_z,
                                            const std::vector<Eigen::MatrixXd>& grad_r) {
  const int n = trace.layers();
  const Eigen::Index k = trace.slots();
  const Eigen::Index d = stack.dim();
  auto get = [&](const std::vector<Eigen::MatrixXd>& v, int i) -> Eigen::MatrixXd {
    if (i < static_cast<int>(v.size()) && v[i].size() > 0) {
      return v[i];
    }
    return Eigen::MatrixXd::Zero(k, d);
  };

  QuantizerGradient out;
  out.codes.reserve(n);
  for (const auto& b : stack.books) {
    out.codes.push_back(Eigen::MatrixXd::Zero(b.size(), b.dim()));
  }

  Eigen::MatrixXd g_next = get(grad_r, n);  // dL/dr_{i+1}
  for (int i = n - 1; i >= 0; --i) {
    const Eigen::MatrixXd gz_in = get(grad_z, i);
    const Eigen::MatrixXd gr_in = get(grad_r, i);
    if (i >= trace.active_layers) {
      // z_i is the constant zero; r_{i+1} = r_i.
      g_next = gr_in + g_next;
      continue;
    }
    // Total gradient on z_i: its direct use minus the path through r_{i+1}.
    const Eigen::MatrixXd g_z = gz_in - g_next;
    for (Eigen::Index s = 0; s < k; ++s) {
      out.codes[i].row(trace.index[i][s]) += g_z.row(s);
    }
    // r_i receives g_next from r_{i+1} and g_z through the straight-through
    // copy; the g_next terms cancel, which is written out exactly so the
    // residual path contributes no floating-point noise upstream.
    g_next = gr_in + gz_in;
  }
  out.r0 = g_next;
  return out;
}

} // namespace rvqmotion
