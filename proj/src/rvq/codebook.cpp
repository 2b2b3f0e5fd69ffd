#include "rvqmotion/rvq/codebook.h"

#include <cmath>
#include <limits>
#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

Codebook Codebook::from_codes(Eigen::MatrixXd codes, bool pinned_zero) {
  Codebook book;
  if (pinned_zero && codes.rows() > 0) {
    codes.row(0).setZero();
  }
  book.ema_count = Eigen::VectorXd::Ones(codes.rows());
  book.ema_sum = codes;
  book.usage.assign(codes.rows(), 0);
  book.codes = std::move(codes);
  book.pinned_zero = pinned_zero;
  return book;
}

void Codebook::validate() const {
  if (codes.rows() < 2) {
    throw StructuralError("codebook needs at least 2 codes");
  }
  if (!codes.allFinite()) {
    throw NumericError("codebook contains non-finite codes");
  }
  if (ema_count.size() != codes.rows() || ema_sum.rows() != codes.rows() || ema_sum.cols() != codes.cols() ||
      static_cast<Eigen::Index>(usage.size()) != codes.rows()) {
    throw StructuralError("codebook EMA state does not match code shape");
  }
}

int nearest_code(const Codebook& book, const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (r.size() != book.dim()) {
    throw StructuralError("query dimension " + std::to_string(r.size()) + " does not match codebook dimension " +
                          std::to_string(book.dim()));
  }
  if (!r.allFinite()) {
    throw NumericError("non-finite vector passed to quantization");
  }
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < book.size(); ++i) {
    const double dist = (book.codes.row(i).transpose() - r).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

Assignment quantize_one(const Codebook& book, const Eigen::Ref<const Eigen::VectorXd>& r) {
  const int idx = nearest_code(book, r);
  return {idx, book.codes.row(idx).transpose()};
}

void ema_update(Codebook& book,
                const Eigen::Ref<const Eigen::MatrixXd>& residuals,
                const std::vector<int>& assignments,
                double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("EMA discount must lie in [0, 1], got " + std::to_string(gamma));
  }
  if (static_cast<Eigen::Index>(assignments.size()) != residuals.rows()) {
    throw StructuralError("EMA update needs one assignment per residual");
  }
  if (residuals.rows() > 0 && residuals.cols() != book.dim()) {
    throw StructuralError("EMA residual dimension does not match codebook");
  }
  const int x = book.size();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(x);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(x, book.dim());
  for (size_t n = 0; n < assignments.size(); ++n) {
    const int a = assignments[n];
    if (a < 0 || a >= x) {
      throw StructuralError("assignment index out of range");
    }
    counts[a] += 1.0;
    sums.row(a) += residuals.row(static_cast<Eigen::Index>(n));
  }
  for (int i = 0; i < x; ++i) {
    if (book.is_pinned(i)) {
      continue;
    }
    book.ema_count[i] = gamma * book.ema_count[i] + (1.0 - gamma) * counts[i];
    book.ema_sum.row(i) = gamma * book.ema_sum.row(i) + (1.0 - gamma) * sums.row(i);
    // Unassigned codes keep their exact value; mu/N is unchanged in exact
    // arithmetic for them.
    if (counts[i] > 0.0 && book.ema_count[i] > 0.0) {
      book.codes.row(i) = book.ema_sum.row(i) / book.ema_count[i];
    }
  }
}

void record_usage(Codebook& book, const std::vector<int>& assignments) {
  for (int a : assignments) {
    ++book.usage.at(a);
  }
}

std::vector<int> code_reset(Codebook& book,
                            const Eigen::Ref<const Eigen::MatrixXd>& batch_residuals,
                            int64_t usage_threshold,
                            Rng& rng) {
  if (batch_residuals.rows() == 0) {
    throw StructuralError("code reset needs a nonempty batch of residuals");
  }
  std::vector<int> replaced;
  for (int i = 0; i < book.size(); ++i) {
    if (book.is_pinned(i) || book.usage[i] >= usage_threshold) {
      continue;
    }
    const auto pick = uniform_int(rng, 0, batch_residuals.rows() - 1);
    book.codes.row(i) = batch_residuals.row(pick);
    book.ema_count[i] = 1.0;
    book.ema_sum.row(i) = book.codes.row(i);
    replaced.push_back(i);
  }
  std::fill(book.usage.begin(), book.usage.end(), 0);
  return replaced;
}

void sync_ema_to_codes(Codebook& book) {
  for (int i = 0; i < book.size(); ++i) {
    if (book.is_pinned(i)) {
      book.codes.row(i).setZero();
    }
    book.ema_sum.row(i) = book.ema_count[i] * book.codes.row(i);
  }
}

Eigen::VectorXd soft_assignment(const Codebook& book, const Eigen::Ref<const Eigen::VectorXd>& r, double tau) {
  if (!(tau > 0.0)) {
    throw ConfigError("soft assignment temperature must be positive");
  }
  if (r.size() != book.dim()) {
    throw StructuralError("soft assignment dimension mismatch");
  }
  Eigen::VectorXd logits(book.size());
  for (int i = 0; i < book.size(); ++i) {
    logits[i] = -(r - book.codes.row(i).transpose()).squaredNorm() / tau;
  }
  const double m = logits.maxCoeff();
  Eigen::VectorXd q = (logits.array() - m).exp().matrix();
  return q / q.sum();
}

SoftAssignmentGrad soft_assignment_backward(const Codebook& book,
                                            const Eigen::Ref<const Eigen::VectorXd>& r,
                                            const Eigen::VectorXd& q,
                                            const Eigen::VectorXd& grad_q,
                                            double tau) {
  // dL/dD_i where D_i = ||r - c_i||^2 and q = softmax(-D / tau).
  const double mean_g = q.dot(grad_q);
  const Eigen::VectorXd g_dist = -(q.array() * (grad_q.array() - mean_g)).matrix() / tau;
  SoftAssignmentGrad out;
  out.r = Eigen::VectorXd::Zero(r.size());
  out.codes = Eigen::MatrixXd::Zero(book.size(), book.dim());
  for (int i = 0; i < book.size(); ++i) {
    const Eigen::VectorXd diff = r - book.codes.row(i).transpose();
    out.r += 2.0 * g_dist[i] * diff;
    out.codes.row(i) = -2.0 * g_dist[i] * diff.transpose();
  }
  return out;
}

} // namespace rvqmotion
