#include "rvqmotion/disentangle/mutual_info.h"

#include <algorithm>
#include <cmath>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

constexpr double kTiny = 1e-300;

} // namespace

double mutual_information(const Eigen::MatrixXd& joint) {
  const Eigen::VectorXd pz = joint.rowwise().sum();
  const Eigen::RowVectorXd pl = joint.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index z = 0; z < joint.rows(); ++z) {
    for (Eigen::Index l = 0; l < joint.cols(); ++l) {
      const double p = joint(z, l);
      if (p > 0.0) {
        mi += p * std::log(p / (pz[z] * pl[l]));
      }
    }
  }
  return mi;
}

MutualInfoLoss mutual_info_loss(const Eigen::MatrixXd& residuals,
                                const std::vector<int>& labels,
                                const Codebook& book,
                                double tau) {
  const Eigen::Index m = residuals.rows();
  if (static_cast<Eigen::Index>(labels.size()) != m) {
    throw StructuralError("mutual information needs one label per residual");
  }
  std::vector<int> alphabet;
  std::vector<int> column(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    auto it = std::find(alphabet.begin(), alphabet.end(), labels[i]);
    if (it == alphabet.end()) {
      alphabet.push_back(labels[i]);
      it = alphabet.end() - 1;
    }
    column[i] = static_cast<int>(it - alphabet.begin());
  }
  if (alphabet.size() < 2) {
    throw ConfigError("mutual information is undefined for a single-label batch");
  }

  const Eigen::Index x = book.size();
  const Eigen::Index l = static_cast<Eigen::Index>(alphabet.size());
  std::vector<Eigen::VectorXd> q(m);
  MutualInfoLoss out;
  out.joint = Eigen::MatrixXd::Zero(x, l);
  for (Eigen::Index i = 0; i < m; ++i) {
    q[i] = soft_assignment(book, residuals.row(i).transpose(), tau);
    out.joint.col(column[i]) += q[i] / static_cast<double>(m);
  }
  out.value = mutual_information(out.joint);

  // dI/dp(z,l) up to terms that are constant per sample (they vanish through
  // the softmax).
  const Eigen::VectorXd pz = out.joint.rowwise().sum();
  const Eigen::RowVectorXd pl = out.joint.colwise().sum();
  Eigen::MatrixXd g_joint(x, l);
  for (Eigen::Index z = 0; z < x; ++z) {
    for (Eigen::Index c = 0; c < l; ++c) {
      g_joint(z, c) = std::log(std::max(out.joint(z, c), kTiny) / std::max(pz[z] * pl[c], kTiny));
    }
  }
  out.grad_r = Eigen::MatrixXd::Zero(m, residuals.cols());
  out.grad_codes = Eigen::MatrixXd::Zero(x, book.dim());
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd g_q = g_joint.col(column[i]) / static_cast<double>(m);
    const auto g = soft_assignment_backward(book, residuals.row(i).transpose(), q[i], g_q, tau);
    out.grad_r.row(i) = g.r.transpose();
    out.grad_codes += g.codes;
  }
  return out;
}

} // namespace rvqmotion
