#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/disentangle/contrastive.h"
#include "rvqmotion/disentangle/mutual_info.h"

using namespace rvqmotion;
using namespace rvqmotion::testing;

namespace {

// Direct sum over every (z, l) cell with marginals recomputed per cell.
double enumerate_mi(const Eigen::MatrixXd& p) {
  double total = 0.0;
  for (Eigen::Index z = 0; z < p.rows(); ++z) {
    for (Eigen::Index l = 0; l < p.cols(); ++l) {
      if (p(z, l) == 0.0) {
        continue;
      }
      double pz = 0.0, pl = 0.0;
      for (Eigen::Index j = 0; j < p.cols(); ++j) pz += p(z, j);
      for (Eigen::Index i = 0; i < p.rows(); ++i) pl += p(i, l);
      total += p(z, l) * std::log(p(z, l) / (pz * pl));
    }
  }
  return total;
}

} // namespace

TEST_CASE("mutual information hand cases") {
  Eigen::MatrixXd independent(2, 2);
  independent << 0.1, 0.3, 0.15, 0.45;
  CHECK(std::abs(mutual_information(independent)) <= 1e-12);
  Eigen::MatrixXd diagonal(2, 2);
  diagonal << 0.5, 0.0, 0.0, 0.5;
  CHECK(std::abs(mutual_information(diagonal) - std::log(2.0)) <= 1e-12);
}

TEST_CASE("mutual information matches enumeration on random tables") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int x = 2 + trial % 9, l = 2 + trial % 4;
    Eigen::MatrixXd p = random_matrix(x, l, rng).cwiseAbs();
    if (trial % 3 == 0) {
      p(0, 0) = 0.0;
    }
    p /= p.sum();
    CHECK(std::abs(mutual_information(p) - enumerate_mi(p)) <= 1e-9);
  }
}

TEST_CASE("the soft-assignment joint matches its definition") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Codebook book = Codebook::from_codes(random_matrix(5, 3, rng));
    const int m = 12;
    const Eigen::MatrixXd r = random_matrix(m, 3, rng);
    std::vector<int> labels;
    for (int i = 0; i < m; ++i) {
      labels.push_back(7 - (i * 5 + trial) % 3);
    }
    const double tau = 0.5 + 0.1 * trial;
    const MutualInfoLoss loss = mutual_info_loss(r, labels, book, tau);
    // Label columns follow first appearance.
    std::vector<int> order;
    for (int lab : labels) {
      if (std::find(order.begin(), order.end(), lab) == order.end()) order.push_back(lab);
    }
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(5, 3);
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd q = soft_assignment(book, r.row(i).transpose(), tau);
      const int col = static_cast<int>(std::find(order.begin(), order.end(), labels[i]) - order.begin());
      joint.col(col) += q / m;
    }
    CHECK((loss.joint - joint).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(loss.value - enumerate_mi(joint)) <= 1e-9);
  }
}

TEST_CASE("mutual information loss gradients match central differences") {
  Rng rng(23);
  Codebook book = Codebook::from_codes(random_matrix(4, 3, rng));
  Eigen::MatrixXd r = random_matrix(6, 3, rng);
  const std::vector<int> labels = {0, 1, 0, 2, 1, 2};
  const double tau = 0.9, h = 1e-6;
  const MutualInfoLoss loss = mutual_info_loss(r, labels, book, tau);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double keep = r.data()[i];
    r.data()[i] = keep + h;
    const double up = mutual_info_loss(r, labels, book, tau).value;
    r.data()[i] = keep - h;
    const double down = mutual_info_loss(r, labels, book, tau).value;
    r.data()[i] = keep;
    CHECK(loss.grad_r.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
  }
  for (Eigen::Index i = 0; i < book.codes.size(); ++i) {
    const double keep = book.codes.data()[i];
    book.codes.data()[i] = keep + h;
    const double up = mutual_info_loss(r, labels, book, tau).value;
    book.codes.data()[i] = keep - h;
    const double down = mutual_info_loss(r, labels, book, tau).value;
    book.codes.data()[i] = keep;
    CHECK(loss.grad_codes.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
  }
  CHECK_THROWS_AS(mutual_info_loss(r, {1, 1, 1, 1, 1, 1}, book, tau), ConfigError);
}

TEST_CASE("contrastive closed-form cases") {
  SUBCASE("a single positive pair has zero loss") {
    Eigen::MatrixXd e(2, 2);
    e << 1, 0, 0.3, 2;
    const ContrastiveLoss c = multipos_contrastive(e, {4, 4}, 0.5);
    CHECK(std::abs(c.value) <= 1e-12);
    CHECK(c.valid_anchors == 2);
  }
  SUBCASE("anchors without a positive are skipped") {
    Eigen::MatrixXd e(3, 2);
    e << 1, 0, 1, 0, 0, 1;
    const ContrastiveLoss c = multipos_contrastive(e, {0, 0, 1}, 1.0);
    CHECK(c.valid_anchors == 2);
    CHECK(std::abs(c.value - std::log(1.0 + std::exp(-1.0))) <= 1e-6);
  }
  SUBCASE("several positives share the target mass") {
    Eigen::MatrixXd e(4, 1);
    e << 1, 2, -1, 0.5;
    const double tau = 0.5;
    const ContrastiveLoss c = multipos_contrastive(e, {0, 0, 0, 1}, tau);
    // Anchor 0: logits over samples 1, 2, 3 with positives 1 and 2.
    auto anchor = [&](int a, std::vector<int> others, std::vector<int> pos) {
      double norm = 0.0;
      for (int o : others) norm += std::exp(e(a) * e(o) / tau);
      double loss = 0.0;
      for (int p : pos) loss -= std::log(std::exp(e(a) * e(p) / tau) / norm) / pos.size();
      return loss;
    };
    const double expect = (anchor(0, {1, 2, 3}, {1, 2}) + anchor(1, {0, 2, 3}, {0, 2}) + anchor(2, {0, 1, 3}, {0, 1})) / 3;
    CHECK(c.valid_anchors == 3);
    CHECK(std::abs(c.value - expect) <= 1e-6);
  }
  SUBCASE("errors") {
    Eigen::MatrixXd e(2, 2);
    e << 1, 0, 0, 1;
    CHECK_THROWS_AS(multipos_contrastive(e, {0, 1}, 1.0), NumericError);
    CHECK_THROWS_AS(multipos_contrastive(e, {0, 0}, 0.0), ConfigError);
    CHECK_THROWS_AS(multipos_contrastive(e.topRows(1), {0}, 1.0), NumericError);
  }
}

TEST_CASE("anchor cross-entropy is stable for large logits") {
  Eigen::Vector3d logits(1000.0, 999.0, -50.0);
  Eigen::Vector3d target(1.0, 0.0, 0.0);
  CHECK(std::abs(anchor_cross_entropy(logits, target) - std::log(1.0 + std::exp(-1.0))) <= 1e-9);
}

TEST_CASE("contrastive gradient matches central differences") {
  Rng rng(31);
  Eigen::MatrixXd e = random_matrix(6, 4, rng);
  const std::vector<int> labels = {0, 1, 0, 1, 2, 2};
  const double tau = 0.3, h = 1e-6;
  const ContrastiveLoss c = multipos_contrastive(e, labels, tau);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double keep = e.data()[i];
    e.data()[i] = keep + h;
    const double up = multipos_contrastive(e, labels, tau).value;
    e.data()[i] = keep - h;
    const double down = multipos_contrastive(e, labels, tau).value;
    e.data()[i] = keep;
    CHECK(c.grad.data()[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("style embedding pools r[s]") {
  Rng rng(3);
  RvqStack stack;
  for (int i = 0; i < 3; ++i) {
    stack.books.push_back(Codebook::from_codes(random_matrix(4, 2, rng)));
  }
  const QuantizationTrace t = residual_encode(stack, random_matrix(5, 2, rng), 2);
  CHECK((pool_style_embedding(t, 1) - t.r[1].colwise().mean().transpose()).norm() <= 1e-15);
  CHECK_THROWS_AS(pool_style_embedding(t, 2), ConfigError);
  CHECK((pool_residual(t, 3) - t.r[3].colwise().mean().transpose()).norm() <= 1e-15);
}
