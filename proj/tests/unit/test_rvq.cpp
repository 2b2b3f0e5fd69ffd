#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "../support.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/rvq/residual_quantizer.h"

using namespace rvqmotion;
using namespace rvqmotion::testing;

namespace {

RvqStack random_stack(int n, int x, int d, Rng& rng) {
  RvqStack stack;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd codes = random_matrix(x, d, rng, 1.0 / (i + 1));
    codes.row(0).setZero();
    stack.books.push_back(Codebook::from_codes(codes, true));
  }
  return stack;
}

int brute_force_nearest(const Eigen::MatrixXd& codes, const Eigen::VectorXd& r) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < codes.rows(); ++i) {
    double dist = 0.0;
    for (int c = 0; c < codes.cols(); ++c) {
      dist += (codes(i, c) - r(c)) * (codes(i, c) - r(c));
    }
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

} // namespace

TEST_CASE("quantize_one agrees with an exhaustive scan on 10^4 queries") {
  Rng rng(11);
  int mismatches = 0;
  for (int q = 0; q < 10000; ++q) {
    const int x = 2 + q % 30;
    const int d = 1 + q % 7;
    Eigen::MatrixXd codes = random_matrix(x, d, rng);
    if (q % 5 == 0) {
      codes.row(x - 1) = codes.row(0);  // duplicate codes exercise the tie rule
    }
    const Codebook book = Codebook::from_codes(codes);
    const Eigen::VectorXd r = q % 5 == 0 ? Eigen::VectorXd(codes.row(0).transpose()) : Eigen::VectorXd(random_matrix(d, 1, rng));
    const Assignment a = quantize_one(book, r);
    const int expect = brute_force_nearest(codes, r);
    mismatches += a.index != expect || a.code != Eigen::VectorXd(codes.row(expect).transpose());
    mismatches += nearest_code(book, r) != expect;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("ties go to the lowest index") {
  Eigen::MatrixXd codes(3, 1);
  codes << 1.0, -1.0, 1.0;
  const Codebook book = Codebook::from_codes(codes);
  CHECK(quantize_one(book, Eigen::VectorXd::Zero(1)).index == 0);
  CHECK(quantize_one(book, Eigen::VectorXd::Constant(1, 1.0)).index == 0);
}

TEST_CASE("residuals telescope and the remainder norm never grows") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const RvqStack stack = random_stack(4, 16, 6, rng);
    const Eigen::MatrixXd r0 = random_matrix(7, 6, rng);
    for (int n = 1; n <= 4; ++n) {
      const QuantizationTrace t = residual_encode(stack, r0, n);
      REQUIRE(t.layers() == 4);
      CHECK((r0 - sum_codes(t, 0, n) - t.r[n]).cwiseAbs().maxCoeff() <= 1e-5);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 7; ++k) {
          CHECK(t.r[i + 1].row(k).norm() <= t.r[i].row(k).norm());
        }
      }
      for (int i = n; i < 4; ++i) {
        CHECK(t.z[i].isZero(0.0));
        CHECK(t.index[i][0] == -1);
        CHECK(t.r[i + 1] == t.r[i]);
      }
    }
  }
}

TEST_CASE("sum_codes over a layer set") {
  Rng rng(2);
  const RvqStack stack = random_stack(3, 8, 4, rng);
  const QuantizationTrace t = residual_encode(stack, random_matrix(5, 4, rng), 3);
  CHECK(sum_codes(t, {0, 2}) == t.z[0] + t.z[2]);
  CHECK(sum_codes(t, std::set<int>{}).isZero(0.0));
  CHECK_THROWS_AS(sum_codes(t, {3}), ConfigError);
}

TEST_CASE("encode rejects bad inputs") {
  Rng rng(3);
  const RvqStack stack = random_stack(2, 4, 3, rng);
  CHECK_THROWS_AS(residual_encode(stack, random_matrix(2, 3, rng), 0), ConfigError);
  CHECK_THROWS_AS(residual_encode(stack, random_matrix(2, 3, rng), 3), ConfigError);
  CHECK_THROWS_AS(residual_encode(stack, random_matrix(2, 4, rng), 1), StructuralError);
  CHECK_THROWS_AS(residual_encode_with_indices(stack, random_matrix(2, 3, rng), {{0, 9}}, 1), StructuralError);
}

TEST_CASE("EMA update hand cases") {
  Eigen::MatrixXd codes(3, 2);
  codes << 0, 0, 1, 1, 5, 5;
  SUBCASE("gamma 0 is the centroid step") {
    Codebook book = Codebook::from_codes(codes);
    Eigen::MatrixXd r(3, 2);
    r << 1, 2, 3, 4, 9, 9;
    ema_update(book, r, {1, 1, 0}, 0.0);
    CHECK(book.codes.row(0) == Eigen::RowVector2d(9, 9));
    CHECK(book.codes.row(1) == Eigen::RowVector2d(2, 3));
    CHECK(book.codes.row(2) == Eigen::RowVector2d(5, 5));  // unused: N = 0 leaves the code
    CHECK(book.ema_count(2) == 0.0);
  }
  SUBCASE("gamma 1/2") {
    Codebook book = Codebook::from_codes(codes);
    Eigen::MatrixXd r(2, 2);
    r << 3, 1, 1, 3;
    ema_update(book, r, {1, 1}, 0.5);
    // N = 0.5 * 1 + 0.5 * 2 = 1.5, mu = 0.5 * (1, 1) + 0.5 * (4, 4) = (2.5, 2.5)
    CHECK(book.ema_count(1) == 1.5);
    CHECK(book.ema_sum.row(1) == Eigen::RowVector2d(2.5, 2.5));
    CHECK(book.codes.row(1) == Eigen::RowVector2d(2.5 / 1.5, 2.5 / 1.5));
    CHECK(book.ema_count(0) == 0.5);
    CHECK(book.codes.row(0) == Eigen::RowVector2d(0, 0));
  }
  SUBCASE("gamma 1 freezes the codes") {
    Codebook book = Codebook::from_codes(codes);
    Eigen::MatrixXd r(1, 2);
    r << 7, 7;
    ema_update(book, r, {2}, 1.0);
    CHECK(book.codes == codes);
  }
  SUBCASE("the pinned code never moves") {
    Codebook book = Codebook::from_codes(codes, true);
    Eigen::MatrixXd r(1, 2);
    r << 4, 4;
    ema_update(book, r, {0}, 0.0);
    CHECK(book.codes.row(0).isZero(0.0));
  }
  SUBCASE("gamma outside [0, 1]") {
    Codebook book = Codebook::from_codes(codes);
    CHECK_THROWS_AS(ema_update(book, codes, {0, 1, 2}, 1.5), ConfigError);
  }
}

TEST_CASE("sync_ema_to_codes restores mu = N c") {
  Eigen::MatrixXd codes(2, 2);
  codes << 1, 2, 3, 4;
  Codebook book = Codebook::from_codes(codes);
  book.ema_count << 2.0, 0.5;
  book.codes(1, 0) = 10.0;
  sync_ema_to_codes(book);
  CHECK(book.ema_sum.row(0) == Eigen::RowVector2d(2, 4));
  CHECK(book.ema_sum.row(1) == Eigen::RowVector2d(5, 2));
}

TEST_CASE("code reset replaces rarely used codes and clears the counters") {
  Rng rng(9);
  Eigen::MatrixXd codes = random_matrix(4, 3, rng);
  codes.row(0).setZero();
  Codebook book = Codebook::from_codes(codes, true);
  record_usage(book, {1, 1, 2});
  const Eigen::MatrixXd batch = random_matrix(5, 3, rng) + Eigen::MatrixXd::Constant(5, 3, 100.0);
  const std::vector<int> replaced = code_reset(book, batch, 1, rng);
  CHECK(replaced == std::vector<int>{3});
  CHECK(book.codes.row(0).isZero(0.0));
  CHECK(book.codes.row(1) == codes.row(1));
  CHECK(book.codes(3, 0) > 50.0);
  CHECK(book.ema_count(3) == 1.0);
  CHECK(book.ema_sum.row(3) == book.codes.row(3));
  for (int64_t u : book.usage) {
    CHECK(u == 0);
  }
}

TEST_CASE("soft assignment cases") {
  Eigen::MatrixXd codes(2, 2);
  codes << 1, 0, -1, 0;
  const Codebook two = Codebook::from_codes(codes);
  const Eigen::VectorXd q = soft_assignment(two, Eigen::Vector2d(0, 3), 1.0);
  CHECK(q(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(q(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(soft_assignment(two, Eigen::Vector2d(0.2, 0), 1e-6)(0) >= 0.999);
  CHECK_THROWS_AS(soft_assignment(two, Eigen::Vector2d(0, 0), 0.0), ConfigError);

  Eigen::MatrixXd three(3, 2);
  three << 0, 0, 1, 0, 0, 2;
  const Eigen::VectorXd p = soft_assignment(Codebook::from_codes(three), Eigen::Vector2d(1, 1), 1.0);
  // distances 2, 1, 2
  const double e1 = std::exp(-2.0), e2 = std::exp(-1.0);
  CHECK(std::abs(p(0) - e1 / (2 * e1 + e2)) <= 1e-9);
  CHECK(std::abs(p(1) - e2 / (2 * e1 + e2)) <= 1e-9);

  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd c = random_matrix(6, 3, rng, 3.0);
    const Eigen::VectorXd r = random_matrix(3, 1, rng, 3.0);
    const Eigen::VectorXd s = soft_assignment(Codebook::from_codes(c), r, 0.7);
    CHECK(std::abs(s.sum() - 1.0) <= 1e-9);
    Eigen::MatrixXd reversed = c.colwise().reverse();
    const Eigen::VectorXd sr = soft_assignment(Codebook::from_codes(reversed), r, 0.7);
    CHECK((sr.reverse() - s).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("soft assignment backward matches central differences") {
  Rng rng(8);
  Codebook book = Codebook::from_codes(random_matrix(5, 3, rng));
  Eigen::VectorXd r = random_matrix(3, 1, rng);
  const Eigen::VectorXd w = random_matrix(5, 1, rng);
  const double tau = 0.8;
  const Eigen::VectorXd q = soft_assignment(book, r, tau);
  const SoftAssignmentGrad g = soft_assignment_backward(book, r, q, w, tau);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd up = r, down = r;
    up(c) += h;
    down(c) -= h;
    const double fd = (w.dot(soft_assignment(book, up, tau)) - w.dot(soft_assignment(book, down, tau))) / (2 * h);
    CHECK(g.r(c) == doctest::Approx(fd).epsilon(1e-6));
  }
  for (int i = 0; i < 5; ++i) {
    for (int c = 0; c < 3; ++c) {
      const double keep = book.codes(i, c);
      book.codes(i, c) = keep + h;
      const double up = w.dot(soft_assignment(book, r, tau));
      book.codes(i, c) = keep - h;
      const double down = w.dot(soft_assignment(book, r, tau));
      book.codes(i, c) = keep;
      CHECK(g.codes(i, c) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("commitment loss cases") {
  RvqStack stack;
  stack.books.push_back(Codebook::from_codes(Eigen::MatrixXd::Zero(2, 2)));
  Eigen::MatrixXd r0(1, 2);
  r0 << 1, 0;
  const QuantizationTrace t = residual_encode(stack, r0, 1);
  const CommitmentLoss c = commitment_loss(t, 1);
  CHECK(c.value == 1.0);
  CHECK(c.grad_r[0] == 2.0 * r0);

  Eigen::MatrixXd on(2, 2);
  on << 0, 0, 0, 0;
  CHECK(commitment_loss(residual_encode(stack, on, 1), 1).value == 0.0);

  Rng rng(12);
  const RvqStack big = random_stack(3, 5, 4, rng);
  const Eigen::MatrixXd x = random_matrix(6, 4, rng);
  const QuantizationTrace tr = residual_encode(big, x, 3);
  const CommitmentLoss cl = commitment_loss(tr, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK((cl.grad_r[i] - 2.0 * (tr.r[i] - tr.z[i]) / 18.0).cwiseAbs().maxCoeff() <= 1e-15);
  }
  // Finite differences in r0 with the code choice held fixed.
  RvqStack one;
  one.books = {big.books[0]};
  const QuantizationTrace base = residual_encode(one, x, 1);
  auto value = [&](const Eigen::MatrixXd& r) {
    return commitment_loss(residual_encode_with_indices(one, r, {base.index[0]}, 1), 1).value;
  };
  const double h = 1e-6;
  Eigen::MatrixXd up = x, down = x;
  up(2, 1) += h;
  down(2, 1) -= h;
  CHECK(commitment_loss(base, 1).grad_r[0](2, 1) == doctest::Approx((value(up) - value(down)) / (2 * h)).epsilon(1e-4));
}

TEST_CASE("straight-through passes the code gradient to the input unchanged") {
  Rng rng(6);
  const RvqStack stack = random_stack(3, 6, 4, rng);
  const Eigen::MatrixXd r0 = random_matrix(5, 4, rng);
  for (int n = 1; n <= 3; ++n) {
    const QuantizationTrace t = residual_encode(stack, r0, n);
    const Eigen::MatrixXd g = random_matrix(5, 4, rng);
    // L = <g, sum of active codes>: the decoder-input gradient.
    std::vector<Eigen::MatrixXd> grad_z(3);
    for (int i = 0; i < n; ++i) {
      grad_z[i] = g;
    }
    const QuantizerGradient q = straight_through_backward(stack, t, grad_z, {});
    CHECK(q.r0 == g);
    // Telescoping leaves the whole decoder gradient on the last active book.
    for (int i = 0; i < 3; ++i) {
      Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(6, 4);
      if (i == n - 1) {
        for (int k = 0; k < 5; ++k) {
          expect.row(t.index[i][k]) += g.row(k);
        }
      }
      CHECK((q.codes[i] - expect).cwiseAbs().maxCoeff() <= 1e-12);
    }
    // A loss on z_0 alone.
    std::vector<Eigen::MatrixXd> only0(3);
    only0[0] = g;
    CHECK(straight_through_backward(stack, t, only0, {}).r0 == g);
  }
}

TEST_CASE("a loss on r[i+1] routes -1 to the selected code of book i only") {
  Rng rng(7);
  const RvqStack stack = random_stack(3, 6, 4, rng);
  const Eigen::MatrixXd r0 = random_matrix(5, 4, rng);
  const QuantizationTrace t = residual_encode(stack, r0, 3);
  for (int i = 0; i < 3; ++i) {
    const Eigen::MatrixXd g = random_matrix(5, 4, rng);
    std::vector<Eigen::MatrixXd> grad_r(4);
    grad_r[i + 1] = g;
    const QuantizerGradient q = straight_through_backward(stack, t, {}, grad_r);
    CHECK(q.r0.isZero(0.0));
    for (int b = 0; b < 3; ++b) {
      Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(6, 4);
      if (b == i) {
        for (int k = 0; k < 5; ++k) {
          expect.row(t.index[b][k]) -= g.row(k);
        }
      }
      CHECK((q.codes[b] - expect).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("sample_active_layers covers 1..N") {
  Rng rng(1);
  std::set<int> seen;
  for (int i = 0; i < 400; ++i) {
    const int n = sample_active_layers(4, rng);
    CHECK(n >= 1);
    CHECK(n <= 4);
    seen.insert(n);
  }
  CHECK(seen.size() == 4);
  CHECK_THROWS_AS(sample_active_layers(0, rng), ConfigError);
}

TEST_CASE("stack validation") {
  Rng rng(1);
  RvqStack stack = random_stack(3, 4, 2, rng);
  stack.content_cutoff = 3;
  CHECK_THROWS_AS(stack.validate(), ConfigError);
  stack.content_cutoff = 1;
  stack.validate();
  stack.books[1] = Codebook::from_codes(random_matrix(5, 2, rng));
  CHECK_THROWS_AS(stack.validate(), StructuralError);
}
