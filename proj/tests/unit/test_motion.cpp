#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "../support.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/eval/classifier.h"
#include "rvqmotion/motion/dataset.h"
#include "rvqmotion/motion/kinematics.h"
#include "rvqmotion/motion/mqm_io.h"
#include "rvqmotion/motion/rotation.h"
#include "rvqmotion/motion/synthetic.h"

using namespace rvqmotion;
using namespace rvqmotion::testing;

namespace {

Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Vector3d axis = random_matrix(3, 1, rng).normalized();
  return axis_angle(axis, std::numbers::pi * (2.0 * uniform_unit(rng) - 1.0));
}

double rms_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

} // namespace

TEST_CASE("feature layout arithmetic") {
  CHECK(FeatureLayout(2).dim() == 36);
  CHECK(FeatureLayout(24).dim() == 366);
  Rng rng(1);
  const MotionClip clip = random_clip(chain_skeleton(2), 1, rng);
  CHECK(assemble_features(clip).cols() == 36);
}

TEST_CASE("assemble and disassemble are inverse") {
  Rng rng(2);
  const Skeleton skel = chain_skeleton(4);
  const MotionClip clip = random_clip(skel, 9, rng, "x");
  const FeatureMatrix f = assemble_features(clip);
  const MotionClip back = disassemble_features(f, skel, clip.fps, clip.style_label);
  CHECK((assemble_features(back) - f).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(back.style_label == clip.style_label);

  MotionClip broken = clip;
  broken.frames[3].velocity.pop_back();
  CHECK_THROWS_AS(assemble_features(broken), StructuralError);
  CHECK_THROWS_AS(disassemble_features(f.leftCols(10), skel, 30.0), StructuralError);
}

TEST_CASE("6D rotations") {
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
  CHECK(sixd_to_rotmat(rotmat_to_sixd(eye)) == eye);
  CHECK((sixd_to_rotmat(2.0 * rotmat_to_sixd(eye)) - eye).norm() <= 1e-15);
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d r = random_rotation(rng);
    worst = std::max(worst, (sixd_to_rotmat(rotmat_to_sixd(r)) - r).norm());
  }
  CHECK(worst <= 1e-6);
  // Arbitrary 6D vectors give proper rotations.
  for (int i = 0; i < 100; ++i) {
    const Vector6d v = random_matrix(6, 1, rng);
    const Eigen::Matrix3d r = sixd_to_rotmat(v);
    CHECK((r.transpose() * r - eye).norm() <= 1e-5);
    CHECK(std::abs(r.determinant() - 1.0) <= 1e-5);
  }
  CHECK_THROWS_AS(sixd_to_rotmat(Vector6d::Zero()), NumericError);
  Vector6d parallel;
  parallel << 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(sixd_to_rotmat(parallel), NumericError);
}

TEST_CASE("6D backward matches central differences") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Vector6d v = random_matrix(6, 1, rng);
    const Eigen::Matrix3d w = random_matrix(3, 3, rng);
    const Vector6d g = sixd_to_rotmat_backward(v, w);
    for (int i = 0; i < 6; ++i) {
      Vector6d up = v, down = v;
      up(i) += 1e-6;
      down(i) -= 1e-6;
      const double fd = ((sixd_to_rotmat(up).cwiseProduct(w)).sum() - (sixd_to_rotmat(down).cwiseProduct(w)).sum()) / 2e-6;
      CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("rotation log inverts axis-angle") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d axis = random_matrix(3, 1, rng).normalized();
    const double angle = 0.1 + 2.5 * uniform_unit(rng);
    CHECK((rotation_log(axis_angle(axis, angle)) - axis * angle).norm() <= 1e-9);
  }
}

TEST_CASE("forward kinematics hand cases") {
  Skeleton skel;
  skel.parents = {Skeleton::kNoParent, 0, 1, 0};
  skel.rest_offsets = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0, 0, 3}};
  std::vector<Eigen::Matrix3d> rot(4, Eigen::Matrix3d::Identity());
  const Eigen::Vector3d root(0.5, 1, 0);
  const FkResult id = forward_kinematics(skel, rot, root);
  CHECK(id.positions[1] == root + Eigen::Vector3d(1, 0, 0));
  CHECK(id.positions[2] == root + Eigen::Vector3d(1, 2, 0));
  CHECK(id.positions[3] == root + Eigen::Vector3d(0, 0, 3));

  rot[0] = axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 2);
  const FkResult turned = forward_kinematics(skel, rot, root);
  CHECK((turned.positions[1] - (root + Eigen::Vector3d(0, 1, 0))).norm() <= 1e-12);

  // Sibling order does not matter.
  Skeleton swapped;
  swapped.parents = {Skeleton::kNoParent, 0, 0, 2};
  swapped.rest_offsets = {{0, 0, 0}, {0, 0, 3}, {1, 0, 0}, {0, 2, 0}};
  Rng rng(6);
  std::vector<Eigen::Matrix3d> r4;
  for (int j = 0; j < 4; ++j) r4.push_back(random_rotation(rng));
  const FkResult a = forward_kinematics(skel, r4, root);
  const std::vector<Eigen::Matrix3d> r4s = {r4[0], r4[3], r4[1], r4[2]};
  const FkResult b = forward_kinematics(swapped, r4s, root);
  CHECK((a.positions[3] - b.positions[1]).norm() <= 1e-12);
  CHECK((a.positions[2] - b.positions[3]).norm() <= 1e-12);

  std::vector<Eigen::Matrix3d> bad = rot;
  bad[2] *= 1.1;
  CHECK_THROWS_AS(forward_kinematics(skel, bad, root), NumericError);
}

TEST_CASE("forward kinematics backward matches central differences") {
  Rng rng(7);
  const Skeleton skel = chain_skeleton(4);
  std::vector<Eigen::Matrix3d> rot;
  for (int j = 0; j < 4; ++j) rot.push_back(random_rotation(rng));
  const Eigen::Vector3d root = random_matrix(3, 1, rng);
  std::vector<Eigen::Vector3d> w;
  for (int j = 0; j < 4; ++j) w.push_back(random_matrix(3, 1, rng));
  auto value = [&](const std::vector<Eigen::Matrix3d>& r, const Eigen::Vector3d& p) {
    // Linearized in the rotation entries: FK is multilinear in them.
    std::vector<Eigen::Matrix3d> g(4, Eigen::Matrix3d::Identity());
    std::vector<Eigen::Vector3d> pos(4);
    for (int j : skel.topological_order()) {
      const int parent = skel.parents[j];
      if (parent < 0) {
        g[j] = r[j];
        pos[j] = p;
      } else {
        g[j] = g[parent] * r[j];
        pos[j] = pos[parent] + g[parent] * skel.rest_offsets[j];
      }
    }
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += w[j].dot(pos[j]);
    return s;
  };
  const FkResult fwd = forward_kinematics(skel, rot, root);
  const FkGradient g = forward_kinematics_backward(skel, rot, fwd, w);
  for (int j = 0; j < 4; ++j) {
    for (int e = 0; e < 9; ++e) {
      auto up = rot, down = rot;
      up[j].data()[e] += 1e-6;
      down[j].data()[e] -= 1e-6;
      CHECK(g.local_rotations[j].data()[e] == doctest::Approx((value(up, root) - value(down, root)) / 2e-6).epsilon(1e-6));
    }
  }
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d up = root, down = root;
    up(c) += 1e-6;
    down(c) -= 1e-6;
    CHECK(g.root_position(c) == doctest::Approx((value(rot, up) - value(rot, down)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("finite differences") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(5, 2, 3.0);
  CHECK(finite_diff(constant, 30.0).isZero(0.0));
  Eigen::MatrixXd linear(6, 1), quad(6, 1);
  for (int t = 0; t < 6; ++t) {
    linear(t) = 2.5 * t;
    quad(t) = t * t;
  }
  CHECK(finite_diff(linear, 1.0).isApproxToConstant(2.5));
  const Eigen::MatrixXd dq = finite_diff(quad, 1.0);
  for (int t = 0; t < 5; ++t) {
    CHECK(dq(t) == 2 * t + 1);
  }
  CHECK(dq(5) == dq(4));
  CHECK_THROWS_AS(finite_diff(Eigen::MatrixXd::Zero(1, 3), 1.0), StructuralError);

  // Adjoint identity <D x, y> = <x, D^T y>.
  Rng rng(8);
  const Eigen::MatrixXd x = random_matrix(7, 3, rng), y = random_matrix(7, 3, rng);
  CHECK(finite_diff(x, 4.0).cwiseProduct(y).sum() ==
        doctest::Approx(x.cwiseProduct(finite_diff_backward(y, 4.0)).sum()).epsilon(1e-12));
}

TEST_CASE("root integration") {
  const Eigen::MatrixXd still = Eigen::MatrixXd::Zero(10, 3);
  const std::vector<double> no_turn(60, 0.0);
  RootPose start;
  start.position = Eigen::Vector3d(1, 0, 2);
  const RootTrajectory s = integrate_root(still, std::span<const double>(no_turn.data(), 10), 30.0, start);
  CHECK(s.final_pose.position == start.position);

  Eigen::MatrixXd forward = Eigen::MatrixXd::Zero(60, 3);
  forward.col(2).setOnes();
  const RootTrajectory f = integrate_root(forward, no_turn, 30.0);
  CHECK(std::abs(f.final_pose.position.norm() - 2.0) <= 1e-6);

  // Circle of radius v / w: the farthest point is one diameter away.
  const double fps = 120.0, v = 1.5, w = 0.75;
  const int frames = static_cast<int>(std::ceil(2 * std::numbers::pi / w * fps));
  Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(frames, 3);
  vel.col(2).setConstant(v);
  const std::vector<double> rates(frames, w);
  const RootTrajectory c = integrate_root(vel, rates, fps);
  const double diameter = (c.positions.rowwise() - c.positions.row(0)).rowwise().norm().maxCoeff();
  CHECK(std::abs(diameter / 2 - v / w) <= 0.02 * v / w);
}

TEST_CASE("MQM round trip and errors") {
  Rng rng(9);
  const MotionClip clip = random_clip(chain_skeleton(3), 5, rng, "wide legs");
  std::stringstream ss;
  write_clip(ss, clip);
  const MotionClip back = read_clip(ss);
  CHECK(assemble_features(back) == assemble_features(clip));
  CHECK(back.skeleton == clip.skeleton);
  CHECK(back.fps == clip.fps);
  CHECK(back.style_label == clip.style_label);

  const MotionClip tiny = random_clip(chain_skeleton(1), 1, rng);
  std::stringstream t1;
  write_clip(t1, tiny);
  const MotionClip tb = read_clip(t1);
  CHECK(tb.frame_count() == 1);
  CHECK(tb.skeleton.joint_count() == 1);

  std::stringstream full;
  write_clip(full, clip);
  const std::string text = full.str();
  const std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  std::stringstream tr(truncated);
  try {
    read_clip(tr);
    FAIL("truncated file parsed");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("frame 4") != std::string::npos);
  }
  std::string bad = text;
  bad.replace(bad.find('\n') + 1, 1, "nan");
  std::stringstream nb(bad);
  CHECK_THROWS_AS(read_clip(nb), ParseError);
  std::stringstream garbage("not json\n1,2\n");
  CHECK_THROWS_AS(read_clip(garbage), ParseError);
  CHECK_THROWS_AS(load_clip("/nonexistent/dir/clip.mqm"), IoError);
}

TEST_CASE("windowing") {
  Rng rng(10);
  CHECK(window_count(100, 40, 20) == 4);
  CHECK(window_count(39, 40, 20) == 0);
  for (int i = 0; i < 100; ++i) {
    const int t = 1 + static_cast<int>(uniform_int(rng, 0, 200));
    const int w = 1 + static_cast<int>(uniform_int(rng, 0, 60));
    const int s = 1 + static_cast<int>(uniform_int(rng, 0, 30));
    CHECK(window_count(t, w, s) == (t >= w ? (t - w) / s + 1 : 0));
  }
  const MotionClip clip = random_clip(chain_skeleton(2), 100, rng, "lab");
  const auto windows = window_dataset({clip}, 40, 20, 4);
  REQUIRE(windows.size() == 4);
  const FeatureMatrix all = assemble_features(clip);
  CHECK(assemble_features(windows[1]) == all.middleRows(20, 40));
  CHECK(windows[3].style_label == clip.style_label);
  CHECK_THROWS_AS(window_dataset({clip}, 42, 20, 4), ConfigError);
}

TEST_CASE("labeled datasets") {
  Rng rng(11);
  const Skeleton skel = chain_skeleton(2);
  std::vector<MotionClip> clips = {random_clip(skel, 4, rng, "b"), random_clip(skel, 4, rng, "a")};
  const LabeledDataset d = make_labeled_dataset(clips);
  CHECK(d.alphabet == std::vector<std::string>{"a", "b"});
  CHECK(d.labels == std::vector<int>{1, 0});
  CHECK_THROWS_AS(make_labeled_dataset(clips, {"a"}), ConfigError);
  clips[0].style_label.reset();
  CHECK_THROWS_AS(make_labeled_dataset(clips), ConfigError);
}

TEST_CASE("normalizer is invertible") {
  Rng rng(12);
  std::vector<FeatureMatrix> samples = {random_matrix(6, 5, rng, 3.0), random_matrix(4, 5, rng, 3.0)};
  samples[0].col(2).setConstant(1.0);
  samples[1].col(2).setConstant(1.0);
  const Normalizer n = Normalizer::fit(samples);
  CHECK(n.scale(2) == Normalizer::kMinScale);
  CHECK((n.denormalize(n.normalize(samples[0])) - samples[0]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("skeleton validation") {
  Skeleton s = chain_skeleton(3);
  s.validate();
  CHECK(s.is_descendant(2, 0));
  CHECK_FALSE(s.is_descendant(0, 2));
  Skeleton cyc = s;
  cyc.parents = {Skeleton::kNoParent, 2, 1};
  CHECK_THROWS_AS(cyc.validate(), StructuralError);
  Skeleton two = s;
  two.parents = {Skeleton::kNoParent, Skeleton::kNoParent, 1};
  CHECK_THROWS_AS(two.validate(), StructuralError);
  Skeleton off = s;
  off.rest_offsets[0] = Eigen::Vector3d(0, 1, 0);
  CHECK_THROWS_AS(off.validate(), StructuralError);
}

TEST_CASE("synthetic generator calibration") {
  const MotionClip a = generate_synthetic(0, 0, 90, 1);
  const MotionClip b = generate_synthetic(0, 0, 90, 1);
  CHECK(assemble_features(a) == assemble_features(b));
  CHECK(a.style_label == std::optional<std::string>("neutral"));
  CHECK(a.skeleton.joint_count() >= 8);
  CHECK(a.skeleton.joint_count() <= 24);
  CHECK_THROWS_AS(generate_synthetic(4, 0, 10, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(0, 6, 10, 1), ConfigError);

  for (uint64_t seed : {1, 2, 3}) {
    for (int c = 0; c < kSyntheticContents; ++c) {
      const Eigen::MatrixXd base = root_trajectory(generate_synthetic(c, 0, 240, seed));
      for (int s = 1; s < kSyntheticStyles; ++s) {
        CHECK(rms_distance(base, root_trajectory(generate_synthetic(c, s, 240, seed))) <= 0.05);
      }
      for (int other = c + 1; other < kSyntheticContents; ++other) {
        CHECK(rms_distance(base, root_trajectory(generate_synthetic(other, 0, 240, seed))) >= 0.5);
      }
    }
  }
}

TEST_CASE("synthetic styles are separable by a held-out classifier") {
  std::vector<MotionClip> clips;
  for (int c = 0; c < kSyntheticContents; ++c) {
    for (int s = 0; s < kSyntheticStyles; ++s) {
      for (uint64_t k = 0; k < 3; ++k) {
        clips.push_back(generate_synthetic(c, s, 128, 100 + k));
      }
    }
  }
  std::vector<int> groups;
  for (size_t i = 0; i < clips.size(); ++i) {
    groups.insert(groups.end(), window_count(128, 64, 32), static_cast<int>(i));
  }
  const LabeledDataset data = make_labeled_dataset(window_dataset(clips, 64, 32, 16), {}, groups);
  ClassifierConfig cc;
  cc.steps = 200;
  cc.seed = 3;
  const StyleClassifier cls = train_classifier(data, cc);
  CHECK(cls.heldout_count > 0);
  CHECK(cls.heldout_accuracy >= 95.0);
}
