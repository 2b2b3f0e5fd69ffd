#include "rvqmotion/codec/losses.h"

#include "rvqmotion/common/errors.h"
#include "rvqmotion/motion/rotation.h"

namespace rvqmotion {

namespace {

struct FkFrames {
  std::vector<std::vector<Vector6d>> sixd;
  std::vector<std::vector<Eigen::Matrix3d>> local;
  std::vector<FkResult> fk;
  Eigen::MatrixXd positions;  // T x 3J
};

FkFrames run_fk(const Skeleton& skeleton, const FeatureMatrix& raw) {
  const int j_count = skeleton.joint_count();
  const FeatureLayout layout(j_count);
  const int root = skeleton.root();
  const Eigen::Index t = raw.rows();
  FkFrames out;
  out.sixd.resize(t);
  out.local.resize(t);
  out.fk.reserve(t);
  out.positions.resize(t, 3 * j_count);
  for (Eigen::Index f = 0; f < t; ++f) {
    auto& sixd = out.sixd[f];
    auto& local = out.local[f];
    sixd.resize(j_count);
    local.resize(j_count);
    for (int j = 0; j < j_count; ++j) {
      sixd[j] = raw.row(f).segment<6>(layout.orientation(j)).transpose();
      local[j] = sixd_to_rotmat(sixd[j]);
    }
    const Eigen::Vector3d root_pos = raw.row(f).segment<3>(layout.position(root)).transpose();
    out.fk.push_back(forward_kinematics(skeleton, local, root_pos));
    for (int j = 0; j < j_count; ++j) {
      out.positions.block<1, 3>(f, 3 * j) = out.fk.back().positions[j].transpose();
    }
  }
  return out;
}

} // namespace

Eigen::RowVectorXd feature_weights(const CodecConfig& config, const Skeleton& skeleton) {
  const FeatureLayout layout(skeleton.joint_count());
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Ones(layout.dim());
  w.segment<3>(layout.velocity(skeleton.root())).setConstant(config.root_velocity_weight);
  w.segment<3>(layout.up()).setConstant(config.up_weight);
  return w;
}

Eigen::MatrixXd fk_positions(const Skeleton& skeleton, const FeatureMatrix& features) {
  return run_fk(skeleton, features).positions;
}

MotionLoss::MotionLoss(Skeleton skeleton, Normalizer normalizer, Eigen::RowVectorXd weights)
    : skeleton_(std::move(skeleton)), normalizer_(std::move(normalizer)), weights_(std::move(weights)) {
  if (weights_.size() != normalizer_.dim() || normalizer_.dim() != FeatureLayout(skeleton_.joint_count()).dim()) {
    throw StructuralError("loss weights, normalizer and skeleton disagree on the feature dimension");
  }
}

MotionLoss MotionLoss::for_model(const CodecModel& model) {
  return MotionLoss(model.skeleton, model.normalizer, feature_weights(model.config, model.skeleton));
}

MotionLossValues MotionLoss::evaluate(const FeatureMatrix& target,
                                      const FeatureMatrix& output,
                                      const LossCoefficients* coefficients,
                                      FeatureMatrix* grad) const {
  if (target.rows() != output.rows() || target.cols() != output.cols() || target.cols() != weights_.size()) {
    throw StructuralError("loss inputs must share the T x F shape of the model");
  }
  const Eigen::Index t = target.rows();
  const Eigen::Index f = target.cols();
  MotionLossValues v;

  const Eigen::MatrixXd diff = (target - output).array().rowwise() * weights_.array();
  v.rec = diff.squaredNorm() / static_cast<double>(t * f);

  const FkFrames gt = run_fk(skeleton_, normalizer_.denormalize(target));
  const FeatureMatrix raw_out = normalizer_.denormalize(output);
  const FkFrames out = run_fk(skeleton_, raw_out);
  const double pos_count = static_cast<double>(out.positions.size());

  const Eigen::MatrixXd e_pos = out.positions - gt.positions;
  v.fk = e_pos.squaredNorm() / pos_count;

  // Per-frame differences: scale-free w.r.t. the capture rate.
  const Eigen::MatrixXd vel_out = finite_diff(out.positions, 1.0);
  const Eigen::MatrixXd e_vel = vel_out - finite_diff(gt.positions, 1.0);
  v.vel = e_vel.squaredNorm() / pos_count;
  const Eigen::MatrixXd acc_out = finite_diff(vel_out, 1.0);
  v.acc = acc_out.squaredNorm() / pos_count;

  if (grad == nullptr) {
    return v;
  }
  const LossCoefficients unit{1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0};
  const LossCoefficients& k = coefficients != nullptr ? *coefficients : unit;

  Eigen::MatrixXd g_out = (-2.0 * k.rec / static_cast<double>(t * f)) *
                          (diff.array().rowwise() * weights_.array()).matrix();

  Eigen::MatrixXd g_pos = (2.0 * k.fk / pos_count) * e_pos;
  g_pos += finite_diff_backward((2.0 * k.vel / pos_count) * e_vel, 1.0);
  g_pos += finite_diff_backward(finite_diff_backward((2.0 * k.acc / pos_count) * acc_out, 1.0), 1.0);

  const int j_count = skeleton_.joint_count();
  const FeatureLayout layout(j_count);
  const int root = skeleton_.root();
  Eigen::MatrixXd g_raw = Eigen::MatrixXd::Zero(t, f);
  std::vector<Eigen::Vector3d> gp(j_count);
  for (Eigen::Index r = 0; r < t; ++r) {
    for (int j = 0; j < j_count; ++j) {
      gp[j] = g_pos.block<1, 3>(r, 3 * j).transpose();
    }
    const FkGradient gfk = forward_kinematics_backward(skeleton_, out.local[r], out.fk[r], gp);
    for (int j = 0; j < j_count; ++j) {
      g_raw.block<1, 6>(r, layout.orientation(j)) =
          sixd_to_rotmat_backward(out.sixd[r][j], gfk.local_rotations[j]).transpose();
    }
    g_raw.block<1, 3>(r, layout.position(root)) += gfk.root_position.transpose();
  }
  // raw = normalized * scale + mean
  g_out += (g_raw.array().rowwise() * normalizer_.scale.array()).matrix();
  *grad = std::move(g_out);
  return v;
}

std::map<std::string, double> loss_suite(const CodecModel& model,
                                         const FeatureMatrix& target,
                                         const FeatureMatrix& reconstruction) {
  const MotionLoss loss = MotionLoss::for_model(model);
  const MotionLossValues v =
      loss.evaluate(model.normalizer.normalize(target), model.normalizer.normalize(reconstruction));
  return {{"rec", v.rec}, {"fk", v.fk}, {"vel", v.vel}, {"acc", v.acc}};
}

} // namespace rvqmotion
