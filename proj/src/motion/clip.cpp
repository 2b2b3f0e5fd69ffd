#include "rvqmotion/motion/clip.h"

#include <cmath>
#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

FrameState FrameState::zeros(int joint_count) {
  FrameState s;
  s.position.assign(joint_count, Eigen::Vector3d::Zero());
  s.orientation.assign(joint_count, rotmat_to_sixd(Eigen::Matrix3d::Identity()));
  s.velocity.assign(joint_count, Eigen::Vector3d::Zero());
  s.angular_velocity.assign(joint_count, Eigen::Vector3d::Zero());
  return s;
}

void MotionClip::validate() const {
  skeleton.validate();
  if (frames.empty()) {
    throw StructuralError("motion clip has no frames");
  }
  const size_t j = static_cast<size_t>(skeleton.joint_count());
  for (size_t t = 0; t < frames.size(); ++t) {
    const auto& f = frames[t];
    if (f.position.size() != j || f.orientation.size() != j || f.velocity.size() != j ||
        f.angular_velocity.size() != j) {
      throw StructuralError("frame " + std::to_string(t) + " joint count does not match skeleton");
    }
  }
}

FeatureMatrix assemble_features(const MotionClip& clip) {
  clip.validate();
  const int joints = clip.skeleton.joint_count();
  const FeatureLayout layout(joints);
  FeatureMatrix out(clip.frame_count(), layout.dim());
  for (int t = 0; t < clip.frame_count(); ++t) {
    const auto& f = clip.frames[t];
    auto row = out.row(t);
    for (int j = 0; j < joints; ++j) {
      row.segment<3>(layout.position(j)) = f.position[j].transpose();
      row.segment<6>(layout.orientation(j)) = f.orientation[j].transpose();
      row.segment<3>(layout.velocity(j)) = f.velocity[j].transpose();
      row.segment<3>(layout.angular_velocity(j)) = f.angular_velocity[j].transpose();
    }
    row.segment<3>(layout.height()) = f.height.transpose();
    row.segment<3>(layout.up()) = f.up.transpose();
  }
  return out;
}

MotionClip disassemble_features(const FeatureMatrix& features,
                                const Skeleton& skeleton,
                                double fps,
                                std::optional<std::string> style_label) {
  const int joints = skeleton.joint_count();
  const FeatureLayout layout(joints);
  if (features.cols() != layout.dim()) {
    throw StructuralError("feature width " + std::to_string(features.cols()) + " does not match " +
                          std::to_string(layout.dim()) + " for " + std::to_string(joints) + " joints");
  }
  MotionClip clip;
  clip.skeleton = skeleton;
  clip.fps = fps;
  clip.style_label = std::move(style_label);
  clip.frames.reserve(features.rows());
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    const auto row = features.row(t);
    FrameState f = FrameState::zeros(joints);
    for (int j = 0; j < joints; ++j) {
      f.position[j] = row.segment<3>(layout.position(j)).transpose();
      f.orientation[j] = row.segment<6>(layout.orientation(j)).transpose();
      f.velocity[j] = row.segment<3>(layout.velocity(j)).transpose();
      f.angular_velocity[j] = row.segment<3>(layout.angular_velocity(j)).transpose();
    }
    f.height = row.segment<3>(layout.height()).transpose();
    f.up = row.segment<3>(layout.up()).transpose();
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

Normalizer Normalizer::identity(int dim) {
  return {Eigen::RowVectorXd::Zero(dim), Eigen::RowVectorXd::Ones(dim)};
}

Normalizer Normalizer::fit(const std::vector<FeatureMatrix>& samples) {
  if (samples.empty()) {
    throw StructuralError("cannot fit normalization on an empty dataset");
  }
  const Eigen::Index dim = samples.front().cols();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(dim);
  double rows = 0;
  for (const auto& s : samples) {
    if (s.cols() != dim) {
      throw StructuralError("feature width mismatch while fitting normalization");
    }
    sum += s.colwise().sum();
    rows += static_cast<double>(s.rows());
  }
  const Eigen::RowVectorXd mean = sum / rows;
  for (const auto& s : samples) {
    sq += (s.rowwise() - mean).array().square().matrix().colwise().sum();
  }
  Eigen::RowVectorXd scale = (sq / rows).array().sqrt().matrix();
  scale = scale.cwiseMax(kMinScale);
  return {mean, scale};
}

FeatureMatrix Normalizer::normalize(const FeatureMatrix& features) const {
  if (features.cols() != dim()) {
    throw StructuralError("feature width does not match normalizer");
  }
  return ((features.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

FeatureMatrix Normalizer::denormalize(const FeatureMatrix& normalized) const {
  if (normalized.cols() != dim()) {
    throw StructuralError("feature width does not match normalizer");
  }
  return ((normalized.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
}

} // namespace rvqmotion
