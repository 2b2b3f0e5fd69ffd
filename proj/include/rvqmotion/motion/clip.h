#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/motion/rotation.h"
#include "rvqmotion/motion/skeleton.h"

namespace rvqmotion {

// One skeletal state. Everything except `height` is expressed in the
// root-local (heading-aligned, ground-projected) frame.
struct FrameState {
  std::vector<Eigen::Vector3d> position;          // meters
  std::vector<Vector6d> orientation;              // parent-relative, 6D
  std::vector<Eigen::Vector3d> velocity;          // m/s
  std::vector<Eigen::Vector3d> angular_velocity;  // rad/s
  Eigen::Vector3d height = Eigen::Vector3d::Zero();
  Eigen::Vector3d up = Eigen::Vector3d::UnitY();

  static FrameState zeros(int joint_count);
};

struct MotionClip {
  Skeleton skeleton;
  std::vector<FrameState> frames;
  double fps = 30.0;
  std::optional<std::string> style_label;

  int frame_count() const {
    return static_cast<int>(frames.size());
  }

  // Throws StructuralError on joint-count mismatches or an empty clip.
  void validate() const;
};

// Per-frame flattening [p | R | v | w | h | u].
struct FeatureLayout {
  int joints = 0;

  explicit FeatureLayout(int joint_count) : joints(joint_count) {}

  static constexpr int kPerJoint = 3 + 6 + 3 + 3;

  int dim() const {
    return joints * kPerJoint + 6;
  }
  int position(int j) const {
    return 3 * j;
  }
  int orientation(int j) const {
    return 3 * joints + 6 * j;
  }
  int velocity(int j) const {
    return 9 * joints + 3 * j;
  }
  int angular_velocity(int j) const {
    return 12 * joints + 3 * j;
  }
  int height() const {
    return 15 * joints;
  }
  int up() const {
    return 15 * joints + 3;
  }
};

// Feature matrix, one row per frame.
using FeatureMatrix = Eigen::MatrixXd;

FeatureMatrix assemble_features(const MotionClip& clip);

// Inverse of assemble_features; the caller supplies the skeleton and fps.
MotionClip disassemble_features(const FeatureMatrix& features,
                                const Skeleton& skeleton,
                                double fps,
                                std::optional<std::string> style_label = std::nullopt);

// Per-feature affine normalization with a floor on the scale so constant
// features stay finite.
struct Normalizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static constexpr double kMinScale = 1e-2;

  static Normalizer identity(int dim);
  static Normalizer fit(const std::vector<FeatureMatrix>& samples);

  FeatureMatrix normalize(const FeatureMatrix& features) const;
  FeatureMatrix denormalize(const FeatureMatrix& normalized) const;

  int dim() const {
    return static_cast<int>(mean.size());
  }
};

} // namespace rvqmotion
