#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/motion/clip.h"
#include "rvqmotion/motion/skeleton.h"

namespace rvqmotion {

struct FkResult {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Matrix3d> global_rotations;
};

// Composes parent-relative rotations down the tree. Rotations must be
// orthonormal within 1e-4 (NumericError otherwise).
FkResult forward_kinematics(const Skeleton& skeleton,
                            std::span<const Eigen::Matrix3d> local_rotations,
                            const Eigen::Vector3d& root_position);

struct FkGradient {
  std::vector<Eigen::Matrix3d> local_rotations;
  Eigen::Vector3d root_position = Eigen::Vector3d::Zero();
};

// Vector-Jacobian product of forward_kinematics w.r.t. its inputs.
FkGradient forward_kinematics_backward(const Skeleton& skeleton,
                                       std::span<const Eigen::Matrix3d> local_rotations,
                                       const FkResult& forward,
                                       std::span<const Eigen::Vector3d> grad_positions);

// Forward difference scaled by fps, one row per frame. The last frame copies
// the previous derivative. Requires at least two frames.
Eigen::MatrixXd finite_diff(const Eigen::MatrixXd& series, double fps);

// Adjoint of finite_diff.
Eigen::MatrixXd finite_diff_backward(const Eigen::MatrixXd& grad, double fps);

struct RootPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;  // radians about +y; yaw 0 faces +z
};

struct RootTrajectory {
  Eigen::MatrixXd positions;  // T x 3, world frame, pose at the start of each frame
  std::vector<double> yaws;
  RootPose final_pose;        // after integrating all T steps
};

// Explicit Euler integration of root-local velocities and yaw rates.
RootTrajectory integrate_root(const Eigen::MatrixXd& local_velocities,
                              std::span<const double> yaw_rates,
                              double fps,
                              const RootPose& initial = {});

// Heading rotation about the world up axis.
Eigen::Matrix3d yaw_rotation(double yaw);

// World root trajectory of a clip: integrates the root velocity and the
// up-axis component of the root angular velocity from the origin, with the
// vertical coordinate taken from the height term.
Eigen::MatrixXd root_trajectory(const MotionClip& clip);

} // namespace rvqmotion
