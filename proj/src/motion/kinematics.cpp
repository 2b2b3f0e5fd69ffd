#include "rvqmotion/motion/kinematics.h"

#include <cmath>
#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

constexpr double kOrthonormalTolerance = 1e-4;

void check_rotation(const Eigen::Matrix3d& r, int joint) {
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= kOrthonormalTolerance)) {
    throw NumericError("rotation of joint " + std::to_string(joint) + " is not orthonormal");
  }
}

} // namespace

FkResult forward_kinematics(const Skeleton& skeleton,
                            std::span<const Eigen::Matrix3d> local_rotations,
                            const Eigen::Vector3d& root_position) {
  const int n = skeleton.joint_count();
  if (static_cast<int>(local_rotations.size()) != n) {
    throw StructuralError("rotation count does not match skeleton");
  }
  FkResult out;
  out.positions.resize(n);
  out.global_rotations.resize(n);
  for (int j : skeleton.topological_order()) {
    check_rotation(local_rotations[j], j);
    const int p = skeleton.parents[j];
    if (p == Skeleton::kNoParent) {
      out.global_rotations[j] = local_rotations[j];
      out.positions[j] = root_position;
    } else {
      out.global_rotations[j] = out.global_rotations[p] * local_rotations[j];
      out.positions[j] = out.positions[p] + out.global_rotations[p] * skeleton.rest_offsets[j];
    }
  }
  return out;
}

FkGradient forward_kinematics_backward(const Skeleton& skeleton,
                                       std::span<const Eigen::Matrix3d> local_rotations,
                                       const FkResult& forward,
                                       std::span<const Eigen::Vector3d> grad_positions) {
  const int n = skeleton.joint_count();
  std::vector<Eigen::Vector3d> gp(grad_positions.begin(), grad_positions.end());
  std::vector<Eigen::Matrix3d> gG(n, Eigen::Matrix3d::Zero());
  FkGradient out;
  out.local_rotations.assign(n, Eigen::Matrix3d::Zero());

  const auto order = skeleton.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int j = *it;
    const int p = skeleton.parents[j];
    if (p == Skeleton::kNoParent) {
      out.local_rotations[j] = gG[j];
      out.root_position = gp[j];
      continue;
    }
    gp[p] += gp[j];
    gG[p] += gp[j] * skeleton.rest_offsets[j].transpose();
    gG[p] += gG[j] * local_rotations[j].transpose();
    out.local_rotations[j] = forward.global_rotations[p].transpose() * gG[j];
  }
  return out;
}

Eigen::MatrixXd finite_diff(const Eigen::MatrixXd& series, double fps) {
  const Eigen::Index t = series.rows();
  if (t < 2) {
    throw StructuralError("finite differences need at least 2 frames, got " + std::to_string(t));
  }
  Eigen::MatrixXd out(t, series.cols());
  out.topRows(t - 1) = (series.bottomRows(t - 1) - series.topRows(t - 1)) * fps;
  out.row(t - 1) = out.row(t - 2);
  return out;
}

Eigen::MatrixXd finite_diff_backward(const Eigen::MatrixXd& grad, double fps) {
  const Eigen::Index t = grad.rows();
  if (t < 2) {
    throw StructuralError("finite differences need at least 2 frames, got " + std::to_string(t));
  }
  Eigen::MatrixXd g = grad.topRows(t - 1);
  g.row(t - 2) += grad.row(t - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t, grad.cols());
  out.bottomRows(t - 1) += g * fps;
  out.topRows(t - 1) -= g * fps;
  return out;
}

Eigen::Matrix3d yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

RootTrajectory integrate_root(const Eigen::MatrixXd& local_velocities,
                              std::span<const double> yaw_rates,
                              double fps,
                              const RootPose& initial) {
  const Eigen::Index t = local_velocities.rows();
  if (local_velocities.cols() != 3 || static_cast<Eigen::Index>(yaw_rates.size()) != t) {
    throw StructuralError("root integration expects T x 3 velocities and T yaw rates");
  }
  if (!(fps > 0)) {
    throw ConfigError("fps must be positive");
  }
  const double dt = 1.0 / fps;
  RootTrajectory out;
  out.positions.resize(t, 3);
  out.yaws.resize(t);
  Eigen::Vector3d pos = initial.position;
  double yaw = initial.yaw;
  for (Eigen::Index i = 0; i < t; ++i) {
    out.positions.row(i) = pos.transpose();
    out.yaws[i] = yaw;
    pos += yaw_rotation(yaw) * local_velocities.row(i).transpose() * dt;
    yaw += yaw_rates[i] * dt;
  }
  out.final_pose = {pos, yaw};
  return out;
}

Eigen::MatrixXd root_trajectory(const MotionClip& clip) {
  const int root = clip.skeleton.root();
  const int t = clip.frame_count();
  Eigen::MatrixXd vel(t, 3);
  std::vector<double> yaw_rates(t);
  for (int i = 0; i < t; ++i) {
    const auto& f = clip.frames[i];
    vel.row(i) = f.velocity[root].transpose();
    const double up_norm = f.up.norm();
    const Eigen::Vector3d up = up_norm > 0 ? Eigen::Vector3d(f.up / up_norm) : Eigen::Vector3d::UnitY();
    yaw_rates[i] = f.angular_velocity[root].dot(up);
  }
  RootTrajectory traj = integrate_root(vel, yaw_rates, clip.fps);
  for (int i = 0; i < t; ++i) {
    traj.positions(i, 1) = clip.frames[i].height.y();
  }
  return traj.positions;
}

} // namespace rvqmotion
