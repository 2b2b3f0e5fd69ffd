#include "rvqmotion/motion/rotation.h"

#include <Eigen/Geometry>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

namespace {

constexpr double kDegenerateNorm = 1e-8;

} // namespace

Vector6d rotmat_to_sixd(const Eigen::Matrix3d& rotation) {
  Vector6d r6;
  r6.head<3>() = rotation.col(0);
  r6.tail<3>() = rotation.col(1);
  return r6;
}

Eigen::Matrix3d sixd_to_rotmat(const Vector6d& r6) {
  const Eigen::Vector3d a1 = r6.head<3>();
  const Eigen::Vector3d a2 = r6.tail<3>();
  const double n1 = a1.norm();
  if (!(n1 > kDegenerateNorm)) {
    throw NumericError("6D rotation has a near-zero first column");
  }
  const Eigen::Vector3d b1 = a1 / n1;
  const Eigen::Vector3d u2 = a2 - b1.dot(a2) * b1;
  const double n2 = u2.norm();
  if (!(n2 > kDegenerateNorm)) {
    throw NumericError("6D rotation columns are parallel");
  }
  const Eigen::Vector3d b2 = u2 / n2;
  Eigen::Matrix3d out;
  out.col(0) = b1;
  out.col(1) = b2;
  out.col(2) = b1.cross(b2);
  return out;
}

Vector6d sixd_to_rotmat_backward(const Vector6d& r6, const Eigen::Matrix3d& grad) {
  const Eigen::Vector3d a1 = r6.head<3>();
  const Eigen::Vector3d a2 = r6.tail<3>();
  const double n1 = a1.norm();
  const Eigen::Vector3d b1 = a1 / n1;
  const double proj = b1.dot(a2);
  const Eigen::Vector3d u2 = a2 - proj * b1;
  const double n2 = u2.norm();
  const Eigen::Vector3d b2 = u2 / n2;

  Eigen::Vector3d g_b1 = grad.col(0) + b2.cross(grad.col(2));
  const Eigen::Vector3d g_b2 = grad.col(1) + grad.col(2).cross(b1);

  const Eigen::Vector3d g_u2 = (g_b2 - b2 * b2.dot(g_b2)) / n2;
  const Eigen::Vector3d g_a2 = g_u2 - b1 * b1.dot(g_u2);
  g_b1 -= proj * g_u2 + a2 * b1.dot(g_u2);
  const Eigen::Vector3d g_a1 = (g_b1 - b1 * b1.dot(g_b1)) / n1;

  Vector6d out;
  out.head<3>() = g_a1;
  out.tail<3>() = g_a2;
  return out;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::Vector3d rotation_log(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.axis() * aa.angle();
}

} // namespace rvqmotion
