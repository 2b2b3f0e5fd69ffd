#pragma once

#include <Eigen/Core>

namespace rvqmotion {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Continuous 6D rotation parameterization: the first two columns of the
// rotation matrix, stacked.
Vector6d rotmat_to_sixd(const Eigen::Matrix3d& rotation);

// Gram-Schmidt on the two stored columns, third column by cross product.
// Throws NumericError when either column degenerates.
Eigen::Matrix3d sixd_to_rotmat(const Vector6d& r6);

// Vector-Jacobian product of sixd_to_rotmat: maps dL/dR to dL/dr6.
Vector6d sixd_to_rotmat_backward(const Vector6d& r6, const Eigen::Matrix3d& grad_rotation);

// Rotation by `angle` radians about a unit axis.
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle);

// Rotation vector (axis * angle) of a rotation matrix.
Eigen::Vector3d rotation_log(const Eigen::Matrix3d& rotation);

} // namespace rvqmotion
