#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/codec/config.h"
#include "rvqmotion/codec/model.h"
#include "rvqmotion/motion/clip.h"
#include "rvqmotion/motion/kinematics.h"

namespace rvqmotion {

struct MotionLossValues {
  double rec = 0.0;
  double fk = 0.0;
  double vel = 0.0;
  double acc = 0.0;
};

// Per-feature reconstruction weights: 1 everywhere except the root velocity
// and up-vector groups.
Eigen::RowVectorXd feature_weights(const CodecConfig& config, const Skeleton& skeleton);

// Joint positions (T x 3J) obtained by forward kinematics from the 6D
// rotations and root position stored in raw features.
Eigen::MatrixXd fk_positions(const Skeleton& skeleton, const FeatureMatrix& features);

// The motion-space losses of one window.
//   rec: mean of (w * (target - output))^2 in normalized units
//   fk:  mean squared error of FK joint positions (meters)
//   vel: mean squared error of per-frame position differences
//   acc: mean squared per-frame second difference of the output positions
class MotionLoss {
 public:
  MotionLoss(Skeleton skeleton, Normalizer normalizer, Eigen::RowVectorXd weights);

  static MotionLoss for_model(const CodecModel& model);

  // Both inputs are normalized T x F windows, T >= 2. When `grad` is given
  // it receives d(sum of coefficient * term)/d(output).
  MotionLossValues evaluate(const FeatureMatrix& target,
                            const FeatureMatrix& output,
                            const LossCoefficients* coefficients = nullptr,
                            FeatureMatrix* grad = nullptr) const;

 private:
  Skeleton skeleton_;
  Normalizer normalizer_;
  Eigen::RowVectorXd weights_;
};

// Named {rec, fk, vel, acc} for a raw target window and its raw
// reconstruction.
std::map<std::string, double> loss_suite(const CodecModel& model,
                                         const FeatureMatrix& target,
                                         const FeatureMatrix& reconstruction);

} // namespace rvqmotion
