#pragma once

#include <cstdint>
#include <string>

#include "rvqmotion/motion/clip.h"

namespace rvqmotion {

// Procedural stylized walking on a 12-joint skeleton, a desk-scale stand-in
// for captured style datasets.
//
// Content ids select the root path:
//   0 straight, 1 turn_left, 2 figure_eight, 3 stop_and_go.
// Style ids select a gait perturbation:
//   0 neutral, 1 wide_legs, 2 lean_forward, 3 arm_swing, 4 high_knees,
//   5 arms_out.
// The root path depends only on (content_id, seed); styles change limb and
// torso rotations plus a small vertical bounce.
inline constexpr int kSyntheticContents = 4;
inline constexpr int kSyntheticStyles = 6;

Skeleton synthetic_skeleton();

std::string synthetic_content_name(int content_id);
std::string synthetic_style_name(int style_id);

// Deterministic in (content_id, style_id, frames, seed, fps). Unknown ids
// raise ConfigError. The clip is labeled with the style name.
MotionClip generate_synthetic(int content_id, int style_id, int frames, uint64_t seed, double fps = 30.0);

// Joint indices of the synthetic skeleton used by tests and statistics.
namespace synthetic_joint {
inline constexpr int kPelvis = 0;
inline constexpr int kChest = 1;
inline constexpr int kLeftShoulder = 2;
inline constexpr int kLeftElbow = 3;
inline constexpr int kRightShoulder = 4;
inline constexpr int kRightElbow = 5;
inline constexpr int kLeftHip = 6;
inline constexpr int kLeftKnee = 7;
inline constexpr int kLeftAnkle = 8;
inline constexpr int kRightHip = 9;
inline constexpr int kRightKnee = 10;
inline constexpr int kRightAnkle = 11;
} // namespace synthetic_joint

} // namespace rvqmotion
