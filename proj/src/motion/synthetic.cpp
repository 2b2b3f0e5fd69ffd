#include "rvqmotion/motion/synthetic.h"

#include <array>
#include <cmath>
#include <numbers>

#include "rvqmotion/common/errors.h"
#include "rvqmotion/common/random.h"
#include "rvqmotion/motion/kinematics.h"

namespace rvqmotion {

namespace {

using std::numbers::pi;
namespace sj = synthetic_joint;

constexpr double kBaseSpeed = 1.3;    // m/s
constexpr double kBaseHeight = 0.92;  // m

struct StyleParams {
  double hip_abduction;
  double lean;
  double root_pitch;
  double arm_swing;
  double arm_abduction;
  double elbow_bend;
  double knee_lift;
  double bounce;
};

constexpr std::array<StyleParams, kSyntheticStyles> kStyles = {{
    // abd   lean  pitch swing arm_abd elbow knee  bounce
    {0.05, 0.05, 0.00, 1.0, 0.10, 0.30, 1.0, 0.015},  // neutral
    {0.30, 0.05, 0.00, 1.0, 0.10, 0.30, 1.0, 0.015},  // wide_legs
    {0.05, 0.45, 0.12, 1.0, 0.10, 0.30, 1.0, 0.015},  // lean_forward
    {0.05, 0.05, 0.00, 2.6, 0.20, 0.80, 1.0, 0.015},  // arm_swing
    {0.05, 0.05, 0.00, 1.0, 0.10, 0.30, 2.2, 0.030},  // high_knees
    {0.05, 0.05, 0.00, 0.4, 0.90, 0.10, 1.0, 0.015},  // arms_out
}};

constexpr std::array<const char*, kSyntheticStyles> kStyleNames = {
    "neutral", "wide_legs", "lean_forward", "arm_swing", "high_knees", "arms_out"};
constexpr std::array<const char*, kSyntheticContents> kContentNames = {
    "straight", "turn_left", "figure_eight", "stop_and_go"};

Eigen::Matrix3d rx(double a) {
  return axis_angle(Eigen::Vector3d::UnitX(), a);
}
Eigen::Matrix3d ry(double a) {
  return axis_angle(Eigen::Vector3d::UnitY(), a);
}
Eigen::Matrix3d rz(double a) {
  return axis_angle(Eigen::Vector3d::UnitZ(), a);
}

struct RootPath {
  double speed;
  double yaw_rate;
};

RootPath root_path(int content, double time, double speed_scale) {
  const double v = kBaseSpeed * speed_scale;
  switch (content) {
    case 0:
      return {v, 0.0};
    case 1:
      return {v, 0.55};
    case 2:
      return {v, 1.0 * std::sin(2.0 * pi * time / 4.0)};
    case 3:
      return {v * (0.5 - 0.5 * std::cos(2.0 * pi * time / 2.4)), 0.0};
    default:
      throw ConfigError("unknown synthetic content id " + std::to_string(content));
  }
}

// Pose of one instant, root-local.
struct Pose {
  std::vector<Eigen::Matrix3d> local;
  double height;
};

Pose gait_pose(const StyleParams& st, double phase, double amp, const std::array<double, 12>& wobble_phase, double time) {
  Pose pose;
  pose.local.assign(12, Eigen::Matrix3d::Identity());
  auto wobble = [&](int j) { return 0.02 * std::sin(2.0 * pi * 0.37 * time + wobble_phase[j]); };

  pose.local[sj::kPelvis] = rx(st.root_pitch + 0.03 * amp * std::sin(2.0 * phase));
  pose.local[sj::kChest] = rx(st.lean + wobble(sj::kChest)) * ry(0.12 * amp * std::sin(phase));

  for (int side = 0; side < 2; ++side) {
    const double ph = phase + side * pi;
    const double sign = side == 0 ? 1.0 : -1.0;
    const int hip = side == 0 ? sj::kLeftHip : sj::kRightHip;
    const int knee = side == 0 ? sj::kLeftKnee : sj::kRightKnee;
    const int ankle = side == 0 ? sj::kLeftAnkle : sj::kRightAnkle;
    const int shoulder = side == 0 ? sj::kLeftShoulder : sj::kRightShoulder;
    const int elbow = side == 0 ? sj::kLeftElbow : sj::kRightElbow;

    pose.local[hip] = rz(sign * st.hip_abduction) * rx(-0.45 * amp * std::sin(ph) + wobble(hip));
    const double knee_bend = 0.1 + 0.5 * st.knee_lift * amp * (0.5 - 0.5 * std::cos(ph));
    pose.local[knee] = rx(knee_bend);
    pose.local[ankle] = rx(0.15 * amp * std::sin(ph) + wobble(ankle));
    pose.local[shoulder] = rz(sign * st.arm_abduction) * rx(0.3 * st.arm_swing * amp * std::sin(ph) + wobble(shoulder));
    pose.local[elbow] = rx(-st.elbow_bend - 0.1 * amp * std::sin(ph));
  }
  const double knee_drop = 0.02 * (st.knee_lift - 1.0) * amp;
  pose.height = kBaseHeight - knee_drop + st.bounce * std::cos(2.0 * phase);
  return pose;
}

} // namespace

Skeleton synthetic_skeleton() {
  Skeleton s;
  s.parents = {Skeleton::kNoParent, 0, 1, 2, 1, 4, 0, 6, 7, 0, 9, 10};
  s.rest_offsets = {
      {0.0, 0.0, 0.0},     // pelvis
      {0.0, 0.45, 0.0},    // chest
      {0.18, 0.05, 0.0},   // l_shoulder
      {0.0, -0.28, 0.0},   // l_elbow
      {-0.18, 0.05, 0.0},  // r_shoulder
      {0.0, -0.28, 0.0},   // r_elbow
      {0.1, -0.05, 0.0},   // l_hip
      {0.0, -0.42, 0.0},   // l_knee
      {0.0, -0.42, 0.0},   // l_ankle
      {-0.1, -0.05, 0.0},  // r_hip
      {0.0, -0.42, 0.0},   // r_knee
      {0.0, -0.42, 0.0},   // r_ankle
  };
  return s;
}

std::string synthetic_content_name(int content_id) {
  if (content_id < 0 || content_id >= kSyntheticContents) {
    throw ConfigError("unknown synthetic content id " + std::to_string(content_id));
  }
  return kContentNames[content_id];
}

std::string synthetic_style_name(int style_id) {
  if (style_id < 0 || style_id >= kSyntheticStyles) {
    throw ConfigError("unknown synthetic style id " + std::to_string(style_id));
  }
  return kStyleNames[style_id];
}

MotionClip generate_synthetic(int content_id, int style_id, int frames, uint64_t seed, double fps) {
  const std::string style_name = synthetic_style_name(style_id);
  synthetic_content_name(content_id);
  if (frames < 1) {
    throw ConfigError("synthetic clips need at least one frame");
  }
  if (!(fps > 0)) {
    throw ConfigError("fps must be positive");
  }

  // Draws shared by every style come first so the root path of a content id
  // does not depend on the style.
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<uint64_t>(content_id) * 7919ULL + 17ULL);
  const double speed_scale = 1.0 + 0.1 * (uniform_unit(rng) - 0.5);
  const double phase0 = 2.0 * pi * uniform_unit(rng);
  const double cadence = 0.9 * (1.0 + 0.06 * (uniform_unit(rng) - 0.5));
  std::array<double, 12> wobble_phase{};
  for (auto& w : wobble_phase) {
    w = 2.0 * pi * uniform_unit(rng);
  }
  Rng style_rng(seed * 0xBF58476D1CE4E5B9ULL + static_cast<uint64_t>(style_id) * 104729ULL + 3ULL);
  StyleParams st = kStyles[style_id];
  auto jitter = [&](double v) { return v * (1.0 + 0.2 * (uniform_unit(style_rng) - 0.5)); };
  st.hip_abduction = jitter(st.hip_abduction);
  st.lean = jitter(st.lean);
  st.arm_swing = jitter(st.arm_swing);
  st.arm_abduction = jitter(st.arm_abduction);
  st.elbow_bend = jitter(st.elbow_bend);
  st.knee_lift = jitter(st.knee_lift);

  const Skeleton skel = synthetic_skeleton();
  const int joints = skel.joint_count();
  const double dt = 1.0 / fps;

  // One extra state so every frame has a forward difference.
  const int states = frames + 1;
  std::vector<Pose> poses;
  std::vector<FkResult> local_fk;
  std::vector<double> yaws;
  std::vector<Eigen::Vector3d> ground;
  poses.reserve(states);
  double phase = phase0;
  double yaw = 0.0;
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  for (int t = 0; t < states; ++t) {
    const double time = t * dt;
    const RootPath path = root_path(content_id, time, speed_scale);
    const double amp = std::min(1.0, path.speed / kBaseSpeed);
    Pose pose = gait_pose(st, phase, amp, wobble_phase, time);
    local_fk.push_back(forward_kinematics(skel, pose.local, Eigen::Vector3d(0.0, pose.height, 0.0)));
    poses.push_back(std::move(pose));
    yaws.push_back(yaw);
    ground.push_back(pos);

    pos += yaw_rotation(yaw) * Eigen::Vector3d(0.0, 0.0, path.speed) * dt;
    yaw += path.yaw_rate * dt;
    phase += 2.0 * pi * cadence * (path.speed / kBaseSpeed) * dt;
  }

  auto world_position = [&](int t, int j) -> Eigen::Vector3d {
    return yaw_rotation(yaws[t]) * local_fk[t].positions[j] + ground[t];
  };
  auto world_rotation = [&](int t, int j) -> Eigen::Matrix3d {
    return yaw_rotation(yaws[t]) * local_fk[t].global_rotations[j];
  };

  MotionClip clip;
  clip.skeleton = skel;
  clip.fps = fps;
  clip.style_label = style_name;
  clip.frames.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    FrameState f = FrameState::zeros(joints);
    const Eigen::Matrix3d to_local = yaw_rotation(yaws[t]).transpose();
    for (int j = 0; j < joints; ++j) {
      f.position[j] = local_fk[t].positions[j];
      f.orientation[j] = rotmat_to_sixd(poses[t].local[j]);
      f.velocity[j] = to_local * (world_position(t + 1, j) - world_position(t, j)) * fps;
      const Eigen::Matrix3d delta = world_rotation(t + 1, j) * world_rotation(t, j).transpose();
      f.angular_velocity[j] = to_local * rotation_log(delta) * fps;
    }
    f.height = Eigen::Vector3d(0.0, poses[t].height, 0.0);
    f.up = Eigen::Vector3d::UnitY();
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

} // namespace rvqmotion
