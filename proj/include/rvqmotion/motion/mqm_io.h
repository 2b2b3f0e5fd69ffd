#pragma once

#include <filesystem>
#include <iosfwd>

#include "rvqmotion/motion/clip.h"

namespace rvqmotion {

// MQM motion container (UTF-8 text):
//   line 1: JSON header {"version":1,"fps":..,"joint_count":J,"frame_count":T,
//           "parent_index":[..],"rest_offset":[[x,y,z],..],"style_label":".."}
//   lines 2..T+1: one frame each, the 15J+6 layout-ordered features as
//           comma-separated decimal floats ('.' separator).
// Values are written in shortest round-trip form, so save/load is exact.
inline constexpr int kMqmVersion = 1;

void write_clip(std::ostream& out, const MotionClip& clip);
MotionClip read_clip(std::istream& in);

// File wrappers; I/O failures raise IoError, format problems ParseError.
void save_clip(const MotionClip& clip, const std::filesystem::path& path);
MotionClip load_clip(const std::filesystem::path& path);

} // namespace rvqmotion
