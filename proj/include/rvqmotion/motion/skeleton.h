#pragma once

#include <vector>

#include <Eigen/Core>

namespace rvqmotion {

// Joint hierarchy with rest offsets (meters) relative to each parent.
struct Skeleton {
  static constexpr int kNoParent = -1;

  std::vector<int> parents;
  std::vector<Eigen::Vector3d> rest_offsets;

  int joint_count() const {
    return static_cast<int>(parents.size());
  }

  int root() const;

  // Throws StructuralError unless the parents form a single-rooted tree and
  // the root offset is zero.
  void validate() const;

  // Joints ordered so that every parent precedes its children.
  std::vector<int> topological_order() const;

  // True when `joint` is `ancestor` or lies below it.
  bool is_descendant(int joint, int ancestor) const;

  bool operator==(const Skeleton& other) const = default;
};

} // namespace rvqmotion
