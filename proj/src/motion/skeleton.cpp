#include "rvqmotion/motion/skeleton.h"

#include <string>

#include "rvqmotion/common/errors.h"

namespace rvqmotion {

int Skeleton::root() const {
  for (int j = 0; j < joint_count(); ++j) {
    if (parents[j] == kNoParent) {
      return j;
    }
  }
  throw StructuralError("skeleton has no root joint");
}

void Skeleton::validate() const {
  const int n = joint_count();
  if (n == 0) {
    throw StructuralError("skeleton has no joints");
  }
  if (static_cast<int>(rest_offsets.size()) != n) {
    throw StructuralError("skeleton rest offsets do not match joint count");
  }
  int roots = 0;
  for (int j = 0; j < n; ++j) {
    const int p = parents[j];
    if (p == kNoParent) {
      ++roots;
      if (!rest_offsets[j].isZero(0.0)) {
        throw StructuralError("root rest offset must be zero");
      }
    } else if (p < 0 || p >= n || p == j) {
      throw StructuralError("joint " + std::to_string(j) + " has invalid parent " + std::to_string(p));
    }
  }
  if (roots != 1) {
    throw StructuralError("skeleton must have exactly one root, found " + std::to_string(roots));
  }
  // Every chain must reach the root within n hops.
  for (int j = 0; j < n; ++j) {
    int cur = j;
    int hops = 0;
    while (parents[cur] != kNoParent) {
      cur = parents[cur];
      if (++hops > n) {
        throw StructuralError("skeleton hierarchy contains a cycle through joint " + std::to_string(j));
      }
    }
  }
}

std::vector<int> Skeleton::topological_order() const {
  const int n = joint_count();
  std::vector<std::vector<int>> children(n);
  int r = kNoParent;
  for (int j = 0; j < n; ++j) {
    if (parents[j] == kNoParent) {
      r = j;
    } else {
      children[parents[j]].push_back(j);
    }
  }
  std::vector<int> order;
  order.reserve(n);
  if (r == kNoParent) {
    return order;
  }
  order.push_back(r);
  for (size_t head = 0; head < order.size(); ++head) {
    for (int c : children[order[head]]) {
      order.push_back(c);
    }
  }
  return order;
}

bool Skeleton::is_descendant(int joint, int ancestor) const {
  for (int cur = joint; cur != kNoParent; cur = parents[cur]) {
    if (cur == ancestor) {
      return true;
    }
  }
  return false;
}

} // namespace rvqmotion
