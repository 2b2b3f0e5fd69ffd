#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "rvqmotion/codec/model.h"
#include "rvqmotion/codec/trainer.h"
#include "rvqmotion/common/random.h"
#include "rvqmotion/motion/clip.h"

namespace rvqmotion::testing {

// Root plus a chain of `joints - 1` bones.
Skeleton chain_skeleton(int joints);

// Random but valid clip: orthonormal rotations, bounded positions and
// velocities.
MotionClip random_clip(const Skeleton& skeleton, int frames, Rng& rng, std::string label = "a");

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0);

// d=8, C=6, N=2, X=4, J=3 model with seeded codebooks.
CodecConfig mini_config();
struct MiniSetup {
  CodecModel model;
  LabeledDataset data;
};
MiniSetup mini_setup(uint64_t seed = 1);

// Batch of four windows with labels {0, 0, 1, 1}.
Batch mini_batch(const LabeledDataset& data);

} // namespace rvqmotion::testing
