#include "support.h"

#include "rvqmotion/motion/dataset.h"
#include "rvqmotion/motion/rotation.h"

namespace rvqmotion::testing {

Skeleton chain_skeleton(int joints) {
  Skeleton s;
  s.parents.push_back(Skeleton::kNoParent);
  s.rest_offsets.push_back(Eigen::Vector3d::Zero());
  for (int j = 1; j < joints; ++j) {
    s.parents.push_back(j - 1);
    s.rest_offsets.push_back(Eigen::Vector3d(0.05 * j, 0.3, -0.02 * j));
  }
  return s;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = scale * standard_normal(rng);
  }
  return m;
}

MotionClip random_clip(const Skeleton& skeleton, int frames, Rng& rng, std::string label) {
  MotionClip clip;
  clip.skeleton = skeleton;
  clip.fps = 30.0;
  clip.style_label = std::move(label);
  const int joints = skeleton.joint_count();
  auto vec = [&](double scale) {
    return Eigen::Vector3d(scale * standard_normal(rng), scale * standard_normal(rng), scale * standard_normal(rng));
  };
  for (int t = 0; t < frames; ++t) {
    FrameState f = FrameState::zeros(joints);
    for (int j = 0; j < joints; ++j) {
      f.position[j] = vec(0.5);
      const Eigen::Vector3d axis = vec(1.0).normalized();
      f.orientation[j] = rotmat_to_sixd(axis_angle(axis, 2.0 * uniform_unit(rng) - 1.0));
      f.velocity[j] = vec(0.8);
      f.angular_velocity[j] = vec(0.5);
    }
    f.height = Eigen::Vector3d(0.0, 0.9 + 0.05 * standard_normal(rng), 0.0);
    f.up = (Eigen::Vector3d::UnitY() + vec(0.05)).normalized();
    clip.frames.push_back(std::move(f));
  }
  return clip;
}

CodecConfig mini_config() {
  CodecConfig c = CodecConfig::from_profile("synthetic");
  c.profile = "custom";
  c.latent_dim = 8;
  c.conv_feature = 6;
  c.n_books = 2;
  c.codes_per_book = 4;
  c.content_cutoff = 1;
  c.batch_size = 4;
  c.window_len = 8;
  c.window_stride = 4;
  c.reset_window = 5;
  c.seed = 1;
  return c;
}

MiniSetup mini_setup(uint64_t seed) {
  Rng rng(seed);
  const Skeleton skel = chain_skeleton(3);
  std::vector<MotionClip> clips;
  for (const char* label : {"a", "a", "b", "b", "c"}) {
    clips.push_back(random_clip(skel, 16, rng, label));
  }
  const auto windows = window_dataset(clips, 8, 4, 4);
  std::vector<int> groups;
  for (size_t i = 0; i < clips.size(); ++i) {
    for (int w = 0; w < window_count(16, 8, 4); ++w) {
      groups.push_back(static_cast<int>(i));
    }
  }
  LabeledDataset data = make_labeled_dataset(windows, {}, groups);
  CodecConfig cfg = mini_config();
  cfg.seed = seed;
  CodecModel model = create_model(cfg, skel, Normalizer::fit(data.features), 30.0);
  Rng seed_rng(seed + 7);
  seed_codebooks(model, mini_batch(data), seed_rng);
  return {std::move(model), std::move(data)};
}

Batch mini_batch(const LabeledDataset& data) {
  // Windows 0 and 3 come from the two "a" clips, 6 and 9 from the "b" clips.
  Batch b;
  for (int i : {0, 3, 6, 9}) {
    b.features.push_back(data.features[i]);
    b.labels.push_back(data.labels[i]);
  }
  return b;
}

} // namespace rvqmotion::testing
