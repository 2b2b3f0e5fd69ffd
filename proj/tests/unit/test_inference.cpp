#include <doctest.h>

#include "../support.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/inference/operations.h"

using namespace rvqmotion;
using namespace rvqmotion::testing;

namespace {

double gap(const MotionClip& a, const MotionClip& b) {
  const FeatureMatrix fa = assemble_features(a);
  const FeatureMatrix fb = assemble_features(b);
  REQUIRE(fa.rows() == fb.rows());
  return (fa - fb).cwiseAbs().maxCoeff();
}

struct Fixture {
  MiniSetup setup = mini_setup(11);
  Rng rng{12};
  MotionClip a = random_clip(setup.model.skeleton, 16, rng, "a");
  MotionClip b = random_clip(setup.model.skeleton, 16, rng, "b");
  MotionClip short_style = random_clip(setup.model.skeleton, 8, rng, "c");
};

constexpr double kTight = 1e-12;

} // namespace

TEST_CASE("edits that reduce to reconstruction") {
  Fixture f;
  const CodecModel& m = f.setup.model;
  const MotionClip rec = reconstruct(m, f.a);
  CHECK(rec.frame_count() == 16);
  CHECK(gap(code_swap_transfer(m, f.a, f.a, 1), rec) <= kTight);
  CHECK(gap(style_interpolation(m, f.a, 1.0, 1), rec) <= kTight);
  CHECK(gap(style_interpolation(m, f.a, 0.0, 1), content_extract(m, f.a, 1)) <= kTight);
  CHECK(gap(style_interpolation(m, f.a, -1.0, 1), style_inversion(m, f.a, 1)) <= kTight);
  CHECK(gap(content_interpolation(m, f.a, f.b, 0.0, 1), rec) <= kTight);
  CHECK(gap(content_interpolation(m, f.a, f.b, 1.0, 1, true), reconstruct(m, f.b)) <= kTight);
  CHECK(gap(reconstruct(m, f.a, 1), content_extract(m, f.a, 1)) <= kTight);
}

TEST_CASE("transfer keeps the content length and tiles short styles") {
  Fixture f;
  const CodecModel& m = f.setup.model;
  const MotionClip out = code_swap_transfer(m, f.a, f.short_style, 1);
  CHECK(out.frame_count() == 16);
  // The 8-frame style has two slots, reused cyclically over four.
  const QuantizationTrace ct = encode_trace(m, assemble_features(f.a));
  const QuantizationTrace st = encode_trace(m, assemble_features(f.short_style));
  Eigen::MatrixXd z = ct.z[0];
  for (int k = 0; k < 4; ++k) {
    z.row(k) += st.z[1].row(k % 2);
  }
  CHECK((decode(m, z) - assemble_features(out)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(code_swap_transfer(m, f.short_style, f.a, 1).frame_count() == 8);
  CHECK(gap(code_swap_transfer(m, f.a, f.b, 1), f.a) > 0.0);
}

TEST_CASE("transitions") {
  Fixture f;
  const CodecModel& m = f.setup.model;
  TransitionScript one{{f.b}, {{0, 0, 4}}};
  CHECK(gap(style_transition(m, f.a, one, 1), code_swap_transfer(m, f.a, f.b, 1)) <= kTight);

  TransitionScript two{{f.a, f.b}, {{0, 0, 2}, {1, 2, 4}}};
  const MotionClip mixed = style_transition(m, f.a, two, 1);
  CHECK(mixed.frame_count() == 16);
  TransitionScript swapped{{f.b, f.a}, {{1, 0, 2}, {0, 2, 4}}};
  CHECK(gap(style_transition(m, f.a, swapped, 1), mixed) <= kTight);

  TransitionScript hole{{f.b}, {{0, 0, 2}, {0, 3, 4}}};
  CHECK_THROWS_AS(style_transition(m, f.a, hole, 1), StructuralError);
  TransitionScript overlap{{f.b}, {{0, 0, 3}, {0, 2, 4}}};
  CHECK_THROWS_AS(style_transition(m, f.a, overlap, 1), StructuralError);
  TransitionScript bad_style{{f.b}, {{1, 0, 4}}};
  CHECK_THROWS(style_transition(m, f.a, bad_style, 1));
}

TEST_CASE("blend lengths") {
  Fixture f;
  const CodecModel& m = f.setup.model;
  CHECK(motion_blend(m, f.a, f.short_style).frame_count() == 24);
  MotionClip empty = f.a;
  empty.frames.clear();
  CHECK(gap(motion_blend(m, f.a, empty), reconstruct(m, f.a)) <= kTight);
  CHECK(motion_blend(m, empty, f.b).frame_count() == 16);
  CHECK_THROWS(motion_blend(m, empty, empty));
}

TEST_CASE("augmentation is reproducible and keeps content codes") {
  Fixture f;
  const CodecModel& m = f.setup.model;
  Rng r1(3), r2(3);
  const AugmentationResult x = random_style_augmentation(m, f.a, r1, 2, 1);
  const AugmentationResult y = random_style_augmentation(m, f.a, r2, 2, 1);
  CHECK(gap(x.clip, y.clip) == 0.0);
  REQUIRE(x.style_indices.size() == 1);
  REQUIRE(x.style_indices[0].size() == 4);
  CHECK(x.style_indices == y.style_indices);
  CHECK(x.style_indices[0][0] == x.style_indices[0][1]);
  CHECK(x.style_indices[0][2] == x.style_indices[0][3]);
  for (int idx : x.style_indices[0]) {
    CHECK(idx >= 0);
    CHECK(idx < m.stack.codes_per_book());
  }
  // Rebuilding the latent by hand gives the same decode.
  const QuantizationTrace t = encode_trace(m, assemble_features(f.a));
  Eigen::MatrixXd z = t.z[0];
  for (int k = 0; k < 4; ++k) {
    z.row(k) += m.stack.books[1].codes.row(x.style_indices[0][k]);
  }
  CHECK((decode(m, z) - assemble_features(x.clip)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK_THROWS(random_style_augmentation(m, f.a, r1, 0, 1));
}

TEST_CASE("operation errors") {
  Fixture f;
  const CodecModel& m = f.setup.model;
  MotionClip odd = f.a;
  odd.frames.resize(10);
  CHECK_THROWS_AS(reconstruct(m, odd), StructuralError);
  CHECK_THROWS_AS(content_interpolation(m, f.a, f.short_style, 0.5, 1), StructuralError);
  CHECK_THROWS(code_swap_transfer(m, f.a, f.b, 0));
  CHECK_THROWS(code_swap_transfer(m, f.a, f.b, 2));
}
