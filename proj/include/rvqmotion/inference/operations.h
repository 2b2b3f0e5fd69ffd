#pragma once

#include <string>
#include <vector>

#include "rvqmotion/codec/model.h"
#include "rvqmotion/common/random.h"
#include "rvqmotion/motion/clip.h"

namespace rvqmotion {

// Latent-space edits on a trained codec. Every operation encodes its inputs
// with all N books; `s` is the number of leading content books. Clip lengths
// must be positive multiples of the downsampling factor.

// Full N-book (or n-book) reconstruction.
MotionClip reconstruct(const CodecModel& model, const MotionClip& clip, int n_layers = -1);

// Content codes of `content` with the style codes (layers >= s) of `style`.
// Style slots are tiled cyclically when the style clip is shorter and
// truncated when it is longer. Output length equals the content length.
MotionClip code_swap_transfer(const CodecModel& model, const MotionClip& content, const MotionClip& style, int s);

// decode(content + alpha * style). Values outside [0, 1] extrapolate and
// produce a warning.
MotionClip style_interpolation(const CodecModel& model, const MotionClip& clip, double alpha, int s);

// alpha = 0.
MotionClip content_extract(const CodecModel& model, const MotionClip& clip, int s);

// alpha = -1.
MotionClip style_inversion(const CodecModel& model, const MotionClip& clip, int s);

struct TransitionSegment {
  int style = 0;       // index into TransitionScript::styles
  int begin_slot = 0;  // inclusive
  int end_slot = 0;    // exclusive
};

// Style clips plus contiguous slot spans that must partition [0, K) of the
// content clip.
struct TransitionScript {
  std::vector<MotionClip> styles;
  std::vector<TransitionSegment> segments;
};

// Per-slot style codes from the segment covering that slot; style slot
// k mod K_style is used so a script made of one clip matches the plain swap.
// Non-covering or overlapping scripts raise StructuralError.
MotionClip style_transition(const CodecModel& model, const MotionClip& content, const TransitionScript& script, int s);

// Concatenates the full code sequences of A and B along time and decodes
// once; length T_A + T_B. Either clip may be empty, not both.
MotionClip motion_blend(const CodecModel& model, const MotionClip& a, const MotionClip& b);

struct AugmentationResult {
  MotionClip clip;
  std::vector<std::vector<int>> style_indices;  // per style book, per slot
};

// Keeps the content codes and draws, per segment of `segment_slots` slots
// and per style book, one code uniformly from that book.
AugmentationResult random_style_augmentation(const CodecModel& model,
                                             const MotionClip& content,
                                             Rng& rng,
                                             int segment_slots,
                                             int s);

// decode((1-beta) content(A) + beta content(B) + style(source)). A and B
// must encode to the same slot count; `style_from_b` picks B's style codes.
MotionClip content_interpolation(const CodecModel& model,
                                 const MotionClip& a,
                                 const MotionClip& b,
                                 double beta,
                                 int s,
                                 bool style_from_b = false);

} // namespace rvqmotion
