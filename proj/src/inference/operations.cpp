#include "rvqmotion/inference/operations.h"

#include <algorithm>
#include <sstream>

#include "rvqmotion/common/errors.h"
#include "rvqmotion/common/log.h"

namespace rvqmotion {

namespace {

QuantizationTrace full_trace(const CodecModel& model, const MotionClip& clip) {
  if (clip.frame_count() == 0) {
    throw StructuralError("cannot encode an empty clip");
  }
  clip.validate();
  if (clip.skeleton.joint_count() != model.skeleton.joint_count()) {
    throw StructuralError("clip skeleton has " + std::to_string(clip.skeleton.joint_count()) +
                          " joints, model expects " + std::to_string(model.skeleton.joint_count()));
  }
  return encode_trace(model, assemble_features(clip), model.stack.layers());
}

void check_cutoff(const CodecModel& model, int s) {
  if (s < 1 || s >= model.stack.layers()) {
    throw ConfigError("content cutoff s=" + std::to_string(s) + " must satisfy 1 <= s < " +
                      std::to_string(model.stack.layers()));
  }
}

MotionClip to_clip(const CodecModel& model, const Eigen::MatrixXd& z_sum, const std::optional<std::string>& label) {
  return disassemble_features(decode(model, z_sum), model.skeleton, model.fps, label);
}

// Row k of the result is row (k mod rows) of `m`.
Eigen::MatrixXd tile_rows(const Eigen::MatrixXd& m, Eigen::Index rows) {
  Eigen::MatrixXd out(rows, m.cols());
  for (Eigen::Index k = 0; k < rows; ++k) {
    out.row(k) = m.row(k % m.rows());
  }
  return out;
}

// Sum over layers in order, content layers as is and style layers scaled.
Eigen::MatrixXd mix(const QuantizationTrace& content, const std::vector<Eigen::MatrixXd>& style, int s, double alpha) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(content.slots(), content.r.front().cols());
  for (int i = 0; i < content.layers(); ++i) {
    if (i < s) {
      out += content.z[i];
    } else {
      out += alpha * style[i];
    }
  }
  return out;
}

} // namespace

MotionClip reconstruct(const CodecModel& model, const MotionClip& clip, int n_layers) {
  const QuantizationTrace t = full_trace(model, clip);
  const int n = n_layers < 0 ? model.stack.layers() : n_layers;
  if (n < 1 || n > model.stack.layers()) {
    throw ConfigError("n_layers must lie in [1, " + std::to_string(model.stack.layers()) + "]");
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(t.slots(), model.stack.dim());
  for (int i = 0; i < n; ++i) {
    z += 1.0 * t.z[i];
  }
  return to_clip(model, z, clip.style_label);
}

MotionClip code_swap_transfer(const CodecModel& model, const MotionClip& content, const MotionClip& style, int s) {
  check_cutoff(model, s);
  const QuantizationTrace tc = full_trace(model, content);
  const QuantizationTrace ts = full_trace(model, style);
  std::vector<Eigen::MatrixXd> aligned(ts.layers());
  for (int i = s; i < ts.layers(); ++i) {
    aligned[i] = tile_rows(ts.z[i], tc.slots());
  }
  return to_clip(model, mix(tc, aligned, s, 1.0), style.style_label);
}

MotionClip style_interpolation(const CodecModel& model, const MotionClip& clip, double alpha, int s) {
  check_cutoff(model, s);
  if (alpha < 0.0 || alpha > 1.0) {
    std::ostringstream msg;
    msg << "style scale " << alpha << " lies outside [0, 1]; extrapolating";
    warn(msg.str());
  }
  const QuantizationTrace t = full_trace(model, clip);
  return to_clip(model, mix(t, t.z, s, alpha), clip.style_label);
}

MotionClip content_extract(const CodecModel& model, const MotionClip& clip, int s) {
  check_cutoff(model, s);
  const QuantizationTrace t = full_trace(model, clip);
  return to_clip(model, mix(t, t.z, s, 0.0), std::nullopt);
}

MotionClip style_inversion(const CodecModel& model, const MotionClip& clip, int s) {
  check_cutoff(model, s);
  const QuantizationTrace t = full_trace(model, clip);
  return to_clip(model, mix(t, t.z, s, -1.0), std::nullopt);
}

MotionClip style_transition(const CodecModel& model, const MotionClip& content, const TransitionScript& script, int s) {
  check_cutoff(model, s);
  if (script.segments.empty()) {
    throw StructuralError("transition script has no segments");
  }
  const QuantizationTrace tc = full_trace(model, content);
  const int k = tc.slots();
  std::vector<TransitionSegment> segs = script.segments;
  std::sort(segs.begin(), segs.end(), [](const auto& a, const auto& b) { return a.begin_slot < b.begin_slot; });
  int cursor = 0;
  for (const auto& seg : segs) {
    if (seg.style < 0 || seg.style >= static_cast<int>(script.styles.size())) {
      throw StructuralError("transition segment refers to unknown style " + std::to_string(seg.style));
    }
    if (seg.begin_slot != cursor || seg.end_slot <= seg.begin_slot) {
      throw StructuralError("transition segments must be contiguous and non-empty; gap or overlap at slot " +
                            std::to_string(cursor));
    }
    cursor = seg.end_slot;
  }
  if (cursor != k) {
    throw StructuralError("transition segments cover " + std::to_string(cursor) + " of " + std::to_string(k) +
                          " slots");
  }

  std::vector<QuantizationTrace> style_traces;
  for (const auto& clip : script.styles) {
    style_traces.push_back(full_trace(model, clip));
  }
  std::vector<Eigen::MatrixXd> composed(tc.layers());
  for (int i = s; i < tc.layers(); ++i) {
    composed[i].resize(k, model.stack.dim());
    for (const auto& seg : segs) {
      const Eigen::MatrixXd& z = style_traces[seg.style].z[i];
      for (int slot = seg.begin_slot; slot < seg.end_slot; ++slot) {
        composed[i].row(slot) = z.row(slot % z.rows());
      }
    }
  }
  return to_clip(model, mix(tc, composed, s, 1.0), std::nullopt);
}

MotionClip motion_blend(const CodecModel& model, const MotionClip& a, const MotionClip& b) {
  if (a.frame_count() == 0 && b.frame_count() == 0) {
    throw StructuralError("cannot blend two empty clips");
  }
  std::vector<const MotionClip*> parts;
  for (const MotionClip* c : {&a, &b}) {
    if (c->frame_count() > 0) {
      parts.push_back(c);
    }
  }
  std::vector<QuantizationTrace> traces;
  Eigen::Index slots = 0;
  for (const MotionClip* c : parts) {
    traces.push_back(full_trace(model, *c));
    slots += traces.back().slots();
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(slots, model.stack.dim());
  for (int i = 0; i < model.stack.layers(); ++i) {
    Eigen::Index at = 0;
    for (const auto& t : traces) {
      z.middleRows(at, t.slots()) += 1.0 * t.z[i];
      at += t.slots();
    }
  }
  return to_clip(model, z, std::nullopt);
}

AugmentationResult random_style_augmentation(const CodecModel& model,
                                             const MotionClip& content,
                                             Rng& rng,
                                             int segment_slots,
                                             int s) {
  check_cutoff(model, s);
  if (segment_slots < 1) {
    throw ConfigError("augmentation segment length must be at least one slot");
  }
  const QuantizationTrace tc = full_trace(model, content);
  const int k = tc.slots();
  AugmentationResult out;
  std::vector<Eigen::MatrixXd> drawn(tc.layers());
  for (int i = s; i < tc.layers(); ++i) {
    const Codebook& book = model.stack.books[i];
    drawn[i].resize(k, book.dim());
    std::vector<int> idx(k);
    for (int begin = 0; begin < k; begin += segment_slots) {
      const int pick = static_cast<int>(uniform_int(rng, 0, book.size() - 1));
      for (int slot = begin; slot < std::min(k, begin + segment_slots); ++slot) {
        idx[slot] = pick;
        drawn[i].row(slot) = book.codes.row(pick);
      }
    }
    out.style_indices.push_back(std::move(idx));
  }
  out.clip = to_clip(model, mix(tc, drawn, s, 1.0), std::nullopt);
  return out;
}

MotionClip content_interpolation(const CodecModel& model,
                                 const MotionClip& a,
                                 const MotionClip& b,
                                 double beta,
                                 int s,
                                 bool style_from_b) {
  check_cutoff(model, s);
  if (beta < 0.0 || beta > 1.0) {
    throw ConfigError("content blend weight beta must lie in [0, 1]");
  }
  const QuantizationTrace ta = full_trace(model, a);
  const QuantizationTrace tb = full_trace(model, b);
  if (ta.slots() != tb.slots()) {
    throw StructuralError("content interpolation needs equal slot counts, got " + std::to_string(ta.slots()) +
                          " and " + std::to_string(tb.slots()));
  }
  const QuantizationTrace& style = style_from_b ? tb : ta;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(ta.slots(), model.stack.dim());
  for (int i = 0; i < ta.layers(); ++i) {
    if (i < s) {
      z += (1.0 - beta) * ta.z[i] + beta * tb.z[i];
    } else {
      z += 1.0 * style.z[i];
    }
  }
  return to_clip(model, z, style.z.empty() ? std::nullopt : (style_from_b ? b.style_label : a.style_label));
}

} // namespace rvqmotion
