#include "rvqmotion/codec/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rvqmotion/codec/losses.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/disentangle/contrastive.h"
#include "rvqmotion/disentangle/mutual_info.h"

namespace rvqmotion {

namespace {

bool has_repeated_label(const std::vector<int>& labels) {
  std::set<int> seen;
  for (int l : labels) {
    if (!seen.insert(l).second) {
      return true;
    }
  }
  return false;
}

bool has_two_labels(const std::vector<int>& labels) {
  return std::any_of(labels.begin(), labels.end(), [&](int l) { return l != labels.front(); });
}

// Rows of r[layer] from every item, item-major.
Eigen::MatrixXd stack_residuals(const std::vector<QuantizationTrace>& traces, int layer) {
  const Eigen::Index k = traces.front().slots();
  Eigen::MatrixXd out(k * static_cast<Eigen::Index>(traces.size()), traces.front().r[layer].cols());
  for (size_t b = 0; b < traces.size(); ++b) {
    out.middleRows(static_cast<Eigen::Index>(b) * k, k) = traces[b].r[layer];
  }
  return out;
}

std::vector<int> stack_indices(const std::vector<QuantizationTrace>& traces, int layer) {
  std::vector<int> out;
  for (const auto& t : traces) {
    out.insert(out.end(), t.index[layer].begin(), t.index[layer].end());
  }
  return out;
}

} // namespace

Batch sample_batch(const LabeledDataset& data, int batch_size, Rng& rng) {
  if (data.size() == 0) {
    throw ConfigError("cannot sample a batch from an empty dataset");
  }
  if (batch_size < 1) {
    throw ConfigError("batch size must be positive");
  }
  std::map<int, std::vector<int>> by_label;
  for (size_t i = 0; i < data.size(); ++i) {
    by_label[data.labels[i]].push_back(static_cast<int>(i));
  }
  std::vector<int> labels;
  for (const auto& [l, _] : by_label) {
    labels.push_back(l);
  }
  const int pick = std::max(1, std::min(static_cast<int>(labels.size()), batch_size / 2));
  for (int i = 0; i < pick; ++i) {
    const auto j = uniform_int(rng, i, static_cast<int64_t>(labels.size()) - 1);
    std::swap(labels[i], labels[j]);
  }
  labels.resize(pick);
  std::sort(labels.begin(), labels.end());

  Batch batch;
  for (int b = 0; b < batch_size; ++b) {
    const auto& pool = by_label.at(labels[b % pick]);
    const int idx = pool[uniform_int(rng, 0, static_cast<int64_t>(pool.size()) - 1)];
    batch.features.push_back(data.features[idx]);
    batch.labels.push_back(data.labels[idx]);
  }
  return batch;
}

GradientResult compute_gradients(const CodecModel& model,
                                 const Batch& batch,
                                 int active_layers,
                                 const GradientOptions& options) {
  const size_t bsz = batch.size();
  if (bsz == 0 || batch.labels.size() != bsz) {
    throw StructuralError("batch needs one label per window");
  }
  const LossCoefficients k = options.coefficients.value_or(model.config.coefficients);
  const int n_books = model.stack.layers();
  const int s = model.stack.content_cutoff;
  const double inv_b = 1.0 / static_cast<double>(bsz);

  GradientResult out;
  out.network = model.params.zeros_like();
  out.codebooks.reserve(n_books);
  for (const auto& book : model.stack.books) {
    out.codebooks.push_back(Eigen::MatrixXd::Zero(book.size(), book.dim()));
  }

  // Encoder forward for every item; tapes are kept for the backward pass.
  std::vector<nn::Tape> enc_tapes(bsz);
  std::vector<FeatureMatrix> targets(bsz);
  out.traces.reserve(bsz);
  for (size_t b = 0; b < bsz; ++b) {
    targets[b] = model.normalizer.normalize(batch.features[b]);
    const Eigen::MatrixXd r0 = encode_normalized(model, targets[b], &enc_tapes[b]);
    if (options.frozen != nullptr) {
      out.traces.push_back(residual_encode_with_indices(model.stack, r0, options.frozen->at(b), active_layers));
    } else {
      out.traces.push_back(residual_encode(model.stack, r0, active_layers));
    }
  }
  const Eigen::Index slots = out.traces.front().slots();
  const Eigen::Index d = model.stack.dim();

  // dL/dr[i] per item, accumulated from the residual-space losses.
  std::vector<std::vector<Eigen::MatrixXd>> grad_r(bsz, std::vector<Eigen::MatrixXd>(n_books + 1));
  auto add_grad_r = [&](size_t b, int layer, const Eigen::MatrixXd& g) {
    auto& slot = grad_r[b][layer];
    if (slot.size() == 0) {
      slot = g;
    } else {
      slot += g;
    }
  };

  double commit = 0.0;
  for (size_t b = 0; b < bsz; ++b) {
    const CommitmentLoss c = commitment_loss(out.traces[b], active_layers);
    commit += c.value * inv_b;
    if (k.commit > 0.0) {
      for (int i = 0; i < active_layers; ++i) {
        add_grad_r(b, i, c.grad_r[i] * (k.commit * inv_b));
      }
    }
  }

  double con = 0.0;
  if (active_layers > s && has_repeated_label(batch.labels)) {
    const int last = model.config.contrastive_all_layers ? active_layers : s + 1;
    const double per_layer = 1.0 / static_cast<double>(last - s);
    for (int layer = s; layer < last; ++layer) {
      Eigen::MatrixXd emb(static_cast<Eigen::Index>(bsz), d);
      for (size_t b = 0; b < bsz; ++b) {
        emb.row(static_cast<Eigen::Index>(b)) = pool_residual(out.traces[b], layer).transpose();
      }
      const ContrastiveLoss cl = multipos_contrastive(emb, batch.labels, model.config.tau_con);
      con += cl.value * per_layer;
      if (k.con > 0.0) {
        for (size_t b = 0; b < bsz; ++b) {
          const Eigen::RowVectorXd g = cl.grad.row(static_cast<Eigen::Index>(b)) * (k.con * per_layer / slots);
          add_grad_r(b, layer, g.replicate(slots, 1));
        }
      }
    }
  }

  double mi = 0.0;
  const int mi_books = std::min(s, active_layers);
  if (has_two_labels(batch.labels)) {
    std::vector<int> slot_labels;
    slot_labels.reserve(bsz * slots);
    for (size_t b = 0; b < bsz; ++b) {
      slot_labels.insert(slot_labels.end(), slots, batch.labels[b]);
    }
    for (int i = 0; i < mi_books; ++i) {
      const MutualInfoLoss ml =
          mutual_info_loss(stack_residuals(out.traces, i), slot_labels, model.stack.books[i], model.config.tau_mi);
      mi += ml.value / mi_books;
      if (k.mi > 0.0) {
        const double w = k.mi / mi_books;
        for (size_t b = 0; b < bsz; ++b) {
          add_grad_r(b, i, ml.grad_r.middleRows(static_cast<Eigen::Index>(b) * slots, slots) * w);
        }
        out.codebooks[i] += ml.grad_codes * w;
      }
    }
  }

  // Decoder forward/backward per item, then the quantizer and encoder.
  const MotionLoss motion = MotionLoss::for_model(model);
  LossCoefficients scaled = k;
  scaled.rec *= inv_b;
  scaled.fk *= inv_b;
  scaled.vel *= inv_b;
  scaled.acc *= inv_b;
  MotionLossValues mv_sum;
  for (size_t b = 0; b < bsz; ++b) {
    const QuantizationTrace& trace = out.traces[b];
    nn::Tape dec_tape;
    const FeatureMatrix y = decode_normalized(model, sum_codes(trace, 0, active_layers), &dec_tape);
    FeatureMatrix g_y;
    const MotionLossValues mv = motion.evaluate(targets[b], y, &scaled, &g_y);
    mv_sum.rec += mv.rec * inv_b;
    mv_sum.fk += mv.fk * inv_b;
    mv_sum.vel += mv.vel * inv_b;
    mv_sum.acc += mv.acc * inv_b;

    const Eigen::MatrixXd g_zsum = model.decoder->backward(model.params, dec_tape, g_y.transpose(), out.network).transpose();
    std::vector<Eigen::MatrixXd> grad_z(n_books);
    for (int i = 0; i < active_layers; ++i) {
      grad_z[i] = g_zsum;
    }
    const QuantizerGradient qg = straight_through_backward(model.stack, trace, grad_z, grad_r[b]);
    for (int i = 0; i < n_books; ++i) {
      out.codebooks[i] += qg.codes[i];
    }
    model.encoder->backward(model.params, enc_tapes[b], qg.r0.transpose(), out.network);
  }
  for (int i = 0; i < n_books; ++i) {
    if (model.stack.books[i].pinned_zero) {
      out.codebooks[i].row(0).setZero();
    }
  }

  out.losses = {{"rec", mv_sum.rec}, {"fk", mv_sum.fk}, {"vel", mv_sum.vel}, {"acc", mv_sum.acc},
                {"commit", commit},  {"con", con},      {"mi", mi}};
  out.losses["total"] = k.rec * mv_sum.rec + k.fk * mv_sum.fk + k.vel * mv_sum.vel + k.acc * mv_sum.acc +
                        k.commit * commit + k.con * con + k.mi * mi;
  return out;
}

TrainingState make_training_state(const CodecModel& model) {
  TrainingState state;
  state.optimizer.learning_rate = model.config.learning_rate;
  state.rng.seed(model.config.seed + 0x9e3779b97f4a7c15ULL);
  return state;
}

nlohmann::json StepReport::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["active_layers"] = active_layers;
  j["losses"] = losses;
  j["grad_norm"] = grad_norm;
  j["codes_used"] = codes_used;
  j["codes_reset"] = codes_reset;
  return j;
}

void seed_codebooks(CodecModel& model, const Batch& batch, Rng& rng) {
  std::vector<Eigen::MatrixXd> r0s;
  Eigen::Index rows = 0;
  for (const auto& f : batch.features) {
    r0s.push_back(encode(model, f));
    rows += r0s.back().rows();
  }
  Eigen::MatrixXd residuals(rows, model.stack.dim());
  Eigen::Index at = 0;
  for (const auto& r : r0s) {
    residuals.middleRows(at, r.rows()) = r;
    at += r.rows();
  }
  const int x = model.stack.codes_per_book();
  std::vector<int64_t> order(rows);
  for (auto& book : model.stack.books) {
    Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(x, book.dim());
    std::iota(order.begin(), order.end(), 0);
    for (int c = 1; c < x; ++c) {
      int64_t pick;
      if (c - 1 < rows) {
        const auto j = uniform_int(rng, c - 1, rows - 1);
        std::swap(order[c - 1], order[j]);
        pick = order[c - 1];
      } else {
        pick = uniform_int(rng, 0, rows - 1);
      }
      codes.row(c) = residuals.row(pick);
    }
    book = Codebook::from_codes(std::move(codes), true);
    for (Eigen::Index r = 0; r < rows; ++r) {
      residuals.row(r) -= book.codes.row(nearest_code(book, residuals.row(r).transpose()));
    }
  }
  model.codebooks_seeded = true;
}

StepReport train_step(CodecModel& model, TrainingState& state, const Batch& batch, const PhaseHook& hook) {
  const int n = sample_active_layers(model.stack.layers(), state.rng);
  if (!model.codebooks_seeded) {
    seed_codebooks(model, batch, state.rng);
  }
  GradientResult g = compute_gradients(model, batch, n);
  for (const auto& [name, value] : g.losses) {
    if (!std::isfinite(value)) {
      throw NumericError("non-finite " + name + " loss at step " + std::to_string(model.step));
    }
  }

  StepReport report;
  report.step = model.step;
  report.active_layers = n;
  report.losses = g.losses;
  report.grad_norm = nn::clip_global_norm({&g.network, &g.codebooks}, model.config.grad_clip);
  if (!std::isfinite(report.grad_norm)) {
    throw NumericError("non-finite gradient norm at step " + std::to_string(model.step));
  }

  std::vector<Eigen::MatrixXd*> params;
  std::vector<const Eigen::MatrixXd*> grads;
  for (int i = 0; i < model.params.size(); ++i) {
    params.push_back(&model.params[i]);
    grads.push_back(&g.network[i]);
  }
  for (int i = 0; i < model.stack.layers(); ++i) {
    params.push_back(&model.stack.books[i].codes);
    grads.push_back(&g.codebooks[i]);
  }
  state.optimizer.learning_rate = model.config.learning_rate;
  state.optimizer.step(params, grads);
  if (hook) {
    hook("grad");
  }

  for (int i = 0; i < model.stack.layers(); ++i) {
    Codebook& book = model.stack.books[i];
    sync_ema_to_codes(book);
    if (i < n) {
      const std::vector<int> idx = stack_indices(g.traces, i);
      ema_update(book, stack_residuals(g.traces, i), idx, model.stack.gamma);
      record_usage(book, idx);
      report.codes_used.push_back(static_cast<int>(std::set<int>(idx.begin(), idx.end()).size()));
    } else {
      report.codes_used.push_back(0);
    }
  }
  if (hook) {
    hook("ema");
  }

  report.codes_reset.assign(model.stack.layers(), {});
  if ((model.step + 1) % model.config.reset_window == 0) {
    std::vector<QuantizationTrace> full;
    full.reserve(g.traces.size());
    for (const auto& t : g.traces) {
      full.push_back(residual_encode(model.stack, t.r[0], model.stack.layers()));
    }
    for (int i = 0; i < model.stack.layers(); ++i) {
      report.codes_reset[i] =
          code_reset(model.stack.books[i], stack_residuals(full, i), model.config.reset_threshold, state.rng);
    }
  }
  if (hook) {
    hook("reset");
  }
  ++model.step;
  return report;
}

StepReport train_step(CodecModel& model, TrainingState& state, const LabeledDataset& data, const PhaseHook& hook) {
  const Batch batch = sample_batch(data, model.config.batch_size, state.rng);
  return train_step(model, state, batch, hook);
}

CodecModel fine_tune(const CodecModel& pretrained, const LabeledDataset& data, int steps, uint64_t seed) {
  if (steps < 0) {
    throw ConfigError("fine-tune steps must be non-negative");
  }
  CodecModel model = pretrained;
  TrainingState state = make_training_state(model);
  state.rng.seed(seed);
  for (int i = 0; i < steps; ++i) {
    train_step(model, state, data);
  }
  return model;
}

} // namespace rvqmotion
