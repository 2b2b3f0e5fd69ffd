#include "rvqmotion/cli/cli.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvqmotion/cli/manifest.h"
#include "rvqmotion/codec/checkpoint.h"
#include "rvqmotion/codec/trainer.h"
#include "rvqmotion/common/errors.h"
#include "rvqmotion/eval/classifier.h"
#include "rvqmotion/eval/evaluate.h"
#include "rvqmotion/inference/operations.h"
#include "rvqmotion/motion/mqm_io.h"
#include "rvqmotion/motion/synthetic.h"

namespace rvqmotion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  // gen-synth
  std::string out_dir;
  int contents = 4;
  int styles = 4;
  int unseen_styles = 0;
  int clips_per_pair = 10;
  int test_clips = 2;
  int frames = 256;
  double fps = 30.0;
  uint64_t seed = 0;

  // training
  std::string config_path;
  std::string manifest;
  std::string split = "train";
  int steps = 2000;
  int checkpoint_every = 500;
  bool seed_given = false;
  bool dry_run = false;

  // inference
  std::string checkpoint;
  std::string input;
  std::string content;
  std::string style;
  std::string first;
  std::string second;
  std::string script;
  std::string output;
  int s = 0;
  int layers = 0;
  double alpha = 1.0;
  double beta = 0.5;
  int segment_slots = 4;
  bool style_from_second = false;

  // classifier / eval
  std::string classifier;
  int batch = 32;
  double lr = 1e-3;
  double holdout = 0.25;
  int window = 64;
  int stride = 16;
  int k = 1;
  int pairs = 1;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

// Output files go into existing directories only; checked before any work.
void check_output_file(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("output directory " + parent.string() + " does not exist");
  }
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir);
  }
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream p(probe);
    if (!p) {
      throw IoError("directory " + dir + " is not writable");
    }
  }
  fs::remove(probe, ec);
}

int cutoff(const CodecModel& model, int s) {
  return s > 0 ? s : model.stack.content_cutoff;
}

MotionClip load_input(const std::string& path) {
  return load_clip(path);
}

// Non-overlapping model-sized windows of every clip in a split.
std::vector<MotionClip> split_windows(const Manifest& manifest, const std::string& split, int window_len, int factor) {
  return window_dataset(load_split(manifest, split), window_len, window_len, factor);
}

void cmd_gen_synth(const Options& o, std::ostream& out) {
  if (o.contents < 1 || o.contents > kSyntheticContents) {
    throw ConfigError("--contents must lie in [1, " + std::to_string(kSyntheticContents) + "]");
  }
  if (o.styles < 1 || o.unseen_styles < 0 || o.styles + o.unseen_styles > kSyntheticStyles) {
    throw ConfigError("--styles plus --unseen-styles must lie in [1, " + std::to_string(kSyntheticStyles) + "]");
  }
  if (o.clips_per_pair < 1 || o.test_clips < 0 || o.test_clips >= o.clips_per_pair) {
    throw ConfigError("need --clips-per-pair >= 1 and 0 <= --test-clips < --clips-per-pair");
  }
  if (o.frames < 1 || !(o.fps > 0.0)) {
    throw ConfigError("--frames and --fps must be positive");
  }
  ensure_directory(o.out_dir);
  out << "seed=" << o.seed << '\n';

  json clips = json::array();
  json splits = {{"train", json::array()}, {"test", json::array()}, {"unseen", json::array()}};
  for (int st = 0; st < o.styles + o.unseen_styles; ++st) {
    const bool unseen = st >= o.styles;
    const std::string label = synthetic_style_name(st);
    if (unseen) {
      splits["unseen"].push_back(label);
    } else {
      splits["train"].push_back(label);
      splits["test"].push_back(label);
    }
  }
  int written = 0;
  for (int c = 0; c < o.contents; ++c) {
    for (int st = 0; st < o.styles + o.unseen_styles; ++st) {
      for (int k = 0; k < o.clips_per_pair; ++k) {
        const uint64_t clip_seed = o.seed * 1000003ULL + static_cast<uint64_t>(c) * 10007ULL +
                                   static_cast<uint64_t>(st) * 101ULL + static_cast<uint64_t>(k);
        const MotionClip clip = generate_synthetic(c, st, o.frames, clip_seed, o.fps);
        const std::string file = "c" + std::to_string(c) + "_s" + std::to_string(st) + "_k" + std::to_string(k) + ".mqm";
        save_clip(clip, fs::path(o.out_dir) / file);
        std::string split = "train";
        if (st >= o.styles) {
          split = "unseen";
        } else if (k >= o.clips_per_pair - o.test_clips) {
          split = "test";
        }
        clips.push_back({{"file", file}, {"content", c}, {"style", st}, {"label", *clip.style_label}, {"split", split}});
        ++written;
      }
    }
  }
  const json manifest = {{"version", 1},     {"seed", o.seed},     {"fps", o.fps},
                         {"frames", o.frames}, {"splits", splits}, {"clips", clips}};
  write_json(fs::path(o.out_dir) / "manifest.json", manifest);
  out << "wrote " << written << " clips and manifest.json to " << o.out_dir << '\n';
}

void run_training(CodecModel& model,
                  TrainingState& state,
                  const LabeledDataset& data,
                  const Options& o,
                  std::ostream& out) {
  std::ofstream log(fs::path(o.out_dir) / "train_log.jsonl", std::ios::app);
  if (!log) {
    throw IoError("cannot open the training log in " + o.out_dir);
  }
  for (int i = 0; i < o.steps; ++i) {
    const StepReport r = train_step(model, state, data);
    log << r.to_json().dump() << '\n';
    if (o.checkpoint_every > 0 && model.step % o.checkpoint_every == 0) {
      save_checkpoint(model, fs::path(o.out_dir) / ("checkpoint_" + std::to_string(model.step) + ".ckpt"), &state);
    }
    if ((i + 1) % 100 == 0 || i + 1 == o.steps) {
      out << "step " << model.step << " total " << r.losses.at("total") << '\n';
    }
  }
  log.flush();
  if (!log) {
    throw IoError("failed writing the training log");
  }
  save_checkpoint(model, fs::path(o.out_dir) / "final.ckpt", &state);
  out << "final checkpoint " << (fs::path(o.out_dir) / "final.ckpt").string() << '\n';
}

void cmd_train(const Options& o, std::ostream& out) {
  std::ifstream in(o.config_path);
  if (!in) {
    throw IoError("cannot open config " + o.config_path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config " + o.config_path + " is not valid JSON: " + e.what());
  }
  if (o.seed_given) {
    j["seed"] = o.seed;
  }
  const CodecConfig config = config_from_json(j);
  if (o.steps < 0 || o.checkpoint_every < 0) {
    throw ConfigError("--steps and --checkpoint-every must be non-negative");
  }
  out << "seed=" << config.seed << '\n';
  out << "config " << to_json(config).dump() << '\n';
  if (o.dry_run) {
    return;
  }
  const Manifest manifest = load_manifest(o.manifest);
  const LabeledDataset data = windowed_dataset(load_split(manifest, o.split), config.window_len, config.window_stride,
                                               config.downsample_factor);
  ensure_directory(o.out_dir);
  write_json(fs::path(o.out_dir) / "config.json", to_json(config));
  {
    std::ofstream fresh(fs::path(o.out_dir) / "train_log.jsonl", std::ios::trunc);
  }
  CodecModel model = create_model(config, data.skeleton, Normalizer::fit(data.features), data.fps);
  TrainingState state = make_training_state(model);
  out << "training on " << data.size() << " windows, " << data.alphabet.size() << " styles\n";
  run_training(model, state, data, o, out);
}

void cmd_resume(const Options& o, std::ostream& out) {
  LoadedCheckpoint loaded = read_checkpoint(o.checkpoint);
  if (!loaded.state) {
    throw ConfigError("checkpoint " + o.checkpoint + " holds no training state and cannot be resumed");
  }
  if (o.steps < 0 || o.checkpoint_every < 0) {
    throw ConfigError("--steps and --checkpoint-every must be non-negative");
  }
  CodecModel& model = loaded.model;
  const Manifest manifest = load_manifest(o.manifest);
  const LabeledDataset data = windowed_dataset(load_split(manifest, o.split), model.config.window_len,
                                               model.config.window_stride, model.config.downsample_factor);
  ensure_directory(o.out_dir);
  out << "seed=" << model.config.seed << '\n';
  out << "resuming at step " << model.step << '\n';
  run_training(model, *loaded.state, data, o, out);
}

void cmd_reconstruct(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  const MotionClip clip = load_input(o.input);
  save_clip(reconstruct(model, clip, o.layers > 0 ? o.layers : -1), o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_transfer(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  const MotionClip content = load_input(o.content);
  const MotionClip style = load_input(o.style);
  save_clip(code_swap_transfer(model, content, style, cutoff(model, o.s)), o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_extract(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  save_clip(content_extract(model, load_input(o.input), cutoff(model, o.s)), o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_interpolate(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  save_clip(style_interpolation(model, load_input(o.input), o.alpha, cutoff(model, o.s)), o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_invert(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  save_clip(style_inversion(model, load_input(o.input), cutoff(model, o.s)), o.output);
  out << "wrote " << o.output << '\n';
}

TransitionScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open transition script " + path);
  }
  TransitionScript script;
  const fs::path base = fs::path(path).parent_path();
  try {
    const json j = json::parse(in);
    for (const auto& p : j.at("styles")) {
      const fs::path clip_path = p.get<std::string>();
      script.styles.push_back(load_clip(clip_path.is_absolute() ? clip_path : base / clip_path));
    }
    for (const auto& seg : j.at("segments")) {
      script.segments.push_back({seg.at("style").get<int>(), seg.at("begin").get<int>(), seg.at("end").get<int>()});
    }
  } catch (const json::exception& e) {
    throw ParseError("malformed transition script " + path + ": " + e.what());
  }
  return script;
}

void cmd_transition(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  const MotionClip content = load_input(o.content);
  const TransitionScript script = load_script(o.script);
  save_clip(style_transition(model, content, script, cutoff(model, o.s)), o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_blend(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  save_clip(motion_blend(model, load_input(o.first), load_input(o.second)), o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_augment(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  const MotionClip content = load_input(o.input);
  out << "seed=" << o.seed << '\n';
  Rng rng(o.seed);
  const AugmentationResult r = random_style_augmentation(model, content, rng, o.segment_slots, cutoff(model, o.s));
  save_clip(r.clip, o.output);
  out << "style indices " << json(r.style_indices).dump() << '\n';
  out << "wrote " << o.output << '\n';
}

void cmd_content_interp(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  save_clip(content_interpolation(model, load_input(o.first), load_input(o.second), o.beta, cutoff(model, o.s),
                                  o.style_from_second),
            o.output);
  out << "wrote " << o.output << '\n';
}

void cmd_train_classifier(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const Manifest manifest = load_manifest(o.manifest);
  const LabeledDataset data =
      windowed_dataset(load_split(manifest, o.split), o.window, o.stride, StyleClassifier::kFrameMultiple);
  ClassifierConfig cc;
  cc.steps = o.steps;
  cc.batch_size = o.batch;
  cc.learning_rate = o.lr;
  cc.holdout_fraction = o.holdout;
  cc.seed = o.seed;
  out << "seed=" << o.seed << '\n';
  const StyleClassifier c = train_classifier(data, cc);
  save_classifier(c, o.output);
  out << "held-out accuracy " << c.heldout_accuracy << "% on " << c.heldout_count << " windows\n";
  out << "wrote " << o.output << '\n';
}

void cmd_eval(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  const StyleClassifier classifier = load_classifier(o.classifier);
  const Manifest manifest = load_manifest(o.manifest);
  TransferEvalPlan plan;
  plan.contents = split_windows(manifest, o.split, model.config.window_len, model.config.downsample_factor);
  plan.styles = plan.contents;
  plan.pairs_per_content = o.pairs;
  plan.k = o.k;
  plan.s = cutoff(model, o.s);
  plan.seed = o.seed;
  plan.split = o.split;
  out << "seed=" << o.seed << '\n';
  const EvalReport report = evaluate_transfer(model, classifier, plan);
  write_json(o.output, report.to_json());
  out << report.to_json().dump() << '\n';
}

void cmd_export_embeddings(const Options& o, std::ostream& out) {
  check_output_file(o.output);
  const CodecModel model = load_checkpoint(o.checkpoint);
  const Manifest manifest = load_manifest(o.manifest);
  const auto clips = split_windows(manifest, o.split, model.config.window_len, model.config.downsample_factor);
  export_embeddings(model, clips, o.output);
  out << "wrote " << clips.size() * static_cast<size_t>(model.stack.layers() + 1) << " rows to " << o.output << '\n';
}

} // namespace

CliRun build_cli(std::ostream& out) {
  CliRun run;
  run.app = std::make_unique<CLI::App>("Residual-quantized motion codec: data generation, training, latent edits "
                                       "and evaluation.",
                                       "rvqmotion");
  CLI::App& app = *run.app;
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every command");
  auto o = std::make_shared<Options>();
  auto bind = [&run, o, &out](CLI::App* cmd, void (*fn)(const Options&, std::ostream&)) {
    run.commands[cmd->get_name()] = [o, &out, fn] { fn(*o, out); };
  };
  auto add_checkpoint = [o](CLI::App* cmd) {
    cmd->add_option("--checkpoint", o->checkpoint, "Model checkpoint file")->required()->check(CLI::ExistingFile);
  };
  auto add_s = [o](CLI::App* cmd) {
    cmd->add_option("--s", o->s, "Number of content codebooks (0 = the model's own cut-off)")
        ->check(CLI::NonNegativeNumber);
  };
  auto add_output = [o](CLI::App* cmd, const std::string& what) {
    cmd->add_option("--output", o->output, what)->required();
  };

  CLI::App* gen = app.add_subcommand("gen-synth", "Generate a synthetic stylized-gait dataset with a manifest");
  gen->add_option("--out", o->out_dir, "Output directory")->required();
  gen->add_option("--contents", o->contents, "Number of content trajectories (1-4)")->capture_default_str();
  gen->add_option("--styles", o->styles, "Number of training styles")->capture_default_str();
  gen->add_option("--unseen-styles", o->unseen_styles, "Extra styles held out entirely as the unseen split")
      ->capture_default_str();
  gen->add_option("--clips-per-pair", o->clips_per_pair, "Clips per (content, style) pair")->capture_default_str();
  gen->add_option("--test-clips", o->test_clips, "Clips per seen pair assigned to the test split")
      ->capture_default_str();
  gen->add_option("--frames", o->frames, "Frames per clip")->capture_default_str();
  gen->add_option("--fps", o->fps, "Frame rate")->capture_default_str();
  gen->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  bind(gen, cmd_gen_synth);

  CLI::App* train = app.add_subcommand("train", "Train a codec from a JSON config and a dataset manifest");
  train->add_option("--config", o->config_path, "JSON config (a \"profile\" key supplies defaults)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--manifest", o->manifest, "Dataset manifest")->check(CLI::ExistingFile);
  train->add_option("--split", o->split, "Manifest split used for training")->capture_default_str();
  train->add_option("--out", o->out_dir, "Directory for checkpoints and the step log");
  train->add_option("--steps", o->steps, "Training steps")->capture_default_str();
  train->add_option("--checkpoint-every", o->checkpoint_every, "Checkpoint period in steps (0 = final only)")
      ->capture_default_str();
  train->add_option("--seed", o->seed, "Override the config seed")->each([o](const std::string&) {
    o->seed_given = true;
  });
  train->add_flag("--dry-run", o->dry_run, "Validate and echo the resolved config without training");
  bind(train, cmd_train);

  CLI::App* resume = app.add_subcommand("resume", "Continue training from a checkpoint with optimizer state");
  add_checkpoint(resume);
  resume->add_option("--manifest", o->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  resume->add_option("--split", o->split, "Manifest split used for training")->capture_default_str();
  resume->add_option("--out", o->out_dir, "Directory for checkpoints and the step log")->required();
  resume->add_option("--steps", o->steps, "Additional training steps")->capture_default_str();
  resume->add_option("--checkpoint-every", o->checkpoint_every, "Checkpoint period in steps (0 = final only)")
      ->capture_default_str();
  bind(resume, cmd_resume);

  CLI::App* rec = app.add_subcommand("reconstruct", "Encode and decode a clip");
  add_checkpoint(rec);
  rec->add_option("--input", o->input, "Input MQM clip")->required()->check(CLI::ExistingFile);
  add_output(rec, "Output MQM clip");
  rec->add_option("--layers", o->layers, "Codebooks used for decoding (0 = all)")->check(CLI::NonNegativeNumber);
  bind(rec, cmd_reconstruct);

  CLI::App* transfer = app.add_subcommand("transfer", "Swap the style codes of a content clip with a style clip's");
  add_checkpoint(transfer);
  transfer->add_option("--content", o->content, "Content MQM clip")->required()->check(CLI::ExistingFile);
  transfer->add_option("--style", o->style, "Style MQM clip")->required()->check(CLI::ExistingFile);
  add_output(transfer, "Output MQM clip");
  add_s(transfer);
  bind(transfer, cmd_transfer);

  CLI::App* extract = app.add_subcommand("extract", "Decode only the content codebooks");
  add_checkpoint(extract);
  extract->add_option("--input", o->input, "Input MQM clip")->required()->check(CLI::ExistingFile);
  add_output(extract, "Output MQM clip");
  add_s(extract);
  bind(extract, cmd_extract);

  CLI::App* interp = app.add_subcommand("interpolate", "Scale the style codes by alpha before decoding");
  add_checkpoint(interp);
  interp->add_option("--input", o->input, "Input MQM clip")->required()->check(CLI::ExistingFile);
  add_output(interp, "Output MQM clip");
  interp->add_option("--alpha", o->alpha, "Style scale; outside [0, 1] extrapolates")->required();
  add_s(interp);
  bind(interp, cmd_interpolate);

  CLI::App* invert = app.add_subcommand("invert", "Subtract the style codes from the content codes");
  add_checkpoint(invert);
  invert->add_option("--input", o->input, "Input MQM clip")->required()->check(CLI::ExistingFile);
  add_output(invert, "Output MQM clip");
  add_s(invert);
  bind(invert, cmd_invert);

  CLI::App* transition = app.add_subcommand("transition", "Change style over time following a segment script");
  add_checkpoint(transition);
  transition->add_option("--content", o->content, "Content MQM clip")->required()->check(CLI::ExistingFile);
  transition
      ->add_option("--script", o->script,
                   "JSON script {\"styles\": [clip paths], \"segments\": [{\"style\", \"begin\", \"end\"}]} "
                   "with spans in latent slots")
      ->required()
      ->check(CLI::ExistingFile);
  add_output(transition, "Output MQM clip");
  add_s(transition);
  bind(transition, cmd_transition);

  CLI::App* blend = app.add_subcommand("blend", "Concatenate two clips in code space and decode once");
  add_checkpoint(blend);
  blend->add_option("--first", o->first, "First MQM clip")->required()->check(CLI::ExistingFile);
  blend->add_option("--second", o->second, "Second MQM clip")->required()->check(CLI::ExistingFile);
  add_output(blend, "Output MQM clip");
  bind(blend, cmd_blend);

  CLI::App* augment = app.add_subcommand("augment", "Replace style codes with random codebook entries");
  add_checkpoint(augment);
  augment->add_option("--input", o->input, "Content MQM clip")->required()->check(CLI::ExistingFile);
  add_output(augment, "Output MQM clip");
  augment->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  augment->add_option("--segment-slots", o->segment_slots, "Latent slots sharing one random style code")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_s(augment);
  bind(augment, cmd_augment);

  CLI::App* cinterp = app.add_subcommand("content-interp", "Interpolate the content codes of two clips");
  add_checkpoint(cinterp);
  cinterp->add_option("--first", o->first, "Clip A (style source by default)")->required()->check(CLI::ExistingFile);
  cinterp->add_option("--second", o->second, "Clip B")->required()->check(CLI::ExistingFile);
  add_output(cinterp, "Output MQM clip");
  cinterp->add_option("--beta", o->beta, "Weight of B's content in [0, 1]")->required();
  cinterp->add_flag("--style-from-second", o->style_from_second, "Take the style codes from B instead of A");
  add_s(cinterp);
  bind(cinterp, cmd_content_interp);

  CLI::App* tcls = app.add_subcommand("train-classifier", "Train the style classifier used by eval");
  tcls->add_option("--manifest", o->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  tcls->add_option("--split", o->split, "Manifest split to train on")->capture_default_str();
  add_output(tcls, "Output classifier file");
  tcls->add_option("--steps", o->steps, "Optimization steps")->capture_default_str();
  tcls->add_option("--batch", o->batch, "Windows per step")->capture_default_str();
  tcls->add_option("--lr", o->lr, "Learning rate")->capture_default_str();
  tcls->add_option("--holdout", o->holdout, "Share of source clips per style held out")->capture_default_str();
  tcls->add_option("--window", o->window, "Window length in frames (multiple of 16)")->capture_default_str();
  tcls->add_option("--stride", o->stride, "Window stride in frames")->capture_default_str();
  tcls->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  bind(tcls, cmd_train_classifier);

  CLI::App* ev = app.add_subcommand("eval", "Style transfer metrics over a manifest split");
  add_checkpoint(ev);
  ev->add_option("--classifier", o->classifier, "Classifier file")->required()->check(CLI::ExistingFile);
  ev->add_option("--manifest", o->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", o->split, "Manifest split to evaluate")->capture_default_str();
  add_output(ev, "Output report (JSON)");
  ev->add_option("--k", o->k, "k of the top-k style accuracy")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--pairs", o->pairs, "Style partners per content window")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ev->add_option("--seed", o->seed, "Random seed for pairing")->capture_default_str();
  add_s(ev);
  bind(ev, cmd_eval);

  CLI::App* emb = app.add_subcommand("export-embeddings", "Write pooled per-layer residuals as CSV");
  add_checkpoint(emb);
  emb->add_option("--manifest", o->manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  emb->add_option("--split", o->split, "Manifest split to export")->capture_default_str();
  add_output(emb, "Output CSV");
  bind(emb, cmd_export_embeddings);

  // train needs --manifest and --out unless it is a dry run.
  train->callback([o] {
    if (!o->dry_run && (o->manifest.empty() || o->out_dir.empty())) {
      throw CLI::ValidationError("train", "--manifest and --out are required unless --dry-run is given");
    }
  });
  return run;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliRun run = build_cli(out);
  try {
    run.app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = run.app->exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  try {
    for (const CLI::App* sub : run.app->get_subcommands()) {
      run.commands.at(sub->get_name())();
    }
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

} // namespace rvqmotion
