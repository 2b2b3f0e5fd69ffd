#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "rvqmotion/codec/model.h"
#include "rvqmotion/eval/classifier.h"
#include "rvqmotion/motion/clip.h"

namespace rvqmotion {

// Percentage of rows whose target ranks among the k most probable classes.
// Ties rank the lower class index first. Empty input raises NumericError;
// a target outside [0, classes) raises ConfigError.
double top_k_accuracy(const std::vector<Eigen::VectorXd>& probabilities, const std::vector<int>& targets, int k);

struct StyleAccuracy {
  double top1 = 0.0;
  double topk = 0.0;
  int k = 1;
};

// Classifier hit rates on generated clips against intended style labels.
StyleAccuracy style_accuracy(const StyleClassifier& classifier,
                             const std::vector<MotionClip>& generated,
                             const std::vector<std::string>& target_labels,
                             int k);

// Percentage of rows whose top-1 class equals the content clip's class.
double cross_classification_rate(const std::vector<Eigen::VectorXd>& probabilities,
                                 const std::vector<int>& content_targets);

double cross_classification(const StyleClassifier& classifier,
                            const std::vector<MotionClip>& generated,
                            const std::vector<std::string>& content_labels);

// Mean per-row Euclidean distance between two T x 3 trajectories.
double trajectory_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// D_C between integrated root trajectories. Unequal lengths are truncated
// to the shorter with a warning.
double content_deviation(const MotionClip& generated, const MotionClip& content);

// Mean joint-position distance (meters) between the FK positions of two raw
// feature matrices of equal shape.
double l2p_error(const Skeleton& skeleton, const FeatureMatrix& a, const FeatureMatrix& b);

// Mean L2P of `n_books`-book reconstructions over the clips.
double reconstruction_l2p(const CodecModel& model, const std::vector<MotionClip>& clips, int n_books);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values);

struct PerStyleRow {
  std::string label;
  double mean = 0.0;
  int count = 0;
  bool above_subset_mean = false;
};

struct PerStyleReport {
  std::vector<PerStyleRow> rows;  // sorted by mean, descending
  double subset_mean = 0.0;       // mean over every sample
  int above_count = 0;
};

// Labels with no samples raise ConfigError.
PerStyleReport per_style_report(const std::map<std::string, std::vector<double>>& deviations_by_label);

nlohmann::json to_json(const PerStyleReport& report);

struct EvalReport {
  std::string split;
  uint64_t seed = 0;
  int pairs = 0;
  int k = 1;
  double style_acc_top1 = 0.0;
  double style_acc_topk = 0.0;
  MeanStd content_dev;
  MeanStd reconstruction_dev;
  double cross_cls = 0.0;
  double rec_err_l2p = 0.0;
  PerStyleReport per_style;

  nlohmann::json to_json() const;
};

// Exported per-layer pooled residual of one clip.
struct EmbeddingRow {
  int layer = 0;
  std::string label;
  Eigen::VectorXd vector;
};

// One row per (clip, layer in [0, N]) of the time-mean residual r[layer].
std::vector<EmbeddingRow> embedding_rows(const CodecModel& model, const std::vector<MotionClip>& clips);

// CSV with header "layer,label,dim_0,...,dim_{d-1}".
void export_embeddings(const CodecModel& model, const std::vector<MotionClip>& clips, const std::filesystem::path& path);
std::vector<EmbeddingRow> load_embeddings(const std::filesystem::path& path);

} // namespace rvqmotion
