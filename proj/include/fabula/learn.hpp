#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fabula/metrics.hpp"
#include "fabula/resources.hpp"

namespace fabula::learn {

struct FeatureMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> row_ids;

  static FeatureMatrix zeros(size_t rows, size_t cols);
  double at(size_t r, size_t c) const { return values[r * cols + c]; }
  void set(size_t r, size_t c, double v) { values[r * cols + c] = v; }
  std::span<const double> row(size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 200;
  double l2 = 1e-3;
  uint64_t seed = 0;
  double threshold = 0.5;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  TrainConfig config;

  double predict(std::span<const double> x) const;  // sigmoid(w.x + b)
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
  double eval_f1 = 0.0;
};

using EpochTrace = std::vector<EpochRecord>;

// Mean cross-entropy plus (l2/2)||w||^2; the bias is not regularized.
double logistic_loss(const FeatureMatrix& X, const std::vector<int>& y,
                     const LogisticModel& model);
void logistic_gradient(const FeatureMatrix& X, const std::vector<int>& y,
                       const LogisticModel& model,
                       std::vector<double>& grad_w, double& grad_b);

using EpochHook = std::function<void(int epoch, const LogisticModel& model,
                                     double train_loss)>;

// Full-batch gradient descent from zero initialization. Deterministic: the
// seed only matters to callers that sample or split around the trainer.
LogisticModel train_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                             const TrainConfig& config,
                             const EpochHook& hook = {});

std::pair<LogisticModel, EpochTrace> train_logistic_eval(
    const FeatureMatrix& X, const std::vector<int>& y, const TrainConfig& config,
    const FeatureMatrix& eval_X, const std::vector<int>& eval_y);

// Max relative error between the analytic gradient and central finite
// differences, over all weight components and the bias.
double gradient_check(const FeatureMatrix& X, const std::vector<int>& y,
                      const LogisticModel& model, double epsilon);

// Majority class subsampled without replacement to the minority size; row
// order of the survivors is preserved.
std::pair<FeatureMatrix, std::vector<int>> undersample(const FeatureMatrix& X,
                                                       const std::vector<int>& y,
                                                       uint64_t seed);

struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> eval;
};

// Per-class shuffle then split, so both classes appear on both sides whenever
// each class has at least two members.
SplitIndices stratified_split(const std::vector<int>& y, double eval_fraction,
                              uint64_t seed);

metrics::ConfusionCounts evaluate(const LogisticModel& model,
                                  const FeatureMatrix& X,
                                  const std::vector<int>& y);

struct TagResult {
  corpus::MoralTag tag;
  size_t positives = 0;
  size_t repeats_done = 0;
  metrics::Flagged mean_accuracy{0.0, false};
  metrics::Flagged mean_f1{0.0, false};
  std::string note;  // non-empty when the tag was skipped
};

// repeat x { undersample, stratified 80/20 split, train, evaluate } per tag.
// matrix_for returns the feature matrix used for a tag (shared or per-tag).
std::vector<TagResult> one_vs_all_train(
    const std::vector<corpus::MoralTag>& tags,
    const std::function<const FeatureMatrix&(corpus::MoralTag)>& matrix_for,
    const std::function<std::vector<int>(corpus::MoralTag)>& labels_for,
    const TrainConfig& config, size_t repeats);

struct PairFeatures {
  double lexical_cosine = 0.0;
  double semantic_cosine = 0.0;
  double frame_distance_ab = 1.0;
  double frame_distance_ba = 1.0;
  double shape_agreement = 0.0;
  double lexical_overlap = 0.0;
  double same_tag = 0.0;
  double moral_cosine = 0.0;

  static constexpr size_t kCount = 8;
  static const std::array<std::string_view, kCount>& names();
  std::array<double, kCount> as_array() const;
};

// Missing resources fall back to neutral values: cosines 0, distances 1,
// indicators 0. Symmetric fields ignore argument order; the two frame
// distances swap with it.
PairFeatures pair_features(const StoryResources& resources,
                           const std::string& story_a,
                           const std::string& story_b);

FeatureMatrix pair_feature_matrix(
    const StoryResources& resources,
    const std::vector<std::pair<std::string, std::string>>& pairs);

struct DimensionResult {
  corpus::AnalogyDimension dimension;
  size_t labeled_pairs = 0;
  double positive_ratio = 0.0;
  bool trainable = false;
  metrics::Flagged accuracy{0.0, false};
  metrics::Flagged f1{0.0, false};
  std::string note;
  // Trained on every labeled pair once evaluation is done.
  std::optional<LogisticModel> final_model;
};

// One classifier per dimension over PairFeatures, evaluated on seeded
// stratified splits averaged over `repeats`.
std::vector<DimensionResult> train_analogy_classifiers(
    const std::vector<corpus::PairAnnotation>& annotations,
    const StoryResources& resources, const TrainConfig& config, size_t repeats);

struct TransferPair {
  std::string story_a;
  std::string story_b;
  int label = 0;  // 1 when the stories share a moral tag
};

struct TransferBuild {
  std::vector<TransferPair> pairs;
  std::vector<std::string> warnings;
};

// Positives: unordered tagged-story pairs sharing a tag, sampled down to
// target_size. Negatives: equally many tag-disjoint pairs. Balanced even when
// one side runs short (with a warning).
TransferBuild build_transfer_pairs(const std::vector<corpus::Story>& stories,
                                   size_t target_size, uint64_t seed);

// Contiguous `words`-token span centered at token n/2, clamped to the text.
std::string middle_window(const std::string& text, size_t words);

// Text model record: dimension, weights, bias, config, one field per line.
void save_model(const LogisticModel& model, const std::string& path);
LogisticModel load_model(const std::string& path);

}  // namespace fabula::learn
