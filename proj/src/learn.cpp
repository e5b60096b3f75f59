#include "fabula/learn.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "fabula/error.hpp"
#include "fabula/util.hpp"

namespace fabula::learn {

FeatureMatrix FeatureMatrix::zeros(size_t rows, size_t cols) {
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.assign(rows * cols, 0.0);
  return m;
}

namespace {

inline double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

double raw_score(const LogisticModel& model, std::span<const double> x) {
  double z = model.bias;
  for (size_t i = 0; i < x.size(); ++i) z += model.weights[i] * x[i];
  return z;
}

void check_shapes(const FeatureMatrix& X, const std::vector<int>& y) {
  if (y.size() != X.rows) {
    fail(Errc::dimension_mismatch,
         "labels (" + std::to_string(y.size()) + ") vs rows (" +
             std::to_string(X.rows) + ")");
  }
}

void check_two_classes(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) (v ? pos : neg) = true;
  if (!pos || !neg) fail(Errc::single_class, "labels contain a single class");
}

}  // namespace

double LogisticModel::predict(std::span<const double> x) const {
  return sigmoid(raw_score(*this, x));
}

double logistic_loss(const FeatureMatrix& X, const std::vector<int>& y,
                     const LogisticModel& model) {
  check_shapes(X, y);
  double total = 0.0;
  for (size_t r = 0; r < X.rows; ++r) {
    double z = raw_score(model, X.row(r));
    // log(1 + e^z) - y z, written to stay finite for large |z|.
    total += std::max(z, 0.0) - z * y[r] + std::log1p(std::exp(-std::abs(z)));
  }
  total /= static_cast<double>(X.rows);
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  return total + 0.5 * model.config.l2 * reg;
}

void logistic_gradient(const FeatureMatrix& X, const std::vector<int>& y,
                       const LogisticModel& model, std::vector<double>& grad_w,
                       double& grad_b) {
  check_shapes(X, y);
  grad_w.assign(X.cols, 0.0);
  grad_b = 0.0;
  for (size_t r = 0; r < X.rows; ++r) {
    auto x = X.row(r);
    double residual = sigmoid(raw_score(model, x)) - y[r];
    for (size_t c = 0; c < X.cols; ++c) grad_w[c] += residual * x[c];
    grad_b += residual;
  }
  double inv = 1.0 / static_cast<double>(X.rows);
  for (size_t c = 0; c < X.cols; ++c) {
    grad_w[c] = grad_w[c] * inv + model.config.l2 * model.weights[c];
  }
  grad_b *= inv;
}

LogisticModel train_logistic(const FeatureMatrix& X, const std::vector<int>& y,
                             const TrainConfig& config, const EpochHook& hook) {
  if (X.rows < 2) fail(Errc::insufficient_data, "need at least 2 rows");
  check_shapes(X, y);
  check_two_classes(y);
  if (config.learning_rate <= 0.0) fail(Errc::config_error, "learning_rate must be > 0");
  if (config.epochs < 1) fail(Errc::config_error, "epochs must be >= 1");

  LogisticModel model;
  model.config = config;
  model.weights.assign(X.cols, 0.0);
  model.bias = 0.0;

  std::vector<double> grad_w;
  double grad_b = 0.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    logistic_gradient(X, y, model, grad_w, grad_b);
    for (size_t c = 0; c < X.cols; ++c) {
      model.weights[c] -= config.learning_rate * grad_w[c];
    }
    model.bias -= config.learning_rate * grad_b;
    if (hook) hook(epoch, model, logistic_loss(X, y, model));
  }
  return model;
}

metrics::ConfusionCounts evaluate(const LogisticModel& model,
                                  const FeatureMatrix& X,
                                  const std::vector<int>& y) {
  check_shapes(X, y);
  metrics::ConfusionCounts c;
  for (size_t r = 0; r < X.rows; ++r) {
    bool predicted = model.predict(X.row(r)) > model.config.threshold;
    bool actual = y[r] != 0;
    if (predicted && actual) ++c.tp;
    if (predicted && !actual) ++c.fp;
    if (!predicted && actual) ++c.fn;
    if (!predicted && !actual) ++c.tn;
  }
  return c;
}

std::pair<LogisticModel, EpochTrace> train_logistic_eval(
    const FeatureMatrix& X, const std::vector<int>& y, const TrainConfig& config,
    const FeatureMatrix& eval_X, const std::vector<int>& eval_y) {
  EpochTrace trace;
  trace.reserve(static_cast<size_t>(config.epochs));
  LogisticModel model =
      train_logistic(X, y, config,
                     [&](int epoch, const LogisticModel& m, double loss) {
                       auto counts = evaluate(m, eval_X, eval_y);
                       trace.push_back(EpochRecord{epoch, loss,
                                                   metrics::accuracy(counts),
                                                   metrics::f1(counts)});
                     });
  return {std::move(model), std::move(trace)};
}

double gradient_check(const FeatureMatrix& X, const std::vector<int>& y,
                      const LogisticModel& model, double epsilon) {
  if (epsilon <= 0.0 || epsilon > 1e-3) {
    fail(Errc::config_error, "epsilon must be in (0, 1e-3]");
  }
  std::vector<double> grad_w;
  double grad_b = 0.0;
  logistic_gradient(X, y, model, grad_w, grad_b);

  LogisticModel probe = model;
  double worst = 0.0;
  auto central = [&](double* slot) {
    double saved = *slot;
    *slot = saved + epsilon;
    double up = logistic_loss(X, y, probe);
    *slot = saved - epsilon;
    double down = logistic_loss(X, y, probe);
    *slot = saved;
    return (up - down) / (2.0 * epsilon);
  };
  auto update = [&](double analytic, double numeric) {
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (size_t c = 0; c < probe.weights.size(); ++c) {
    update(grad_w[c], central(&probe.weights[c]));
  }
  update(grad_b, central(&probe.bias));
  return worst;
}

std::pair<FeatureMatrix, std::vector<int>> undersample(const FeatureMatrix& X,
                                                       const std::vector<int>& y,
                                                       uint64_t seed) {
  check_shapes(X, y);
  check_two_classes(y);
  std::vector<size_t> pos, neg;
  for (size_t r = 0; r < y.size(); ++r) (y[r] ? pos : neg).push_back(r);
  std::vector<size_t>& majority = pos.size() > neg.size() ? pos : neg;
  size_t minority_size = std::min(pos.size(), neg.size());
  if (majority.size() > minority_size) {
    Rng rng(seed);
    rng.shuffle(majority);
    majority.resize(minority_size);
  }
  std::vector<size_t> keep;
  keep.reserve(2 * minority_size);
  keep.insert(keep.end(), pos.begin(), pos.end());
  keep.insert(keep.end(), neg.begin(), neg.end());
  std::sort(keep.begin(), keep.end());

  FeatureMatrix out = FeatureMatrix::zeros(keep.size(), X.cols);
  std::vector<int> labels(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    auto row = X.row(keep[i]);
    std::copy(row.begin(), row.end(), out.values.begin() + i * X.cols);
    labels[i] = y[keep[i]];
    if (!X.row_ids.empty()) out.row_ids.push_back(X.row_ids[keep[i]]);
  }
  return {std::move(out), std::move(labels)};
}

SplitIndices stratified_split(const std::vector<int>& y, double eval_fraction,
                              uint64_t seed) {
  if (eval_fraction <= 0.0 || eval_fraction >= 1.0) {
    fail(Errc::config_error, "eval_fraction must be in (0, 1)");
  }
  std::vector<size_t> pos, neg;
  for (size_t r = 0; r < y.size(); ++r) (y[r] ? pos : neg).push_back(r);
  if (pos.size() < 2 || neg.size() < 2) {
    fail(Errc::insufficient_data, "each class needs >= 2 members to split");
  }
  SplitIndices split;
  Rng rng(seed);
  for (std::vector<size_t>* cls : {&pos, &neg}) {
    Rng class_rng = rng.derive(cls == &pos ? "pos" : "neg");
    class_rng.shuffle(*cls);
    size_t n_eval = std::max<size_t>(
        1, static_cast<size_t>(std::floor(eval_fraction *
                                          static_cast<double>(cls->size()))));
    n_eval = std::min(n_eval, cls->size() - 1);
    split.eval.insert(split.eval.end(), cls->begin(), cls->begin() + n_eval);
    split.train.insert(split.train.end(), cls->begin() + n_eval, cls->end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.eval.begin(), split.eval.end());
  return split;
}

namespace {

FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<size_t>& rows) {
  FeatureMatrix out = FeatureMatrix::zeros(rows.size(), X.cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    auto row = X.row(rows[i]);
    std::copy(row.begin(), row.end(), out.values.begin() + i * X.cols);
    if (!X.row_ids.empty()) out.row_ids.push_back(X.row_ids[rows[i]]);
  }
  return out;
}

std::vector<int> take_labels(const std::vector<int>& y,
                             const std::vector<size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(y[r]);
  return out;
}

}  // namespace

std::vector<TagResult> one_vs_all_train(
    const std::vector<corpus::MoralTag>& tags,
    const std::function<const FeatureMatrix&(corpus::MoralTag)>& matrix_for,
    const std::function<std::vector<int>(corpus::MoralTag)>& labels_for,
    const TrainConfig& config, size_t repeats) {
  if (repeats < 1) fail(Errc::config_error, "repeats must be >= 1");
  std::vector<TagResult> results(tags.size());
  std::exception_ptr first_error;
  std::mutex error_mutex;
  parallel_for(tags.size(), [&](size_t first, size_t last) {
    for (size_t t = first; t < last; ++t) {
      try {
        corpus::MoralTag tag = tags[t];
        const FeatureMatrix& X = matrix_for(tag);
        std::vector<int> y = labels_for(tag);

        TagResult result;
        result.tag = tag;
        result.positives =
            static_cast<size_t>(std::count(y.begin(), y.end(), 1));
        size_t negatives = y.size() - result.positives;
        if (std::min(result.positives, negatives) < 2) {
          result.note = "insufficient-data";
          results[t] = std::move(result);
          continue;
        }

        Rng tag_rng =
            Rng(config.seed).derive(std::string("tag:") +
                                    std::string(corpus::to_string(tag)));
        double acc_sum = 0.0, f1_sum = 0.0;
        for (size_t rep = 0; rep < repeats; ++rep) {
          Rng rep_rng = tag_rng.derive("repeat:" + std::to_string(rep));
          auto [Xu, yu] = undersample(X, y, rep_rng.next_u64());
          SplitIndices split = stratified_split(yu, 0.2, rep_rng.next_u64());
          LogisticModel model = train_logistic(
              take_rows(Xu, split.train), take_labels(yu, split.train), config);
          auto counts =
              evaluate(model, take_rows(Xu, split.eval), take_labels(yu, split.eval));
          acc_sum += metrics::accuracy(counts);
          f1_sum += metrics::f1(counts);
          ++result.repeats_done;
        }
        double n = static_cast<double>(result.repeats_done);
        result.mean_accuracy = {acc_sum / n, true};
        result.mean_f1 = {f1_sum / n, true};
        results[t] = std::move(result);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  });
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

const std::array<std::string_view, PairFeatures::kCount>& PairFeatures::names() {
  static const std::array<std::string_view, kCount> names = {
      "lexical_cosine",  "semantic_cosine", "frame_distance_ab",
      "frame_distance_ba", "shape_agreement", "lexical_overlap",
      "same_tag",        "moral_cosine"};
  return names;
}

std::array<double, PairFeatures::kCount> PairFeatures::as_array() const {
  return {lexical_cosine,  semantic_cosine, frame_distance_ab,
          frame_distance_ba, shape_agreement, lexical_overlap,
          same_tag,        moral_cosine};
}

PairFeatures pair_features(const StoryResources& r, const std::string& story_a,
                           const std::string& story_b) {
  size_t a = r.require(story_a);
  size_t b = r.require(story_b);

  PairFeatures f;
  auto safe_cosine = [](const std::optional<std::vector<double>>& u,
                        const std::optional<std::vector<double>>& v) {
    if (!u || !v) return 0.0;
    try {
      return textsim::cosine(*u, *v);
    } catch (const Error&) {
      return 0.0;
    }
  };
  f.lexical_cosine = safe_cosine(r.lexical_vector(a), r.lexical_vector(b));
  f.semantic_cosine = safe_cosine(r.semantic_vector(a), r.semantic_vector(b));
  f.moral_cosine = safe_cosine(r.moral_vector(a), r.moral_vector(b));

  auto safe_distance = [](const frames::FrameSeq* ref, const frames::FrameSeq* other) {
    if (!ref || !other || ref->frames.empty()) return 1.0;
    return frames::scaled_frame_distance(*ref, *other);
  };
  f.frame_distance_ab = safe_distance(r.frame_seq(a), r.frame_seq(b));
  f.frame_distance_ba = safe_distance(r.frame_seq(b), r.frame_seq(a));

  const auto& pa = r.arc_profile(a);
  const auto& pb = r.arc_profile(b);
  f.shape_agreement =
      pa && pb && shapes::shape_agreement(*pa, *pb) ? 1.0 : 0.0;

  f.lexical_overlap = textsim::lexical_overlap(r.tokens(a), r.tokens(b));

  const auto& tags_a = r.story(a).tags;
  const auto& tags_b = r.story(b).tags;
  bool share = std::any_of(tags_a.begin(), tags_a.end(), [&](corpus::MoralTag t) {
    return tags_b.contains(t);
  });
  f.same_tag = share ? 1.0 : 0.0;
  return f;
}

FeatureMatrix pair_feature_matrix(
    const StoryResources& r,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  FeatureMatrix X = FeatureMatrix::zeros(pairs.size(), PairFeatures::kCount);
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto f = pair_features(r, pairs[i].first, pairs[i].second).as_array();
    std::copy(f.begin(), f.end(), X.values.begin() + i * PairFeatures::kCount);
    X.row_ids.push_back(pairs[i].first + "|" + pairs[i].second);
  }
  return X;
}

std::vector<DimensionResult> train_analogy_classifiers(
    const std::vector<corpus::PairAnnotation>& annotations,
    const StoryResources& resources, const TrainConfig& config, size_t repeats) {
  if (annotations.size() < 10) {
    fail(Errc::insufficient_data,
         "need >= 10 annotated pairs, got " + std::to_string(annotations.size()));
  }
  if (repeats < 1) fail(Errc::config_error, "repeats must be >= 1");

  std::vector<std::pair<std::string, std::string>> id_pairs;
  id_pairs.reserve(annotations.size());
  for (const corpus::PairAnnotation& a : annotations) {
    id_pairs.emplace_back(a.story_a, a.story_b);
  }
  FeatureMatrix X_all = pair_feature_matrix(resources, id_pairs);

  std::vector<DimensionResult> results;
  for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
    DimensionResult result;
    result.dimension = dim;

    std::vector<size_t> rows;
    std::vector<int> y;
    for (size_t i = 0; i < annotations.size(); ++i) {
      auto v = annotations[i].label(dim);
      if (!v) continue;
      rows.push_back(i);
      y.push_back(*v ? 1 : 0);
    }
    result.labeled_pairs = rows.size();
    if (rows.empty()) {
      result.note = "no-labels";
      results.push_back(std::move(result));
      continue;
    }
    size_t positives = static_cast<size_t>(std::count(y.begin(), y.end(), 1));
    result.positive_ratio =
        static_cast<double>(positives) / static_cast<double>(rows.size());
    if (std::min(positives, rows.size() - positives) < 2) {
      result.note = "untrainable";
      results.push_back(std::move(result));
      continue;
    }

    result.trainable = true;
    FeatureMatrix X = take_rows(X_all, rows);
    Rng dim_rng = Rng(config.seed).derive(std::string("dimension:") +
                                          std::string(corpus::to_string(dim)));
    double acc_sum = 0.0, f1_sum = 0.0;
    for (size_t rep = 0; rep < repeats; ++rep) {
      SplitIndices split = stratified_split(
          y, 0.2, dim_rng.derive("repeat:" + std::to_string(rep)).next_u64());
      LogisticModel model = train_logistic(
          take_rows(X, split.train), take_labels(y, split.train), config);
      auto counts =
          evaluate(model, take_rows(X, split.eval), take_labels(y, split.eval));
      acc_sum += metrics::accuracy(counts);
      f1_sum += metrics::f1(counts);
    }
    double n = static_cast<double>(repeats);
    result.accuracy = {acc_sum / n, true};
    result.f1 = {f1_sum / n, true};
    result.final_model = train_logistic(X, y, config);
    results.push_back(std::move(result));
  }
  return results;
}

TransferBuild build_transfer_pairs(const std::vector<corpus::Story>& stories,
                                   size_t target_size, uint64_t seed) {
  if (target_size < 1) fail(Errc::config_error, "target_size must be >= 1");
  std::vector<size_t> tagged;
  for (size_t i = 0; i < stories.size(); ++i) {
    if (!stories[i].tags.empty()) tagged.push_back(i);
  }
  if (tagged.size() < 2) {
    fail(Errc::insufficient_data, "need >= 2 tagged stories");
  }

  std::vector<std::pair<std::string, std::string>> positives, negatives;
  for (size_t x = 0; x < tagged.size(); ++x) {
    for (size_t yx = x + 1; yx < tagged.size(); ++yx) {
      const corpus::Story& a = stories[tagged[x]];
      const corpus::Story& b = stories[tagged[yx]];
      bool share = std::any_of(a.tags.begin(), a.tags.end(),
                               [&](corpus::MoralTag t) { return b.tags.contains(t); });
      (share ? positives : negatives).emplace_back(a.id, b.id);
    }
  }

  TransferBuild out;
  Rng rng(seed);
  auto sample_down = [&](std::vector<std::pair<std::string, std::string>>& v,
                         size_t want, std::string_view label) {
    if (v.size() <= want) return;
    Rng child = rng.derive(label);
    child.shuffle(v);
    v.resize(want);
    std::sort(v.begin(), v.end());
  };

  if (positives.size() < target_size) {
    out.warnings.push_back("only " + std::to_string(positives.size()) +
                           " same-tag pairs available (wanted " +
                           std::to_string(target_size) + ")");
  }
  sample_down(positives, target_size, "positives");
  size_t balanced = std::min(positives.size(), negatives.size());
  if (negatives.size() < positives.size()) {
    out.warnings.push_back("only " + std::to_string(negatives.size()) +
                           " tag-disjoint pairs available; balancing down");
  }
  sample_down(negatives, balanced, "negatives");
  positives.resize(balanced);
  negatives.resize(balanced);

  out.pairs.reserve(2 * balanced);
  for (auto& p : positives) out.pairs.push_back({p.first, p.second, 1});
  for (auto& p : negatives) out.pairs.push_back({p.first, p.second, 0});
  return out;
}

void save_model(const LogisticModel& model, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  out << "dimension " << model.weights.size() << "\n";
  out << "weights";
  for (double w : model.weights) out << " " << w;
  out << "\n";
  out << "bias " << model.bias << "\n";
  out << "config " << model.config.learning_rate << " " << model.config.epochs
      << " " << model.config.l2 << " " << model.config.seed << " "
      << model.config.threshold << "\n";
  write_file(path, out.str());
}

LogisticModel load_model(const std::string& path) {
  LogisticModel model;
  size_t dimension = 0;
  bool saw_dimension = false, saw_weights = false, saw_bias = false;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    auto cols = split_whitespace(line);
    if (cols.empty()) return;
    auto bad = [&](const std::string& why) {
      fail(Errc::malformed_record,
           path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (cols[0] == "dimension" && cols.size() == 2) {
      dimension = std::stoull(cols[1]);
      saw_dimension = true;
    } else if (cols[0] == "weights") {
      for (size_t i = 1; i < cols.size(); ++i) {
        model.weights.push_back(std::stod(cols[i]));
      }
      saw_weights = true;
    } else if (cols[0] == "bias" && cols.size() == 2) {
      model.bias = std::stod(cols[1]);
      saw_bias = true;
    } else if (cols[0] == "config" && cols.size() == 6) {
      model.config.learning_rate = std::stod(cols[1]);
      model.config.epochs = std::stoi(cols[2]);
      model.config.l2 = std::stod(cols[3]);
      model.config.seed = std::stoull(cols[4]);
      model.config.threshold = std::stod(cols[5]);
    } else {
      bad("unrecognized model field \"" + cols[0] + "\"");
    }
  });
  if (!saw_dimension || !saw_weights || !saw_bias ||
      model.weights.size() != dimension) {
    fail(Errc::malformed_record, path + ": incomplete model record");
  }
  return model;
}

std::string middle_window(const std::string& text, size_t words) {
  if (words < 1) fail(Errc::config_error, "words must be >= 1");
  auto tokens = split_whitespace(text);
  size_t n = tokens.size();
  if (n <= words) return text;
  size_t center = n / 2;
  size_t start = center - words / 2;
  start = std::min(start, n - words);
  std::string out;
  for (size_t i = start; i < start + words; ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace fabula::learn
