#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fabula/error.hpp"
#include "fabula/learn.hpp"
#include "fabula/util.hpp"
#include "test_util.hpp"

using namespace fabula;
using namespace fabula::learn;

namespace {

// Two clusters split by the first feature, margin 2.
std::pair<FeatureMatrix, std::vector<int>> separable_toy(size_t n) {
  FeatureMatrix X = FeatureMatrix::zeros(n, 2);
  std::vector<int> y(n);
  Rng rng(3);
  for (size_t i = 0; i < n; ++i) {
    bool positive = i % 2 == 0;
    X.set(i, 0, (positive ? 1.0 : -2.0) + rng.next_unit());
    X.set(i, 1, rng.next_unit() * 2 - 1);
    y[i] = positive;
  }
  return {std::move(X), std::move(y)};
}

std::pair<FeatureMatrix, std::vector<int>> random_problem(uint64_t seed,
                                                          size_t rows,
                                                          size_t cols) {
  FeatureMatrix X = FeatureMatrix::zeros(rows, cols);
  std::vector<int> y(rows);
  Rng rng(seed);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) X.set(r, c, rng.next_unit() * 4 - 2);
    y[r] = r < rows / 2 ? 1 : 0;
  }
  return {std::move(X), std::move(y)};
}

}  // namespace

TEST_CASE("train_logistic separates a margin toy within 500 epochs") {
  auto [X, y] = separable_toy(40);
  TrainConfig config;
  config.learning_rate = 0.5;
  config.epochs = 500;
  config.l2 = 0.0;
  auto model = train_logistic(X, y, config);
  auto counts = evaluate(model, X, y);
  CHECK(metrics::accuracy(counts) == 1.0);
}

TEST_CASE("zero features converge to the base-rate entropy loss") {
  FeatureMatrix X = FeatureMatrix::zeros(10, 2);
  std::vector<int> y = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  TrainConfig config;
  config.learning_rate = 1.0;
  config.epochs = 5000;
  config.l2 = 1e-3;  // weights stay zero, so regularization adds nothing
  auto model = train_logistic(X, y, config);
  for (double w : model.weights) CHECK(w == 0.0);
  double loss = logistic_loss(X, y, model);
  CHECK(loss == doctest::Approx(0.6108643020548935).epsilon(1e-6));
  // bias approaches logit(0.3)
  CHECK(model.bias == doctest::Approx(std::log(0.3 / 0.7)).epsilon(1e-4));
}

TEST_CASE("single-class labels are rejected") {
  auto [X, y] = separable_toy(10);
  std::fill(y.begin(), y.end(), 1);
  try {
    train_logistic(X, y, {});
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::single_class);
  }
}

TEST_CASE("gradient_check agrees with finite differences") {
  auto [X, y] = random_problem(101, 10, 3);
  LogisticModel model;
  model.config.l2 = 0.01;
  Rng rng(5);
  model.weights = {rng.next_unit() - 0.5, rng.next_unit() - 0.5,
                   rng.next_unit() - 0.5};
  model.bias = rng.next_unit() - 0.5;
  CHECK(gradient_check(X, y, model, 1e-5) < 1e-5);
}

TEST_CASE("gradients vanish where they should") {
  // Zero weights on zero features: weight gradient exactly zero.
  FeatureMatrix X = FeatureMatrix::zeros(6, 2);
  std::vector<int> y = {1, 0, 1, 0, 1, 0};
  LogisticModel model;
  model.config.l2 = 0.0;
  model.weights = {0.0, 0.0};
  std::vector<double> grad_w;
  double grad_b = 0.0;
  logistic_gradient(X, y, model, grad_w, grad_b);
  CHECK(grad_w[0] == 0.0);
  CHECK(grad_w[1] == 0.0);
  // Balanced labels at the zero model: bias gradient is zero.
  CHECK(std::abs(grad_b) <= 1e-12);
}

TEST_CASE("training loss never increases at small learning rate") {
  auto [X, y] = random_problem(202, 30, 4);
  TrainConfig config;
  config.learning_rate = 0.01;
  config.epochs = 300;
  config.l2 = 0.0;
  std::vector<double> losses;
  train_logistic(X, y, config, [&](int, const LogisticModel&, double loss) {
    losses.push_back(loss);
  });
  for (size_t i = 1; i < losses.size(); ++i) {
    CHECK(losses[i] <= losses[i - 1] + 1e-12);
  }
}

TEST_CASE("training is bit-deterministic") {
  auto [X, y] = random_problem(303, 20, 3);
  FeatureMatrix eval_X = X;
  std::vector<int> eval_y = y;
  TrainConfig config;
  config.epochs = 50;
  auto [m1, t1] = train_logistic_eval(X, y, config, eval_X, eval_y);
  auto [m2, t2] = train_logistic_eval(X, y, config, eval_X, eval_y);
  CHECK(m1.weights == m2.weights);
  CHECK(m1.bias == m2.bias);
  REQUIRE(t1.size() == t2.size());
  for (size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].epoch == t2[i].epoch);
    CHECK(t1[i].train_loss == t2[i].train_loss);
    CHECK(t1[i].eval_accuracy == t2[i].eval_accuracy);
    CHECK(t1[i].eval_f1 == t2[i].eval_f1);
  }
  CHECK(t1.front().epoch == 1);
  CHECK(t1.back().epoch == 50);
}

TEST_CASE("undersample balances to the minority size") {
  FeatureMatrix X = FeatureMatrix::zeros(100, 1);
  std::vector<int> y(100, 0);
  for (size_t i = 0; i < 10; ++i) y[i * 10] = 1;
  for (size_t i = 0; i < 100; ++i) X.set(i, 0, static_cast<double>(i));

  auto [Xu, yu] = undersample(X, y, 7);
  CHECK(Xu.rows == 20);
  CHECK(std::count(yu.begin(), yu.end(), 1) == 10);
  CHECK(std::count(yu.begin(), yu.end(), 0) == 10);

  auto [Xu2, yu2] = undersample(X, y, 7);
  CHECK(Xu.values == Xu2.values);

  auto [Xu3, yu3] = undersample(X, y, 8);
  CHECK(Xu.values != Xu3.values);  // different seed, different majority sample

  // Balanced input comes back unchanged.
  FeatureMatrix Xb = FeatureMatrix::zeros(4, 1);
  std::vector<int> yb = {1, 0, 1, 0};
  auto [Xb2, yb2] = undersample(Xb, yb, 1);
  CHECK(Xb2.rows == 4);
  CHECK(yb2 == yb);
}

TEST_CASE("stratified_split keeps both classes on both sides") {
  std::vector<int> y = {1, 1, 1, 0, 0, 0, 0, 0, 1, 1};
  auto split = stratified_split(y, 0.2, 42);
  CHECK(split.train.size() + split.eval.size() == y.size());
  auto count = [&](const std::vector<size_t>& idx, int label) {
    return std::count_if(idx.begin(), idx.end(),
                         [&](size_t i) { return y[i] == label; });
  };
  CHECK(count(split.train, 1) >= 1);
  CHECK(count(split.train, 0) >= 1);
  CHECK(count(split.eval, 1) >= 1);
  CHECK(count(split.eval, 0) >= 1);

  CHECK_THROWS_AS(stratified_split({1, 0, 0, 0}, 0.2, 1), Error);
}

TEST_CASE("one_vs_all_train reaches perfect accuracy on a determined tag") {
  // Feature 0 equals the tag indicator.
  const size_t n = 24;
  FeatureMatrix X = FeatureMatrix::zeros(n, 2);
  std::vector<std::set<corpus::MoralTag>> tag_sets(n);
  Rng rng(15);
  for (size_t i = 0; i < n; ++i) {
    bool greedy = i % 2 == 0;
    X.set(i, 0, greedy ? 1.0 : 0.0);
    X.set(i, 1, rng.next_unit());
    if (greedy) tag_sets[i].insert(corpus::MoralTag::Greed);
  }
  TrainConfig config;
  config.learning_rate = 0.5;
  config.epochs = 300;
  config.l2 = 0.0;
  config.seed = 4;
  auto results = one_vs_all_train(
      {corpus::MoralTag::Greed},
      [&](corpus::MoralTag) -> const FeatureMatrix& { return X; },
      [&](corpus::MoralTag tag) {
        std::vector<int> y;
        for (const auto& tags : tag_sets) y.push_back(tags.contains(tag));
        return y;
      },
      config, 10);
  REQUIRE(results.size() == 1);
  CHECK(results[0].note.empty());
  CHECK(results[0].repeats_done == 10);
  CHECK(results[0].mean_accuracy.value == doctest::Approx(1.0));
}

TEST_CASE("one_vs_all_train hovers at chance for unrelated labels") {
  const size_t n = 40;
  FeatureMatrix X = FeatureMatrix::zeros(n, 3);
  std::vector<std::set<corpus::MoralTag>> tag_sets(n);
  Rng rng(16);
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 0; c < 3; ++c) X.set(i, c, rng.next_unit());
    if (i < n / 2) tag_sets[i].insert(corpus::MoralTag::Trust);
  }
  TrainConfig config;
  config.seed = 9;
  auto results = one_vs_all_train(
      {corpus::MoralTag::Trust},
      [&](corpus::MoralTag) -> const FeatureMatrix& { return X; },
      [&](corpus::MoralTag tag) {
        std::vector<int> y;
        for (const auto& tags : tag_sets) y.push_back(tags.contains(tag));
        return y;
      },
      config, 100);
  REQUIRE(results.size() == 1);
  CHECK(results[0].mean_accuracy.value > 0.4);
  CHECK(results[0].mean_accuracy.value < 0.6);
}

TEST_CASE("a tag with one positive story is reported, not trained") {
  FeatureMatrix X = FeatureMatrix::zeros(6, 1);
  std::vector<std::set<corpus::MoralTag>> tag_sets(6);
  tag_sets[0].insert(corpus::MoralTag::Lazy);
  auto results = one_vs_all_train(
      {corpus::MoralTag::Lazy},
      [&](corpus::MoralTag) -> const FeatureMatrix& { return X; },
      [&](corpus::MoralTag tag) {
        std::vector<int> y;
        for (const auto& tags : tag_sets) y.push_back(tags.contains(tag));
        return y;
      },
      {}, 5);
  REQUIRE(results.size() == 1);
  CHECK(results[0].note == "insufficient-data");
  CHECK(results[0].repeats_done == 0);
  CHECK_FALSE(results[0].mean_accuracy.defined);
}

TEST_CASE("pair_features reflects shared resources and swaps directionally") {
  std::vector<corpus::Story> stories = {
      {"a", "", "the quick fox jumped the fence", {}, {corpus::MoralTag::Greed}},
      {"b", "", "the quick fox jumped the fence", {}, {corpus::MoralTag::Greed}},
      {"c", "", "storm clouds gather slowly tonight", {}, {corpus::MoralTag::Trust}},
  };
  std::vector<frames::FrameSeq> seqs = {
      {"a", {"X", "Y"}},
      {"b", {"X", "Y"}},
      {"c", {"Z"}},
  };
  corpus::HedonometerLexicon lexicon;
  lexicon.entries = {{"quick", 6.0}, {"fox", 6.0},    {"fence", 6.0},
                     {"storm", 3.0}, {"clouds", 3.0}, {"slowly", 3.0}};
  textsim::HashProvider words(16, 2);
  ResourceOptions options;
  options.word_provider = &words;
  options.frame_seqs = &seqs;
  options.lexicon = &lexicon;
  options.shape_params = shapes::ShapeParams{1, 5.4, 0.2};
  auto resources = StoryResources::build(stories, options);

  auto same = pair_features(resources, "a", "b");
  CHECK(same.lexical_cosine == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(same.frame_distance_ab == 0.0);
  CHECK(same.frame_distance_ba == 0.0);
  CHECK(same.shape_agreement == 1.0);
  CHECK(same.lexical_overlap == 1.0);
  CHECK(same.same_tag == 1.0);

  auto cross = pair_features(resources, "a", "c");
  CHECK(cross.lexical_overlap == 0.0);
  CHECK(cross.same_tag == 0.0);
  CHECK(cross.shape_agreement == 0.0);
  CHECK(cross.frame_distance_ab == 1.0);

  auto swapped = pair_features(resources, "c", "a");
  CHECK(swapped.lexical_cosine == cross.lexical_cosine);
  CHECK(swapped.lexical_overlap == cross.lexical_overlap);
  CHECK(swapped.same_tag == cross.same_tag);
  CHECK(swapped.shape_agreement == cross.shape_agreement);
  CHECK(swapped.frame_distance_ab == cross.frame_distance_ba);
  CHECK(swapped.frame_distance_ba == cross.frame_distance_ab);

  try {
    pair_features(resources, "a", "ghost");
    FAIL("expected UnknownStoryId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_story);
  }
}

TEST_CASE("pair_features falls back to neutral values without resources") {
  std::vector<corpus::Story> stories = {
      {"a", "", "alpha beta", {}, {}},
      {"b", "", "gamma delta", {}, {}},
  };
  auto resources = StoryResources::build(stories, {});
  auto f = pair_features(resources, "a", "b");
  CHECK(f.lexical_cosine == 0.0);
  CHECK(f.semantic_cosine == 0.0);
  CHECK(f.moral_cosine == 0.0);
  CHECK(f.frame_distance_ab == 1.0);
  CHECK(f.frame_distance_ba == 1.0);
  CHECK(f.shape_agreement == 0.0);
  CHECK(f.same_tag == 0.0);
}

TEST_CASE("analogy classifiers learn a rule-defined dimension") {
  // 16 stories: half share a distinctive vocabulary, half do not.
  std::vector<corpus::Story> stories;
  for (int i = 0; i < 16; ++i) {
    std::string text = i % 2 == 0 ? "ember glass river stone"
                                  : "word" + std::to_string(i) + " lone branch";
    stories.push_back({"s" + std::to_string(i), "", text, {}, {}});
  }
  auto resources = StoryResources::build(stories, {});

  std::vector<corpus::PairAnnotation> annotations;
  Rng rng(33);
  int pair_no = 0;
  for (int a = 0; a < 16; ++a) {
    for (int b = a + 1; b < 16 && annotations.size() < 24; b += 3) {
      corpus::PairAnnotation anno;
      anno.pair_id = "p" + std::to_string(pair_no++);
      anno.story_a = stories[a].id;
      anno.story_b = stories[b].id;
      double overlap = textsim::lexical_overlap(
          textsim::tokenize(stories[a].text), textsim::tokenize(stories[b].text));
      for (auto dim : corpus::all_dimensions()) anno.labels[dim] = false;
      anno.labels[corpus::AnalogyDimension::LS] = overlap > 0.5;
      // Keep SA consistent with EA by never setting either.
      annotations.push_back(std::move(anno));
    }
  }
  TrainConfig config;
  config.learning_rate = 1.0;
  config.epochs = 400;
  config.l2 = 0.0;
  config.seed = 21;
  auto results = train_analogy_classifiers(annotations, resources, config, 5);
  REQUIRE(results.size() == 7);

  const DimensionResult& ls = results.back();
  CHECK(ls.dimension == corpus::AnalogyDimension::LS);
  CHECK(ls.trainable);
  CHECK(ls.accuracy.value == doctest::Approx(1.0));

  // All-negative dimensions are reported untrainable, not trained.
  CHECK_FALSE(results[0].trainable);  // SAA
  CHECK(results[0].note == "untrainable");
  CHECK(results[0].positive_ratio == 0.0);

  std::vector<corpus::PairAnnotation> too_few(annotations.begin(),
                                              annotations.begin() + 5);
  CHECK_THROWS_AS(train_analogy_classifiers(too_few, resources, config, 1), Error);
}

TEST_CASE("build_transfer_pairs enumerates same-tag positives") {
  std::vector<corpus::Story> stories = {
      {"A", "", "t", {}, {corpus::MoralTag::Trust}},
      {"B", "", "t", {}, {corpus::MoralTag::Trust}},
      {"C", "", "t", {}, {corpus::MoralTag::Greed}},
      {"D", "", "t", {}, {corpus::MoralTag::Greed}},
  };
  auto build = build_transfer_pairs(stories, 10, 1);
  REQUIRE(build.pairs.size() == 4);
  std::set<std::pair<std::string, std::string>> positives, negatives;
  for (const auto& p : build.pairs) {
    (p.label ? positives : negatives).insert({p.story_a, p.story_b});
  }
  CHECK(positives ==
        std::set<std::pair<std::string, std::string>>{{"A", "B"}, {"C", "D"}});
  CHECK(negatives.size() == 2);
  for (const auto& [a, b] : negatives) {
    CHECK(std::set<std::string>{a, b} != std::set<std::string>{"A", "B"});
    CHECK(std::set<std::string>{a, b} != std::set<std::string>{"C", "D"});
  }
  CHECK_FALSE(build.warnings.empty());  // fewer positives than requested
}

TEST_CASE("build_transfer_pairs hits the 544+544 protocol at scale") {
  std::vector<corpus::Story> stories;
  for (int i = 0; i < 116; ++i) {
    corpus::MoralTag tag = corpus::all_moral_tags()[i % 8];
    stories.push_back({"s" + std::to_string(i), "", "t", {}, {tag}});
  }
  auto build = build_transfer_pairs(stories, 544, 42);
  CHECK(build.pairs.size() == 1088);
  size_t positives = 0;
  for (const auto& p : build.pairs) positives += p.label;
  CHECK(positives == 544);

  auto again = build_transfer_pairs(stories, 544, 42);
  REQUIRE(again.pairs.size() == build.pairs.size());
  for (size_t i = 0; i < build.pairs.size(); ++i) {
    CHECK(build.pairs[i].story_a == again.pairs[i].story_a);
    CHECK(build.pairs[i].story_b == again.pairs[i].story_b);
    CHECK(build.pairs[i].label == again.pairs[i].label);
  }
}

TEST_CASE("build_transfer_pairs warns when negatives run out") {
  std::vector<corpus::Story> stories = {
      {"A", "", "t", {}, {corpus::MoralTag::Trust}},
      {"B", "", "t", {}, {corpus::MoralTag::Trust}},
      {"C", "", "t", {}, {corpus::MoralTag::Trust}},
  };
  auto build = build_transfer_pairs(stories, 2, 1);
  CHECK(build.pairs.empty());  // no tag-disjoint pairs exist
  bool warned = false;
  for (const auto& w : build.warnings) {
    warned |= w.find("tag-disjoint") != std::string::npos;
  }
  CHECK(warned);
}

TEST_CASE("models round-trip through the text record") {
  LogisticModel model;
  model.weights = {0.125, -3.5, 1e-9};
  model.bias = -0.75;
  model.config.learning_rate = 0.05;
  model.config.epochs = 123;
  model.config.l2 = 1e-4;
  model.config.seed = 99;
  model.config.threshold = 0.4;

  testutil::TempDir dir("model_rt");
  save_model(model, dir.file("m.txt"));
  auto loaded = load_model(dir.file("m.txt"));
  CHECK(loaded.weights == model.weights);
  CHECK(loaded.bias == model.bias);
  CHECK(loaded.config.learning_rate == model.config.learning_rate);
  CHECK(loaded.config.epochs == model.config.epochs);
  CHECK(loaded.config.l2 == model.config.l2);
  CHECK(loaded.config.seed == model.config.seed);
  CHECK(loaded.config.threshold == model.config.threshold);

  testutil::write_text(dir, "bad.txt", "dimension 2\nweights 1\nbias 0\n");
  CHECK_THROWS_AS(load_model(dir.file("bad.txt")), Error);
}

TEST_CASE("middle_window clamps and centers") {
  CHECK(middle_window("one two three", 500) == "one two three");
  CHECK(middle_window("", 10).empty());

  std::string text;
  for (int i = 1; i <= 1000; ++i) {
    if (!text.empty()) text += ' ';
    text += std::to_string(i);
  }
  std::string window = middle_window(text, 500);
  auto tokens = split_whitespace(window);
  REQUIRE(tokens.size() == 500);
  CHECK(tokens.front() == "251");
  CHECK(tokens.back() == "750");
}
