#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fabula/cli.hpp"
#include "fabula/error.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("FABULA_OUT");
  return env && *env ? env : "out";
}

}  // namespace

int main(int argc, char** argv) {
  fabula::cli::RunConfig config;
  config.out_dir = default_out_dir();

  CLI::App app{"Narrative analogy toolkit: corpus statistics, story arcs, "
               "similarity-based pairing, linear classifiers, and agreement "
               "metrics for short-story corpora"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "0.1.0");

  app.add_option("--corpus", config.corpus_path, "Corpus file (JSON lines)");
  app.add_option("--frames", config.frames_path, "Frame-sequence file (JSON lines)");
  app.add_option("--annotations", config.annotations_path,
                 "Pair-annotation file (JSON lines)");
  app.add_option("--lexicon", config.lexicon_path,
                 "Happiness lexicon (word<TAB>score)");
  app.add_option("--stoplist", config.stoplist_path,
                 "Optional stop-word list (one word per line)");
  app.add_option("--embeddings", config.embeddings,
                 "Embedding provider: words:PATH, docs:PATH, or "
                 "hash:<dimension>:<seed> (repeatable)");
  app.add_option("--seed", config.seed, "Root random seed")->capture_default_str();
  app.add_option("--out", config.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--format", config.format, "Report format")
      ->check(CLI::IsMember({"csv", "records"}))
      ->capture_default_str();

  app.add_option("--window", config.shape.window, "Sliding window in words")
      ->capture_default_str();
  app.add_option("--neutral", config.shape.neutral, "Neutral happiness score")
      ->capture_default_str();
  app.add_option("--band", config.shape.band, "Neutral band half-width")
      ->capture_default_str();

  app.add_option("--lr", config.train.learning_rate, "Learning rate")
      ->capture_default_str();
  app.add_option("--epochs", config.train.epochs, "Training epochs")
      ->capture_default_str();
  app.add_option("--l2", config.train.l2, "L2 regularization strength")
      ->capture_default_str();
  app.add_option("--threshold", config.train.threshold, "Decision threshold")
      ->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Moral-tag distribution of the corpus");
  auto* shapes_cmd =
      app.add_subcommand("shapes", "Hedonic story arcs and arc types");
  auto* pairs = app.add_subcommand("pairs", "Candidate analogical story pairs");
  pairs->require_subcommand(1);
  auto* pairs_generate =
      pairs->add_subcommand("generate", "Generate pairs by similarity methods");
  pairs_generate
      ->add_option("--methods", config.methods,
                   "Comma-separated methods: lexical,semantic,frame,shape,random")
      ->delimiter(',');
  pairs_generate->add_option("--top-k", config.top_k, "Pairs per story and method")
      ->capture_default_str();
  pairs_generate
      ->add_option("--random-count", config.random_count,
                   "Random pairs: balance, per-story, or an integer total")
      ->capture_default_str();
  pairs_generate->add_flag("--dedup", config.dedup_pairs,
                           "Drop unordered duplicates within a method");
  auto* pairs_score = pairs->add_subcommand(
      "score", "Score generated pairs against pair annotations");
  pairs_score->add_option("--pairs", config.pairs_path,
                          "Pair file (default: <out>/pairs.jsonl)");

  auto* cluster =
      app.add_subcommand("cluster", "One-vs-all moral-tag classifiers");
  cluster
      ->add_option("--features", config.cluster_features,
                   "Feature mode: moral-embedding, frame-counts, "
                   "frame-counts-top15")
      ->check(CLI::IsMember({"moral-embedding", "frame-counts",
                             "frame-counts-top15"}))
      ->capture_default_str();
  cluster->add_option("--repeats", config.repeats, "Undersampled repeats per tag")
      ->capture_default_str();
  cluster
      ->add_option("--top-frames", config.top_frames,
                   "Frames per tag in frame-counts-top15 mode")
      ->capture_default_str();

  auto* analogy =
      app.add_subcommand("analogy", "Per-dimension analogy classifiers");
  analogy->add_option("--repeats", config.analogy_repeats, "Evaluation splits")
      ->capture_default_str();

  auto* transfer = app.add_subcommand(
      "transfer", "Same-tag pair classifier evaluated on analogy labels");
  transfer->add_option("--source-corpus", config.source_corpus_path,
                       "Training corpus (default: --corpus)");
  transfer
      ->add_option("--target-size", config.transfer_target,
                   "Same-tag pairs to sample")
      ->capture_default_str();
  transfer
      ->add_option("--middle-window", config.middle_window_words,
                   "Sample this many words from the middle of long source "
                   "texts (0 = off)")
      ->capture_default_str();

  auto* iaa = app.add_subcommand("iaa", "Inter-annotator agreement (Cohen kappa)");
  iaa->add_option("--ratings", config.ratings_path,
                  "Ratings file (rater, pair, dimension, value)");

  auto* validate =
      app.add_subcommand("validate", "Report annotation constraint violations");

  CLI11_PARSE(app, argc, argv);

  std::string command;
  if (stats->parsed()) command = "stats";
  if (shapes_cmd->parsed()) command = "shapes";
  if (pairs->parsed()) {
    command = pairs_generate->parsed() ? "pairs-generate" : "pairs-score";
  }
  if (cluster->parsed()) command = "cluster";
  if (analogy->parsed()) command = "analogy";
  if (transfer->parsed()) command = "transfer";
  if (iaa->parsed()) command = "iaa";
  if (validate->parsed()) command = "validate";

  try {
    return fabula::cli::run_command(command, config);
  } catch (const fabula::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
