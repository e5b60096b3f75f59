#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fabula/learn.hpp"
#include "fabula/pairing.hpp"
#include "fabula/shapes.hpp"

namespace fabula::cli {

// Fully resolved run configuration; every command echoes it (plus input
// digests) into <out>/manifest.json so a run can be reproduced.
struct RunConfig {
  std::string corpus_path;
  std::string frames_path;
  std::string annotations_path;
  std::string lexicon_path;
  std::string ratings_path;
  std::string stoplist_path;
  std::string source_corpus_path;  // transfer; defaults to corpus_path
  std::string pairs_path;          // pairs score; defaults to <out>/pairs.jsonl

  // "words:PATH", "docs:PATH", or "hash:<dimension>:<seed>".
  std::vector<std::string> embeddings;

  uint64_t seed = 42;
  std::string out_dir = "out";
  std::string format = "csv";  // csv | records

  shapes::ShapeParams shape;
  learn::TrainConfig train;

  std::vector<std::string> methods = {"lexical", "semantic", "frame", "random"};
  size_t top_k = 1;
  // "balance" matches the random half to the method half; "per-story" draws
  // one partner per story; an integer draws that many in total.
  std::string random_count = "balance";
  bool dedup_pairs = false;

  std::string cluster_features = "moral-embedding";
  size_t repeats = 100;
  size_t analogy_repeats = 1;
  size_t top_frames = 15;

  size_t transfer_target = 544;
  size_t middle_window_words = 0;  // 0 = off
};

int run_stats(const RunConfig& config);
int run_shapes(const RunConfig& config);
int run_pairs_generate(const RunConfig& config);
int run_pairs_score(const RunConfig& config);
int run_cluster(const RunConfig& config);
int run_analogy(const RunConfig& config);
int run_transfer(const RunConfig& config);
int run_iaa(const RunConfig& config);
int run_validate(const RunConfig& config);

// Dispatch by command name ("pairs" uses config.pairs subcommand split into
// "pairs-generate"/"pairs-score").
int run_command(const std::string& command, const RunConfig& config);

}  // namespace fabula::cli
