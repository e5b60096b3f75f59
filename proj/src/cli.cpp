#include "fabula/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

#include "fabula/error.hpp"
#include "fabula/util.hpp"
#include "json.hpp"

namespace fabula::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Small output helpers

std::string csv_cell(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string fmt_flagged(const metrics::Flagged& f) {
  return f.defined ? format_real(f.value) : "undef";
}

struct Manifest {
  ordered_json j;
  std::string out_dir;

  Manifest(const RunConfig& config, const std::string& command)
      : out_dir(config.out_dir) {
    j["tool"] = "fabula";
    j["version"] = "0.1.0";
    j["command"] = command;
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["created_utc"] = buf;
    j["seed"] = config.seed;
    j["format"] = config.format;
    j["inputs"] = ordered_json::object();
    j["params"] = ordered_json::object();
    j["outputs"] = ordered_json::array();
    j["notes"] = ordered_json::array();
  }

  void add_input(const std::string& name, const std::string& path) {
    if (path.empty()) return;
    ordered_json entry;
    entry["path"] = path;
    entry["sha256"] = sha256_file(path);
    j["inputs"][name] = entry;
  }
  template <typename T>
  void add_param(const std::string& key, const T& value) {
    j["params"][key] = value;
  }
  void add_output(const std::string& file) { j["outputs"].push_back(file); }
  void add_note(const std::string& note) { j["notes"].push_back(note); }

  void write() {
    write_file((fs::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
  }
};

std::string ensure_out_dir(const RunConfig& config) {
  fs::create_directories(config.out_dir);
  return config.out_dir;
}

// Writes basename.csv or basename.jsonl depending on config.format. Comments
// become leading '#' lines in csv and notes in the manifest either way.
void write_table(const RunConfig& config, Manifest& manifest,
                 const std::string& basename,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows,
                 const std::vector<std::string>& comments = {}) {
  for (const std::string& c : comments) manifest.add_note(c);
  if (config.format == "records") {
    std::string out;
    for (const auto& row : rows) {
      ordered_json j;
      for (size_t i = 0; i < columns.size(); ++i) j[columns[i]] = row[i];
      out += j.dump();
      out += "\n";
    }
    std::string file = basename + ".jsonl";
    write_file((fs::path(config.out_dir) / file).string(), out);
    manifest.add_output(file);
    return;
  }
  std::ostringstream out;
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) out << ",";
    out << csv_cell(columns[i]);
  }
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ",";
      out << csv_cell(row[i]);
    }
    out << "\n";
  }
  std::string file = basename + ".csv";
  write_file((fs::path(config.out_dir) / file).string(), out.str());
  manifest.add_output(file);
}

void require_path(const std::string& path, const char* what) {
  if (path.empty()) {
    fail(Errc::config_error, std::string("missing required --") + what + " path");
  }
}

std::string safe_filename(const std::string& id) {
  std::string out;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embedding providers

struct Providers {
  std::unique_ptr<textsim::EmbeddingProvider> word;
  std::unique_ptr<textsim::EmbeddingProvider> doc;
  std::vector<std::string> notes;
};

Providers make_providers(const RunConfig& config) {
  Providers p;
  size_t hash_dim = 64;
  uint64_t hash_seed = config.seed;
  bool hash_requested = false;
  std::string word_path, doc_path;

  for (const std::string& spec : config.embeddings) {
    if (spec.rfind("words:", 0) == 0) {
      word_path = spec.substr(6);
    } else if (spec.rfind("docs:", 0) == 0) {
      doc_path = spec.substr(5);
    } else if (spec.rfind("hash:", 0) == 0) {
      auto parts = split(spec, ':');
      if (parts.size() != 3) {
        fail(Errc::config_error, "hash spec must be hash:<dimension>:<seed>");
      }
      try {
        hash_dim = std::stoull(parts[1]);
        hash_seed = std::stoull(parts[2]);
      } catch (const std::exception&) {
        fail(Errc::config_error,
             "hash spec needs numeric dimension and seed (got \"" + spec + "\")");
      }
      hash_requested = true;
      if (hash_dim == 0) fail(Errc::config_error, "hash dimension must be > 0");
    } else {
      fail(Errc::config_error,
           "embedding spec must start with words:, docs:, or hash: (got \"" +
               spec + "\")");
    }
  }

  if (!word_path.empty()) {
    p.word = std::make_unique<textsim::TableProvider>(
        textsim::load_embedding_table(word_path));
  } else {
    p.word = std::make_unique<textsim::HashProvider>(hash_dim, hash_seed);
  }
  if (!doc_path.empty()) {
    p.doc = std::make_unique<textsim::TableProvider>(
        textsim::load_embedding_table(doc_path));
  } else {
    p.doc = std::make_unique<textsim::HashProvider>(hash_dim, hash_seed ^ 0x646f63);
  }
  if (p.word->synthetic() || p.doc->synthetic()) {
    p.notes.push_back(
        "hash-fallback embeddings in use" +
        std::string(hash_requested ? " (requested)" : " (no table supplied)") +
        "; similarity values are synthetic");
  }
  return p;
}

struct LoadedInputs {
  std::vector<corpus::Story> stories;
  std::vector<frames::FrameSeq> frame_seqs;
  corpus::HedonometerLexicon lexicon;
  std::set<std::string> stoplist;
  bool has_frames = false;
  bool has_lexicon = false;
};

LoadedInputs load_optional_inputs(const RunConfig& config) {
  LoadedInputs in;
  require_path(config.corpus_path, "corpus");
  in.stories = corpus::load_corpus(config.corpus_path);
  if (!config.frames_path.empty()) {
    in.frame_seqs = frames::load_frames(config.frames_path);
    in.has_frames = true;
  }
  if (!config.lexicon_path.empty()) {
    in.lexicon = corpus::load_lexicon(config.lexicon_path);
    in.has_lexicon = true;
  }
  if (!config.stoplist_path.empty()) {
    in.stoplist = textsim::load_stoplist(config.stoplist_path);
  }
  return in;
}

StoryResources build_resources(const LoadedInputs& in, const Providers& p,
                               const RunConfig& config) {
  ResourceOptions options;
  options.word_provider = p.word.get();
  options.doc_provider = p.doc.get();
  options.frame_seqs = in.has_frames ? &in.frame_seqs : nullptr;
  options.lexicon = in.has_lexicon ? &in.lexicon : nullptr;
  options.stoplist = in.stoplist.empty() ? nullptr : &in.stoplist;
  options.shape_params = config.shape;
  return StoryResources::build(in.stories, options);
}

std::vector<pairing::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<pairing::Method> methods;
  for (const std::string& name : names) {
    auto m = pairing::method_from(name);
    if (!m) fail(Errc::config_error, "unknown pairing method \"" + name + "\"");
    methods.push_back(*m);
  }
  if (methods.empty()) fail(Errc::config_error, "no pairing methods requested");
  return methods;
}

}  // namespace

// ---------------------------------------------------------------------------
// stats

int run_stats(const RunConfig& config) {
  require_path(config.corpus_path, "corpus");
  ensure_out_dir(config);
  Manifest manifest(config, "stats");
  manifest.add_input("corpus", config.corpus_path);

  auto stories = corpus::load_corpus(config.corpus_path);
  auto dist = corpus::moral_distribution(stories);
  size_t untagged = 0;
  for (const auto& s : stories) untagged += s.tags.empty();

  std::vector<std::vector<std::string>> rows;
  for (const auto& [tag, count] : dist) {
    rows.push_back({std::string(corpus::to_string(tag)), std::to_string(count)});
  }
  rows.push_back({"(untagged)", std::to_string(untagged)});
  write_table(config, manifest, "moral_distribution", {"tag", "count"}, rows);

  std::ostringstream plot;
  size_t index = 0;
  for (const auto& [tag, count] : dist) {
    plot << index++ << "," << corpus::to_string(tag) << "," << count << "\n";
  }
  write_file((fs::path(config.out_dir) / "moral_distribution_plot.csv").string(),
             plot.str());
  manifest.add_output("moral_distribution_plot.csv");

  manifest.add_param("stories", stories.size());
  manifest.add_param("untagged", untagged);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// shapes

int run_shapes(const RunConfig& config) {
  require_path(config.corpus_path, "corpus");
  require_path(config.lexicon_path, "lexicon");
  ensure_out_dir(config);
  Manifest manifest(config, "shapes");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("lexicon", config.lexicon_path);
  manifest.add_param("window", config.shape.window);
  manifest.add_param("neutral", config.shape.neutral);
  manifest.add_param("band", config.shape.band);

  auto stories = corpus::load_corpus(config.corpus_path);
  auto lexicon = corpus::load_lexicon(config.lexicon_path);

  fs::create_directories(fs::path(config.out_dir) / "series");
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::string>> skipped;
  for (const corpus::Story& story : stories) {
    shapes::HedonicSeries series;
    try {
      series = shapes::hedonic_series(story.text, lexicon, config.shape.window,
                                      story.id);
    } catch (const Error& e) {
      if (e.code() != Errc::no_scored_tokens) throw;
      skipped.push_back({story.id, "no-scored-tokens"});
      continue;
    }
    auto summary =
        shapes::segment_levels(series, config.shape.neutral, config.shape.band);
    auto arc = shapes::classify_arc(summary.levels);
    rows.push_back({story.id, format_real(summary.begin_avg),
                    format_real(summary.mid_avg), format_real(summary.end_avg),
                    std::string(shapes::to_string(summary.levels[0])),
                    std::string(shapes::to_string(summary.levels[1])),
                    std::string(shapes::to_string(summary.levels[2])),
                    shapes::arc_name(arc), format_real(series.coverage())});

    std::ostringstream plot;
    for (size_t i = 0; i < series.values.size(); ++i) {
      plot << i << "," << format_real(series.values[i]) << "\n";
    }
    std::string file = "series/" + safe_filename(story.id) + ".csv";
    write_file((fs::path(config.out_dir) / file).string(), plot.str());
    manifest.add_output(file);
  }

  write_table(config, manifest, "arcs",
              {"id", "begin_avg", "mid_avg", "end_avg", "level_begin",
               "level_mid", "level_end", "arc", "coverage"},
              rows);
  write_table(config, manifest, "skipped", {"id", "reason"}, skipped);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// pairs

int run_pairs_generate(const RunConfig& config) {
  ensure_out_dir(config);
  Manifest manifest(config, "pairs-generate");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("frames", config.frames_path);
  manifest.add_input("lexicon", config.lexicon_path);
  manifest.add_input("stoplist", config.stoplist_path);

  LoadedInputs in = load_optional_inputs(config);
  Providers providers = make_providers(config);
  for (const std::string& note : providers.notes) manifest.add_note(note);
  StoryResources resources = build_resources(in, providers, config);

  pairing::GenerateOptions options;
  options.methods = parse_methods(config.methods);
  options.seed = config.seed;
  options.top_k = config.top_k;

  size_t nonrandom = 0;
  for (auto m : options.methods) nonrandom += m != pairing::Method::Random;
  if (config.random_count == "balance") {
    options.random_total = std::max<size_t>(nonrandom, 1) *
                           resources.size() * config.top_k;
  } else if (config.random_count == "per-story") {
    options.random_per_story = 1;
  } else {
    try {
      options.random_total = std::stoull(config.random_count);
    } catch (const std::exception&) {
      fail(Errc::config_error,
           "--random-count must be balance, per-story, or an integer (got \"" +
               config.random_count + "\")");
    }
  }

  pairing::PairSet set = pairing::generate_pairs(resources, options);
  if (config.dedup_pairs) set = pairing::dedup(set);

  std::string methods_text;
  for (const std::string& m : config.methods) {
    if (!methods_text.empty()) methods_text += ",";
    methods_text += m;
  }
  manifest.add_param("methods", methods_text);
  manifest.add_param("top_k", config.top_k);
  manifest.add_param("random_count", config.random_count);
  manifest.add_param("dedup", config.dedup_pairs);
  manifest.add_param("pairs", set.pairs.size());

  pairing::save_pairs(set, (fs::path(config.out_dir) / "pairs.jsonl").string());
  manifest.add_output("pairs.jsonl");
  manifest.write();
  return 0;
}

int run_pairs_score(const RunConfig& config) {
  require_path(config.corpus_path, "corpus");
  require_path(config.annotations_path, "annotations");
  ensure_out_dir(config);
  Manifest manifest(config, "pairs-score");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("annotations", config.annotations_path);
  manifest.add_input("lexicon", config.lexicon_path);

  std::string pairs_path = config.pairs_path.empty()
                               ? (fs::path(config.out_dir) / "pairs.jsonl").string()
                               : config.pairs_path;
  manifest.add_input("pairs", pairs_path);

  auto stories = corpus::load_corpus(config.corpus_path);
  auto loaded = corpus::load_annotations(config.annotations_path, stories,
                                         corpus::LoadMode::strict);
  if (!loaded.violations.empty()) {
    manifest.add_note(std::to_string(loaded.violations.size()) +
                      " annotation records rejected by the strict loader");
  }

  pairing::PairSet set;
  set.pairs = pairing::load_pairs(pairs_path);

  std::map<std::string, shapes::ArcProfile> profiles;
  if (!config.lexicon_path.empty()) {
    auto lexicon = corpus::load_lexicon(config.lexicon_path);
    for (const corpus::Story& story : stories) {
      try {
        profiles[story.id] = shapes::arc_profile(story, lexicon, config.shape);
      } catch (const Error& e) {
        if (e.code() != Errc::no_scored_tokens) throw;
      }
    }
  }

  pairing::MethodReport report = pairing::score_methods(
      set, loaded.annotations, profiles.empty() ? nullptr : &profiles);

  std::vector<std::string> columns = {"row"};
  for (const auto& m : report.methods) {
    columns.push_back(std::string(pairing::to_string(m.method)));
  }
  std::vector<std::vector<std::string>> rows;
  auto make_row = [&](const std::string& label,
                      const std::function<std::string(const pairing::MethodScore&)>& cell) {
    std::vector<std::string> row = {label};
    for (const auto& m : report.methods) row.push_back(cell(m));
    rows.push_back(std::move(row));
  };
  make_row("story_count", [](const auto& m) { return std::to_string(m.annotated_pairs); });
  make_row("method_average", [](const auto& m) { return format_real(m.method_average); });
  for (corpus::AnalogyDimension dim : report.dims_present) {
    make_row(std::string(corpus::to_string(dim)), [&](const auto& m) {
      return fmt_flagged(m.dimension_rate.at(dim));
    });
  }
  make_row("SSS (story-shape agreement)",
           [](const auto& m) { return fmt_flagged(m.shape_agreement_rate); });

  std::vector<std::string> comments = {
      "method average counts positive labels across the dimensions present in "
      "the annotation file"};
  if (profiles.empty()) {
    comments.push_back("no lexicon supplied; SSS row is undefined");
  }
  if (report.unmatched_annotations > 0) {
    comments.push_back(std::to_string(report.unmatched_annotations) +
                       " annotations match no generated pair");
  }
  write_table(config, manifest, "method_report", columns, rows, comments);

  // Pairwise label correlations over the same annotation set.
  if (loaded.annotations.size() >= 2) {
    auto matrix = metrics::correlation_matrix(loaded.annotations);
    std::vector<std::vector<std::string>> cells;
    for (size_t i = 0; i < matrix.dims.size(); ++i) {
      for (size_t j = 0; j < matrix.dims.size(); ++j) {
        const metrics::Flagged& cell = matrix.at(i, j);
        cells.push_back({std::string(corpus::to_string(matrix.dims[i])),
                         std::string(corpus::to_string(matrix.dims[j])),
                         cell.defined ? format_real(cell.value) : "",
                         cell.defined ? "defined" : "undefined"});
      }
    }
    write_table(config, manifest, "correlation_matrix",
                {"dim_a", "dim_b", "value", "status"}, cells);
  }
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// cluster

int run_cluster(const RunConfig& config) {
  ensure_out_dir(config);
  Manifest manifest(config, "cluster");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("frames", config.frames_path);
  manifest.add_input("stoplist", config.stoplist_path);
  manifest.add_param("features", config.cluster_features);
  manifest.add_param("repeats", config.repeats);
  manifest.add_param("learning_rate", config.train.learning_rate);
  manifest.add_param("epochs", config.train.epochs);
  manifest.add_param("l2", config.train.l2);

  LoadedInputs in = load_optional_inputs(config);

  learn::TrainConfig train = config.train;
  train.seed = config.seed;

  std::vector<corpus::MoralTag> tags(corpus::all_moral_tags().begin(),
                                     corpus::all_moral_tags().end());
  std::vector<learn::TagResult> results;
  std::vector<std::string> comments;

  if (config.cluster_features == "moral-embedding") {
    Providers providers = make_providers(config);
    for (const std::string& note : providers.notes) comments.push_back(note);
    StoryResources resources = build_resources(in, providers, config);

    // Moral clustering uses tagged stories whose moral produced a vector.
    std::vector<size_t> rows_idx;
    for (size_t i = 0; i < resources.size(); ++i) {
      const corpus::Story& s = resources.story(i);
      if (s.tags.empty() || !s.moral) continue;
      if (!resources.moral_vector(i)) continue;
      rows_idx.push_back(i);
    }
    if (rows_idx.empty()) {
      fail(Errc::insufficient_data, "no tagged story has a usable moral vector");
    }
    size_t dim = resources.moral_vector(rows_idx.front())->size();
    learn::FeatureMatrix X = learn::FeatureMatrix::zeros(rows_idx.size(), dim);
    for (size_t r = 0; r < rows_idx.size(); ++r) {
      const auto& vec = *resources.moral_vector(rows_idx[r]);
      std::copy(vec.begin(), vec.end(), X.values.begin() + r * dim);
      X.row_ids.push_back(resources.story(rows_idx[r]).id);
    }
    manifest.add_param("rows", rows_idx.size());
    manifest.add_param("columns", dim);

    results = learn::one_vs_all_train(
        tags, [&](corpus::MoralTag) -> const learn::FeatureMatrix& { return X; },
        [&](corpus::MoralTag tag) {
          std::vector<int> y;
          for (size_t i : rows_idx) {
            y.push_back(resources.story(i).tags.contains(tag) ? 1 : 0);
          }
          return y;
        },
        train, config.repeats);
  } else if (config.cluster_features == "frame-counts" ||
             config.cluster_features == "frame-counts-top15") {
    if (!in.has_frames) {
      fail(Errc::config_error,
           config.cluster_features + " mode needs a --frames file");
    }
    std::unordered_map<std::string, const frames::FrameSeq*> by_id;
    for (const auto& seq : in.frame_seqs) by_id[seq.story_id] = &seq;
    std::vector<size_t> rows_idx;
    for (size_t i = 0; i < in.stories.size(); ++i) {
      if (!in.stories[i].tags.empty()) rows_idx.push_back(i);
    }
    if (rows_idx.empty()) fail(Errc::insufficient_data, "no tagged stories");

    static const frames::FrameSeq kEmptySeq{};
    auto seq_of = [&](size_t story_idx) -> const frames::FrameSeq& {
      auto it = by_id.find(in.stories[story_idx].id);
      return it == by_id.end() ? kEmptySeq : *it->second;
    };

    auto build_matrix = [&](const std::optional<std::set<std::string>>& vocab) {
      // Column layout: sorted unigram labels, then sorted bigram pairs.
      std::set<std::string> unigrams;
      std::set<std::pair<std::string, std::string>> bigrams;
      std::vector<frames::FrameFeatureVector> feats;
      feats.reserve(rows_idx.size());
      for (size_t i : rows_idx) {
        feats.push_back(frames::frame_features(seq_of(i), vocab));
        for (const auto& [label, count] : feats.back().counts) unigrams.insert(label);
        for (const auto& [pair, count] : feats.back().bigram_counts) bigrams.insert(pair);
      }
      std::map<std::string, size_t> ucol;
      std::map<std::pair<std::string, std::string>, size_t> bcol;
      size_t col = 0;
      for (const auto& u : unigrams) ucol[u] = col++;
      for (const auto& b : bigrams) bcol[b] = col++;
      learn::FeatureMatrix X = learn::FeatureMatrix::zeros(
          rows_idx.size(), std::max<size_t>(col, 1));
      for (size_t r = 0; r < rows_idx.size(); ++r) {
        for (const auto& [label, count] : feats[r].counts) {
          X.set(r, ucol.at(label), static_cast<double>(count));
        }
        for (const auto& [pair, count] : feats[r].bigram_counts) {
          X.set(r, bcol.at(pair), static_cast<double>(count));
        }
        X.row_ids.push_back(in.stories[rows_idx[r]].id);
      }
      return X;
    };

    std::map<corpus::MoralTag, learn::FeatureMatrix> per_tag;
    learn::FeatureMatrix shared;
    if (config.cluster_features == "frame-counts") {
      shared = build_matrix(std::nullopt);
      manifest.add_param("columns", shared.cols);
    } else {
      auto top = frames::top_k_frames_per_tag(in.stories, in.frame_seqs,
                                              config.top_frames);
      for (const auto& [tag, labels] : top) {
        per_tag[tag] =
            build_matrix(std::set<std::string>(labels.begin(), labels.end()));
      }
      manifest.add_param("top_frames", config.top_frames);
    }
    manifest.add_param("rows", rows_idx.size());

    results = learn::one_vs_all_train(
        tags,
        [&](corpus::MoralTag tag) -> const learn::FeatureMatrix& {
          if (config.cluster_features == "frame-counts") return shared;
          auto it = per_tag.find(tag);
          // Tags missing from per_tag have no tagged stories; they are
          // skipped on the positives check before the matrix is touched.
          return it == per_tag.end() ? shared : it->second;
        },
        [&](corpus::MoralTag tag) {
          std::vector<int> y;
          for (size_t i : rows_idx) {
            y.push_back(in.stories[i].tags.contains(tag) ? 1 : 0);
          }
          return y;
        },
        train, config.repeats);
  } else {
    fail(Errc::config_error,
         "unknown --features mode \"" + config.cluster_features + "\"");
  }

  std::vector<std::vector<std::string>> rows;
  for (const learn::TagResult& r : results) {
    rows.push_back({std::string(corpus::to_string(r.tag)),
                    std::to_string(r.positives), std::to_string(r.repeats_done),
                    fmt_flagged(r.mean_accuracy), fmt_flagged(r.mean_f1),
                    r.note});
  }
  write_table(config, manifest, "cluster_report",
              {"tag", "positives", "repeats", "accuracy", "f1", "note"}, rows,
              comments);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// analogy

int run_analogy(const RunConfig& config) {
  require_path(config.annotations_path, "annotations");
  ensure_out_dir(config);
  Manifest manifest(config, "analogy");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("annotations", config.annotations_path);
  manifest.add_input("frames", config.frames_path);
  manifest.add_input("lexicon", config.lexicon_path);
  manifest.add_param("repeats", config.analogy_repeats);

  LoadedInputs in = load_optional_inputs(config);
  Providers providers = make_providers(config);
  for (const std::string& note : providers.notes) manifest.add_note(note);
  StoryResources resources = build_resources(in, providers, config);

  auto loaded = corpus::load_annotations(config.annotations_path, in.stories,
                                         corpus::LoadMode::strict);
  learn::TrainConfig train = config.train;
  train.seed = config.seed;
  auto results = learn::train_analogy_classifiers(
      loaded.annotations, resources, train, config.analogy_repeats);

  std::vector<std::vector<std::string>> rows;
  for (const learn::DimensionResult& r : results) {
    rows.push_back({std::string(corpus::to_string(r.dimension)),
                    std::to_string(r.labeled_pairs),
                    format_real(r.positive_ratio), fmt_flagged(r.accuracy),
                    fmt_flagged(r.f1), r.note.empty() ? "ok" : r.note});
    if (r.final_model) {
      std::string file =
          "analogy_model_" + std::string(corpus::to_string(r.dimension)) + ".txt";
      learn::save_model(*r.final_model,
                        (fs::path(config.out_dir) / file).string());
      manifest.add_output(file);
    }
  }
  write_table(config, manifest, "analogy_report",
              {"dimension", "labeled_pairs", "positive_ratio", "accuracy", "f1",
               "status"},
              rows);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// transfer

int run_transfer(const RunConfig& config) {
  require_path(config.corpus_path, "corpus");
  require_path(config.annotations_path, "annotations");
  ensure_out_dir(config);
  Manifest manifest(config, "transfer");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("annotations", config.annotations_path);
  manifest.add_input("frames", config.frames_path);
  manifest.add_input("lexicon", config.lexicon_path);
  manifest.add_param("target_size", config.transfer_target);
  manifest.add_param("middle_window", config.middle_window_words);

  std::string source_path = config.source_corpus_path.empty()
                                ? config.corpus_path
                                : config.source_corpus_path;
  manifest.add_input("source_corpus", source_path);

  // Target side: the annotated corpus, untouched.
  LoadedInputs target_in = load_optional_inputs(config);
  Providers providers = make_providers(config);
  for (const std::string& note : providers.notes) manifest.add_note(note);
  StoryResources target_resources = build_resources(target_in, providers, config);
  auto loaded = corpus::load_annotations(config.annotations_path,
                                         target_in.stories,
                                         corpus::LoadMode::strict);

  // Source side: optionally length-limited through the middle window.
  std::vector<corpus::Story> source_stories =
      source_path == config.corpus_path ? target_in.stories
                                        : corpus::load_corpus(source_path);
  if (config.middle_window_words > 0) {
    for (corpus::Story& s : source_stories) {
      s.text = learn::middle_window(s.text, config.middle_window_words);
    }
    manifest.add_note("middle window of " +
                      std::to_string(config.middle_window_words) +
                      " words applied to source texts");
  }
  ResourceOptions source_options;
  source_options.word_provider = providers.word.get();
  source_options.doc_provider = providers.doc.get();
  source_options.frame_seqs = target_in.has_frames ? &target_in.frame_seqs : nullptr;
  source_options.lexicon = target_in.has_lexicon ? &target_in.lexicon : nullptr;
  source_options.stoplist =
      target_in.stoplist.empty() ? nullptr : &target_in.stoplist;
  source_options.shape_params = config.shape;
  StoryResources source_resources =
      StoryResources::build(source_stories, source_options);

  learn::TransferBuild build = learn::build_transfer_pairs(
      source_stories, config.transfer_target, config.seed);
  for (const std::string& w : build.warnings) manifest.add_note(w);

  std::vector<std::pair<std::string, std::string>> id_pairs;
  std::vector<int> labels;
  for (const learn::TransferPair& p : build.pairs) {
    id_pairs.emplace_back(p.story_a, p.story_b);
    labels.push_back(p.label);
  }
  learn::FeatureMatrix X = learn::pair_feature_matrix(source_resources, id_pairs);

  // Same-tag holdout: the harness check that the pair classifier learns its
  // own training objective.
  learn::SplitIndices split = learn::stratified_split(
      labels, 0.2, Rng(config.seed).derive("transfer-split").next_u64());
  auto take = [&](const std::vector<size_t>& rows) {
    learn::FeatureMatrix out = learn::FeatureMatrix::zeros(rows.size(), X.cols);
    std::vector<int> y;
    for (size_t i = 0; i < rows.size(); ++i) {
      auto row = X.row(rows[i]);
      std::copy(row.begin(), row.end(), out.values.begin() + i * X.cols);
      y.push_back(labels[rows[i]]);
    }
    return std::make_pair(std::move(out), std::move(y));
  };
  auto [X_train, y_train] = take(split.train);
  auto [X_eval, y_eval] = take(split.eval);

  // Per-dimension targets over annotated pairs.
  std::vector<std::pair<std::string, std::string>> target_pairs;
  for (const corpus::PairAnnotation& a : loaded.annotations) {
    target_pairs.emplace_back(a.story_a, a.story_b);
  }
  if (target_pairs.empty()) {
    fail(Errc::insufficient_data, "no annotated pairs to evaluate against");
  }
  learn::FeatureMatrix X_target =
      learn::pair_feature_matrix(target_resources, target_pairs);
  std::map<corpus::AnalogyDimension, std::vector<int>> dim_labels;
  for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
    std::vector<int> y;
    for (const corpus::PairAnnotation& a : loaded.annotations) {
      auto v = a.label(dim);
      y.push_back(v && *v ? 1 : 0);
    }
    dim_labels[dim] = std::move(y);
  }

  learn::TrainConfig train = config.train;
  train.seed = config.seed;
  std::map<corpus::AnalogyDimension, std::vector<learn::EpochRecord>> traces;
  std::vector<learn::EpochRecord> holdout_trace;
  learn::LogisticModel model = learn::train_logistic(
      X_train, y_train, train,
      [&](int epoch, const learn::LogisticModel& m, double loss) {
        auto hold = learn::evaluate(m, X_eval, y_eval);
        holdout_trace.push_back(learn::EpochRecord{
            epoch, loss, metrics::accuracy(hold), metrics::f1(hold)});
        for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
          auto counts = learn::evaluate(m, X_target, dim_labels.at(dim));
          traces[dim].push_back(learn::EpochRecord{
              epoch, loss, metrics::accuracy(counts), metrics::f1(counts)});
        }
      });

  // Pair list, traces, and the summary table.
  {
    std::string out;
    for (const learn::TransferPair& p : build.pairs) {
      ordered_json j;
      j["story_a"] = p.story_a;
      j["story_b"] = p.story_b;
      j["label"] = p.label;
      j["seed"] = config.seed;
      out += j.dump();
      out += "\n";
    }
    write_file((fs::path(config.out_dir) / "transfer_pairs.jsonl").string(), out);
    manifest.add_output("transfer_pairs.jsonl");
  }
  auto write_trace = [&](const std::string& name,
                         const std::vector<learn::EpochRecord>& trace) {
    std::ostringstream out;
    out << "epoch,loss,accuracy,f1\n";
    for (const learn::EpochRecord& rec : trace) {
      out << rec.epoch << "," << format_real(rec.train_loss) << ","
          << format_real(rec.eval_accuracy) << "," << format_real(rec.eval_f1)
          << "\n";
    }
    std::string file = "transfer_trace_" + name + ".csv";
    write_file((fs::path(config.out_dir) / file).string(), out.str());
    manifest.add_output(file);
  };
  for (const auto& [dim, trace] : traces) {
    write_trace(std::string(corpus::to_string(dim)), trace);
  }
  write_trace("same_tag_holdout", holdout_trace);

  std::vector<std::vector<std::string>> rows;
  for (const auto& [dim, trace] : traces) {
    const learn::EpochRecord& last = trace.back();
    rows.push_back({std::string(corpus::to_string(dim)),
                    format_real(last.eval_accuracy), format_real(last.eval_f1)});
  }
  const learn::EpochRecord& hold_last = holdout_trace.back();
  rows.push_back({"same_tag_holdout", format_real(hold_last.eval_accuracy),
                  format_real(hold_last.eval_f1)});
  write_table(config, manifest, "transfer_report",
              {"dimension", "accuracy", "f1"}, rows,
              {"pair classifier trained on same-tag labels over " +
               std::to_string(split.train.size()) + " pairs"});
  learn::save_model(model, (fs::path(config.out_dir) / "transfer_model.txt").string());
  manifest.add_output("transfer_model.txt");
  manifest.add_param("transfer_pairs", build.pairs.size());
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// iaa

int run_iaa(const RunConfig& config) {
  require_path(config.ratings_path, "ratings");
  ensure_out_dir(config);
  Manifest manifest(config, "iaa");
  manifest.add_input("ratings", config.ratings_path);

  auto ratings = corpus::load_ratings(config.ratings_path);
  metrics::IaaReport report = metrics::iaa_report(ratings);

  std::vector<std::string> columns = {"raters"};
  for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
    columns.push_back(std::string(corpus::to_string(dim)));
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> current_pair;
  std::vector<std::string> row;
  for (const metrics::IaaCell& cell : report.cells) {
    std::string pair_label = cell.rater_a + " VS " + cell.rater_b;
    if (current_pair.empty() || current_pair.front() != pair_label) {
      if (!row.empty()) rows.push_back(row);
      row = {pair_label};
      current_pair = {pair_label};
    }
    std::string text = cell.kappa.defined ? format_real(cell.kappa.value)
                                          : "undef(" + cell.note + ")";
    row.push_back(text);
  }
  if (!row.empty()) rows.push_back(row);

  write_table(config, manifest, "iaa_report", columns, rows);
  manifest.add_param("raters", report.raters.size());
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const RunConfig& config) {
  require_path(config.corpus_path, "corpus");
  require_path(config.annotations_path, "annotations");
  ensure_out_dir(config);
  Manifest manifest(config, "validate");
  manifest.add_input("corpus", config.corpus_path);
  manifest.add_input("annotations", config.annotations_path);

  auto stories = corpus::load_corpus(config.corpus_path);
  auto loaded = corpus::load_annotations(config.annotations_path, stories,
                                         corpus::LoadMode::lenient);

  std::vector<std::vector<std::string>> rows;
  for (const corpus::Violation& v : loaded.violations) {
    rows.push_back({std::to_string(v.line), v.pair_id,
                    v.dimension ? std::string(corpus::to_string(*v.dimension)) : "",
                    v.rule, v.detail});
  }
  write_table(config, manifest, "violations",
              {"line", "pair_id", "dimension", "rule", "detail"}, rows);
  manifest.add_param("annotations", loaded.annotations.size());
  manifest.add_param("violations", loaded.violations.size());
  manifest.write();
  return 0;
}

int run_command(const std::string& command, const RunConfig& config) {
  if (command == "stats") return run_stats(config);
  if (command == "shapes") return run_shapes(config);
  if (command == "pairs-generate") return run_pairs_generate(config);
  if (command == "pairs-score") return run_pairs_score(config);
  if (command == "cluster") return run_cluster(config);
  if (command == "analogy") return run_analogy(config);
  if (command == "transfer") return run_transfer(config);
  if (command == "iaa") return run_iaa(config);
  if (command == "validate") return run_validate(config);
  fail(Errc::config_error, "unknown command \"" + command + "\"");
}

}  // namespace fabula::cli
