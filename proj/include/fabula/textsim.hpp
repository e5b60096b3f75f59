#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fabula::textsim {

// Lowercase word tokens; only letters plus internal apostrophes/hyphens.
using TokenStream = std::vector<std::string>;

TokenStream tokenize(std::string_view text);
TokenStream apply_stoplist(const TokenStream& tokens,
                           const std::set<std::string>& stoplist);
std::set<std::string> load_stoplist(const std::string& path);

struct TfIdfModel {
  size_t doc_count = 0;
  std::unordered_map<std::string, size_t> doc_freq;
};

TfIdfModel fit_tfidf(const std::vector<TokenStream>& docs);

// tf * idf with tf = count/|doc| and idf = ln((1+N)/(1+df)) + 1.
double tfidf_weight(const TfIdfModel& model, const TokenStream& doc,
                    const std::string& word);

struct EmbeddingTable {
  size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

// Text format: one "key v1 v2 ... vd" row per line, optional "count dim" header.
EmbeddingTable load_embedding_table(const std::string& path);

// Fixed-dimension vector source keyed by word or story id. Lookups are pure:
// the same key always yields the same vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual size_t dimension() const = 0;
  virtual std::optional<std::vector<double>> lookup(const std::string& key) const = 0;
  virtual bool synthetic() const { return false; }
};

class TableProvider final : public EmbeddingProvider {
 public:
  explicit TableProvider(EmbeddingTable table) : table_(std::move(table)) {}
  size_t dimension() const override { return table_.dimension; }
  std::optional<std::vector<double>> lookup(const std::string& key) const override;

 private:
  EmbeddingTable table_;
};

// Deterministic fallback when no table is supplied; resulting similarities are
// synthetic and reports must say so.
class HashProvider final : public EmbeddingProvider {
 public:
  HashProvider(size_t dimension, uint64_t seed)
      : dimension_(dimension), seed_(seed) {}
  size_t dimension() const override { return dimension_; }
  std::optional<std::vector<double>> lookup(const std::string& key) const override;
  bool synthetic() const override { return true; }

 private:
  size_t dimension_;
  uint64_t seed_;
};

// Unit-norm pure function of (key, dimension, seed).
std::vector<double> hash_embedding(std::string_view key, size_t dimension,
                                   uint64_t seed);

// TF-IDF weighted mean of the word vectors; tokens without a vector are
// skipped rather than zero-filled.
std::vector<double> embed_document_weighted(const TokenStream& doc,
                                            const EmbeddingProvider& words,
                                            const TfIdfModel& model);

double cosine(std::span<const double> u, std::span<const double> v);

// Jaccard similarity of the token sets; 0 when both are empty.
double lexical_overlap(const TokenStream& a, const TokenStream& b);

}  // namespace fabula::textsim
