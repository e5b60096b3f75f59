#include "fabula/textsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>

#include "fabula/error.hpp"
#include "fabula/util.hpp"

namespace fabula::textsim {

namespace {

inline bool is_letter(char c) {
  char l = static_cast<char>(c | 0x20);
  return l >= 'a' && l <= 'z';
}

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream out;
  std::string cur;
  auto flush = [&] {
    size_t b = 0, e = cur.size();
    while (b < e && !is_letter(cur[b])) ++b;
    while (e > b && !is_letter(cur[e - 1])) --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char c : text) {
    if (is_letter(c)) {
      cur += static_cast<char>(c | 0x20);
    } else if ((c == '\'' || c == '-') && !cur.empty()) {
      cur += c;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

TokenStream apply_stoplist(const TokenStream& tokens,
                           const std::set<std::string>& stoplist) {
  TokenStream out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    if (!stoplist.contains(t)) out.push_back(t);
  }
  return out;
}

std::set<std::string> load_stoplist(const std::string& path) {
  std::set<std::string> words;
  for_each_line(path, [&](size_t, const std::string& line) {
    auto w = trim(line);
    if (w.empty() || w.front() == '#') return;
    words.insert(lower_ascii(w));
  });
  return words;
}

TfIdfModel fit_tfidf(const std::vector<TokenStream>& docs) {
  if (docs.empty()) fail(Errc::empty_corpus, "fit_tfidf needs at least one document");
  TfIdfModel model;
  model.doc_count = docs.size();
  for (const TokenStream& doc : docs) {
    std::set<std::string_view> seen;
    for (const std::string& w : doc) seen.insert(w);
    for (std::string_view w : seen) ++model.doc_freq[std::string(w)];
  }
  return model;
}

double tfidf_weight(const TfIdfModel& model, const TokenStream& doc,
                    const std::string& word) {
  size_t count = static_cast<size_t>(std::count(doc.begin(), doc.end(), word));
  if (count == 0) {
    fail(Errc::word_not_in_doc, "\"" + word + "\" does not occur in the document");
  }
  double tf = static_cast<double>(count) / static_cast<double>(doc.size());
  auto it = model.doc_freq.find(word);
  double df = it == model.doc_freq.end() ? 0.0 : static_cast<double>(it->second);
  double idf = std::log((1.0 + static_cast<double>(model.doc_count)) / (1.0 + df)) + 1.0;
  return tf * idf;
}

EmbeddingTable load_embedding_table(const std::string& path) {
  EmbeddingTable table;
  bool header_possible = true;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty()) return;
    auto cols = split_whitespace(line);
    auto parse_double = [&](const std::string& s, double& out) {
      char* end = nullptr;
      out = std::strtod(s.c_str(), &end);
      return end && *end == '\0';
    };
    if (header_possible && cols.size() == 2) {
      double a, b;
      if (parse_double(cols[0], a) && parse_double(cols[1], b)) {
        header_possible = false;
        return;  // "count dimension" header
      }
    }
    header_possible = false;
    if (cols.size() < 2) {
      fail(Errc::malformed_record,
           path + ":" + std::to_string(lineno) + ": expected key plus values");
    }
    std::vector<double> vec(cols.size() - 1);
    for (size_t i = 1; i < cols.size(); ++i) {
      if (!parse_double(cols[i], vec[i - 1]) || !std::isfinite(vec[i - 1])) {
        fail(Errc::malformed_record,
             path + ":" + std::to_string(lineno) + ": non-finite component");
      }
    }
    if (table.dimension == 0) {
      table.dimension = vec.size();
    } else if (vec.size() != table.dimension) {
      fail(Errc::dimension_mismatch,
           path + ":" + std::to_string(lineno) + ": expected " +
               std::to_string(table.dimension) + " components, got " +
               std::to_string(vec.size()));
    }
    table.vectors[cols[0]] = std::move(vec);
  });
  return table;
}

std::optional<std::vector<double>> TableProvider::lookup(
    const std::string& key) const {
  auto it = table_.vectors.find(key);
  if (it == table_.vectors.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<double>> HashProvider::lookup(
    const std::string& key) const {
  return hash_embedding(key, dimension_, seed_);
}

std::vector<double> hash_embedding(std::string_view key, size_t dimension,
                                   uint64_t seed) {
  if (dimension == 0) fail(Errc::config_error, "hash embedding dimension must be > 0");
  uint64_t base = splitmix64(fnv1a64(key) ^ splitmix64(seed));
  std::vector<double> v(dimension);
  for (size_t i = 0; i < dimension; ++i) {
    uint64_t a = splitmix64(base + 2 * i + 1);
    uint64_t b = splitmix64(base + 2 * i + 2);
    // Box-Muller over two uniform draws; u1 in (0, 1].
    double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    v[i] = std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> embed_document_weighted(const TokenStream& doc,
                                            const EmbeddingProvider& words,
                                            const TfIdfModel& model) {
  std::vector<double> acc(words.dimension(), 0.0);
  double total_weight = 0.0;
  // Distinct words in sorted order: the accumulation order is then a function
  // of the token multiset alone, so reordering a document cannot move a bit.
  std::map<std::string_view, size_t> counts;
  for (const std::string& w : doc) ++counts[w];
  for (const auto& [w, count] : counts) {
    auto vec = words.lookup(std::string(w));
    if (!vec) continue;
    double tf = static_cast<double>(count) / static_cast<double>(doc.size());
    auto it = model.doc_freq.find(std::string(w));
    double df = it == model.doc_freq.end() ? 0.0 : static_cast<double>(it->second);
    double idf =
        std::log((1.0 + static_cast<double>(model.doc_count)) / (1.0 + df)) + 1.0;
    double weight = tf * idf;
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += weight * (*vec)[i];
    total_weight += weight;
  }
  if (total_weight == 0.0) {
    fail(Errc::no_known_tokens, "no token of the document has a word vector");
  }
  for (double& x : acc) x /= total_weight;
  return acc;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    fail(Errc::dimension_mismatch,
         "cosine over lengths " + std::to_string(u.size()) + " and " +
             std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) fail(Errc::zero_vector, "cosine of a zero vector");
  double value = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(value, -1.0, 1.0);
}

double lexical_overlap(const TokenStream& a, const TokenStream& b) {
  std::set<std::string_view> sa(a.begin(), a.end());
  std::set<std::string_view> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  size_t inter = 0;
  for (std::string_view w : sa) inter += sb.contains(w);
  size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace fabula::textsim
