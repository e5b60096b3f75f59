#include "fabula/corpus.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fabula/error.hpp"
#include "fabula/util.hpp"
#include "json.hpp"

namespace fabula::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Vocabularies

namespace {

constexpr std::array<std::string_view, kMoralTagCount> kTagNames = {
    "CONSEQUENCE", "CONTENT", "DANGER",      "EFFORT", "FLATTERY",
    "FRIENDS",     "GREED",   "LAZY",        "LEARN",  "OPPORTUNITY",
    "RESPECT",     "TRUE-NATURE", "TRUST",   "WEAK",   "WORTHINESS"};

constexpr std::array<std::string_view, kDimensionCount> kDimensionNames = {
    "SAA", "DAA", "RA", "EA", "SA", "MP", "LS"};

}  // namespace

const std::array<MoralTag, kMoralTagCount>& all_moral_tags() {
  static const std::array<MoralTag, kMoralTagCount> tags = [] {
    std::array<MoralTag, kMoralTagCount> out{};
    for (size_t i = 0; i < kMoralTagCount; ++i) out[i] = MoralTag(i);
    return out;
  }();
  return tags;
}

std::string_view to_string(MoralTag tag) {
  return kTagNames[static_cast<size_t>(tag)];
}

std::optional<MoralTag> moral_tag_from(std::string_view name) {
  for (size_t i = 0; i < kMoralTagCount; ++i) {
    if (kTagNames[i] == name) return MoralTag(i);
  }
  return std::nullopt;
}

const std::array<AnalogyDimension, kDimensionCount>& all_dimensions() {
  static const std::array<AnalogyDimension, kDimensionCount> dims = [] {
    std::array<AnalogyDimension, kDimensionCount> out{};
    for (size_t i = 0; i < kDimensionCount; ++i) out[i] = AnalogyDimension(i);
    return out;
  }();
  return dims;
}

std::string_view to_string(AnalogyDimension dim) {
  return kDimensionNames[static_cast<size_t>(dim)];
}

std::optional<AnalogyDimension> dimension_from(std::string_view name) {
  for (size_t i = 0; i < kDimensionCount; ++i) {
    if (kDimensionNames[i] == name) return AnalogyDimension(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Evidence triples

EvidenceTriple EvidenceTriple::parse(std::string_view text) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(" - ", start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(trim(text.substr(start)));
      break;
    }
    parts.emplace_back(trim(text.substr(start, pos - start)));
    start = pos + 3;
  }
  if (parts.size() < 2 || parts.size() > 3) {
    fail(Errc::malformed_record,
         "evidence triple needs 2 or 3 \" - \" separated parts: \"" +
             std::string(text) + "\"");
  }
  EvidenceTriple t;
  t.subject = parts[0];
  t.predicate = parts[1];
  t.object = parts.size() == 3 ? parts[2] : "";
  return t;
}

std::string EvidenceTriple::to_text() const {
  std::string out = subject + " - " + predicate;
  if (!object.empty()) out += " - " + object;
  return out;
}

bool EvidenceTriple::negated() const {
  auto words = split_whitespace(lower_ascii(predicate));
  if (words.empty()) return false;
  return words.front() == "not" || words.front() == "no";
}

std::optional<bool> PairAnnotation::label(AnalogyDimension dim) const {
  auto it = labels.find(dim);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Corpus records

namespace {

[[noreturn]] void bad_record(const std::string& path, size_t line,
                             const std::string& why) {
  fail(Errc::malformed_record, path + ":" + std::to_string(line) + ": " + why);
}

json parse_line(const std::string& path, size_t line, const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    bad_record(path, line, "not a JSON object");
  }
  return j;
}

std::string require_string(const json& j, const char* field,
                           const std::string& path, size_t line) {
  if (!j.contains(field) || !j[field].is_string()) {
    bad_record(path, line, std::string("missing string field \"") + field + "\"");
  }
  return j[field].get<std::string>();
}

}  // namespace

std::vector<Story> load_corpus(const std::string& path) {
  std::vector<Story> stories;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty()) return;
    json j = parse_line(path, lineno, line);
    Story s;
    s.id = require_string(j, "id", path, lineno);
    if (s.id.empty()) bad_record(path, lineno, "empty id");
    if (!seen.insert(s.id).second) {
      fail(Errc::duplicate_id,
           path + ":" + std::to_string(lineno) + ": duplicate story id \"" +
               s.id + "\"");
    }
    if (j.contains("title")) {
      if (!j["title"].is_string()) bad_record(path, lineno, "title must be a string");
      s.title = j["title"].get<std::string>();
    }
    s.text = require_string(j, "text", path, lineno);
    if (trim(s.text).empty()) bad_record(path, lineno, "empty text");
    if (j.contains("moral") && !j["moral"].is_null()) {
      if (!j["moral"].is_string()) bad_record(path, lineno, "moral must be a string or null");
      s.moral = j["moral"].get<std::string>();
    }
    if (j.contains("tags") && !j["tags"].is_null()) {
      if (!j["tags"].is_array()) bad_record(path, lineno, "tags must be an array");
      for (const auto& t : j["tags"]) {
        if (!t.is_string()) bad_record(path, lineno, "tags must be strings");
        auto tag = moral_tag_from(t.get<std::string>());
        if (!tag) {
          fail(Errc::unknown_tag,
               path + ":" + std::to_string(lineno) + ": unknown tag \"" +
                   t.get<std::string>() + "\"");
        }
        s.tags.insert(*tag);
      }
    }
    stories.push_back(std::move(s));
  });
  return stories;
}

void save_corpus(const std::vector<Story>& stories, const std::string& path) {
  std::ostringstream out;
  for (const Story& s : stories) {
    ordered_json j;
    j["id"] = s.id;
    j["title"] = s.title;
    j["text"] = s.text;
    if (s.moral) {
      j["moral"] = *s.moral;
    } else {
      j["moral"] = nullptr;
    }
    auto tags = json::array();
    for (MoralTag t : s.tags) tags.push_back(std::string(to_string(t)));
    j["tags"] = tags;
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Pair annotations

namespace {

struct RecordCheck {
  std::vector<Violation>* out;
  size_t line;
  std::string pair_id;
  bool clean = true;

  void report(std::optional<AnalogyDimension> dim, std::string rule,
              std::string detail) {
    clean = false;
    out->push_back(Violation{line, pair_id, dim, std::move(rule), std::move(detail)});
  }
};

// Shared between the loader and validate_annotations so both report the same
// rules for the same defects.
void check_annotation(const PairAnnotation& a, RecordCheck& check) {
  if (a.story_a == a.story_b) {
    check.report(std::nullopt, "self-pair",
                 "story_a and story_b are both \"" + a.story_a + "\"");
  }
  for (AnalogyDimension dim : all_dimensions()) {
    if (!a.labels.contains(dim)) {
      check.report(dim, "missing-dimension",
                   std::string("label ") + std::string(to_string(dim)) +
                       " absent");
    }
  }
  auto sa = a.label(AnalogyDimension::SA);
  auto ea = a.label(AnalogyDimension::EA);
  if (sa && *sa && ea && !*ea) {
    check.report(AnalogyDimension::SA, "sa-requires-ea",
                 "SA is true but EA is false");
  }
  for (const auto& [dim, entries] : a.evidence) {
    auto lab = a.label(dim);
    if (lab && !*lab && !entries.empty()) {
      check.report(dim, "evidence-on-negative-label",
                   std::string(to_string(dim)) +
                       " is false but has evidence entries");
    }
    for (const EvidencePair& pair : entries) {
      for (const EvidenceTriple* t : {&pair.first, &pair.second}) {
        if (t->predicate.empty()) {
          check.report(dim, "empty-predicate", "triple \"" + t->to_text() + "\"");
        } else if (t->negated()) {
          check.report(dim, "negated-triple", "triple \"" + t->to_text() + "\"");
        }
      }
    }
  }
}

}  // namespace

AnnotationLoad load_annotations(const std::string& path,
                                const std::vector<Story>& corpus,
                                LoadMode mode) {
  std::unordered_set<std::string> known_ids;
  for (const Story& s : corpus) known_ids.insert(s.id);

  AnnotationLoad result;
  std::unordered_set<std::string> seen_pair_ids;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty()) return;
    json j = parse_line(path, lineno, line);

    PairAnnotation a;
    a.pair_id = require_string(j, "pair_id", path, lineno);
    a.story_a = require_string(j, "story_a", path, lineno);
    a.story_b = require_string(j, "story_b", path, lineno);

    if (!j.contains("labels") || !j["labels"].is_object()) {
      bad_record(path, lineno, "missing labels object");
    }
    for (const auto& [key, value] : j["labels"].items()) {
      auto dim = dimension_from(key);
      if (!dim) bad_record(path, lineno, "unknown dimension \"" + key + "\"");
      if (!value.is_boolean()) {
        bad_record(path, lineno, "label " + key + " must be a boolean");
      }
      a.labels[*dim] = value.get<bool>();
    }
    if (j.contains("evidence") && !j["evidence"].is_null()) {
      if (!j["evidence"].is_object()) bad_record(path, lineno, "evidence must be an object");
      for (const auto& [key, value] : j["evidence"].items()) {
        auto dim = dimension_from(key);
        if (!dim) bad_record(path, lineno, "unknown dimension \"" + key + "\"");
        if (!value.is_array()) bad_record(path, lineno, "evidence entries must be arrays");
        for (const auto& entry : value) {
          if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
              !entry[1].is_string()) {
            bad_record(path, lineno,
                       "evidence entry must be a [triple, triple] string pair");
          }
          try {
            a.evidence[*dim].emplace_back(
                EvidenceTriple::parse(entry[0].get<std::string>()),
                EvidenceTriple::parse(entry[1].get<std::string>()));
          } catch (const Error&) {
            bad_record(path, lineno, "unparseable evidence triple");
          }
        }
      }
    }

    RecordCheck check{&result.violations, lineno, a.pair_id};
    if (!seen_pair_ids.insert(a.pair_id).second) {
      check.report(std::nullopt, "duplicate-pair-id", "pair_id seen before");
    }
    for (const std::string* sid : {&a.story_a, &a.story_b}) {
      if (!known_ids.contains(*sid)) {
        check.report(std::nullopt, "unknown-story",
                     "story id \"" + *sid + "\" not in corpus");
      }
    }
    check_annotation(a, check);

    if (check.clean || mode == LoadMode::lenient) {
      result.annotations.push_back(std::move(a));
    }
  });
  return result;
}

void save_annotations(const std::vector<PairAnnotation>& annotations,
                      const std::string& path) {
  std::ostringstream out;
  for (const PairAnnotation& a : annotations) {
    ordered_json j;
    j["pair_id"] = a.pair_id;
    j["story_a"] = a.story_a;
    j["story_b"] = a.story_b;
    ordered_json labels;
    for (AnalogyDimension dim : all_dimensions()) {
      auto v = a.label(dim);
      if (v) labels[std::string(to_string(dim))] = *v;
    }
    j["labels"] = labels;
    ordered_json evidence;
    for (AnalogyDimension dim : all_dimensions()) {
      auto it = a.evidence.find(dim);
      if (it == a.evidence.end() || it->second.empty()) continue;
      auto entries = ordered_json::array();
      for (const EvidencePair& pair : it->second) {
        entries.push_back({pair.first.to_text(), pair.second.to_text()});
      }
      evidence[std::string(to_string(dim))] = entries;
    }
    j["evidence"] = evidence;
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

std::vector<Violation> validate_annotations(
    const std::vector<PairAnnotation>& annotations) {
  std::vector<Violation> violations;
  std::unordered_set<std::string> seen_pair_ids;
  for (const PairAnnotation& a : annotations) {
    RecordCheck check{&violations, 0, a.pair_id};
    if (!seen_pair_ids.insert(a.pair_id).second) {
      check.report(std::nullopt, "duplicate-pair-id", "pair_id seen before");
    }
    check_annotation(a, check);
  }
  return violations;
}

std::map<MoralTag, size_t> moral_distribution(const std::vector<Story>& corpus) {
  std::map<MoralTag, size_t> counts;
  for (MoralTag tag : all_moral_tags()) counts[tag] = 0;
  for (const Story& s : corpus) {
    for (MoralTag tag : s.tags) ++counts[tag];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Lexicon and rating files

HedonometerLexicon load_lexicon(const std::string& path) {
  HedonometerLexicon lex;
  bool first_data_line = true;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty() || line.front() == '#') return;
    auto cols = split(line, '\t');
    if (cols.size() != 2) {
      bad_record(path, lineno, "expected two tab-separated columns");
    }
    std::string word = lower_ascii(trim(cols[0]));
    std::string score_text{trim(cols[1])};
    char* end = nullptr;
    double score = std::strtod(score_text.c_str(), &end);
    bool parsed = end && *end == '\0' && !score_text.empty();
    if (!parsed || !std::isfinite(score)) {
      // A single unparseable first line is an optional header.
      if (first_data_line && !parsed) {
        first_data_line = false;
        return;
      }
      bad_record(path, lineno, "score is not a finite number");
    }
    first_data_line = false;
    lex.entries[word] = score;
  });
  return lex;
}

std::optional<double> HedonometerLexicon::score(std::string_view word) const {
  auto it = entries.find(lower_ascii(word));
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

std::vector<RatingSet> load_ratings(const std::string& path) {
  std::vector<RatingSet> raters;
  std::unordered_map<std::string, size_t> index;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty() || line.front() == '#') return;
    auto cols = split(line, '\t');
    if (cols.size() != 4) {
      bad_record(path, lineno,
                 "expected rater_id, pair_id, dimension, value (tab-separated)");
    }
    std::string rater{trim(cols[0])};
    std::string pair{trim(cols[1])};
    auto dim = dimension_from(trim(cols[2]));
    if (!dim) bad_record(path, lineno, "unknown dimension \"" + cols[2] + "\"");
    std::string value = lower_ascii(trim(cols[3]));
    bool b;
    if (value == "true" || value == "1") {
      b = true;
    } else if (value == "false" || value == "0") {
      b = false;
    } else {
      bad_record(path, lineno, "value must be true/false/1/0");
    }
    std::string item_key = pair + "\x1f" + std::string(to_string(*dim));
    if (!seen[rater].insert(item_key).second) {
      fail(Errc::duplicate_id,
           path + ":" + std::to_string(lineno) + ": rater " + rater +
               " rated (" + pair + ", " + std::string(to_string(*dim)) +
               ") twice");
    }
    auto it = index.find(rater);
    if (it == index.end()) {
      index[rater] = raters.size();
      raters.push_back(RatingSet{rater, {}});
      it = index.find(rater);
    }
    raters[it->second].items.push_back(Rating{pair, *dim, b});
  });
  return raters;
}

}  // namespace fabula::corpus
