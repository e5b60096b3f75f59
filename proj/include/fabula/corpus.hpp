#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fabula::corpus {

// ---------------------------------------------------------------------------
// Closed vocabularies

enum class MoralTag {
  Consequence,
  Content,
  Danger,
  Effort,
  Flattery,
  Friends,
  Greed,
  Lazy,
  Learn,
  Opportunity,
  Respect,
  TrueNature,
  Trust,
  Weak,
  Worthiness,
};

inline constexpr size_t kMoralTagCount = 15;
const std::array<MoralTag, kMoralTagCount>& all_moral_tags();
std::string_view to_string(MoralTag tag);
std::optional<MoralTag> moral_tag_from(std::string_view name);

// Canonical order, used by every report and serialized record.
enum class AnalogyDimension { SAA, DAA, RA, EA, SA, MP, LS };

inline constexpr size_t kDimensionCount = 7;
const std::array<AnalogyDimension, kDimensionCount>& all_dimensions();
std::string_view to_string(AnalogyDimension dim);
std::optional<AnalogyDimension> dimension_from(std::string_view name);

// ---------------------------------------------------------------------------
// Domain types

struct Story {
  std::string id;
  std::string title;
  std::string text;
  std::optional<std::string> moral;
  std::set<MoralTag> tags;

  bool operator==(const Story&) const = default;
};

// Free-text "subject - predicate - object"; object empty for unary predicates.
struct EvidenceTriple {
  std::string subject;
  std::string predicate;
  std::string object;

  // Splits on the literal " - " delimiter; needs at least two parts.
  static EvidenceTriple parse(std::string_view text);
  std::string to_text() const;
  bool negated() const;  // predicate leads with "not"/"no"

  bool operator==(const EvidenceTriple&) const = default;
};

using EvidencePair = std::pair<EvidenceTriple, EvidenceTriple>;

struct PairAnnotation {
  std::string pair_id;
  std::string story_a;
  std::string story_b;
  // All seven dimensions after a strict load; lenient loads may keep less.
  std::map<AnalogyDimension, bool> labels;
  std::map<AnalogyDimension, std::vector<EvidencePair>> evidence;

  std::optional<bool> label(AnalogyDimension dim) const;

  bool operator==(const PairAnnotation&) const = default;
};

struct HedonometerLexicon {
  std::unordered_map<std::string, double> entries;  // lowercase word -> score

  std::optional<double> score(std::string_view word) const;
  size_t size() const { return entries.size(); }
};

struct Rating {
  std::string pair_id;
  AnalogyDimension dimension;
  bool value;
};

struct RatingSet {
  std::string rater_id;
  std::vector<Rating> items;
};

// One report per violated invariant; `rule` is a stable kebab-case name.
struct Violation {
  size_t line = 0;  // 0 when the check ran on in-memory values
  std::string pair_id;
  std::optional<AnalogyDimension> dimension;
  std::string rule;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Loading and validation

std::vector<Story> load_corpus(const std::string& path);
void save_corpus(const std::vector<Story>& stories, const std::string& path);

enum class LoadMode { strict, lenient };

struct AnnotationLoad {
  std::vector<PairAnnotation> annotations;
  std::vector<Violation> violations;
};

// Structural problems (bad JSON, wrong field types) always throw
// MalformedRecord with the offending line. Invariant violations become
// Violation reports; strict mode additionally drops the offending record.
AnnotationLoad load_annotations(const std::string& path,
                                const std::vector<Story>& corpus,
                                LoadMode mode = LoadMode::strict);
void save_annotations(const std::vector<PairAnnotation>& annotations,
                      const std::string& path);

std::vector<Violation> validate_annotations(
    const std::vector<PairAnnotation>& annotations);

// Counts over the full 15-tag vocabulary; a story with k tags adds to k cells.
std::map<MoralTag, size_t> moral_distribution(const std::vector<Story>& corpus);

HedonometerLexicon load_lexicon(const std::string& path);
std::vector<RatingSet> load_ratings(const std::string& path);

}  // namespace fabula::corpus
