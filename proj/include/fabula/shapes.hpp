#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "fabula/corpus.hpp"

namespace fabula::shapes {

enum class SegmentLevel { High, Mid, Low };
std::string_view to_string(SegmentLevel level);

using LevelTriple = std::array<SegmentLevel, 3>;

enum class ArcKind { Tragedy, RagsToRiches, Cinderella, Oedipus, Other };

struct ArcType {
  ArcKind kind = ArcKind::Other;
  LevelTriple levels{};

  bool operator==(const ArcType&) const = default;
};

// "TRAGEDY", ..., or "OTHER(MID,MID,MID)" for unnamed patterns.
std::string arc_name(const ArcType& arc);

struct ShapeParams {
  int window = 30;
  double neutral = 5.4;
  double band = 0.2;

  bool operator==(const ShapeParams&) const = default;
};

struct HedonicSeries {
  std::string story_id;
  int window = 0;
  std::vector<double> values;
  size_t scored_tokens = 0;
  size_t total_tokens = 0;

  double coverage() const {
    return total_tokens == 0
               ? 0.0
               : static_cast<double>(scored_tokens) / static_cast<double>(total_tokens);
  }
};

struct SegmentSummary {
  double begin_avg = 0.0;
  double mid_avg = 0.0;
  double end_avg = 0.0;
  LevelTriple levels{};
};

struct ArcProfile {
  std::string story_id;
  ShapeParams params;
  double begin_avg = 0.0;
  double mid_avg = 0.0;
  double end_avg = 0.0;
  LevelTriple levels{};
  ArcType arc;
  double coverage = 0.0;
};

// Scores tokens against the lexicon (unscored tokens dropped), then averages
// a stride-1 window. Fewer scored tokens than the window collapse to a single
// whole-text average.
HedonicSeries hedonic_series(std::string_view text,
                             const corpus::HedonometerLexicon& lexicon,
                             int window, std::string story_id = {});

// Splits the series at floor(0.3 n) and floor(0.7 n), clamped so every segment
// is non-empty (series shorter than 3 use the whole series for each segment).
// HIGH above neutral+band, LOW below neutral-band, both strict.
SegmentSummary segment_levels(const HedonicSeries& series, double neutral = 5.4,
                              double band = 0.2);

ArcType classify_arc(const LevelTriple& levels);

ArcProfile arc_profile(const corpus::Story& story,
                       const corpus::HedonometerLexicon& lexicon,
                       const ShapeParams& params);

// True iff the level triples match; profiles must share parameters.
bool shape_agreement(const ArcProfile& a, const ArcProfile& b);

}  // namespace fabula::shapes
