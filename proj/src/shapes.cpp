#include "fabula/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fabula/error.hpp"
#include "fabula/textsim.hpp"

namespace fabula::shapes {

std::string_view to_string(SegmentLevel level) {
  switch (level) {
    case SegmentLevel::High: return "HIGH";
    case SegmentLevel::Mid: return "MID";
    case SegmentLevel::Low: return "LOW";
  }
  return "?";
}

std::string arc_name(const ArcType& arc) {
  switch (arc.kind) {
    case ArcKind::Tragedy: return "TRAGEDY";
    case ArcKind::RagsToRiches: return "RAGS_TO_RICHES";
    case ArcKind::Cinderella: return "CINDERELLA";
    case ArcKind::Oedipus: return "OEDIPUS";
    case ArcKind::Other: break;
  }
  std::string out = "OTHER(";
  for (size_t i = 0; i < arc.levels.size(); ++i) {
    if (i > 0) out += ",";
    out += to_string(arc.levels[i]);
  }
  out += ")";
  return out;
}

HedonicSeries hedonic_series(std::string_view text,
                             const corpus::HedonometerLexicon& lexicon,
                             int window, std::string story_id) {
  if (window < 1) fail(Errc::config_error, "window must be >= 1");
  auto tokens = textsim::tokenize(text);
  std::vector<double> scores;
  scores.reserve(tokens.size());
  for (const std::string& t : tokens) {
    if (auto s = lexicon.score(t)) scores.push_back(*s);
  }
  if (scores.empty()) {
    fail(Errc::no_scored_tokens,
         "no token of story \"" + story_id + "\" is in the lexicon");
  }

  HedonicSeries series;
  series.story_id = std::move(story_id);
  series.window = window;
  series.scored_tokens = scores.size();
  series.total_tokens = tokens.size();

  size_t w = static_cast<size_t>(window);
  if (scores.size() < w) {
    double mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                  static_cast<double>(scores.size());
    series.values.push_back(mean);
    return series;
  }
  double sum = std::accumulate(scores.begin(), scores.begin() + w, 0.0);
  series.values.push_back(sum / static_cast<double>(w));
  for (size_t i = w; i < scores.size(); ++i) {
    sum += scores[i] - scores[i - w];
    series.values.push_back(sum / static_cast<double>(w));
  }
  return series;
}

namespace {

double mean_of(const std::vector<double>& v, size_t first, size_t last) {
  double sum = std::accumulate(v.begin() + first, v.begin() + last, 0.0);
  return sum / static_cast<double>(last - first);
}

SegmentLevel level_of(double mean, double neutral, double band) {
  if (mean > neutral + band) return SegmentLevel::High;
  if (mean < neutral - band) return SegmentLevel::Low;
  return SegmentLevel::Mid;
}

}  // namespace

SegmentSummary segment_levels(const HedonicSeries& series, double neutral,
                              double band) {
  if (series.values.empty()) fail(Errc::empty_series, "empty hedonic series");
  if (band <= 0.0) fail(Errc::config_error, "band must be > 0");
  const auto& v = series.values;
  size_t n = v.size();

  SegmentSummary out;
  if (n < 3) {
    // Too short for three disjoint segments; every segment is the whole series.
    double m = mean_of(v, 0, n);
    out.begin_avg = out.mid_avg = out.end_avg = m;
  } else {
    size_t i1 = static_cast<size_t>(std::floor(0.3 * static_cast<double>(n)));
    size_t i2 = static_cast<size_t>(std::floor(0.7 * static_cast<double>(n)));
    i1 = std::clamp<size_t>(i1, 1, n - 2);
    i2 = std::clamp<size_t>(i2, i1 + 1, n - 1);
    out.begin_avg = mean_of(v, 0, i1);
    out.mid_avg = mean_of(v, i1, i2);
    out.end_avg = mean_of(v, i2, n);
  }
  out.levels = {level_of(out.begin_avg, neutral, band),
                level_of(out.mid_avg, neutral, band),
                level_of(out.end_avg, neutral, band)};
  return out;
}

ArcType classify_arc(const LevelTriple& levels) {
  using L = SegmentLevel;
  ArcType arc;
  arc.levels = levels;
  if (levels == LevelTriple{L::High, L::High, L::Low}) {
    arc.kind = ArcKind::Tragedy;
  } else if (levels == LevelTriple{L::Low, L::Mid, L::High}) {
    arc.kind = ArcKind::RagsToRiches;
  } else if (levels == LevelTriple{L::High, L::Low, L::High}) {
    arc.kind = ArcKind::Cinderella;
  } else if (levels == LevelTriple{L::Low, L::Mid, L::Low}) {
    arc.kind = ArcKind::Oedipus;
  } else {
    arc.kind = ArcKind::Other;
  }
  return arc;
}

ArcProfile arc_profile(const corpus::Story& story,
                       const corpus::HedonometerLexicon& lexicon,
                       const ShapeParams& params) {
  HedonicSeries series =
      hedonic_series(story.text, lexicon, params.window, story.id);
  SegmentSummary summary = segment_levels(series, params.neutral, params.band);
  ArcProfile profile;
  profile.story_id = story.id;
  profile.params = params;
  profile.begin_avg = summary.begin_avg;
  profile.mid_avg = summary.mid_avg;
  profile.end_avg = summary.end_avg;
  profile.levels = summary.levels;
  profile.arc = classify_arc(summary.levels);
  profile.coverage = series.coverage();
  return profile;
}

bool shape_agreement(const ArcProfile& a, const ArcProfile& b) {
  if (!(a.params == b.params)) {
    fail(Errc::parameter_mismatch,
         "profiles " + a.story_id + " and " + b.story_id +
             " were computed with different parameters");
  }
  return a.levels == b.levels;
}

}  // namespace fabula::shapes
