#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fabula/metrics.hpp"
#include "fabula/resources.hpp"

namespace fabula::pairing {

enum class Method { Lexical, Semantic, Frame, Shape, Random };

std::string_view to_string(Method m);
std::optional<Method> method_from(std::string_view name);

struct StoryPair {
  std::string story_a;  // query story
  std::string story_b;
  Method method = Method::Random;
  // Cosine similarity for Lexical/Semantic, scaled distance for Frame,
  // unset for Shape/Random.
  std::optional<double> score;
};

struct PairSet {
  std::vector<StoryPair> pairs;
  uint64_t seed = 0;
  bool deduped = false;
};

// Best candidate for the query under one method: max cosine (Lexical/Semantic),
// min scaled_frame_distance with the query as reference (Frame), or level-triple
// agreement (Shape). Ties break toward the lexicographically smallest id.
StoryPair nearest_by_method(const StoryResources& resources,
                            const std::string& query_id, Method method);

// Top-k variant (candidates ordered best-first, then id).
std::vector<StoryPair> k_nearest_by_method(const StoryResources& resources,
                                           const std::string& query_id,
                                           Method method, size_t k);

struct GenerateOptions {
  std::vector<Method> methods;
  uint64_t seed = 0;
  size_t top_k = 1;
  // Random partners drawn per story, without replacement, from a stream
  // derived from (seed, story id).
  size_t random_per_story = 1;
  // When set, overrides random_per_story: stories contribute partners
  // round-robin until the total is reached.
  std::optional<size_t> random_total;
};

PairSet generate_pairs(const StoryResources& resources,
                       const GenerateOptions& options);

// Drops pairs equal as unordered id sets within the same method, keeping the
// first occurrence.
PairSet dedup(const PairSet& set);

std::vector<StoryPair> load_pairs(const std::string& path);
void save_pairs(const PairSet& set, const std::string& path);

struct MethodScore {
  Method method = Method::Random;
  size_t annotated_pairs = 0;
  std::map<corpus::AnalogyDimension, metrics::Flagged> dimension_rate;
  double method_average = 0.0;  // mean positive labels per annotated pair
  metrics::Flagged shape_agreement_rate{0.0, false};
};

struct MethodReport {
  std::vector<MethodScore> methods;
  std::vector<corpus::AnalogyDimension> dims_present;
  size_t matched_annotations = 0;
  size_t unmatched_annotations = 0;
};

// Scores each method over the annotations that match one of its generated
// pairs (unordered id match). Profiles, when supplied, feed the shape
// agreement ("SSS") row.
MethodReport score_methods(
    const PairSet& set, const std::vector<corpus::PairAnnotation>& annotations,
    const std::map<std::string, shapes::ArcProfile>* profiles = nullptr);

}  // namespace fabula::pairing
