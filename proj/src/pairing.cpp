#include "fabula/pairing.hpp"

#include <algorithm>
#include <array>
#include <mutex>
#include <set>
#include <tuple>

#include "fabula/error.hpp"
#include "fabula/util.hpp"
#include "json.hpp"

namespace fabula::pairing {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kMethodNames = {{
    {Method::Lexical, "lexical"},
    {Method::Semantic, "semantic"},
    {Method::Frame, "frame"},
    {Method::Shape, "shape"},
    {Method::Random, "random"},
}};

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

std::optional<Method> method_from(std::string_view name) {
  for (const auto& [method, text] : kMethodNames) {
    if (text == name) return method;
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void missing(Method method, const std::string& story_id,
                          const char* what) {
  fail(Errc::missing_resource, std::string(to_string(method)) +
                                   " method: story \"" + story_id +
                                   "\" has no " + what);
}

// Larger is better; the natural score kept for the pair record may differ
// (frame keeps the distance itself).
struct Ranked {
  size_t index;
  double rank;
  std::optional<double> score;
};

Ranked rank_candidate(const StoryResources& r, Method method, size_t query,
                      size_t cand) {
  const std::string& qid = r.story(query).id;
  const std::string& cid = r.story(cand).id;
  switch (method) {
    case Method::Lexical: {
      const auto& qv = r.lexical_vector(query);
      const auto& cv = r.lexical_vector(cand);
      if (!qv) missing(method, qid, "lexical document vector");
      if (!cv) missing(method, cid, "lexical document vector");
      double s = textsim::cosine(*qv, *cv);
      return {cand, s, s};
    }
    case Method::Semantic: {
      const auto& qv = r.semantic_vector(query);
      const auto& cv = r.semantic_vector(cand);
      if (!qv) missing(method, qid, "document vector");
      if (!cv) missing(method, cid, "document vector");
      double s = textsim::cosine(*qv, *cv);
      return {cand, s, s};
    }
    case Method::Frame: {
      const frames::FrameSeq* qs = r.frame_seq(query);
      const frames::FrameSeq* cs = r.frame_seq(cand);
      if (!qs) missing(method, qid, "frame sequence");
      if (!cs) missing(method, cid, "frame sequence");
      double d = frames::scaled_frame_distance(*qs, *cs);
      return {cand, -d, d};
    }
    case Method::Shape: {
      const auto& qp = r.arc_profile(query);
      const auto& cp = r.arc_profile(cand);
      if (!qp) missing(method, qid, "arc profile");
      if (!cp) missing(method, cid, "arc profile");
      bool agree = shapes::shape_agreement(*qp, *cp);
      return {cand, agree ? 1.0 : 0.0, std::nullopt};
    }
    case Method::Random:
      break;
  }
  fail(Errc::config_error, "random is not a nearest-neighbor method");
}

}  // namespace

std::vector<StoryPair> k_nearest_by_method(const StoryResources& r,
                                           const std::string& query_id,
                                           Method method, size_t k) {
  if (r.size() < 2) fail(Errc::too_few_stories, "need at least 2 stories");
  size_t query = r.require(query_id);
  std::vector<Ranked> ranked;
  ranked.reserve(r.size() - 1);
  for (size_t cand = 0; cand < r.size(); ++cand) {
    if (cand == query) continue;
    ranked.push_back(rank_candidate(r, method, query, cand));
  }
  std::sort(ranked.begin(), ranked.end(), [&](const Ranked& x, const Ranked& y) {
    if (x.rank != y.rank) return x.rank > y.rank;
    return r.story(x.index).id < r.story(y.index).id;
  });
  std::vector<StoryPair> out;
  for (size_t i = 0; i < ranked.size() && i < k; ++i) {
    out.push_back(StoryPair{query_id, r.story(ranked[i].index).id, method,
                            ranked[i].score});
  }
  return out;
}

StoryPair nearest_by_method(const StoryResources& r, const std::string& query_id,
                            Method method) {
  return k_nearest_by_method(r, query_id, method, 1).front();
}

PairSet generate_pairs(const StoryResources& r, const GenerateOptions& options) {
  if (r.size() < 2) fail(Errc::too_few_stories, "need at least 2 stories");
  PairSet set;
  set.seed = options.seed;
  Rng root(options.seed);

  for (Method method : options.methods) {
    if (method == Method::Random) {
      size_t n = r.size();
      size_t per_story = options.random_per_story;
      if (options.random_total) {
        per_story = (*options.random_total + n - 1) / n;
      }
      per_story = std::min(per_story, n - 1);
      // Draw each story's distinct partners from a stream derived from
      // (seed, story id); parallel and serial runs agree by construction.
      std::vector<std::vector<size_t>> picks(n);
      for (size_t i = 0; i < n; ++i) {
        Rng rng = root.derive("random-partner:" + r.story(i).id);
        std::vector<size_t> candidates;
        candidates.reserve(n - 1);
        for (size_t c = 0; c < n; ++c) {
          if (c != i) candidates.push_back(c);
        }
        for (size_t j = 0; j < per_story; ++j) {
          size_t pick = j + rng.next_below(candidates.size() - j);
          std::swap(candidates[j], candidates[pick]);
          picks[i].push_back(candidates[j]);
        }
      }
      size_t cap = options.random_total.value_or(per_story * n);
      size_t emitted = 0;
      for (size_t round = 0; round < per_story && emitted < cap; ++round) {
        for (size_t i = 0; i < n && emitted < cap; ++i) {
          if (round >= picks[i].size()) continue;
          set.pairs.push_back(StoryPair{r.story(i).id,
                                        r.story(picks[i][round]).id,
                                        Method::Random,
                                        {}});
          ++emitted;
        }
      }
      continue;
    }
    // One slot per story so the parallel split cannot reorder results.
    std::vector<std::vector<StoryPair>> slots(r.size());
    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(r.size(), [&](size_t first, size_t last) {
      for (size_t i = first; i < last; ++i) {
        try {
          slots[i] = k_nearest_by_method(r, r.story(i).id, method, options.top_k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
    if (first_error) std::rethrow_exception(first_error);
    for (auto& slot : slots) {
      for (StoryPair& p : slot) set.pairs.push_back(std::move(p));
    }
  }
  return set;
}

PairSet dedup(const PairSet& set) {
  PairSet out;
  out.seed = set.seed;
  out.deduped = true;
  std::set<std::tuple<Method, std::string, std::string>> seen;
  for (const StoryPair& p : set.pairs) {
    auto key = p.story_a <= p.story_b
                   ? std::make_tuple(p.method, p.story_a, p.story_b)
                   : std::make_tuple(p.method, p.story_b, p.story_a);
    if (seen.insert(key).second) out.pairs.push_back(p);
  }
  return out;
}

std::vector<StoryPair> load_pairs(const std::string& path) {
  std::vector<StoryPair> pairs;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty()) return;
    json j = json::parse(line, nullptr, false);
    auto bad = [&](const std::string& why) {
      fail(Errc::malformed_record,
           path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (j.is_discarded() || !j.is_object()) bad("not a JSON object");
    for (const char* field : {"story_a", "story_b", "method"}) {
      if (!j.contains(field) || !j[field].is_string()) {
        bad(std::string("missing string field \"") + field + "\"");
      }
    }
    auto method = method_from(j["method"].get<std::string>());
    if (!method) bad("unknown method \"" + j["method"].get<std::string>() + "\"");
    StoryPair p;
    p.story_a = j["story_a"].get<std::string>();
    p.story_b = j["story_b"].get<std::string>();
    p.method = *method;
    if (j.contains("score") && !j["score"].is_null()) {
      if (!j["score"].is_number()) bad("score must be a number or null");
      p.score = j["score"].get<double>();
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

void save_pairs(const PairSet& set, const std::string& path) {
  std::string out;
  for (const StoryPair& p : set.pairs) {
    ordered_json j;
    j["story_a"] = p.story_a;
    j["story_b"] = p.story_b;
    j["method"] = std::string(to_string(p.method));
    if (p.score) {
      j["score"] = *p.score;
    } else {
      j["score"] = nullptr;
    }
    j["seed"] = set.seed;
    out += j.dump();
    out += "\n";
  }
  write_file(path, out);
}

MethodReport score_methods(
    const PairSet& set, const std::vector<corpus::PairAnnotation>& annotations,
    const std::map<std::string, shapes::ArcProfile>* profiles) {
  // Unordered id set -> generating methods.
  std::map<std::pair<std::string, std::string>, std::set<Method>> generated;
  for (const StoryPair& p : set.pairs) {
    auto key = p.story_a <= p.story_b ? std::make_pair(p.story_a, p.story_b)
                                      : std::make_pair(p.story_b, p.story_a);
    generated[key].insert(p.method);
  }

  std::set<corpus::AnalogyDimension> dims_seen;
  for (const corpus::PairAnnotation& a : annotations) {
    for (const auto& [dim, value] : a.labels) dims_seen.insert(dim);
  }

  struct Tally {
    size_t pairs = 0;
    double positive_sum = 0.0;
    std::map<corpus::AnalogyDimension, std::pair<size_t, size_t>> dim;  // pos, den
    size_t sss_agree = 0;
    size_t sss_total = 0;
  };
  std::map<Method, Tally> tallies;

  MethodReport report;
  for (const corpus::PairAnnotation& a : annotations) {
    auto key = a.story_a <= a.story_b ? std::make_pair(a.story_a, a.story_b)
                                      : std::make_pair(a.story_b, a.story_a);
    auto it = generated.find(key);
    if (it == generated.end()) {
      ++report.unmatched_annotations;
      continue;
    }
    ++report.matched_annotations;
    size_t positives = 0;
    for (const auto& [dim, value] : a.labels) positives += value;

    std::optional<bool> agree;
    if (profiles) {
      auto pa = profiles->find(a.story_a);
      auto pb = profiles->find(a.story_b);
      if (pa != profiles->end() && pb != profiles->end()) {
        agree = shapes::shape_agreement(pa->second, pb->second);
      }
    }

    for (Method m : it->second) {
      Tally& t = tallies[m];
      ++t.pairs;
      t.positive_sum += static_cast<double>(positives);
      for (const auto& [dim, value] : a.labels) {
        auto& [pos, den] = t.dim[dim];
        pos += value;
        den += 1;
      }
      if (agree) {
        t.sss_agree += *agree;
        ++t.sss_total;
      }
    }
  }

  if (report.matched_annotations == 0) {
    fail(Errc::no_annotated_pairs,
         "no annotation matches a generated pair by unordered id");
  }

  for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
    if (dims_seen.contains(dim)) report.dims_present.push_back(dim);
  }

  for (const auto& [method, name] : kMethodNames) {
    auto it = tallies.find(method);
    if (it == tallies.end()) continue;
    const Tally& t = it->second;
    MethodScore score;
    score.method = method;
    score.annotated_pairs = t.pairs;
    score.method_average = t.positive_sum / static_cast<double>(t.pairs);
    for (corpus::AnalogyDimension dim : report.dims_present) {
      auto dit = t.dim.find(dim);
      if (dit == t.dim.end() || dit->second.second == 0) {
        score.dimension_rate[dim] = {0.0, false};
      } else {
        score.dimension_rate[dim] = {static_cast<double>(dit->second.first) /
                                         static_cast<double>(dit->second.second),
                                     true};
      }
    }
    if (t.sss_total > 0) {
      score.shape_agreement_rate = {static_cast<double>(t.sss_agree) /
                                        static_cast<double>(t.sss_total),
                                    true};
    }
    report.methods.push_back(std::move(score));
  }
  return report;
}

}  // namespace fabula::pairing
