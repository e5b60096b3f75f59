#include "fabula/frames.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "fabula/error.hpp"
#include "fabula/util.hpp"
#include "json.hpp"

namespace fabula::frames {

using nlohmann::json;

std::vector<FrameSeq> load_frames(const std::string& path) {
  std::vector<FrameSeq> result;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](size_t lineno, const std::string& line) {
    if (trim(line).empty()) return;
    json j = json::parse(line, nullptr, false);
    auto bad = [&](const std::string& why) {
      fail(Errc::malformed_record,
           path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (j.is_discarded() || !j.is_object()) bad("not a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) bad("missing string field \"id\"");
    FrameSeq seq;
    seq.story_id = j["id"].get<std::string>();
    if (!seen.insert(seq.story_id).second) {
      fail(Errc::duplicate_id,
           path + ":" + std::to_string(lineno) + ": duplicate story id \"" +
               seq.story_id + "\"");
    }
    if (!j.contains("frames") || !j["frames"].is_array()) {
      bad("missing array field \"frames\"");
    }
    for (const auto& f : j["frames"]) {
      if (!f.is_string() || f.get<std::string>().empty()) {
        bad("frame labels must be non-empty strings");
      }
      seq.frames.push_back(f.get<std::string>());
    }
    result.push_back(std::move(seq));
  });
  return result;
}

size_t edit_distance(std::span<const std::string> a,
                     std::span<const std::string> b) {
  size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<size_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double scaled_frame_distance(const FrameSeq& a, const FrameSeq& b) {
  if (a.frames.empty()) {
    fail(Errc::empty_reference,
         "reference story \"" + a.story_id + "\" has no frames");
  }
  std::unordered_set<std::string_view> inventory;
  for (const std::string& f : a.frames) inventory.insert(f);
  std::vector<std::string> filtered;
  filtered.reserve(b.frames.size());
  for (const std::string& f : b.frames) {
    if (inventory.contains(f)) filtered.push_back(f);
  }
  size_t d = edit_distance(a.frames, filtered);
  size_t denom = std::max(a.frames.size(), filtered.size());
  return static_cast<double>(d) / static_cast<double>(denom);
}

FrameFeatureVector frame_features(
    const FrameSeq& seq, const std::optional<std::set<std::string>>& vocabulary) {
  FrameFeatureVector out;
  out.story_id = seq.story_id;
  auto in_vocab = [&](const std::string& f) {
    return !vocabulary || vocabulary->contains(f);
  };
  for (const std::string& f : seq.frames) {
    if (in_vocab(f)) ++out.counts[f];
  }
  for (size_t i = 0; i + 1 < seq.frames.size(); ++i) {
    const std::string& a = seq.frames[i];
    const std::string& b = seq.frames[i + 1];
    if (in_vocab(a) && in_vocab(b)) ++out.bigram_counts[{a, b}];
  }
  return out;
}

std::map<corpus::MoralTag, std::vector<std::string>> top_k_frames_per_tag(
    const std::vector<corpus::Story>& stories,
    const std::vector<FrameSeq>& frame_seqs, size_t k) {
  if (k < 1) fail(Errc::config_error, "k must be >= 1");
  std::unordered_map<std::string, const FrameSeq*> by_id;
  for (const FrameSeq& seq : frame_seqs) by_id[seq.story_id] = &seq;

  std::map<corpus::MoralTag, std::vector<std::string>> result;
  for (corpus::MoralTag tag : corpus::all_moral_tags()) {
    bool tag_in_use = false;
    bool any_framed = false;
    std::map<std::string, size_t> totals;
    for (const corpus::Story& s : stories) {
      if (!s.tags.contains(tag)) continue;
      tag_in_use = true;
      auto it = by_id.find(s.id);
      if (it == by_id.end()) continue;
      any_framed = true;
      for (const std::string& f : it->second->frames) ++totals[f];
    }
    if (!tag_in_use) continue;
    if (!any_framed) {
      fail(Errc::empty_tag, "tag " + std::string(corpus::to_string(tag)) +
                                " has no framed stories");
    }
    std::vector<std::pair<std::string, size_t>> ranked(totals.begin(), totals.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
    std::vector<std::string> top;
    for (size_t i = 0; i < ranked.size() && i < k; ++i) {
      top.push_back(ranked[i].first);
    }
    result[tag] = std::move(top);
  }
  return result;
}

}  // namespace fabula::frames
