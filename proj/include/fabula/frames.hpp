#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fabula/corpus.hpp"

namespace fabula::frames {

struct FrameSeq {
  std::string story_id;
  std::vector<std::string> frames;  // occurrence order

  bool operator==(const FrameSeq&) const = default;
};

std::vector<FrameSeq> load_frames(const std::string& path);

// Levenshtein distance over label sequences, unit costs, exact label equality.
size_t edit_distance(std::span<const std::string> a,
                     std::span<const std::string> b);

// Directional: b is filtered to labels occurring in a, then the distance is
// normalized by max(|a|, |b'|). a is the reference story and must be non-empty.
double scaled_frame_distance(const FrameSeq& a, const FrameSeq& b);

struct FrameFeatureVector {
  std::string story_id;
  std::map<std::string, size_t> counts;
  std::map<std::pair<std::string, std::string>, size_t> bigram_counts;
};

// Unigram and adjacent-bigram counts; with a vocabulary, unigrams outside it
// are dropped and a bigram survives only if both members are in it.
FrameFeatureVector frame_features(
    const FrameSeq& seq,
    const std::optional<std::set<std::string>>& vocabulary = std::nullopt);

// Most frequent k labels over the framed stories carrying each tag; ties break
// lexicographically. Tags with no tagged stories are absent from the result;
// a tag whose stories all lack frame records raises EmptyTag.
std::map<corpus::MoralTag, std::vector<std::string>> top_k_frames_per_tag(
    const std::vector<corpus::Story>& stories,
    const std::vector<FrameSeq>& frame_seqs, size_t k);

}  // namespace fabula::frames
