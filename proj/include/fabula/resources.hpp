#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fabula/corpus.hpp"
#include "fabula/frames.hpp"
#include "fabula/shapes.hpp"
#include "fabula/textsim.hpp"

namespace fabula {

// Everything the similarity methods and pair features need, computed once per
// corpus. Entries are std::nullopt / nullptr where the backing resource is
// unavailable for a story; consumers decide whether that is an error.
struct ResourceOptions {
  const textsim::EmbeddingProvider* word_provider = nullptr;
  const textsim::EmbeddingProvider* doc_provider = nullptr;
  const std::vector<frames::FrameSeq>* frame_seqs = nullptr;
  const corpus::HedonometerLexicon* lexicon = nullptr;
  const std::set<std::string>* stoplist = nullptr;
  shapes::ShapeParams shape_params;
};

class StoryResources {
 public:
  static StoryResources build(const std::vector<corpus::Story>& stories,
                              const ResourceOptions& options);

  const std::vector<corpus::Story>& stories() const { return *stories_; }
  size_t size() const { return stories_->size(); }
  size_t require(const std::string& id) const;  // UnknownStoryId
  std::optional<size_t> find(const std::string& id) const;

  const corpus::Story& story(size_t i) const { return (*stories_)[i]; }
  const textsim::TokenStream& tokens(size_t i) const { return tokens_[i]; }
  const std::optional<std::vector<double>>& lexical_vector(size_t i) const {
    return lexical_vectors_[i];
  }
  const std::optional<std::vector<double>>& semantic_vector(size_t i) const {
    return semantic_vectors_[i];
  }
  const std::optional<std::vector<double>>& moral_vector(size_t i) const {
    return moral_vectors_[i];
  }
  const frames::FrameSeq* frame_seq(size_t i) const { return frame_seqs_[i]; }
  const std::optional<shapes::ArcProfile>& arc_profile(size_t i) const {
    return arc_profiles_[i];
  }

  bool synthetic_embeddings() const { return synthetic_embeddings_; }
  bool has_frames() const { return has_frames_; }
  bool has_profiles() const { return has_profiles_; }

 private:
  const std::vector<corpus::Story>* stories_ = nullptr;
  std::unordered_map<std::string, size_t> index_;
  std::vector<textsim::TokenStream> tokens_;
  std::vector<std::optional<std::vector<double>>> lexical_vectors_;
  std::vector<std::optional<std::vector<double>>> semantic_vectors_;
  std::vector<std::optional<std::vector<double>>> moral_vectors_;
  std::vector<const frames::FrameSeq*> frame_seqs_;
  std::vector<std::optional<shapes::ArcProfile>> arc_profiles_;
  bool synthetic_embeddings_ = false;
  bool has_frames_ = false;
  bool has_profiles_ = false;
};

}  // namespace fabula
