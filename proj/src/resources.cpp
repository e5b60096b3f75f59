#include "fabula/resources.hpp"

#include "fabula/error.hpp"

namespace fabula {

StoryResources StoryResources::build(const std::vector<corpus::Story>& stories,
                                     const ResourceOptions& options) {
  StoryResources r;
  r.stories_ = &stories;
  size_t n = stories.size();
  r.tokens_.resize(n);
  r.lexical_vectors_.resize(n);
  r.semantic_vectors_.resize(n);
  r.moral_vectors_.resize(n);
  r.frame_seqs_.assign(n, nullptr);
  r.arc_profiles_.resize(n);

  for (size_t i = 0; i < n; ++i) {
    const std::string& id = stories[i].id;
    if (!r.index_.emplace(id, i).second) {
      fail(Errc::duplicate_id, "duplicate story id \"" + id + "\"");
    }
    r.tokens_[i] = textsim::tokenize(stories[i].text);
  }

  // Similarity docs: tokens after the optional stoplist.
  std::vector<textsim::TokenStream> docs(n);
  for (size_t i = 0; i < n; ++i) {
    docs[i] = options.stoplist
                  ? textsim::apply_stoplist(r.tokens_[i], *options.stoplist)
                  : r.tokens_[i];
  }

  if (options.word_provider && n > 0) {
    textsim::TfIdfModel text_model = textsim::fit_tfidf(docs);
    for (size_t i = 0; i < n; ++i) {
      try {
        r.lexical_vectors_[i] = textsim::embed_document_weighted(
            docs[i], *options.word_provider, text_model);
      } catch (const Error& e) {
        if (e.code() != Errc::no_known_tokens) throw;
      }
    }

    std::vector<textsim::TokenStream> moral_docs;
    std::vector<size_t> moral_story;
    for (size_t i = 0; i < n; ++i) {
      if (!stories[i].moral) continue;
      auto toks = textsim::tokenize(*stories[i].moral);
      if (options.stoplist) toks = textsim::apply_stoplist(toks, *options.stoplist);
      if (toks.empty()) continue;
      moral_docs.push_back(std::move(toks));
      moral_story.push_back(i);
    }
    if (!moral_docs.empty()) {
      textsim::TfIdfModel moral_model = textsim::fit_tfidf(moral_docs);
      for (size_t k = 0; k < moral_docs.size(); ++k) {
        try {
          r.moral_vectors_[moral_story[k]] = textsim::embed_document_weighted(
              moral_docs[k], *options.word_provider, moral_model);
        } catch (const Error& e) {
          if (e.code() != Errc::no_known_tokens) throw;
        }
      }
    }
    r.synthetic_embeddings_ |= options.word_provider->synthetic();
  }

  if (options.doc_provider) {
    for (size_t i = 0; i < n; ++i) {
      r.semantic_vectors_[i] = options.doc_provider->lookup(stories[i].id);
    }
    r.synthetic_embeddings_ |= options.doc_provider->synthetic();
  }

  if (options.frame_seqs) {
    r.has_frames_ = true;
    std::unordered_map<std::string, const frames::FrameSeq*> by_id;
    for (const frames::FrameSeq& seq : *options.frame_seqs) {
      by_id[seq.story_id] = &seq;
    }
    for (size_t i = 0; i < n; ++i) {
      auto it = by_id.find(stories[i].id);
      if (it != by_id.end()) r.frame_seqs_[i] = it->second;
    }
  }

  if (options.lexicon) {
    r.has_profiles_ = true;
    for (size_t i = 0; i < n; ++i) {
      try {
        r.arc_profiles_[i] =
            shapes::arc_profile(stories[i], *options.lexicon, options.shape_params);
      } catch (const Error& e) {
        if (e.code() != Errc::no_scored_tokens) throw;
      }
    }
  }

  return r;
}

size_t StoryResources::require(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    fail(Errc::unknown_story, "story id \"" + id + "\" not in corpus");
  }
  return it->second;
}

std::optional<size_t> StoryResources::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace fabula
