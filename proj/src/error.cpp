#include "fabula/error.hpp"

namespace fabula {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::unknown_tag: return "UnknownTag";
    case Errc::unknown_story: return "UnknownStoryId";
    case Errc::missing_dimension: return "MissingDimension";
    case Errc::constraint_violation: return "ConstraintViolation";
    case Errc::negated_triple: return "NegatedTriple";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::word_not_in_doc: return "WordNotInDoc";
    case Errc::no_known_tokens: return "NoKnownTokens";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::no_scored_tokens: return "NoScoredTokens";
    case Errc::empty_series: return "EmptySeries";
    case Errc::parameter_mismatch: return "ParameterMismatch";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::empty_tag: return "EmptyTag";
    case Errc::missing_resource: return "MissingResource";
    case Errc::too_few_stories: return "TooFewStories";
    case Errc::no_annotated_pairs: return "NoAnnotatedPairs";
    case Errc::single_class: return "SingleClass";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::insufficient_positives: return "InsufficientPositives";
    case Errc::insufficient_negatives: return "InsufficientNegatives";
    case Errc::empty_counts: return "EmptyCounts";
    case Errc::item_mismatch: return "ItemMismatch";
    case Errc::empty_items: return "EmptyItems";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::too_few_annotations: return "TooFewAnnotations";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace fabula
