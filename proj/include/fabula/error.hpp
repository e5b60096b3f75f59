#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fabula {

// One code per failure mode named in the module contracts. Loaders report
// per-record problems as corpus::Violation values instead of throwing; these
// codes cover the hard failures.
enum class Errc {
  malformed_record,
  duplicate_id,
  unknown_tag,
  unknown_story,
  missing_dimension,
  constraint_violation,
  negated_triple,
  empty_corpus,
  word_not_in_doc,
  no_known_tokens,
  dimension_mismatch,
  zero_vector,
  no_scored_tokens,
  empty_series,
  parameter_mismatch,
  empty_reference,
  empty_tag,
  missing_resource,
  too_few_stories,
  no_annotated_pairs,
  single_class,
  insufficient_data,
  insufficient_positives,
  insufficient_negatives,
  empty_counts,
  item_mismatch,
  empty_items,
  zero_variance,
  length_mismatch,
  too_few_annotations,
  config_error,
  io_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fabula
