#pragma once

#include <span>
#include <string>
#include <vector>

#include "fabula/corpus.hpp"

namespace fabula::metrics {

struct ConfusionCounts {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  size_t tn = 0;

  size_t total() const { return tp + fp + fn + tn; }
};

// A statistic that may be undefined on degenerate input; undefined cells are
// flagged, never silently zeroed.
struct Flagged {
  double value = 0.0;
  bool defined = true;
};

double accuracy(const ConfusionCounts& c);

// Positive-class F1: 2tp/(2tp+fp+fn); 0 when tp=0 with errors present.
double f1(const ConfusionCounts& c);
// Same value, but flags the tp=fp=fn=0 case as undefined.
Flagged f1_flagged(const ConfusionCounts& c);

// Binary Cohen kappa over aligned item vectors.
Flagged cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

// Kappa between two raters over one dimension; both must have rated the same
// non-empty pair_id set for that dimension.
Flagged cohen_kappa(const corpus::RatingSet& a, const corpus::RatingSet& b,
                    corpus::AnalogyDimension dimension);

double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<corpus::AnalogyDimension> dims;
  std::vector<Flagged> cells;  // row-major dims x dims

  const Flagged& at(size_t i, size_t j) const { return cells[i * dims.size() + j]; }
};

// Pairwise Pearson over the 0/1 label columns; constant columns yield
// undefined cells.
CorrelationMatrix correlation_matrix(
    const std::vector<corpus::PairAnnotation>& annotations);

struct IaaCell {
  std::string rater_a;
  std::string rater_b;
  corpus::AnalogyDimension dimension;
  Flagged kappa;
  std::string note;  // non-empty when the cell could not be computed
};

struct IaaReport {
  std::vector<std::string> raters;
  std::vector<IaaCell> cells;  // rater pairs x dimensions, canonical order
};

IaaReport iaa_report(const std::vector<corpus::RatingSet>& ratings);

}  // namespace fabula::metrics
