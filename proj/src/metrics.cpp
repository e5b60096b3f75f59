#include "fabula/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fabula/error.hpp"

namespace fabula::metrics {

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) fail(Errc::empty_counts, "accuracy of empty counts");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double f1(const ConfusionCounts& c) { return f1_flagged(c).value; }

Flagged f1_flagged(const ConfusionCounts& c) {
  if (c.total() == 0) fail(Errc::empty_counts, "f1 of empty counts");
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) return {0.0, false};
  if (c.tp == 0) return {0.0, true};
  return {2.0 * static_cast<double>(c.tp) /
              static_cast<double>(2 * c.tp + c.fp + c.fn),
          true};
}

Flagged cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) {
    fail(Errc::item_mismatch, "rating vectors differ in length");
  }
  if (a.empty()) fail(Errc::empty_items, "kappa over zero items");
  double n = static_cast<double>(a.size());
  size_t agree = 0, a_pos = 0, b_pos = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    a_pos += a[i];
    b_pos += b[i];
  }
  double po = static_cast<double>(agree) / n;
  double pa = static_cast<double>(a_pos) / n;
  double pb = static_cast<double>(b_pos) / n;
  double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (std::abs(1.0 - pe) < 1e-15) {
    // Both raters constant and equal; agreement is either perfect or the
    // statistic is undefined.
    if (po == 1.0) return {1.0, true};
    return {0.0, false};
  }
  return {(po - pe) / (1.0 - pe), true};
}

Flagged cohen_kappa(const corpus::RatingSet& a, const corpus::RatingSet& b,
                    corpus::AnalogyDimension dimension) {
  auto items_of = [&](const corpus::RatingSet& r) {
    std::map<std::string, bool> out;
    for (const corpus::Rating& item : r.items) {
      if (item.dimension == dimension) out[item.pair_id] = item.value;
    }
    return out;
  };
  auto ia = items_of(a);
  auto ib = items_of(b);
  if (ia.empty() && ib.empty()) {
    fail(Errc::empty_items, "no ratings for dimension " +
                                std::string(corpus::to_string(dimension)));
  }
  if (ia.size() != ib.size() ||
      !std::equal(ia.begin(), ia.end(), ib.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    fail(Errc::item_mismatch,
         "raters " + a.rater_id + " and " + b.rater_id +
             " rated different item sets for " +
             std::string(corpus::to_string(dimension)));
  }
  std::vector<bool> va, vb;
  va.reserve(ia.size());
  vb.reserve(ib.size());
  for (const auto& [pair_id, value] : ia) {
    va.push_back(value);
    vb.push_back(ib.at(pair_id));
  }
  return cohen_kappa(va, vb);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    fail(Errc::length_mismatch, "pearson needs two equal-length series of >= 2");
  }
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(Errc::zero_variance, "pearson of a constant series");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(
    const std::vector<corpus::PairAnnotation>& annotations) {
  if (annotations.size() < 2) {
    fail(Errc::too_few_annotations, "correlation matrix needs >= 2 annotations");
  }
  CorrelationMatrix m;
  for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
    m.dims.push_back(dim);
  }
  size_t d = m.dims.size();
  m.cells.assign(d * d, Flagged{0.0, false});
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = i; j < d; ++j) {
      // Pairwise-complete: only annotations carrying both labels.
      std::vector<double> xi, xj;
      for (const corpus::PairAnnotation& a : annotations) {
        auto vi = a.label(m.dims[i]);
        auto vj = a.label(m.dims[j]);
        if (!vi || !vj) continue;
        xi.push_back(*vi ? 1.0 : 0.0);
        xj.push_back(*vj ? 1.0 : 0.0);
      }
      Flagged cell{0.0, false};
      if (xi.size() >= 2) {
        try {
          cell = {pearson(xi, xj), true};
        } catch (const Error& e) {
          if (e.code() != Errc::zero_variance) throw;
        }
      }
      m.cells[i * d + j] = cell;
      m.cells[j * d + i] = cell;
    }
  }
  return m;
}

IaaReport iaa_report(const std::vector<corpus::RatingSet>& ratings) {
  if (ratings.size() < 2) {
    fail(Errc::empty_items, "IAA needs at least two raters");
  }
  IaaReport report;
  for (const corpus::RatingSet& r : ratings) report.raters.push_back(r.rater_id);
  for (size_t i = 0; i < ratings.size(); ++i) {
    for (size_t j = i + 1; j < ratings.size(); ++j) {
      for (corpus::AnalogyDimension dim : corpus::all_dimensions()) {
        IaaCell cell;
        cell.rater_a = ratings[i].rater_id;
        cell.rater_b = ratings[j].rater_id;
        cell.dimension = dim;
        try {
          cell.kappa = cohen_kappa(ratings[i], ratings[j], dim);
          if (!cell.kappa.defined) cell.note = "degenerate-marginals";
        } catch (const Error& e) {
          cell.kappa = {0.0, false};
          cell.note = errc_name(e.code());
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

}  // namespace fabula::metrics
