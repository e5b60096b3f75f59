#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fabula/error.hpp"
#include "fabula/metrics.hpp"
#include "fabula/util.hpp"

using namespace fabula;
using namespace fabula::metrics;
using corpus::AnalogyDimension;
using corpus::PairAnnotation;
using corpus::Rating;
using corpus::RatingSet;

namespace {

RatingSet make_rater(const std::string& id, AnalogyDimension dim,
                     const std::vector<bool>& values) {
  RatingSet r{id, {}};
  for (size_t i = 0; i < values.size(); ++i) {
    r.items.push_back(Rating{"p" + std::to_string(i), dim, values[i]});
  }
  return r;
}

PairAnnotation annotation(const std::string& id,
                          const std::vector<bool>& labels7) {
  PairAnnotation a;
  a.pair_id = id;
  a.story_a = id + "_a";
  a.story_b = id + "_b";
  for (size_t i = 0; i < corpus::all_dimensions().size(); ++i) {
    a.labels[corpus::all_dimensions()[i]] = labels7[i];
  }
  return a;
}

}  // namespace

TEST_CASE("cohen_kappa reproduces the hand-computed fixtures exactly") {
  std::vector<bool> base = {true, true, false, false};
  auto perfect = cohen_kappa(base, base);
  CHECK(perfect.defined);
  CHECK(std::abs(perfect.value - 1.0) <= 1e-12);

  auto zero = cohen_kappa(base, {true, false, true, false});
  CHECK(zero.defined);
  CHECK(std::abs(zero.value - 0.0) <= 1e-12);

  auto negative = cohen_kappa(base, {false, false, true, true});
  CHECK(negative.defined);
  CHECK(std::abs(negative.value - (-1.0)) <= 1e-12);
}

TEST_CASE("cohen_kappa flags degenerate marginals") {
  auto equal_constant = cohen_kappa({true, true, true}, {true, true, true});
  CHECK(equal_constant.defined);
  CHECK(equal_constant.value == 1.0);

  // Constant but opposite raters: pe = 0, kappa defined and -? po = 0.
  auto opposite = cohen_kappa({true, true}, {false, false});
  CHECK(opposite.defined);
  CHECK(opposite.value == doctest::Approx(0.0));
}

TEST_CASE("cohen_kappa over rating sets aligns items by pair id") {
  auto a = make_rater("1", AnalogyDimension::RA, {true, true, false, false});
  auto b = make_rater("2", AnalogyDimension::RA, {true, false, true, false});
  auto k = cohen_kappa(a, b, AnalogyDimension::RA);
  CHECK(k.defined);
  CHECK(std::abs(k.value) <= 1e-12);

  // Symmetry in the raters.
  auto k2 = cohen_kappa(b, a, AnalogyDimension::RA);
  CHECK(k.value == k2.value);

  auto shorter = make_rater("3", AnalogyDimension::RA, {true, false});
  try {
    cohen_kappa(a, shorter, AnalogyDimension::RA);
    FAIL("expected ItemMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::item_mismatch);
  }
  try {
    cohen_kappa(a, b, AnalogyDimension::LS);
    FAIL("expected EmptyItems");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_items);
  }
}

TEST_CASE("accuracy follows the confusion counts") {
  CHECK(accuracy({5, 0, 0, 5}) == 1.0);
  CHECK(accuracy({2, 3, 3, 2}) == doctest::Approx(0.4).epsilon(1e-12));
  try {
    accuracy({0, 0, 0, 0});
    FAIL("expected EmptyCounts");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_counts);
  }
}

TEST_CASE("f1 is the positive-class harmonic mean with degenerate rules") {
  CHECK(f1({2, 1, 1, 0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(f1({5, 0, 0, 5}) == 1.0);
  CHECK(f1({0, 5, 0, 5}) == 0.0);

  auto undefined = f1_flagged({0, 0, 0, 7});
  CHECK_FALSE(undefined.defined);
  CHECK(undefined.value == 0.0);
  auto defined_zero = f1_flagged({0, 2, 1, 7});
  CHECK(defined_zero.defined);
  CHECK(defined_zero.value == 0.0);
}

TEST_CASE("accuracy and f1 stay in [0,1] for random counts") {
  Rng rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionCounts c{rng.next_below(20), rng.next_below(20), rng.next_below(20),
                      rng.next_below(20)};
    if (c.total() == 0) continue;
    double a = accuracy(c);
    double f = f1(c);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
}

TEST_CASE("pearson matches the hand computations") {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<double> y = {2, 4, 6, 8};
  CHECK(pearson(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> neg = {-1, -2, -3, -4};
  CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));

  std::vector<double> a = {0, 0, 1, 1};
  std::vector<double> b = {0, 1, 0, 1};
  CHECK(pearson(a, b) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  try {
    pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::zero_variance);
  }
}

TEST_CASE("pearson is invariant under positive affine transforms") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 3 + rng.next_below(10);
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = rng.next_unit() * 10;
      y[i] = rng.next_unit() * 10;
    }
    x[0] += 1;  // guard against constant series
    y[0] += 2;
    double base = pearson(x, y);
    double alpha = 0.5 + rng.next_unit() * 3;
    double beta = rng.next_unit() * 5 - 2.5;
    std::vector<double> tx = x;
    for (double& v : tx) v = alpha * v + beta;
    CHECK(pearson(tx, y) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("correlation_matrix flags constant columns and matches pearson") {
  std::vector<PairAnnotation> annotations = {
      annotation("p1", {true, true, false, true, false, false, true}),
      annotation("p2", {true, false, true, false, false, true, false}),
      annotation("p3", {true, true, true, true, false, false, true}),
      annotation("p4", {true, false, false, false, false, true, false}),
  };
  auto m = correlation_matrix(annotations);
  REQUIRE(m.dims.size() == 7);

  // SAA (index 0) and SA (index 4) are constant: undefined everywhere.
  for (size_t j = 0; j < 7; ++j) {
    CHECK_FALSE(m.at(0, j).defined);
    CHECK_FALSE(m.at(4, j).defined);
  }
  // DAA (1) equals LS (6) across pairs: correlation 1.
  CHECK(m.at(1, 6).defined);
  CHECK(m.at(1, 6).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.at(1, 1).value == doctest::Approx(1.0).epsilon(1e-12));

  // Internal consistency with direct pearson calls.
  std::vector<double> daa, mp;
  for (const auto& a : annotations) {
    daa.push_back(*a.label(AnalogyDimension::DAA) ? 1.0 : 0.0);
    mp.push_back(*a.label(AnalogyDimension::MP) ? 1.0 : 0.0);
  }
  CHECK(m.at(1, 5).value == pearson(daa, mp));

  // Symmetry.
  for (size_t i = 0; i < 7; ++i) {
    for (size_t j = 0; j < 7; ++j) {
      CHECK(m.at(i, j).defined == m.at(j, i).defined);
      CHECK(m.at(i, j).value == m.at(j, i).value);
    }
  }

  CHECK_THROWS_AS(correlation_matrix({annotations[0]}), Error);
}

TEST_CASE("iaa_report covers every rater pair and dimension") {
  auto r1 = make_rater("1", AnalogyDimension::SAA, {true, false, true, false});
  auto r2 = make_rater("2", AnalogyDimension::SAA, {true, false, true, false});
  auto r3 = make_rater("3", AnalogyDimension::SAA, {false, true, false, true});
  auto report = iaa_report({r1, r2, r3});
  CHECK(report.raters.size() == 3);
  CHECK(report.cells.size() == 3 * 7);  // 3 rater pairs x 7 dimensions

  // Identical raters agree perfectly on SAA; other dimensions are empty.
  const IaaCell& first = report.cells.front();
  CHECK(first.rater_a == "1");
  CHECK(first.rater_b == "2");
  CHECK(first.dimension == AnalogyDimension::SAA);
  CHECK(first.kappa.defined);
  CHECK(first.kappa.value == doctest::Approx(1.0));

  // 1 vs 3 disagree everywhere with balanced marginals: kappa -1.
  const IaaCell& opposed = report.cells[7];
  CHECK(opposed.rater_b == "3");
  CHECK(opposed.kappa.value == doctest::Approx(-1.0));

  // Unrated dimensions carry an error note instead of a number.
  bool saw_empty_note = false;
  for (const auto& cell : report.cells) {
    if (cell.dimension != AnalogyDimension::SAA) {
      CHECK_FALSE(cell.kappa.defined);
      saw_empty_note |= !cell.note.empty();
    }
  }
  CHECK(saw_empty_note);

  CHECK_THROWS_AS(iaa_report({r1}), Error);
}

TEST_CASE("kappa is symmetric and self-perfect on random ratings") {
  Rng rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng.next_below(12);
    std::vector<bool> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = rng.next_below(2);
      b[i] = rng.next_below(2);
    }
    auto ab = cohen_kappa(a, b);
    auto ba = cohen_kappa(b, a);
    CHECK(ab.defined == ba.defined);
    CHECK(ab.value == ba.value);

    auto self = cohen_kappa(a, a);
    CHECK(self.defined);
    CHECK(self.value == 1.0);
  }
}

TEST_CASE("half disagreement with balanced marginals gives kappa zero") {
  auto a = make_rater("a", AnalogyDimension::MP, {true, true, false, false});
  auto b = make_rater("b", AnalogyDimension::MP, {true, false, true, false});
  auto k = cohen_kappa(a, b, AnalogyDimension::MP);
  CHECK(k.defined);
  CHECK(k.value == doctest::Approx(0.0));
}
