#include "doctest.h"

#include <functional>
#include <map>

#include "fabula/error.hpp"
#include "fabula/frames.hpp"
#include "fabula/util.hpp"
#include "test_util.hpp"

using namespace fabula;
using namespace fabula::frames;
using testutil::TempDir;
using testutil::fixture;
using testutil::write_text;

namespace {

using Seq = std::vector<std::string>;

// Plain recursive Levenshtein with memoization; the test-side oracle.
size_t oracle_distance(const Seq& a, const Seq& b) {
  std::map<std::pair<size_t, size_t>, size_t> memo;
  std::function<size_t(size_t, size_t)> go = [&](size_t i, size_t j) -> size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    size_t best = std::min(go(i + 1, j), go(i, j + 1)) + 1;
    best = std::min(best, go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

Seq random_seq(Rng& rng, size_t max_len, size_t alphabet) {
  Seq out;
  size_t len = rng.next_below(max_len + 1);
  for (size_t i = 0; i < len; ++i) {
    out.push_back(std::string(1, static_cast<char>('A' + rng.next_below(alphabet))));
  }
  return out;
}

}  // namespace

TEST_CASE("load_frames reads one sequence per story") {
  auto seqs = load_frames(fixture("frames.jsonl"));
  REQUIRE(seqs.size() == 12);
  CHECK(seqs[0].story_id == "f01");
  CHECK(seqs[0].frames.front() == "Desiring");

  TempDir dir("frames");
  auto path = write_text(dir, "f.jsonl",
                         R"({"id":"f1","frames":["Travel","Collaboration"]})" "\n"
                         R"({"id":"f2","frames":[]})" "\n");
  auto loaded = load_frames(path);
  CHECK(loaded[0].frames == Seq{"Travel", "Collaboration"});
  CHECK(loaded[1].frames.empty());  // empty sequences are allowed

  auto dup = write_text(dir, "d.jsonl",
                        R"({"id":"f1","frames":[]})" "\n"
                        R"({"id":"f1","frames":["X"]})" "\n");
  try {
    load_frames(dup);
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::duplicate_id);
  }

  auto empty_label = write_text(dir, "e.jsonl", R"({"id":"f1","frames":[""]})" "\n");
  CHECK_THROWS_AS(load_frames(empty_label), Error);
}

TEST_CASE("edit_distance handles the hand-worked cases") {
  CHECK(edit_distance(Seq{"A", "B", "C"}, Seq{"A", "B", "C"}) == 0);
  CHECK(edit_distance(Seq{"A", "B", "C"}, Seq{"A", "C"}) == 1);
  CHECK(edit_distance(Seq{}, Seq{"A", "B"}) == 2);
  CHECK(edit_distance(Seq{"A", "B"}, Seq{}) == 2);
  CHECK(edit_distance(Seq{"A", "B"}, Seq{"B", "A"}) == 2);
}

TEST_CASE("edit_distance matches an independent oracle and is a metric") {
  Rng rng(41);
  std::vector<Seq> seqs;
  for (int i = 0; i < 40; ++i) seqs.push_back(random_seq(rng, 8, 4));
  std::vector<std::vector<size_t>> d(seqs.size(), std::vector<size_t>(seqs.size()));
  for (size_t i = 0; i < seqs.size(); ++i) {
    for (size_t j = 0; j < seqs.size(); ++j) {
      d[i][j] = edit_distance(seqs[i], seqs[j]);
      CHECK(d[i][j] == oracle_distance(seqs[i], seqs[j]));
    }
  }
  for (size_t i = 0; i < seqs.size(); ++i) {
    for (size_t j = 0; j < seqs.size(); ++j) {
      CHECK((d[i][j] == 0) == (seqs[i] == seqs[j]));
      CHECK(d[i][j] == d[j][i]);
      for (size_t k = 0; k < seqs.size(); ++k) {
        CHECK(d[i][k] <= d[i][j] + d[j][k]);
      }
    }
  }
}

TEST_CASE("scaled_frame_distance filters the candidate and normalizes") {
  FrameSeq a{"a", {"A", "B"}};
  FrameSeq b{"b", {"A", "C", "B"}};
  CHECK(scaled_frame_distance(a, b) == 0.0);  // b filters to [A, B]

  FrameSeq c{"c", {"A", "B", "C"}};
  FrameSeq empty{"e", {}};
  CHECK(scaled_frame_distance(c, empty) == 1.0);

  FrameSeq swapped{"s", {"B", "A"}};
  CHECK(scaled_frame_distance(a, swapped) == 1.0);  // two substitutions over 2

  try {
    scaled_frame_distance(empty, a);
    FAIL("expected EmptyReference");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_reference);
  }
}

TEST_CASE("scaled_frame_distance stays in [0,1] and is directional") {
  Rng rng(43);
  bool saw_asymmetry = false;
  for (int trial = 0; trial < 200; ++trial) {
    FrameSeq a{"a", random_seq(rng, 6, 3)};
    FrameSeq b{"b", random_seq(rng, 6, 3)};
    if (a.frames.empty() || b.frames.empty()) continue;
    double ab = scaled_frame_distance(a, b);
    double ba = scaled_frame_distance(b, a);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    saw_asymmetry |= ab != ba;
  }
  CHECK(saw_asymmetry);
}

TEST_CASE("a candidate interleaved with foreign labels is at distance zero") {
  FrameSeq a{"a", {"X", "Y", "Z"}};
  FrameSeq b{"b", {"Q", "X", "Q", "Y", "Q", "Z"}};
  CHECK(scaled_frame_distance(a, b) == 0.0);
}

TEST_CASE("frame_features counts unigrams and adjacent bigrams") {
  auto f = frame_features(FrameSeq{"s", {"A", "A", "B"}});
  CHECK(f.counts == std::map<std::string, size_t>{{"A", 2}, {"B", 1}});
  REQUIRE(f.bigram_counts.size() == 2);
  CHECK(f.bigram_counts.at({"A", "A"}) == 1);
  CHECK(f.bigram_counts.at({"A", "B"}) == 1);

  auto empty = frame_features(FrameSeq{"s", {}});
  CHECK(empty.counts.empty());
  CHECK(empty.bigram_counts.empty());

  auto restricted = frame_features(FrameSeq{"s", {"A", "B", "C"}},
                                   std::set<std::string>{"A", "C"});
  CHECK(restricted.counts == std::map<std::string, size_t>{{"A", 1}, {"C", 1}});
  CHECK(restricted.bigram_counts.empty());  // both bigrams touch B
}

TEST_CASE("frame feature count laws hold for arbitrary sequences") {
  Rng rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    FrameSeq seq{"s", random_seq(rng, 10, 4)};
    auto f = frame_features(seq);
    size_t unigram_total = 0, bigram_total = 0;
    for (const auto& [label, count] : f.counts) unigram_total += count;
    for (const auto& [pair, count] : f.bigram_counts) bigram_total += count;
    CHECK(unigram_total == seq.frames.size());
    CHECK(bigram_total == (seq.frames.empty() ? 0 : seq.frames.size() - 1));
  }
}

TEST_CASE("top_k_frames_per_tag ranks by count with lexicographic ties") {
  std::vector<corpus::Story> stories = {
      {"s1", "", "t", {}, {corpus::MoralTag::Greed}},
      {"s2", "", "t", {}, {corpus::MoralTag::Greed}},
      {"s3", "", "t", {}, {corpus::MoralTag::Trust}},
  };
  std::vector<FrameSeq> seqs = {
      {"s1", {"X", "X", "X", "Y", "Z"}},
      {"s2", {"X", "X", "Z", "Y"}},
      {"s3", {"Q"}},
  };
  auto top = top_k_frames_per_tag(stories, seqs, 2);
  // Greed counts: X 5, Y 2, Z 2 -> ties broken toward Y.
  CHECK(top.at(corpus::MoralTag::Greed) == Seq{"X", "Y"});
  CHECK(top.at(corpus::MoralTag::Trust) == Seq{"Q"});
  CHECK_FALSE(top.contains(corpus::MoralTag::Danger));

  auto all = top_k_frames_per_tag(stories, seqs, 10);
  CHECK(all.at(corpus::MoralTag::Greed) == Seq{"X", "Y", "Z"});

  std::vector<FrameSeq> missing = {{"s3", {"Q"}}};
  try {
    top_k_frames_per_tag(stories, missing, 2);
    FAIL("expected EmptyTag");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_tag);
  }
}
