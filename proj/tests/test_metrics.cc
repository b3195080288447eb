// Copyright 2026 The mtsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <random>

#include "fixtures.h"
#include "oracles.h"
#include "mtsim/arrange.h"
#include "mtsim/error.h"
#include "mtsim/metrics.h"

using namespace mtsim;

namespace {

Turn turn(std::string spk, double s, double e, std::string text) {
  return {std::move(spk), s, e, std::move(text)};
}

Tokens random_tokens(std::mt19937_64& gen, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  Tokens out(len(gen));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + sym(gen)));
  return out;
}

std::vector<Turn> random_orc_turns(std::mt19937_64& gen, std::size_t u) {
  std::uniform_real_distribution<double> start(0.0, 20.0);
  std::uniform_int_distribution<int> words(1, 10);
  std::vector<Turn> turns;
  for (std::size_t i = 0; i < u; ++i) {
    const double s = start(gen);
    turns.push_back(turn("S", s, s + 1.0, testing::random_text(words(gen), gen())));
  }
  return turns;
}

std::array<Tokens, 2> random_hyps(std::mt19937_64& gen, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  return {tokenize(testing::random_text(len(gen), gen())),
          tokenize(testing::random_text(len(gen), gen()))};
}

}  // namespace

TEST_CASE("word_edit_distance examples") {
  auto s = word_edit_distance(tokenize("a b c"), tokenize("a x c"));
  CHECK(s == EditStats{1, 0, 0, 2, 3});
  s = word_edit_distance(Tokens{}, tokenize("a b"));
  CHECK(s == EditStats{0, 2, 0, 0, 0});
  CHECK_FALSE(s.wer().has_value());
  s = word_edit_distance(tokenize("a b"), Tokens{});
  CHECK(s == EditStats{0, 0, 2, 0, 2});
  CHECK(*s.wer() == 1.0);
  CHECK(word_edit_distance(Tokens{}, Tokens{}) == EditStats{});
  // Equal cost: a sub+del or del+sub; the backtrace keeps the hit.
  s = word_edit_distance(tokenize("a b"), tokenize("b"));
  CHECK(s == EditStats{0, 0, 1, 1, 2});
}

TEST_CASE("word_edit_distance matches the recursive oracle") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t max_len = trial < 1500 ? 7 : 12;
    const Tokens a = random_tokens(gen, max_len, 3);
    const Tokens b = random_tokens(gen, max_len, 3);
    const auto s = word_edit_distance(a, b);
    REQUIRE(s.errors() == oracle::recursive_edit_distance(a, b));
    CHECK(s.hits + s.substitutions + s.deletions == static_cast<std::int64_t>(a.size()));
    CHECK(s.hits + s.substitutions + s.insertions == static_cast<std::int64_t>(b.size()));
  }
}

TEST_CASE("word_edit_distance properties") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tokens a = random_tokens(gen, 12, 4);
    const Tokens b = random_tokens(gen, 12, 4);
    const Tokens c = random_tokens(gen, 12, 4);
    CHECK(word_edit_distance(a, a).errors() == 0);
    const auto ab = word_edit_distance(a, b);
    const auto ba = word_edit_distance(b, a);
    CHECK(ab.errors() == ba.errors());
    CHECK(ab.errors() == oracle::levenshtein(a, b));
    CHECK(ab.insertions - ab.deletions == ba.deletions - ba.insertions);
    CHECK(ab.errors() <= word_edit_distance(a, c).errors() + word_edit_distance(c, b).errors());
  }
}

TEST_CASE("oed_wer") {
  auto r = oed_wer({tokenize("a b c"), tokenize("d e")}, {tokenize("d e"), tokenize("a b c")});
  CHECK(r.stats.errors() == 0);
  CHECK(r.permutation == std::vector<std::size_t>{1, 0});
  r = oed_wer({tokenize("a b c"), tokenize("d e")}, {tokenize("a b"), tokenize("d e")});
  CHECK(r.stats == EditStats{0, 0, 1, 4, 5});
  CHECK(*r.wer() == doctest::Approx(0.2));
  r = oed_wer({tokenize("x")}, {tokenize("x"), Tokens{}});
  CHECK(*r.wer() == 0.0);

  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nr = 1 + trial % 4;
    const std::size_t nh = 1 + (trial / 4) % 4;
    std::vector<Tokens> refs(nr), hyps(nh);
    for (auto& x : refs) x = random_tokens(gen, 8, 4);
    for (auto& x : hyps) x = random_tokens(gen, 8, 4);
    const auto got = oed_wer(refs, hyps);
    CHECK(got.stats.errors() == oracle::brute_force_oed(refs, hyps));
    std::int64_t identity = 0;
    for (std::size_t k = 0; k < std::max(nr, nh); ++k)
      identity += oracle::levenshtein(k < nr ? refs[k] : Tokens{}, k < nh ? hyps[k] : Tokens{});
    CHECK(got.stats.errors() <= identity);
  }
}

TEST_CASE("orc_wer examples") {
  const std::vector<Turn> turns = {turn("A", 0, 2, "hello world"), turn("B", 1, 4, "good morning"),
                                   turn("A", 3, 5, "bye")};
  const std::array<Tokens, 2> exact = {tokenize("hello world bye"), tokenize("good morning")};
  auto r = orc_wer(turns, exact);
  CHECK(r.stats.errors() == 0);
  CHECK(*r.wer() == 0.0);
  CHECK(r.assignment == std::vector<int>{0, 1, 0});
  CHECK(r.combinations_evaluated == 8);

  const std::array<Tokens, 2> typo = {tokenize("hello word bye"), tokenize("good morning")};
  r = orc_wer(turns, typo);
  CHECK(r.stats == EditStats{1, 0, 0, 4, 5});
  CHECK(*r.wer() == doctest::Approx(0.2));
  CHECK(r.assignment == std::vector<int>{0, 1, 0});

  const std::vector<Turn> one = {turn("A", 0, 1, "just this")};
  r = orc_wer(one, {tokenize("just this"), Tokens{}});
  CHECK(*r.wer() == 0.0);

  r = orc_wer(std::vector<Turn>{}, {Tokens{}, Tokens{}});
  CHECK(r.stats.errors() == 0);
  CHECK_FALSE(r.wer().has_value());
  const auto f = orc_wer_fast(std::vector<Turn>{}, {Tokens{}, Tokens{}});
  CHECK(f.stats.errors() == 0);
  CHECK_FALSE(f.wer().has_value());

  for (const auto& hyps : {exact, typo}) {
    const auto e = orc_wer(turns, hyps);
    const auto q = orc_wer_fast(turns, hyps);
    CHECK(e.stats == q.stats);
    CHECK(e.assignment == q.assignment);
  }
}

TEST_CASE("orc_wer strips <cot> from hypotheses") {
  const std::vector<Turn> turns = {turn("A", 0, 2, "hello world"), turn("B", 1, 4, "good morning"),
                                   turn("A", 3, 5, "bye")};
  const std::array<Tokens, 2> hyps = {tokenize("hello world <cot> bye"), tokenize("good morning")};
  CHECK(orc_wer(turns, hyps).stats.errors() == 0);
  CHECK(orc_wer_fast(turns, hyps).stats.errors() == 0);
}

TEST_CASE("orc_wer cap") {
  std::mt19937_64 gen(11);
  const auto turns = random_orc_turns(gen, 17);
  const auto hyps = random_hyps(gen, 20);
  CHECK_THROWS_AS(orc_wer(turns, hyps), ScoringError);
  CHECK_NOTHROW(orc_wer(turns, hyps, 17));
  CHECK_THROWS_AS(orc_wer_fast(turns, hyps, 10), ScoringError);
}

TEST_CASE("orc_wer matches the brute-force oracle and the fast path") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t u = 1 + trial % 9;
    const auto turns = random_orc_turns(gen, u);
    const auto hyps = random_hyps(gen, 3 * u + 2);
    const auto e = orc_wer(turns, hyps);
    const auto oracle = oracle::brute_force_orc(turns, hyps[0], hyps[1]);
    REQUIRE(e.stats.errors() == oracle.errors);
    CHECK(e.stats.ref_words == oracle.ref_words);
    const auto order = start_order(turns);
    std::vector<int> sorted(u);
    for (std::size_t k = 0; k < u; ++k) sorted[k] = e.assignment[order[k]];
    CHECK(sorted == oracle.sorted_assignment);
    const auto f = orc_wer_fast(turns, hyps);
    CHECK(f.stats == e.stats);
    CHECK(f.assignment == e.assignment);
  }
}

TEST_CASE("orc_wer_fast matches exhaustive at U=18") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 2; ++trial) {
    const auto turns = random_orc_turns(gen, 18);
    const auto hyps = random_hyps(gen, 40);
    const auto e = orc_wer(turns, hyps, 18);
    const auto f = orc_wer_fast(turns, hyps);
    CHECK(e.combinations_evaluated == (1u << 18));
    CHECK(f.stats == e.stats);
    CHECK(f.assignment == e.assignment);
  }
}

TEST_CASE("orc_wer invariants") {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t u = 1 + trial % 8;
    const auto turns = random_orc_turns(gen, u);
    const auto hyps = random_hyps(gen, 2 * u + 3);
    const auto base = orc_wer(turns, hyps);
    CHECK(orc_wer(turns, {hyps[1], hyps[0]}).stats.errors() == base.stats.errors());
    auto longer = hyps;
    longer[trial % 2].push_back("zzz-unmatched");
    CHECK(orc_wer(turns, longer).stats.errors() >= base.stats.errors());
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto turns = testing::random_turns(1 + seed % 10, 2, 3, seed + 500);
    const auto t = arrange_overlap_based(turns, 2);
    const std::array<Tokens, 2> hyps = {serialize_channel(t.channel_turns(turns, 0), true),
                                        serialize_channel(t.channel_turns(turns, 1), true)};
    CHECK(orc_wer(turns, hyps).stats.errors() == 0);
    CHECK(orc_wer_fast(turns, hyps).stats.errors() == 0);
  }
}

TEST_CASE("count_estimated_turns") {
  CHECK(count_estimated_turns(std::vector<std::string>{"hi <cot> there", "yo"}) == 3);
  CHECK(count_estimated_turns(std::vector<std::string>{"", ""}) == 0);
  CHECK(count_estimated_turns(std::vector<std::string>{"a <cot> b <cot> c", ""}) == 3);
  CHECK(count_estimated_turns(std::vector<std::string>{"   ", "x"}) == 1);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto turns = testing::random_turns(1 + seed % 12, 2, 3, seed + 900);
    const auto t = arrange_overlap_based(turns, 2);
    std::vector<std::string> channels;
    for (std::size_t c = 0; c < 2; ++c)
      channels.push_back(join(serialize_channel(t.channel_turns(turns, c), true)));
    CHECK(count_estimated_turns(channels) == static_cast<int>(turns.size()));
  }
}

TEST_CASE("turn_confusion") {
  const std::vector<std::pair<int, int>> same = {{1, 1}, {1, 1}};
  auto c = turn_confusion(same);
  CHECK(c.percent(1, 1) == 100.0);
  CHECK(c.accuracy() == 100.0);
  const std::vector<std::pair<int, int>> split = {{2, 2}, {2, 1}};
  c = turn_confusion(split);
  CHECK(c.percent(2, 2) == 50.0);
  CHECK(c.percent(2, 1) == 50.0);
  CHECK(c.row_total(2) == 2);
  CHECK(c.percent(3, 3) == 0.0);
  CHECK(c.accuracy() == 50.0);
  const std::string text = c.render_text();
  CHECK(text.find("*50.00*") != std::string::npos);
  TurnConfusion bad;
  CHECK_THROWS_AS(bad.add(0, 0), ConfigError);

  std::mt19937_64 gen(15);
  std::uniform_int_distribution<int> v(1, 6);
  TurnConfusion r;
  for (int i = 0; i < 500; ++i) r.add(v(gen), v(gen) - 1);
  for (int a : r.actual_values()) {
    double sum = 0.0;
    for (int e = 0; e <= r.max_estimated(); ++e) sum += r.percent(a, e);
    CHECK(sum == doctest::Approx(100.0));
  }
  CHECK(r.has_zero_estimate());
}

TEST_CASE("aggregate_report") {
  const std::vector<UtteranceScore> one = {{"u1", "OV10", {1, 1, 0, 8, 10}, false, false}};
  auto r = aggregate_report(one);
  CHECK(r.overall == one[0].stats);
  CHECK(r.scored == 1);
  REQUIRE(r.partitions.size() == 1);
  CHECK(r.partitions[0].name == "OV10");

  const std::vector<UtteranceScore> two = {{"a", "0S", {1, 0, 0, 9, 10}, false, false},
                                           {"b", "0L", {0, 2, 1, 9, 10}, false, false}};
  r = aggregate_report(two);
  CHECK(*r.wer() == doctest::Approx(0.2));
  REQUIRE(r.partitions.size() == 2);
  CHECK(r.partitions[0].name == "0L");
  CHECK(r.partitions[1].name == "0S");

  const std::vector<UtteranceScore> mixed = {
      {"a", "zeta", {1, 0, 0, 9, 10}, false, false},
      {"b", "OV40", {0, 0, 0, 10, 10}, false, false},
      {"c", "OV10", {0, 0, 0, 10, 10}, true, false},
      {"d", "0L", {0, 3, 0, 0, 0}, false, false},
      {"e", "alpha", {0, 0, 10, 0, 10}, false, true}};
  r = aggregate_report(mixed);
  std::vector<std::string> names;
  for (const auto& p : r.partitions) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"OV40", "alpha", "zeta"});
  CHECK(r.skipped == std::vector<std::string>{"c"});
  CHECK(r.missing_hypotheses == std::vector<std::string>{"e"});
  CHECK(r.empty_references == std::vector<std::string>{"d"});
  CHECK(r.empty_reference_insertions == 3);
  CHECK(r.overall.ref_words == 30);
  CHECK(r.overall.errors() == 11);
  CHECK(r.render_text().find("full") != std::string::npos);
}
