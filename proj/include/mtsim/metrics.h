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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtsim/text.h"
#include "mtsim/turn.h"

namespace mtsim {

struct EditStats {
  std::int64_t substitutions = 0;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t hits = 0;
  std::int64_t ref_words = 0;

  std::int64_t errors() const { return substitutions + insertions + deletions; }
  // Undefined (empty) when there are no reference words.
  std::optional<double> wer() const {
    if (ref_words == 0) return std::nullopt;
    return static_cast<double>(errors()) / static_cast<double>(ref_words);
  }

  EditStats& operator+=(const EditStats& o) {
    substitutions += o.substitutions;
    insertions += o.insertions;
    deletions += o.deletions;
    hits += o.hits;
    ref_words += o.ref_words;
    return *this;
  }
  friend EditStats operator+(EditStats a, const EditStats& b) { return a += b; }
  bool operator==(const EditStats&) const = default;
};

// Unit-cost Levenshtein alignment over words. At equal cost the backtrace
// (from the end) prefers hit, then substitution, deletion, insertion.
EditStats word_edit_distance(std::span<const std::string> ref,
                             std::span<const std::string> hyp);

struct OedResult {
  EditStats stats;
  // permutation[r] = hypothesis channel matched with reference r (after
  // padding both sides to the same size with empty sequences).
  std::vector<std::size_t> permutation;
  std::optional<double> wer() const { return stats.wer(); }
};

// Minimum summed edit distance over reference/channel pairings. At most
// 8 sequences per side.
OedResult oed_wer(const std::vector<Tokens>& refs, const std::vector<Tokens>& hyps);

struct OrcResult {
  EditStats stats;
  // assignment[i] = hypothesis channel (0 or 1) of input turn i.
  std::vector<int> assignment;
  std::uint64_t combinations_evaluated = 0;
  std::optional<double> wer() const { return stats.wer(); }
};

inline constexpr std::size_t kDefaultMaxExhaustiveTurns = 16;
inline constexpr std::uint64_t kDefaultMaxFastStates = std::uint64_t{1} << 26;

// Exhaustive ORC WER over all 2^U turn-to-channel assignments. Turns are
// concatenated in start-time order per channel; `<cot>` is removed from
// the hypotheses. Among co-optimal assignments the lexicographically
// smallest one, read in start-time order, wins. Throws ScoringError when U
// exceeds `max_exhaustive_turns`.
OrcResult orc_wer(std::span<const Turn> ref_turns, const std::array<Tokens, 2>& hyps,
                  std::size_t max_exhaustive_turns = kDefaultMaxExhaustiveTurns);

// Same value as orc_wer via dynamic programming over
// (turn prefix, hyp-0 position, hyp-1 position), with the same tie-break.
// Throws ScoringError when the state table would exceed `max_states`.
OrcResult orc_wer_fast(std::span<const Turn> ref_turns,
                       const std::array<Tokens, 2>& hyps,
                       std::uint64_t max_states = kDefaultMaxFastStates);

// Per channel: 0 when empty, else 1 + number of cot tokens.
int count_estimated_turns(std::span<const std::string> hyp_channels,
                          std::string_view cot_token = kCotToken);

class TurnConfusion {
 public:
  void add(int actual, int estimated);

  std::int64_t count(int actual, int estimated) const;
  std::int64_t row_total(int actual) const;
  // Row-normalized percentage; 0 for an empty row.
  double percent(int actual, int estimated) const;
  std::int64_t total() const;
  // Share of pairs on the diagonal, in percent.
  double accuracy() const;

  std::vector<int> actual_values() const;
  int max_estimated() const;
  bool has_zero_estimate() const;

  // Rows = actual turns, columns = estimated turns, percentages with the
  // diagonal marked by asterisks.
  std::string render_text() const;

 private:
  std::map<int, std::map<int, std::int64_t>> counts_;
};

TurnConfusion turn_confusion(std::span<const std::pair<int, int>> pairs);

struct UtteranceScore {
  std::string id;
  std::string partition;
  EditStats stats;
  bool skipped = false;
  bool missing_hypothesis = false;
};

struct PartitionReport {
  std::string name;
  EditStats stats;
  std::size_t utterances = 0;
  std::optional<double> wer() const { return stats.wer(); }
};

struct CorpusReport {
  EditStats overall;
  std::size_t scored = 0;
  std::vector<PartitionReport> partitions;
  std::vector<std::string> skipped;
  std::vector<std::string> missing_hypotheses;
  // Scored utterances with no reference words; left out of the averages.
  std::vector<std::string> empty_references;
  std::int64_t empty_reference_insertions = 0;

  std::optional<double> wer() const { return overall.wer(); }
  std::string render_text() const;
};

// Micro-averaged (pooled errors over pooled reference words) report,
// overall and per partition. Partitions named like the LibriCSS subsets
// (0L, 0S, OV10..OV40) come first in that order; others follow sorted.
CorpusReport aggregate_report(std::span<const UtteranceScore> scores);

}  // namespace mtsim
