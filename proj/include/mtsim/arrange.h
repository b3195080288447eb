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

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mtsim/text.h"
#include "mtsim/turn.h"

namespace mtsim {

enum class ArrangementKind { kSpeakerBased, kOverlapBased };

std::string_view to_string(ArrangementKind kind);

// N output channels, each holding indices into the arranged turn sequence
// in start-time order.
struct ChannelTargets {
  ArrangementKind kind = ArrangementKind::kOverlapBased;
  std::vector<std::vector<std::size_t>> channels;

  std::vector<Turn> channel_turns(std::span<const Turn> turns, std::size_t c) const;
  bool operator==(const ChannelTargets&) const = default;
};

// Turn indices ordered by (start_s, end_s, index).
std::vector<std::size_t> start_order(std::span<const Turn> turns);

// One channel per speaker; channel 0 is the speaker who starts first.
// Throws ArrangementError on too many speakers or same-speaker overlap.
ChannelTargets arrange_speaker_based(std::span<const Turn> turns,
                                     std::size_t n_channels = 2);

// Greedy overlap-based arrangement: a turn stays on the previous turn's
// channel unless it overlaps it, in which case it moves to the free channel
// whose last turn ended most recently. `feasibility_checks`, when given,
// is incremented once per channel examined (at most n_channels per turn).
ChannelTargets arrange_overlap_based(std::span<const Turn> turns,
                                     std::size_t n_channels = 2,
                                     std::size_t* feasibility_checks = nullptr);

// Concatenated tokens of the channel, with `<cot>` between consecutive
// turns when requested.
Tokens serialize_channel(std::span<const Turn> channel, bool with_cot);

// Square matrix of finite non-negative losses; rows are targets, columns
// model outputs.
class LossMatrix {
 public:
  LossMatrix(std::size_t n, std::vector<double> values);
  static LossMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  double operator()(std::size_t target, std::size_t output) const {
    return values_[target * n_ + output];
  }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

struct PermutationResult {
  // permutation[target] = output assigned to that target.
  std::vector<std::size_t> permutation;
  double total = 0.0;
};

inline constexpr std::size_t kMaxPermutationSize = 8;

// Exhaustive minimum over all N! permutations (N <= 8); ties resolve to
// the lexicographically smallest permutation.
PermutationResult pit_best_permutation(const LossMatrix& losses);

// Order-of-appearance assignment: the identity.
std::vector<std::size_t> dat_assignment(std::size_t n);

}  // namespace mtsim
