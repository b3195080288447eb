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

#include "mtsim/arrange.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "mtsim/error.h"

namespace mtsim {
namespace {

void check_turns(std::span<const Turn> turns) {
  for (std::size_t i = 0; i < turns.size(); ++i)
    if (!(turns[i].start_s < turns[i].end_s))
      throw ArrangementError("turn " + std::to_string(i) + " has start >= end");
}

std::string time_str(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

}  // namespace

std::string_view to_string(ArrangementKind kind) {
  return kind == ArrangementKind::kSpeakerBased ? "speaker" : "overlap";
}

std::vector<Turn> ChannelTargets::channel_turns(std::span<const Turn> turns,
                                                std::size_t c) const {
  std::vector<Turn> out;
  out.reserve(channels.at(c).size());
  for (std::size_t i : channels[c]) out.push_back(turns[i]);
  return out;
}

std::vector<std::size_t> start_order(std::span<const Turn> turns) {
  std::vector<std::size_t> order(turns.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (turns[a].start_s != turns[b].start_s) return turns[a].start_s < turns[b].start_s;
    if (turns[a].end_s != turns[b].end_s) return turns[a].end_s < turns[b].end_s;
    return a < b;
  });
  return order;
}

ChannelTargets arrange_speaker_based(std::span<const Turn> turns,
                                     std::size_t n_channels) {
  check_turns(turns);
  if (n_channels == 0) throw ArrangementError("n_channels must be >= 1");
  ChannelTargets out;
  out.kind = ArrangementKind::kSpeakerBased;
  out.channels.resize(n_channels);

  std::map<std::string, std::size_t> channel_of;
  std::map<std::string, std::size_t> last_turn;
  for (std::size_t i : start_order(turns)) {
    const Turn& t = turns[i];
    auto last = last_turn.find(t.speaker);
    if (last != last_turn.end() && turns[last->second].end_s > t.start_s)
      throw ArrangementError("speaker '" + t.speaker + "' overlaps itself at t=" +
                             time_str(t.start_s));
    last_turn[t.speaker] = i;
    auto [it, inserted] = channel_of.try_emplace(t.speaker, channel_of.size());
    if (it->second >= n_channels)
      throw ArrangementError("more than " + std::to_string(n_channels) +
                             " speakers for " + std::to_string(n_channels) +
                             " channels");
    out.channels[it->second].push_back(i);
  }
  return out;
}

ChannelTargets arrange_overlap_based(std::span<const Turn> turns,
                                     std::size_t n_channels,
                                     std::size_t* feasibility_checks) {
  check_turns(turns);
  if (n_channels == 0) throw ArrangementError("n_channels must be >= 1");
  ChannelTargets out;
  out.kind = ArrangementKind::kOverlapBased;
  out.channels.resize(n_channels);

  constexpr double kNever = -std::numeric_limits<double>::infinity();
  std::vector<double> channel_end(n_channels, kNever);
  std::size_t local_checks = 0;
  std::size_t& checks = feasibility_checks ? *feasibility_checks : local_checks;

  std::size_t prev_channel = 0;
  bool first = true;
  for (std::size_t i : start_order(turns)) {
    const Turn& t = turns[i];
    std::size_t chosen = n_channels;
    if (!first) {
      ++checks;
      if (channel_end[prev_channel] <= t.start_s) chosen = prev_channel;
    }
    if (chosen == n_channels) {
      double best_end = kNever;
      for (std::size_t c = 0; c < n_channels; ++c) {
        if (!first && c == prev_channel) continue;
        ++checks;
        if (channel_end[c] > t.start_s) continue;
        if (chosen == n_channels || channel_end[c] > best_end) {
          chosen = c;
          best_end = channel_end[c];
        }
      }
    }
    if (chosen == n_channels)
      throw ArrangementError("more than " + std::to_string(n_channels) +
                             " turns active at t=" + time_str(t.start_s));
    out.channels[chosen].push_back(i);
    channel_end[chosen] = t.end_s;
    prev_channel = chosen;
    first = false;
  }
  return out;
}

Tokens serialize_channel(std::span<const Turn> channel, bool with_cot) {
  Tokens out;
  for (std::size_t k = 0; k < channel.size(); ++k) {
    if (with_cot && k > 0) out.emplace_back(kCotToken);
    for (auto& tok : channel[k].tokens()) out.push_back(std::move(tok));
  }
  return out;
}

LossMatrix::LossMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n * n)
    throw ConfigError("loss matrix must be square (" + std::to_string(n) + "x" +
                      std::to_string(n) + ")");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ConfigError("loss matrix has a non-finite entry");
    if (v < 0.0) throw ConfigError("loss matrix has a negative entry");
  }
}

LossMatrix LossMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.size());
  for (const auto& r : rows) {
    if (r.size() != rows.size()) throw ConfigError("loss matrix must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return LossMatrix(rows.size(), std::move(flat));
}

PermutationResult pit_best_permutation(const LossMatrix& losses) {
  const std::size_t n = losses.size();
  if (n > kMaxPermutationSize)
    throw ConfigError("permutation search limited to N <= 8, got " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  PermutationResult best{perm, std::numeric_limits<double>::infinity()};
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) total += losses(r, perm[r]);
    if (total < best.total) best = {perm, total};
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (n == 0) best.total = 0.0;
  return best;
}

std::vector<std::size_t> dat_assignment(std::size_t n) {
  if (n == 0) throw ConfigError("dat_assignment: n must be >= 1");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  return perm;
}

}  // namespace mtsim
