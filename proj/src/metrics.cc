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

#include "mtsim/metrics.h"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mtsim/arrange.h"
#include "mtsim/error.h"

namespace mtsim {
namespace {

using IdSeq = std::vector<int>;

class Vocabulary {
 public:
  IdSeq encode(std::span<const std::string> tokens) {
    IdSeq out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto [it, inserted] = ids_.try_emplace(t, static_cast<int>(ids_.size()));
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::unordered_map<std::string, int> ids_;
};

// Tokens of the turns in start order, plus the order itself.
struct SortedTurns {
  std::vector<std::size_t> order;
  std::vector<Tokens> words;
};

SortedTurns sort_turns(std::span<const Turn> turns) {
  SortedTurns s;
  s.order = start_order(turns);
  s.words.reserve(turns.size());
  for (std::size_t i : s.order) s.words.push_back(turns[i].tokens());
  return s;
}

std::array<Tokens, 2> strip_cot(const std::array<Tokens, 2>& hyps) {
  return {strip_token(hyps[0], kCotToken), strip_token(hyps[1], kCotToken)};
}

// Scores a fixed assignment (in start order) by concatenating per channel.
EditStats score_assignment(const SortedTurns& turns, const std::vector<int>& sorted_assign,
                           const std::array<Tokens, 2>& hyps) {
  std::array<Tokens, 2> refs;
  for (std::size_t k = 0; k < turns.words.size(); ++k) {
    auto& dst = refs[sorted_assign[k]];
    dst.insert(dst.end(), turns.words[k].begin(), turns.words[k].end());
  }
  return word_edit_distance(refs[0], hyps[0]) + word_edit_distance(refs[1], hyps[1]);
}

std::vector<int> to_input_order(const SortedTurns& turns, const std::vector<int>& sorted_assign) {
  std::vector<int> out(sorted_assign.size());
  for (std::size_t k = 0; k < sorted_assign.size(); ++k)
    out[turns.order[k]] = sorted_assign[k];
  return out;
}

// Appends `words` to the reference side of a Levenshtein table whose last
// row is `prev`, writing the new last row to `out`.
void extend_row(const IdSeq& prev, const IdSeq& words, const IdSeq& hyp,
                IdSeq& out, IdSeq& scratch) {
  out = prev;
  scratch.resize(prev.size());
  for (int w : words) {
    scratch[0] = out[0] + 1;
    for (std::size_t j = 1; j < out.size(); ++j)
      scratch[j] = std::min({out[j] + 1, scratch[j - 1] + 1,
                             out[j - 1] + (w != hyp[j - 1] ? 1 : 0)});
    std::swap(out, scratch);
  }
}

class ExhaustiveSearch {
 public:
  ExhaustiveSearch(std::vector<IdSeq> turns, std::array<IdSeq, 2> hyps)
      : turns_(std::move(turns)), hyps_(std::move(hyps)) {
    const std::size_t u = turns_.size();
    for (int c = 0; c < 2; ++c) {
      rows_[c].assign(u + 1, IdSeq{});
      rows_[c][0].resize(hyps_[c].size() + 1);
      std::iota(rows_[c][0].begin(), rows_[c][0].end(), 0);
    }
    assign_.assign(u, 0);
  }

  void run() { visit(0); }

  int best_cost() const { return best_cost_; }
  const std::vector<int>& best_assignment() const { return best_; }
  std::uint64_t leaves() const { return leaves_; }

 private:
  void visit(std::size_t k) {
    if (k == turns_.size()) {
      ++leaves_;
      const int cost = rows_[0][count_[0]].back() + rows_[1][count_[1]].back();
      if (cost < best_cost_) {
        best_cost_ = cost;
        best_ = assign_;
      }
      return;
    }
    for (int c = 0; c < 2; ++c) {
      const std::size_t n = count_[c];
      extend_row(rows_[c][n], turns_[k], hyps_[c], rows_[c][n + 1], scratch_);
      ++count_[c];
      assign_[k] = c;
      visit(k + 1);
      --count_[c];
    }
  }

  std::vector<IdSeq> turns_;
  std::array<IdSeq, 2> hyps_;
  std::array<std::vector<IdSeq>, 2> rows_;
  std::array<std::size_t, 2> count_{0, 0};
  std::vector<int> assign_;
  std::vector<int> best_;
  int best_cost_ = std::numeric_limits<int>::max();
  std::uint64_t leaves_ = 0;
  IdSeq scratch_;
};

constexpr int kInf = 1 << 29;

// Joint table over (hyp-0 position a, hyp-1 position b), stored a-major.
class JointTable {
 public:
  JointTable(const IdSeq& h0, const IdSeq& h1) : h_{&h0, &h1} {
    dims_ = {h0.size() + 1, h1.size() + 1};
  }

  std::size_t size() const { return dims_[0] * dims_[1]; }
  std::size_t index(std::size_t a, std::size_t b) const { return a * dims_[1] + b; }

  // out[s'] = min over s on the same line of in[s] + cost of aligning
  // `words` with hyp_c between s and s' (s <= s' along channel c).
  void forward(int c, const IdSeq& words, const int* in, int* out) {
    run_lines(c, [&](auto at, std::size_t len) {
      const IdSeq& hyp = *h_[c];
      prev_.resize(len);
      cur_.resize(len);
      prev_[0] = in[at(0)];
      for (std::size_t a = 1; a < len; ++a) prev_[a] = std::min(in[at(a)], prev_[a - 1] + 1);
      for (int w : words) {
        cur_[0] = prev_[0] + 1;
        for (std::size_t a = 1; a < len; ++a)
          cur_[a] = std::min({prev_[a] + 1, cur_[a - 1] + 1,
                              prev_[a - 1] + (w != hyp[a - 1] ? 1 : 0)});
        std::swap(prev_, cur_);
      }
      for (std::size_t a = 0; a < len; ++a) out[at(a)] = std::min(prev_[a], kInf);
    });
  }

  // out[s] = min over s' >= s on the same line of cost(s -> s') + in[s'].
  void backward(int c, const IdSeq& words, const int* in, int* out) {
    run_lines(c, [&](auto at, std::size_t len) {
      const IdSeq& hyp = *h_[c];
      const std::size_t last = len - 1;
      prev_.resize(len);
      cur_.resize(len);
      prev_[last] = in[at(last)];
      for (std::size_t a = last; a-- > 0;) prev_[a] = std::min(in[at(a)], prev_[a + 1] + 1);
      for (std::size_t i = words.size(); i-- > 0;) {
        const int w = words[i];
        cur_[last] = prev_[last] + 1;
        for (std::size_t a = last; a-- > 0;)
          cur_[a] = std::min({prev_[a] + 1, cur_[a + 1] + 1,
                              prev_[a + 1] + (w != hyp[a] ? 1 : 0)});
        std::swap(prev_, cur_);
      }
      for (std::size_t a = 0; a < len; ++a) out[at(a)] = std::min(prev_[a], kInf);
    });
  }

 private:
  // Calls fn(at, len) for every line along channel c, where at(k) maps the
  // position k on that line to a table index.
  template <typename Fn>
  void run_lines(int c, Fn&& fn) {
    if (c == 0) {
      for (std::size_t b = 0; b < dims_[1]; ++b)
        fn([&, b](std::size_t a) { return index(a, b); }, dims_[0]);
    } else {
      for (std::size_t a = 0; a < dims_[0]; ++a)
        fn([&, a](std::size_t b) { return index(a, b); }, dims_[1]);
    }
  }

  std::array<const IdSeq*, 2> h_;
  std::array<std::size_t, 2> dims_;
  IdSeq prev_, cur_;
};

}  // namespace

EditStats word_edit_distance(std::span<const std::string> ref,
                             std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  const std::size_t w = m + 1;
  thread_local std::vector<int> d;
  d.resize((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * w] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = d[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i * w + j] = std::min({diag, d[(i - 1) * w + j] + 1, d[i * w + j - 1] + 1});
    }
  }

  EditStats s;
  s.ref_words = static_cast<std::int64_t>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const int here = d[i * w + j];
    if (i > 0 && j > 0) {
      const bool match = ref[i - 1] == hyp[j - 1];
      const int diag = d[(i - 1) * w + j - 1];
      if (match && here == diag) {
        ++s.hits;
        --i, --j;
        continue;
      }
      if (!match && here == diag + 1) {
        ++s.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == d[(i - 1) * w + j] + 1) {
      ++s.deletions;
      --i;
    } else {
      ++s.insertions;
      --j;
    }
  }
  return s;
}

OedResult oed_wer(const std::vector<Tokens>& refs, const std::vector<Tokens>& hyps) {
  const std::size_t n = std::max(refs.size(), hyps.size());
  if (n > kMaxPermutationSize)
    throw ScoringError("oed_wer supports at most 8 channels, got " + std::to_string(n));
  const Tokens empty;
  auto ref_at = [&](std::size_t r) -> const Tokens& { return r < refs.size() ? refs[r] : empty; };
  auto hyp_at = [&](std::size_t h) -> const Tokens& { return h < hyps.size() ? hyps[h] : empty; };

  std::vector<EditStats> pair(n * n);
  std::vector<double> cost(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t h = 0; h < n; ++h) {
      pair[r * n + h] = word_edit_distance(ref_at(r), hyp_at(h));
      cost[r * n + h] = static_cast<double>(pair[r * n + h].errors());
    }

  OedResult out;
  if (n == 0) return out;
  out.permutation = pit_best_permutation(LossMatrix(n, std::move(cost))).permutation;
  for (std::size_t r = 0; r < n; ++r) out.stats += pair[r * n + out.permutation[r]];
  return out;
}

OrcResult orc_wer(std::span<const Turn> ref_turns, const std::array<Tokens, 2>& hyps,
                  std::size_t max_exhaustive_turns) {
  if (ref_turns.size() > max_exhaustive_turns)
    throw ScoringError("exhaustive ORC search over " + std::to_string(ref_turns.size()) +
                       " turns exceeds the cap of " + std::to_string(max_exhaustive_turns));
  if (ref_turns.size() >= 63) throw ScoringError("too many turns for exhaustive search");
  const SortedTurns turns = sort_turns(ref_turns);
  const auto clean = strip_cot(hyps);

  Vocabulary vocab;
  std::vector<IdSeq> ids;
  ids.reserve(turns.words.size());
  for (const auto& w : turns.words) ids.push_back(vocab.encode(w));
  std::array<IdSeq, 2> hyp_ids{vocab.encode(clean[0]), vocab.encode(clean[1])};

  ExhaustiveSearch search(std::move(ids), std::move(hyp_ids));
  search.run();

  OrcResult out;
  out.stats = score_assignment(turns, search.best_assignment(), clean);
  out.assignment = to_input_order(turns, search.best_assignment());
  out.combinations_evaluated = search.leaves();
  if (out.stats.errors() != search.best_cost())
    throw std::logic_error("orc_wer: backtrace disagrees with search cost");
  return out;
}

OrcResult orc_wer_fast(std::span<const Turn> ref_turns, const std::array<Tokens, 2>& hyps,
                       std::uint64_t max_states) {
  const SortedTurns turns = sort_turns(ref_turns);
  const auto clean = strip_cot(hyps);
  const std::size_t u = turns.words.size();

  Vocabulary vocab;
  std::vector<IdSeq> ids;
  ids.reserve(u);
  for (const auto& w : turns.words) ids.push_back(vocab.encode(w));
  const IdSeq h0 = vocab.encode(clean[0]);
  const IdSeq h1 = vocab.encode(clean[1]);

  JointTable table(h0, h1);
  const std::size_t layer = table.size();
  const std::uint64_t states = static_cast<std::uint64_t>(u + 1) * layer;
  if (states > max_states)
    throw ScoringError("ORC dynamic programming needs " + std::to_string(states) +
                       " states, limit is " + std::to_string(max_states));

  // cost_to_go[t] = least cost of aligning turns t.. and the rest of both
  // hypotheses from each table position.
  std::vector<int> cost_to_go(states);
  int* tail = cost_to_go.data() + u * layer;
  for (std::size_t a = 0; a <= h0.size(); ++a)
    for (std::size_t b = 0; b <= h1.size(); ++b)
      tail[table.index(a, b)] = static_cast<int>((h0.size() - a) + (h1.size() - b));
  std::vector<int> alt(layer);
  for (std::size_t t = u; t-- > 0;) {
    int* here = cost_to_go.data() + t * layer;
    const int* next = here + layer;
    table.backward(0, ids[t], next, here);
    table.backward(1, ids[t], next, alt.data());
    for (std::size_t s = 0; s < layer; ++s) here[s] = std::min(here[s], alt[s]);
  }
  const int best = cost_to_go[0];

  // Forward pass restricted to optimal paths, choosing channel 0 whenever
  // an optimal completion exists: yields the lexicographically smallest
  // optimal assignment.
  std::vector<int> frontier(layer, kInf), candidate(layer);
  frontier[0] = 0;
  std::vector<int> sorted_assign(u);
  for (std::size_t t = 0; t < u; ++t) {
    const int* next = cost_to_go.data() + (t + 1) * layer;
    bool placed = false;
    for (int c = 0; c < 2 && !placed; ++c) {
      table.forward(c, ids[t], frontier.data(), candidate.data());
      for (std::size_t s = 0; s < layer; ++s) {
        if (candidate[s] < kInf && candidate[s] + next[s] == best) {
          placed = true;
        } else {
          candidate[s] = kInf;
        }
      }
      if (placed) {
        sorted_assign[t] = c;
        std::swap(frontier, candidate);
      }
    }
    if (!placed) throw std::logic_error("orc_wer_fast: lost the optimal path");
  }

  OrcResult out;
  out.stats = score_assignment(turns, sorted_assign, clean);
  out.assignment = to_input_order(turns, sorted_assign);
  out.combinations_evaluated = states;
  if (out.stats.errors() != best)
    throw std::logic_error("orc_wer_fast: backtrace disagrees with table cost");
  return out;
}

int count_estimated_turns(std::span<const std::string> hyp_channels,
                          std::string_view cot_token) {
  int total = 0;
  for (const auto& channel : hyp_channels) {
    const Tokens toks = tokenize(channel);
    if (toks.empty()) continue;
    total += 1 + static_cast<int>(std::count(toks.begin(), toks.end(), cot_token));
  }
  return total;
}

void TurnConfusion::add(int actual, int estimated) {
  if (actual < 1) throw ConfigError("actual turn count must be >= 1");
  if (estimated < 0) throw ConfigError("estimated turn count must be >= 0");
  ++counts_[actual][estimated];
}

std::int64_t TurnConfusion::count(int actual, int estimated) const {
  auto row = counts_.find(actual);
  if (row == counts_.end()) return 0;
  auto cell = row->second.find(estimated);
  return cell == row->second.end() ? 0 : cell->second;
}

std::int64_t TurnConfusion::row_total(int actual) const {
  auto row = counts_.find(actual);
  if (row == counts_.end()) return 0;
  std::int64_t sum = 0;
  for (const auto& [est, n] : row->second) sum += n;
  return sum;
}

double TurnConfusion::percent(int actual, int estimated) const {
  const std::int64_t total = row_total(actual);
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(count(actual, estimated)) / total;
}

std::int64_t TurnConfusion::total() const {
  std::int64_t sum = 0;
  for (const auto& [a, row] : counts_) sum += row_total(a);
  return sum;
}

double TurnConfusion::accuracy() const {
  const std::int64_t n = total();
  if (n == 0) return 0.0;
  std::int64_t diag = 0;
  for (const auto& [a, row] : counts_) diag += count(a, a);
  return 100.0 * static_cast<double>(diag) / n;
}

std::vector<int> TurnConfusion::actual_values() const {
  std::vector<int> out;
  for (const auto& [a, row] : counts_) out.push_back(a);
  return out;
}

int TurnConfusion::max_estimated() const {
  int m = 0;
  for (const auto& [a, row] : counts_)
    for (const auto& [e, n] : row) m = std::max(m, e);
  return m;
}

bool TurnConfusion::has_zero_estimate() const {
  for (const auto& [a, row] : counts_)
    if (row.contains(0)) return true;
  return false;
}

std::string TurnConfusion::render_text() const {
  std::ostringstream os;
  if (counts_.empty()) {
    os << "(no utterances)\n";
    return os.str();
  }
  const int max_actual = counts_.rbegin()->first;
  const int last_col = std::max(max_actual, max_estimated());
  const int first_col = has_zero_estimate() ? 0 : 1;
  os << "Actual #turns | Estimated #turns\n";
  os << std::setw(13) << "" << " |";
  for (int e = first_col; e <= last_col; ++e) os << std::setw(10) << e;
  os << '\n';
  char cell[32];
  for (int a = 1; a <= max_actual; ++a) {
    if (row_total(a) == 0) continue;
    os << std::setw(13) << a << " |";
    for (int e = first_col; e <= last_col; ++e) {
      if (e == a) {
        std::snprintf(cell, sizeof cell, "*%.2f*", percent(a, e));
      } else {
        std::snprintf(cell, sizeof cell, "%.2f", percent(a, e));
      }
      os << std::setw(10) << cell;
    }
    os << '\n';
  }
  char acc[64];
  std::snprintf(acc, sizeof acc, "turn counting accuracy: %.2f%% over %lld utterances\n",
                accuracy(), static_cast<long long>(total()));
  os << acc;
  return os.str();
}

TurnConfusion turn_confusion(std::span<const std::pair<int, int>> pairs) {
  TurnConfusion c;
  for (const auto& [actual, estimated] : pairs) c.add(actual, estimated);
  return c;
}

CorpusReport aggregate_report(std::span<const UtteranceScore> scores) {
  static const std::vector<std::string> kKnown = {"0L", "0S", "OV10", "OV20", "OV30", "OV40"};
  CorpusReport report;
  std::map<std::string, PartitionReport> parts;
  for (const auto& s : scores) {
    if (s.missing_hypothesis) report.missing_hypotheses.push_back(s.id);
    if (s.skipped) {
      report.skipped.push_back(s.id);
      continue;
    }
    if (s.stats.ref_words == 0) {
      report.empty_references.push_back(s.id);
      report.empty_reference_insertions += s.stats.insertions;
      continue;
    }
    ++report.scored;
    report.overall += s.stats;
    if (!s.partition.empty()) {
      auto& p = parts[s.partition];
      p.name = s.partition;
      p.stats += s.stats;
      ++p.utterances;
    }
  }
  for (const auto& name : kKnown) {
    auto it = parts.find(name);
    if (it == parts.end()) continue;
    report.partitions.push_back(it->second);
    parts.erase(it);
  }
  for (auto& [name, p] : parts) report.partitions.push_back(p);
  return report;
}

std::string CorpusReport::render_text() const {
  std::ostringstream os;
  std::vector<std::pair<std::string, std::pair<EditStats, std::size_t>>> cols;
  for (const auto& p : partitions) cols.push_back({p.name, {p.stats, p.utterances}});
  cols.push_back({"full", {overall, scored}});

  auto row = [&](const std::string& label, auto&& value) {
    os << std::left << std::setw(12) << label << std::right;
    for (const auto& c : cols) os << std::setw(10) << value(c.second.first, c.second.second);
    os << '\n';
  };
  os << std::left << std::setw(12) << "" << std::right;
  for (const auto& c : cols) os << std::setw(10) << c.first;
  os << '\n';
  row("WER [%]", [](const EditStats& s, std::size_t) {
    char buf[32];
    if (auto w = s.wer()) {
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *w);
    } else {
      std::snprintf(buf, sizeof buf, "n/a");
    }
    return std::string(buf);
  });
  row("sub", [](const EditStats& s, std::size_t) { return std::to_string(s.substitutions); });
  row("ins", [](const EditStats& s, std::size_t) { return std::to_string(s.insertions); });
  row("del", [](const EditStats& s, std::size_t) { return std::to_string(s.deletions); });
  row("ref words", [](const EditStats& s, std::size_t) { return std::to_string(s.ref_words); });
  row("utterances", [](const EditStats&, std::size_t n) { return std::to_string(n); });
  if (!skipped.empty()) {
    os << "skipped (" << skipped.size() << "):";
    for (const auto& id : skipped) os << ' ' << id;
    os << '\n';
  }
  if (!missing_hypotheses.empty()) {
    os << "missing hypotheses (" << missing_hypotheses.size() << "):";
    for (const auto& id : missing_hypotheses) os << ' ' << id;
    os << '\n';
  }
  if (!empty_references.empty()) {
    os << "empty references (" << empty_references.size() << ", "
       << empty_reference_insertions << " insertions):";
    for (const auto& id : empty_references) os << ' ' << id;
    os << '\n';
  }
  return os.str();
}

}  // namespace mtsim
