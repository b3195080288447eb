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

#include "mtsim/simulate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "mtsim/error.h"

namespace mtsim {
namespace {

struct Event {
  double time;
  int delta;  // +1 start, -1 end
};

// Ends sort before starts at equal times (half-open intervals).
std::vector<Event> events_of(std::span<const Turn> turns) {
  std::vector<Event> ev;
  ev.reserve(turns.size() * 2);
  for (const auto& t : turns) {
    ev.push_back({t.start_s, +1});
    ev.push_back({t.end_s, -1});
  }
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
    return a.time != b.time ? a.time < b.time : a.delta < b.delta;
  });
  return ev;
}

const ImpulseResponse* find_ir(std::span<const ImpulseResponse> irs,
                               const std::string& id) {
  for (const auto& ir : irs)
    if (ir.id == id) return &ir;
  return nullptr;
}

double ir_tail_s(std::span<const ImpulseResponse> irs, const PlanEntry& e,
                 const SimulationConfig& config) {
  if (!config.far_field || !e.impulse_response_id) return 0.0;
  const ImpulseResponse* ir = find_ir(irs, *e.impulse_response_id);
  if (ir == nullptr)
    throw ConfigError("unknown impulse response '" + *e.impulse_response_id + "'");
  return static_cast<double>(ir->samples.size() - 1) / config.sample_rate_hz;
}

// Picks `count` utterance indices. Distinct speakers unless allowed.
std::vector<std::size_t> pick_utterances(const Pool& pool, int count,
                                         bool allow_same_speaker, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(count);
  if (allow_same_speaker) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (int i = 0; i < count; ++i) {
      const std::size_t j = i + rng.below(idx.size() - i);
      std::swap(idx[i], idx[j]);
      picked.push_back(idx[i]);
    }
    return picked;
  }
  std::vector<std::string> speakers = pool.speakers();
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(speakers.size() - i);
    std::swap(speakers[i], speakers[j]);
    const auto& utts = pool.speaker_utterances(speakers[i]);
    picked.push_back(utts[rng.below(utts.size())]);
  }
  return picked;
}

bool same_speaker_overlap(const std::vector<PlanEntry>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (entries[i].speaker_id == entries[j].speaker_id &&
          entries[i].start_offset_s < entries[j].end_s() &&
          entries[j].start_offset_s < entries[i].end_s())
        return true;
  return false;
}

std::vector<Turn> entry_spans(const std::vector<PlanEntry>& entries) {
  std::vector<Turn> spans;
  spans.reserve(entries.size());
  for (const auto& e : entries)
    spans.push_back({e.speaker_id, e.start_offset_s, e.end_s(), {}});
  return spans;
}

}  // namespace

void validate(const SimulationConfig& c) {
  if (c.max_speakers < 1) throw ConfigError("max_speakers must be >= 1");
  if (!(c.min_delay_s > 0.0)) throw ConfigError("min_delay_s must be > 0");
  if (!(c.ratio_lo_db <= c.ratio_hi_db) || !std::isfinite(c.ratio_lo_db) ||
      !std::isfinite(c.ratio_hi_db))
    throw ConfigError("energy ratio range must satisfy lo_db <= hi_db");
  if (c.max_simultaneous < 1) throw ConfigError("max_simultaneous must be >= 1");
  if (c.max_duration_s && !(*c.max_duration_s > 0.0))
    throw ConfigError("max_duration_s must be > 0");
  if (c.sample_rate_hz <= 0) throw ConfigError("sample_rate_hz must be > 0");
  if (c.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

SimulationConfig preset(std::string_view name) {
  SimulationConfig c;
  if (name == "librispeechmix2") {
    c.max_speakers = 2;
    c.count_mode = CountMode::kFixed;
    c.energy_mode = EnergyMode::kIntact;
    c.far_field = false;
    c.max_duration_s.reset();
    c.allow_same_speaker = false;
    return c;
  }
  if (name == "libricss_style") {
    c.max_speakers = 5;
    c.count_mode = CountMode::kUniform;
    c.energy_mode = EnergyMode::kRatioRange;
    c.ratio_lo_db = -5.0;
    c.ratio_hi_db = 5.0;
    c.far_field = true;
    c.max_duration_s = 30.0;
    c.allow_same_speaker = true;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"librispeechmix2", "libricss_style"}; }

double measure_energy(const AudioBuffer& audio) {
  if (audio.samples.empty()) throw ConfigError("measure_energy: empty buffer");
  double sum = 0.0;
  for (double x : audio.samples) sum += x * x;
  return sum / static_cast<double>(audio.samples.size());
}

double gain_for_energy_ratio(double ref_energy, double other_energy, double ratio_db) {
  if (!(ref_energy > 0.0) || !(other_energy > 0.0))
    throw ConfigError("gain_for_energy_ratio: energies must be positive");
  return std::sqrt(ref_energy / (other_energy * std::pow(10.0, ratio_db / 10.0)));
}

double EnergyCache::operator()(const Utterance& utt) {
  {
    std::lock_guard lock(mutex_);
    auto it = energies_.find(utt.id);
    if (it != energies_.end()) return it->second;
  }
  const double e = measure_energy(load_audio(utt, rate_));
  std::lock_guard lock(mutex_);
  energies_.emplace(utt.id, e);
  return e;
}

int max_concurrent(std::span<const Turn> turns) {
  int active = 0, peak = 0;
  for (const auto& ev : events_of(turns)) {
    active += ev.delta;
    peak = std::max(peak, active);
  }
  return peak;
}

double overlap_ratio(std::span<const Turn> turns, double duration_s) {
  if (!(duration_s > 0.0)) return 0.0;
  double covered = 0.0, last = 0.0;
  int active = 0;
  for (const auto& ev : events_of(turns)) {
    if (active >= 2) covered += ev.time - last;
    active += ev.delta;
    last = ev.time;
  }
  return covered / duration_s;
}

std::string mixture_id(std::uint64_t mixture_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mix%06llu",
                static_cast<unsigned long long>(mixture_index));
  return buf;
}

MixturePlan sample_plan(const Pool& pool, std::span<const ImpulseResponse> irs,
                        const SimulationConfig& config, const EnergyFn& energy,
                        Rng& rng, std::string id) {
  validate(config);
  const int s_max = config.max_speakers;
  if (pool.empty()) throw InfeasibleError("pool is empty");
  if (s_max >= 2 && pool.speakers().size() < 2)
    throw InfeasibleError("pool has fewer than 2 speakers");
  if (config.allow_same_speaker && pool.size() < static_cast<std::size_t>(s_max))
    throw InfeasibleError("pool has " + std::to_string(pool.size()) +
                          " utterances, need " + std::to_string(s_max));
  if (!config.allow_same_speaker &&
      pool.speakers().size() < static_cast<std::size_t>(s_max))
    throw InfeasibleError("pool has " + std::to_string(pool.speakers().size()) +
                          " speakers, need " + std::to_string(s_max));
  if (config.far_field && irs.empty())
    throw ConfigError("far_field requires at least one impulse response");

  const int count = config.count_mode == CountMode::kFixed
                        ? s_max
                        : 1 + static_cast<int>(rng.below(s_max));
  const int attempts = config.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    const auto picked = pick_utterances(pool, count, config.allow_same_speaker, rng);

    MixturePlan plan;
    plan.mixture_id = id;
    plan.attempts = attempt;
    bool admissible = true;
    double start = 0.0;
    for (std::size_t k = 0; k < picked.size(); ++k) {
      const Utterance& u = pool.utterances()[picked[k]];
      if (k > 0) {
        const PlanEntry& prev = plan.entries.back();
        if (prev.speaker_id == u.speaker_id) {
          start += rng.uniform_open(prev.duration_s, prev.duration_s + 1.0);
        } else if (prev.duration_s > config.min_delay_s) {
          start += rng.uniform_open(config.min_delay_s, prev.duration_s);
        } else {
          admissible = false;  // empty delay range
          break;
        }
      }
      PlanEntry e;
      e.utterance_id = u.id;
      e.speaker_id = u.speaker_id;
      e.start_offset_s = start;
      e.duration_s = u.duration_s;
      if (config.far_field) e.impulse_response_id = irs[rng.below(irs.size())].id;
      plan.entries.push_back(std::move(e));
    }
    if (!admissible || same_speaker_overlap(plan.entries)) continue;
    const auto spans = entry_spans(plan.entries);
    if (max_concurrent(spans) > config.max_simultaneous) continue;
    if (config.max_duration_s &&
        planned_duration_s(plan, irs, config) > *config.max_duration_s)
      continue;

    plan.reference_index = rng.below(plan.entries.size());
    if (config.energy_mode == EnergyMode::kRatioRange && plan.entries.size() > 1) {
      const double ref_energy = energy(pool.at(plan.entries[plan.reference_index].utterance_id));
      for (std::size_t k = 0; k < plan.entries.size(); ++k) {
        if (k == plan.reference_index) continue;
        auto& e = plan.entries[k];
        const double ratio = rng.uniform_closed(config.ratio_lo_db, config.ratio_hi_db);
        e.energy_ratio_db = ratio;
        e.gain_linear = gain_for_energy_ratio(ref_energy, energy(pool.at(e.utterance_id)), ratio);
      }
    }
    return plan;
  }
  throw InfeasibleError("no admissible plan after " + std::to_string(attempts) +
                        " attempts for " + id);
}

std::vector<Turn> plan_turns(const MixturePlan& plan, const Pool& pool) {
  std::vector<Turn> turns;
  turns.reserve(plan.entries.size());
  for (const auto& e : plan.entries)
    turns.push_back({e.speaker_id, e.start_offset_s, e.end_s(),
                     pool.at(e.utterance_id).transcript});
  return turns;
}

double planned_duration_s(const MixturePlan& plan,
                          std::span<const ImpulseResponse> irs,
                          const SimulationConfig& config) {
  double end = 0.0;
  for (const auto& e : plan.entries)
    end = std::max(end, e.end_s() + ir_tail_s(irs, e, config));
  return end;
}

Mixture render(const MixturePlan& plan, const Pool& pool,
               std::span<const ImpulseResponse> irs,
               const SimulationConfig& config, const AudioLoader& loader) {
  const int rate = config.sample_rate_hz;
  std::vector<std::pair<std::size_t, AudioBuffer>> placed;
  placed.reserve(plan.entries.size());
  std::size_t total = 0;
  for (const auto& e : plan.entries) {
    AudioBuffer src = loader(pool.at(e.utterance_id));
    if (src.sample_rate_hz != rate)
      throw ConfigError("utterance '" + e.utterance_id + "' has sample rate " +
                        std::to_string(src.sample_rate_hz));
    if (e.gain_linear != 1.0)
      for (double& x : src.samples) x *= e.gain_linear;
    if (config.far_field && e.impulse_response_id) {
      const ImpulseResponse* ir = find_ir(irs, *e.impulse_response_id);
      if (ir == nullptr)
        throw ConfigError("unknown impulse response '" + *e.impulse_response_id + "'");
      src = convolve(src, *ir);
    }
    const auto offset = static_cast<std::size_t>(std::llround(e.start_offset_s * rate));
    total = std::max(total, offset + src.samples.size());
    placed.emplace_back(offset, std::move(src));
  }

  Mixture mix;
  mix.plan = plan;
  mix.turns = plan_turns(plan, pool);
  mix.audio.sample_rate_hz = rate;
  mix.audio.samples.assign(total, 0.0);
  for (const auto& [offset, src] : placed)
    for (std::size_t i = 0; i < src.samples.size(); ++i)
      mix.audio.samples[offset + i] += src.samples[i];

  double peak = 0.0;
  for (double x : mix.audio.samples) peak = std::max(peak, std::abs(x));
  if (peak > 1.0) {
    for (double& x : mix.audio.samples) x /= peak;
    mix.peak_normalization_gain = 1.0 / peak;
  }
  if (config.max_duration_s &&
      mix.audio.duration_s() > *config.max_duration_s + 1.0 / rate)
    throw InfeasibleError(plan.mixture_id + ": rendered duration " +
                          std::to_string(mix.audio.duration_s()) +
                          " s exceeds max_duration_s");
  return mix;
}

Mixture render(const MixturePlan& plan, const Pool& pool,
               std::span<const ImpulseResponse> irs, const SimulationConfig& config) {
  const int rate = config.sample_rate_hz;
  return render(plan, pool, irs, config,
                [rate](const Utterance& u) { return load_audio(u, rate); });
}

MixturePlan simulate_plan(const Pool& pool, std::span<const ImpulseResponse> irs,
                          const SimulationConfig& config, const EnergyFn& energy,
                          std::uint64_t master_seed, std::uint64_t mixture_index) {
  Rng rng(mixture_stream_seed(master_seed, mixture_index));
  return sample_plan(pool, irs, config, energy, rng, mixture_id(mixture_index));
}

Mixture simulate(const Pool& pool, std::span<const ImpulseResponse> irs,
                 const SimulationConfig& config, const EnergyFn& energy,
                 const AudioLoader& loader, std::uint64_t master_seed,
                 std::uint64_t mixture_index) {
  return render(simulate_plan(pool, irs, config, energy, master_seed, mixture_index),
                pool, irs, config, loader);
}

}  // namespace mtsim
