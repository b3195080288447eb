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

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtsim/corpus.h"
#include "mtsim/rng.h"
#include "mtsim/turn.h"

namespace mtsim {

enum class CountMode { kFixed, kUniform };
enum class EnergyMode { kIntact, kRatioRange };

struct SimulationConfig {
  int max_speakers = 2;
  CountMode count_mode = CountMode::kFixed;
  double min_delay_s = 0.5;
  EnergyMode energy_mode = EnergyMode::kIntact;
  double ratio_lo_db = -5.0;
  double ratio_hi_db = 5.0;
  bool far_field = false;
  // nullopt disables the length filter.
  std::optional<double> max_duration_s = 30.0;
  bool allow_same_speaker = false;
  int max_simultaneous = 2;
  int sample_rate_hz = kDefaultSampleRate;
  int max_retries = 100;

  bool operator==(const SimulationConfig&) const = default;
};

// Throws ConfigError when an invariant does not hold.
void validate(const SimulationConfig& config);

// "librispeechmix2": two distinct speakers, delay in (0.5, len(utt_1)),
// energies untouched, close-talk, no length filter.
// "libricss_style": 1..5 utterances, same speaker allowed without
// self-overlap, energy ratio in [-5, 5] dB, far field, 30 s length filter.
SimulationConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct PlanEntry {
  std::string utterance_id;
  std::string speaker_id;
  double start_offset_s = 0.0;
  double duration_s = 0.0;
  double gain_linear = 1.0;
  // Target energy ratio (reference over this entry) in dB; empty for the
  // reference entry and in intact mode.
  std::optional<double> energy_ratio_db;
  std::optional<std::string> impulse_response_id;

  double end_s() const { return start_offset_s + duration_s; }
  bool operator==(const PlanEntry&) const = default;
};

struct MixturePlan {
  std::string mixture_id;
  std::vector<PlanEntry> entries;
  std::size_t reference_index = 0;
  // Attempts consumed before the plan was accepted (1 = first draw).
  int attempts = 1;

  bool operator==(const MixturePlan&) const = default;
};

struct Mixture {
  MixturePlan plan;
  AudioBuffer audio;
  std::vector<Turn> turns;
  double peak_normalization_gain = 1.0;
};

// Mean of squared samples. Throws ConfigError on an empty buffer.
double measure_energy(const AudioBuffer& audio);

// Gain g such that 10*log10(ref / (g^2 * other)) == ratio_db.
double gain_for_energy_ratio(double ref_energy, double other_energy,
                             double ratio_db);

// Full linear convolution, length len(source) + len(ir) - 1. Short inputs
// use the direct sum; longer ones an FFT product.
AudioBuffer convolve(const AudioBuffer& source, const ImpulseResponse& ir);

using EnergyFn = std::function<double(const Utterance&)>;
using AudioLoader = std::function<AudioBuffer(const Utterance&)>;

// Thread-safe memo of dry-utterance energies read from disk.
class EnergyCache {
 public:
  explicit EnergyCache(int sample_rate_hz) : rate_(sample_rate_hz) {}
  double operator()(const Utterance& utt);

 private:
  int rate_;
  std::mutex mutex_;
  std::map<std::string, double, std::less<>> energies_;
};

// Half-open interval helpers shared by the sampler, tests and reports.
int max_concurrent(std::span<const Turn> turns);
// Fraction of [0, duration_s) covered by two or more turns.
double overlap_ratio(std::span<const Turn> turns, double duration_s);

std::string mixture_id(std::uint64_t mixture_index);

// Draws a plan; `energy` is consulted only in ratio-range mode and only for
// the entries of the accepted draw. Throws InfeasibleError when the pool
// cannot supply the configured speaker count or retries run out.
MixturePlan sample_plan(const Pool& pool, std::span<const ImpulseResponse> irs,
                        const SimulationConfig& config, const EnergyFn& energy,
                        Rng& rng, std::string mixture_id = "mix");

// One turn per plan entry, ending at the dry-source end.
std::vector<Turn> plan_turns(const MixturePlan& plan, const Pool& pool);

// Expected rendered length from metadata (dry durations plus IR tails).
double planned_duration_s(const MixturePlan& plan,
                          std::span<const ImpulseResponse> irs,
                          const SimulationConfig& config);

Mixture render(const MixturePlan& plan, const Pool& pool,
               std::span<const ImpulseResponse> irs,
               const SimulationConfig& config, const AudioLoader& loader);
Mixture render(const MixturePlan& plan, const Pool& pool,
               std::span<const ImpulseResponse> irs,
               const SimulationConfig& config);

// Pure function of (pool, irs, config, master_seed, mixture_index).
MixturePlan simulate_plan(const Pool& pool, std::span<const ImpulseResponse> irs,
                          const SimulationConfig& config, const EnergyFn& energy,
                          std::uint64_t master_seed, std::uint64_t mixture_index);
Mixture simulate(const Pool& pool, std::span<const ImpulseResponse> irs,
                 const SimulationConfig& config, const EnergyFn& energy,
                 const AudioLoader& loader, std::uint64_t master_seed,
                 std::uint64_t mixture_index);

}  // namespace mtsim
