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

// Synthetic corpora for tests: deterministic noise-like utterances, an
// exponentially decaying noise impulse-response generator and temporary
// directories.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mtsim/corpus.h"
#include "mtsim/turn.h"

namespace mtsim::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "mtsim-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Deterministic band-limited noise at the given RMS.
std::vector<double> noise_signal(std::size_t samples, double rms, std::uint64_t seed);

// Exponentially decaying white noise with a unit direct-path tap at 0.
ImpulseResponse synthetic_ir(const std::string& id, double length_s, double rt60_s,
                             int rate_hz, std::uint64_t seed);

struct PoolSpec {
  int speakers = 4;
  int utterances_per_speaker = 3;
  double min_duration_s = 1.0;
  double max_duration_s = 3.0;
  int rate_hz = 16000;
  std::uint64_t seed = 1;
};

// Writes 16-bit PCM files plus pool.jsonl under `dir`; returns the
// manifest path.
std::filesystem::path write_pool(const std::filesystem::path& dir, const PoolSpec& spec);

// Writes `count` synthetic IRs plus irs.jsonl under `dir`.
std::filesystem::path write_irs(const std::filesystem::path& dir, int count, double length_s,
                                int rate_hz, std::uint64_t seed);

// In-memory pool with fake audio paths and known energies, for plan-level
// tests that never touch audio.
struct MetadataPool {
  Pool pool;
  std::map<std::string, double> energy;
};

MetadataPool metadata_pool(const PoolSpec& spec);

// Random transcript of `n` words from a small vocabulary.
std::string random_text(std::size_t n, std::uint64_t seed);

// `count` turns on a half-second grid with at most `max_active` active at
// any instant, returned in shuffled order. Speakers come from A..(A+speakers-1)
// and never overlap themselves.
std::vector<Turn> random_turns(std::size_t count, int max_active, int speakers,
                               std::uint64_t seed);

}  // namespace mtsim::testing
