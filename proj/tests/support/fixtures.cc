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

#include "fixtures.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mtsim/wav.h"

namespace mtsim::testing {
namespace {

const char* const kVocab[] = {"the", "a", "of", "speech", "model", "turn", "time",
                              "we", "said", "and", "then", "there", "was", "one",
                              "two", "three", "four", "five", "is", "it"};

}  // namespace

TempDir::TempDir(const std::string& prefix) {
  std::string tmpl = (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<double> noise_signal(std::size_t samples, double rms, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(samples);
  double prev = 0.0;
  for (auto& x : out) {
    prev = 0.6 * prev + dist(gen);
    x = prev;
  }
  double energy = 0.0;
  for (double x : out) energy += x * x;
  const double scale = samples ? rms / std::sqrt(energy / samples) : 0.0;
  for (auto& x : out) x = std::clamp(x * scale, -0.99, 0.99);
  return out;
}

ImpulseResponse synthetic_ir(const std::string& id, double length_s, double rt60_s,
                             int rate_hz, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(length_s * rate_hz);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  ImpulseResponse ir{id, std::vector<double>(std::max<std::size_t>(n, 1)), rate_hz};
  // 60 dB decay over rt60: amplitude factor 10^(-3 t / rt60).
  for (std::size_t i = 0; i < ir.samples.size(); ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    ir.samples[i] = 0.3 * dist(gen) * std::pow(10.0, -3.0 * t / rt60_s);
  }
  ir.samples[0] = 1.0;
  return ir;
}

std::filesystem::path write_pool(const std::filesystem::path& dir, const PoolSpec& spec) {
  std::filesystem::create_directories(dir / "audio");
  std::mt19937_64 gen(spec.seed);
  std::uniform_real_distribution<double> dur(spec.min_duration_s, spec.max_duration_s);
  std::uniform_real_distribution<double> level(0.02, 0.2);
  std::ostringstream manifest;
  int k = 0;
  for (int s = 0; s < spec.speakers; ++s) {
    for (int u = 0; u < spec.utterances_per_speaker; ++u, ++k) {
      const auto samples = static_cast<std::size_t>(std::round(dur(gen) * spec.rate_hz));
      const std::string id = "spk" + std::to_string(s) + "-utt" + std::to_string(u);
      const auto rel = std::filesystem::path("audio") / (id + ".wav");
      write_wav_pcm16(dir / rel, noise_signal(samples, level(gen), spec.seed * 1000 + k),
                      spec.rate_hz);
      nlohmann::json rec = {{"id", id},
                            {"speaker", "spk" + std::to_string(s)},
                            {"audio", rel.string()},
                            {"duration_s", static_cast<double>(samples) / spec.rate_hz},
                            {"text", random_text(3 + k % 6, spec.seed * 7919 + k)}};
      manifest << rec.dump() << '\n';
    }
  }
  const auto path = dir / "pool.jsonl";
  std::ofstream(path) << manifest.str();
  return path;
}

std::filesystem::path write_irs(const std::filesystem::path& dir, int count, double length_s,
                                int rate_hz, std::uint64_t seed) {
  std::filesystem::create_directories(dir / "irs");
  std::ostringstream manifest;
  for (int i = 0; i < count; ++i) {
    const std::string id = "ir" + std::to_string(i);
    const auto ir = synthetic_ir(id, length_s, 0.3 + 0.1 * i, rate_hz, seed + i);
    const auto rel = std::filesystem::path("irs") / (id + ".wav");
    write_wav_float32(dir / rel, ir.samples, rate_hz);
    manifest << nlohmann::json{{"id", id}, {"audio", rel.string()}}.dump() << '\n';
  }
  const auto path = dir / "irs.jsonl";
  std::ofstream(path) << manifest.str();
  return path;
}

MetadataPool metadata_pool(const PoolSpec& spec) {
  MetadataPool out;
  std::mt19937_64 gen(spec.seed);
  std::uniform_real_distribution<double> dur(spec.min_duration_s, spec.max_duration_s);
  std::uniform_real_distribution<double> energy(1e-4, 5e-2);
  int k = 0;
  for (int s = 0; s < spec.speakers; ++s) {
    for (int u = 0; u < spec.utterances_per_speaker; ++u, ++k) {
      Utterance utt;
      utt.id = "s" + std::to_string(s) + "u" + std::to_string(u);
      utt.speaker_id = "s" + std::to_string(s);
      utt.audio_path = "/nonexistent/" + utt.id + ".wav";
      utt.duration_s = dur(gen);
      utt.transcript = random_text(2 + k % 7, spec.seed * 31 + k);
      out.energy[utt.id] = energy(gen);
      out.pool.add(std::move(utt));
    }
  }
  return out;
}

std::string random_text(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kVocab[pick(gen)];
  }
  return out;
}

std::vector<Turn> random_turns(std::size_t count, int max_active, int speakers,
                               std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> half_steps(1, 8);
  std::uniform_int_distribution<int> gap(0, 3);
  std::uniform_int_distribution<int> words(1, 6);
  std::vector<Turn> out;
  std::vector<double> ends;
  std::map<std::string, double> speaker_end;
  double start = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> sorted = ends;
    std::sort(sorted.rbegin(), sorted.rend());
    const std::size_t k = static_cast<std::size_t>(max_active) - 1;
    const double floor = sorted.size() > k ? sorted[k] : 0.0;
    start = std::max(start, floor) + 0.5 * gap(gen);
    std::vector<std::string> free;
    for (int s = 0; s < speakers; ++s) {
      const std::string name(1, static_cast<char>('A' + s));
      auto it = speaker_end.find(name);
      if (it == speaker_end.end() || it->second <= start) free.push_back(name);
    }
    if (free.empty()) {
      double earliest = std::numeric_limits<double>::infinity();
      for (const auto& [name, end] : speaker_end) earliest = std::min(earliest, end);
      start = earliest;
      for (const auto& [name, end] : speaker_end)
        if (end <= start) free.push_back(name);
    }
    const std::string speaker = free[gen() % free.size()];
    const double end = start + 0.5 * half_steps(gen);
    out.push_back({speaker, start, end, random_text(words(gen), gen())});
    ends.push_back(end);
    speaker_end[speaker] = end;
  }
  std::shuffle(out.begin(), out.end(), gen);
  return out;
}

}  // namespace mtsim::testing
