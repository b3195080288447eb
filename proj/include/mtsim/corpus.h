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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtsim {

inline constexpr int kDefaultSampleRate = 16000;

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::filesystem::path audio_path;
  double duration_s = 0.0;
  std::string transcript;

  bool operator==(const Utterance&) const = default;
};

struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kDefaultSampleRate;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  bool operator==(const AudioBuffer&) const = default;
};

struct ImpulseResponse {
  std::string id;
  std::vector<double> samples;
  int sample_rate_hz = kDefaultSampleRate;
};

// Utterance pool keyed by id. Iteration order is manifest order.
class Pool {
 public:
  Pool() = default;

  // Throws ConfigError on a duplicate id or an invalid record.
  void add(Utterance utt);

  const std::vector<Utterance>& utterances() const { return utts_; }
  std::size_t size() const { return utts_.size(); }
  bool empty() const { return utts_.empty(); }

  const Utterance& at(std::string_view id) const;
  const Utterance* find(std::string_view id) const;

  // speaker id -> indices into utterances(), speakers in first-seen order.
  const std::vector<std::string>& speakers() const { return speakers_; }
  const std::vector<std::size_t>& speaker_utterances(
      std::string_view speaker) const;

  bool operator==(const Pool& other) const { return utts_ == other.utts_; }

 private:
  std::vector<Utterance> utts_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<std::string> speakers_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_speaker_;
};

// Checks the Utterance invariants; throws ConfigError naming the field.
void check_utterance(const Utterance& utt);

// One JSON object per line: id, speaker, audio, duration_s, text. Blank lines
// are skipped. Relative audio paths resolve against the manifest directory.
Pool load_manifest(const std::filesystem::path& path);
Pool parse_manifest(std::string_view contents, const std::string& source_name,
                    const std::filesystem::path& base_dir);
void write_manifest(const Pool& pool, const std::filesystem::path& path);

// Decodes a mono RIFF/WAVE file (16-bit PCM or 32-bit float) and checks
// it against the utterance's duration. A mismatch above 10 ms emits a
// warning; above 50 ms it is an error.
AudioBuffer load_audio(const Utterance& utt, int expected_rate_hz);

// Impulse-response manifest: one JSON object per line with id and audio.
std::vector<ImpulseResponse> load_ir_manifest(const std::filesystem::path& path,
                                              int expected_rate_hz);

enum class IssueKind { kUnreadable, kRateMismatch, kMultiChannel,
                       kDurationMismatch, kZeroEnergy };

std::string_view to_string(IssueKind kind);

struct PoolIssue {
  std::string utterance_id;
  IssueKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<PoolIssue> issues;
  std::size_t checked = 0;
  bool ok() const { return issues.empty(); }
};

ValidationReport validate_pool(const Pool& pool, int rate_hz);

// Receives non-fatal diagnostics. The default handler writes to stderr.
using WarningHandler = std::function<void(std::string_view)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace mtsim
