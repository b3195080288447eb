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

#include <filesystem>
#include <span>
#include <vector>

namespace mtsim {

enum class SampleFormat { kPcm16, kFloat32 };

struct WavData {
  int sample_rate_hz = 0;
  int channels = 0;
  SampleFormat format = SampleFormat::kPcm16;
  // Interleaved, scaled to [-1, 1): PCM16 values are divided by 32768.
  std::vector<double> samples;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / channels : 0;
  }
};

// Throws IoError on unreadable or unsupported containers.
WavData read_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM. Samples are rounded to nearest after scaling by
// 32768 and clamped to the int16 range.
void write_wav_pcm16(const std::filesystem::path& path,
                     std::span<const double> samples, int sample_rate_hz);

void write_wav_float32(const std::filesystem::path& path,
                       std::span<const double> samples, int sample_rate_hz);

}  // namespace mtsim
