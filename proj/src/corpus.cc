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

#include "mtsim/corpus.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "mtsim/error.h"
#include "mtsim/simulate.h"
#include "mtsim/text.h"
#include "mtsim/wav.h"

namespace mtsim {
namespace {

using nlohmann::json;

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "WARNING: " << msg << '\n';
  };
  return handler;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

const json& require(const json& obj, const char* key, json::value_t type,
                    const std::string& src, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(src, line, std::string("missing required field '") + key + "'");
  const bool ok = type == json::value_t::number_float ? it->is_number()
                                                      : it->type() == type;
  if (!ok) throw ParseError(src, line, std::string("field '") + key + "' has wrong type");
  return *it;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& audio) {
  std::filesystem::path p(audio);
  if (p.is_relative()) p = base / p;
  return std::filesystem::absolute(p).lexically_normal();
}

// Calls fn(line_number, object) for every non-blank line.
template <typename Fn>
void for_each_record(std::string_view contents, const std::string& src, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(src, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(src, line_no, "record is not an object");
    fn(line_no, obj);
  }
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  std::swap(warning_handler(), handler);
  return handler;
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

void check_utterance(const Utterance& utt) {
  if (utt.id.empty()) throw ConfigError("utterance id is empty");
  if (!(utt.duration_s > 0.0) || !std::isfinite(utt.duration_s))
    throw ConfigError("utterance '" + utt.id + "': duration_s must be positive");
  if (tokenize(utt.transcript).empty())
    throw ConfigError("utterance '" + utt.id + "': transcript has no tokens");
}

void Pool::add(Utterance utt) {
  check_utterance(utt);
  if (by_id_.contains(utt.id))
    throw ConfigError("duplicate utterance id '" + utt.id + "'");
  const std::size_t index = utts_.size();
  by_id_.emplace(utt.id, index);
  auto [it, inserted] = by_speaker_.try_emplace(utt.speaker_id);
  if (inserted) speakers_.push_back(utt.speaker_id);
  it->second.push_back(index);
  utts_.push_back(std::move(utt));
}

const Utterance* Pool::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &utts_[it->second];
}

const Utterance& Pool::at(std::string_view id) const {
  const Utterance* u = find(id);
  if (u == nullptr) throw ConfigError("unknown utterance id '" + std::string(id) + "'");
  return *u;
}

const std::vector<std::size_t>& Pool::speaker_utterances(
    std::string_view speaker) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = by_speaker_.find(speaker);
  return it == by_speaker_.end() ? kEmpty : it->second;
}

Pool parse_manifest(std::string_view contents, const std::string& source_name,
                    const std::filesystem::path& base_dir) {
  Pool pool;
  for_each_record(contents, source_name, [&](std::size_t line, const json& obj) {
    Utterance utt;
    utt.id = require(obj, "id", json::value_t::string, source_name, line);
    utt.speaker_id = require(obj, "speaker", json::value_t::string, source_name, line);
    utt.audio_path = resolve(
        base_dir, require(obj, "audio", json::value_t::string, source_name, line));
    utt.duration_s = require(obj, "duration_s", json::value_t::number_float,
                             source_name, line);
    utt.transcript = require(obj, "text", json::value_t::string, source_name, line);
    try {
      pool.add(std::move(utt));
    } catch (const ParseError&) {
      throw;
    } catch (const ConfigError& e) {
      throw ParseError(source_name, line, e.what());
    }
  });
  return pool;
}

Pool load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.string(), path.parent_path());
}

void write_manifest(const Pool& pool, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& u : pool.utterances()) {
    json obj = {{"id", u.id},
                {"speaker", u.speaker_id},
                {"audio", u.audio_path.string()},
                {"duration_s", u.duration_s},
                {"text", u.transcript}};
    os << obj.dump() << '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << os.str();
  if (!out) throw IoError("write failed: " + path.string());
}

AudioBuffer load_audio(const Utterance& utt, int expected_rate_hz) {
  WavData wav = read_wav(utt.audio_path);
  if (wav.channels != 1)
    throw IoError(utt.audio_path.string() + ": expected mono audio, found " +
                  std::to_string(wav.channels) + " channels");
  if (wav.sample_rate_hz != expected_rate_hz)
    throw ConfigError(utt.audio_path.string() + ": sample rate " +
                      std::to_string(wav.sample_rate_hz) + " Hz, expected " +
                      std::to_string(expected_rate_hz) + " Hz (no resampling)");
  AudioBuffer buf{std::move(wav.samples), wav.sample_rate_hz};
  const double mismatch = std::abs(buf.duration_s() - utt.duration_s);
  const double frame = 1.0 / expected_rate_hz;
  if (mismatch > 0.050 + frame) {
    throw IoError(utt.audio_path.string() + ": audio lasts " +
                  std::to_string(buf.duration_s()) + " s but manifest says " +
                  std::to_string(utt.duration_s) + " s");
  }
  if (mismatch > 0.010 + frame) {
    warn("utterance '" + utt.id + "': duration differs from manifest by " +
         std::to_string(mismatch * 1000.0) + " ms");
  }
  return buf;
}

std::vector<ImpulseResponse> load_ir_manifest(const std::filesystem::path& path,
                                              int expected_rate_hz) {
  const std::string src = path.string();
  std::vector<ImpulseResponse> irs;
  std::map<std::string, bool, std::less<>> seen;
  for_each_record(read_text_file(path), src, [&](std::size_t line, const json& obj) {
    ImpulseResponse ir;
    ir.id = require(obj, "id", json::value_t::string, src, line);
    const auto audio = resolve(path.parent_path(),
                               require(obj, "audio", json::value_t::string, src, line));
    if (!seen.emplace(ir.id, true).second)
      throw ParseError(src, line, "duplicate impulse response id '" + ir.id + "'");
    WavData wav = read_wav(audio);
    if (wav.channels != 1)
      throw IoError(audio.string() + ": impulse response must be mono");
    if (wav.sample_rate_hz != expected_rate_hz)
      throw ConfigError(audio.string() + ": sample rate " +
                        std::to_string(wav.sample_rate_hz) + " Hz, expected " +
                        std::to_string(expected_rate_hz) + " Hz");
    if (wav.samples.empty()) throw IoError(audio.string() + ": empty impulse response");
    ir.samples = std::move(wav.samples);
    ir.sample_rate_hz = wav.sample_rate_hz;
    irs.push_back(std::move(ir));
  });
  return irs;
}

std::string_view to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::kUnreadable: return "unreadable";
    case IssueKind::kRateMismatch: return "rate_mismatch";
    case IssueKind::kMultiChannel: return "multi_channel";
    case IssueKind::kDurationMismatch: return "duration_mismatch";
    case IssueKind::kZeroEnergy: return "zero_energy";
  }
  return "unknown";
}

ValidationReport validate_pool(const Pool& pool, int rate_hz) {
  ValidationReport report;
  for (const auto& utt : pool.utterances()) {
    ++report.checked;
    WavData wav;
    try {
      wav = read_wav(utt.audio_path);
    } catch (const Error& e) {
      report.issues.push_back({utt.id, IssueKind::kUnreadable, e.what()});
      continue;
    }
    if (wav.channels != 1) {
      report.issues.push_back({utt.id, IssueKind::kMultiChannel,
                               std::to_string(wav.channels) + " channels"});
      continue;
    }
    if (wav.sample_rate_hz != rate_hz) {
      report.issues.push_back({utt.id, IssueKind::kRateMismatch,
                               std::to_string(wav.sample_rate_hz) + " Hz"});
      continue;
    }
    const double seconds = static_cast<double>(wav.samples.size()) / rate_hz;
    if (std::abs(seconds - utt.duration_s) > 0.050 + 1.0 / rate_hz) {
      report.issues.push_back({utt.id, IssueKind::kDurationMismatch,
                               std::to_string(seconds) + " s on disk"});
    }
    if (wav.samples.empty() ||
        measure_energy(AudioBuffer{std::move(wav.samples), rate_hz}) == 0.0) {
      report.issues.push_back({utt.id, IssueKind::kZeroEnergy, "all-zero audio"});
    }
  }
  return report;
}

}  // namespace mtsim
