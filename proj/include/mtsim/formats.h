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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtsim/arrange.h"
#include "mtsim/metrics.h"
#include "mtsim/simulate.h"

namespace mtsim {

enum class ArrangementSelection { kOverlap, kSpeaker, kBoth };

struct TargetOptions {
  std::size_t n_channels = 2;
  bool emit_cot = false;
  ArrangementSelection arrangement = ArrangementSelection::kOverlap;
};

// Everything a simulate run reads from a config file.
struct RunSettings {
  SimulationConfig simulation;
  TargetOptions targets;
};

// Applies the keys of a JSON config object on top of `base`. A "preset" key
// replaces the simulation part first; every other key overrides one field.
// Unknown keys are a ConfigError.
RunSettings apply_config(const nlohmann::json& obj, RunSettings base);
RunSettings load_config(const std::filesystem::path& path, RunSettings base);
nlohmann::json to_json(const SimulationConfig& config);

nlohmann::json to_json(const Turn& turn);
nlohmann::json to_json(const EditStats& stats);
nlohmann::json to_json(const CorpusReport& report);
nlohmann::json to_json(const TurnConfusion& confusion);

// One targets.jsonl record. `peak_gain` is null for metadata-only runs.
nlohmann::json make_target_record(const MixturePlan& plan, const std::vector<Turn>& turns,
                                  double duration_s, std::optional<double> peak_gain,
                                  const TargetOptions& options);

struct ReferenceRecord {
  std::string id;
  std::string partition;
  std::vector<Turn> turns;
};

struct HypothesisRecord {
  std::string id;
  std::vector<std::string> channels;
};

// Reads id, turns and the optional partition of each targets record.
std::vector<ReferenceRecord> load_references(const std::filesystem::path& path);
std::vector<ReferenceRecord> parse_references(std::string_view contents,
                                              const std::string& source_name);
std::vector<HypothesisRecord> load_hypotheses(const std::filesystem::path& path);
std::vector<HypothesisRecord> parse_hypotheses(std::string_view contents,
                                               const std::string& source_name);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace mtsim
