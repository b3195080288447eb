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

#include "mtsim/formats.h"

#include <fstream>
#include <iterator>
#include <set>

#include "mtsim/error.h"

namespace mtsim {
namespace {

using nlohmann::json;

std::string kind_name(CountMode m) { return m == CountMode::kFixed ? "fixed" : "uniform"; }
std::string kind_name(EnergyMode m) {
  return m == EnergyMode::kIntact ? "intact" : "ratio_range";
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

template <typename Fn>
void for_each_line(std::string_view contents, const std::string& src, Fn&& fn) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= contents.size()) {
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    const std::string_view line = contents.substr(pos, eol - pos);
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
    try {
      fn(obj);
    } catch (const json::exception& e) {
      throw ParseError(src, line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const ConfigError& e) {
      throw ParseError(src, line_no, e.what());
    }
  }
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(std::string("missing required field '") + key + "'");
  return *it;
}

json channels_json(const ChannelTargets& targets, const std::vector<Turn>& turns,
                   bool emit_cot, json& texts) {
  json channels = json::array();
  texts = json::array();
  for (std::size_t c = 0; c < targets.channels.size(); ++c) {
    channels.push_back(targets.channels[c]);
    texts.push_back(join(serialize_channel(targets.channel_turns(turns, c), emit_cot)));
  }
  return channels;
}

}  // namespace

RunSettings apply_config(const json& obj, RunSettings base) {
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  if (auto it = obj.find("preset"); it != obj.end())
    base.simulation = preset(get_as<std::string>(*it, "preset"));
  auto& s = base.simulation;
  for (const auto& [key, v] : obj.items()) {
    if (key == "preset") continue;
    if (key == "max_speakers") {
      s.max_speakers = get_as<int>(v, key);
    } else if (key == "count_mode") {
      const auto m = get_as<std::string>(v, key);
      if (m == "fixed") s.count_mode = CountMode::kFixed;
      else if (m == "uniform") s.count_mode = CountMode::kUniform;
      else throw ConfigError("count_mode must be 'fixed' or 'uniform'");
    } else if (key == "min_delay_s") {
      s.min_delay_s = get_as<double>(v, key);
    } else if (key == "energy_mode") {
      const auto m = get_as<std::string>(v, key);
      if (m == "intact") s.energy_mode = EnergyMode::kIntact;
      else if (m == "ratio_range") s.energy_mode = EnergyMode::kRatioRange;
      else throw ConfigError("energy_mode must be 'intact' or 'ratio_range'");
    } else if (key == "ratio_db") {
      const auto r = get_as<std::vector<double>>(v, key);
      if (r.size() != 2) throw ConfigError("ratio_db must be [lo_db, hi_db]");
      s.ratio_lo_db = r[0];
      s.ratio_hi_db = r[1];
    } else if (key == "far_field") {
      s.far_field = get_as<bool>(v, key);
    } else if (key == "max_duration_s") {
      if (v.is_null()) s.max_duration_s.reset();
      else s.max_duration_s = get_as<double>(v, key);
    } else if (key == "allow_same_speaker") {
      s.allow_same_speaker = get_as<bool>(v, key);
    } else if (key == "max_simultaneous") {
      s.max_simultaneous = get_as<int>(v, key);
    } else if (key == "sample_rate_hz") {
      s.sample_rate_hz = get_as<int>(v, key);
    } else if (key == "max_retries") {
      s.max_retries = get_as<int>(v, key);
    } else if (key == "n_channels") {
      const int n = get_as<int>(v, key);
      if (n < 1) throw ConfigError("n_channels must be >= 1");
      base.targets.n_channels = static_cast<std::size_t>(n);
    } else if (key == "emit_cot") {
      base.targets.emit_cot = get_as<bool>(v, key);
    } else if (key == "arrangement") {
      const auto m = get_as<std::string>(v, key);
      if (m == "overlap") base.targets.arrangement = ArrangementSelection::kOverlap;
      else if (m == "speaker") base.targets.arrangement = ArrangementSelection::kSpeaker;
      else if (m == "both") base.targets.arrangement = ArrangementSelection::kBoth;
      else throw ConfigError("arrangement must be 'overlap', 'speaker' or 'both'");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  validate(s);
  return base;
}

RunSettings load_config(const std::filesystem::path& path, RunSettings base) {
  json obj;
  try {
    obj = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return apply_config(obj, std::move(base));
}

json to_json(const SimulationConfig& c) {
  return {{"max_speakers", c.max_speakers},
          {"count_mode", kind_name(c.count_mode)},
          {"min_delay_s", c.min_delay_s},
          {"energy_mode", kind_name(c.energy_mode)},
          {"ratio_db", {c.ratio_lo_db, c.ratio_hi_db}},
          {"far_field", c.far_field},
          {"max_duration_s", c.max_duration_s ? json(*c.max_duration_s) : json(nullptr)},
          {"allow_same_speaker", c.allow_same_speaker},
          {"max_simultaneous", c.max_simultaneous},
          {"sample_rate_hz", c.sample_rate_hz},
          {"max_retries", c.max_retries}};
}

json to_json(const Turn& t) {
  return {{"speaker", t.speaker}, {"start_s", t.start_s}, {"end_s", t.end_s}, {"text", t.text}};
}

json to_json(const EditStats& s) {
  const auto wer = s.wer();
  return {{"wer", wer ? json(*wer) : json(nullptr)},
          {"substitutions", s.substitutions},
          {"insertions", s.insertions},
          {"deletions", s.deletions},
          {"hits", s.hits},
          {"ref_words", s.ref_words}};
}

json to_json(const CorpusReport& r) {
  json parts = json::array();
  for (const auto& p : r.partitions) {
    json j = to_json(p.stats);
    j["name"] = p.name;
    j["utterances"] = p.utterances;
    parts.push_back(std::move(j));
  }
  json overall = to_json(r.overall);
  overall["utterances"] = r.scored;
  return {{"overall", overall},
          {"partitions", parts},
          {"skipped", r.skipped},
          {"missing_hypotheses", r.missing_hypotheses},
          {"empty_references", r.empty_references},
          {"empty_reference_insertions", r.empty_reference_insertions}};
}

json to_json(const TurnConfusion& c) {
  json rows = json::array();
  const int last_col = c.max_estimated();
  for (int a : c.actual_values()) {
    json counts = json::object(), pct = json::object();
    for (int e = 0; e <= std::max(last_col, a); ++e) {
      if (c.count(a, e) == 0) continue;
      counts[std::to_string(e)] = c.count(a, e);
      pct[std::to_string(e)] = c.percent(a, e);
    }
    rows.push_back({{"actual", a}, {"total", c.row_total(a)}, {"counts", counts},
                    {"percent", pct}, {"accuracy", c.percent(a, a)}});
  }
  return {{"rows", rows}, {"total", c.total()}, {"accuracy", c.accuracy()}};
}

json make_target_record(const MixturePlan& plan, const std::vector<Turn>& turns,
                        double duration_s, std::optional<double> peak_gain,
                        const TargetOptions& options) {
  json sources = json::array();
  for (const auto& e : plan.entries) {
    json s = {{"utterance_id", e.utterance_id},
              {"speaker", e.speaker_id},
              {"start_s", e.start_offset_s},
              {"gain", e.gain_linear}};
    if (e.energy_ratio_db) s["energy_ratio_db"] = *e.energy_ratio_db;
    if (e.impulse_response_id) s["ir"] = *e.impulse_response_id;
    sources.push_back(std::move(s));
  }
  json turn_list = json::array();
  for (const auto& t : turns) turn_list.push_back(to_json(t));

  json rec = {{"id", plan.mixture_id},
              {"duration_s", duration_s},
              {"peak_gain", peak_gain ? json(*peak_gain) : json(nullptr)},
              {"reference_index", plan.reference_index},
              {"sources", sources},
              {"turns", turn_list}};

  const std::size_t n = options.n_channels;
  json texts;
  switch (options.arrangement) {
    case ArrangementSelection::kOverlap:
    case ArrangementSelection::kBoth: {
      rec["arrangement"] = "overlap";
      rec["channels"] =
          channels_json(arrange_overlap_based(turns, n), turns, options.emit_cot, texts);
      rec["channel_texts"] = texts;
      break;
    }
    case ArrangementSelection::kSpeaker: {
      rec["arrangement"] = "speaker";
      rec["channels"] =
          channels_json(arrange_speaker_based(turns, n), turns, options.emit_cot, texts);
      rec["channel_texts"] = texts;
      break;
    }
  }
  if (options.arrangement == ArrangementSelection::kBoth) {
    try {
      rec["speaker_channels"] =
          channels_json(arrange_speaker_based(turns, n), turns, options.emit_cot, texts);
      rec["speaker_channel_texts"] = texts;
    } catch (const ArrangementError&) {
      rec["speaker_channels"] = nullptr;
      rec["speaker_channel_texts"] = nullptr;
    }
  }
  return rec;
}

std::vector<ReferenceRecord> parse_references(std::string_view contents,
                                              const std::string& src) {
  std::vector<ReferenceRecord> out;
  std::set<std::string> ids;
  for_each_line(contents, src, [&](const json& obj) {
    ReferenceRecord rec;
    rec.id = field(obj, "id").get<std::string>();
    if (!ids.insert(rec.id).second) throw ConfigError("duplicate id '" + rec.id + "'");
    if (auto it = obj.find("partition"); it != obj.end() && !it->is_null())
      rec.partition = it->get<std::string>();
    const json& turns = field(obj, "turns");
    if (!turns.is_array()) throw ConfigError("'turns' must be an array");
    for (const auto& t : turns) {
      Turn turn{field(t, "speaker").get<std::string>(), field(t, "start_s").get<double>(),
                field(t, "end_s").get<double>(), field(t, "text").get<std::string>()};
      if (!(turn.start_s < turn.end_s)) throw ConfigError("turn with start_s >= end_s");
      rec.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<ReferenceRecord> load_references(const std::filesystem::path& path) {
  return parse_references(read_file(path), path.string());
}

std::vector<HypothesisRecord> parse_hypotheses(std::string_view contents,
                                               const std::string& src) {
  std::vector<HypothesisRecord> out;
  std::set<std::string> ids;
  for_each_line(contents, src, [&](const json& obj) {
    HypothesisRecord rec;
    rec.id = field(obj, "id").get<std::string>();
    if (!ids.insert(rec.id).second) throw ConfigError("duplicate id '" + rec.id + "'");
    rec.channels = field(obj, "channels").get<std::vector<std::string>>();
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<HypothesisRecord> load_hypotheses(const std::filesystem::path& path) {
  return parse_hypotheses(read_file(path), path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp.string());
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    os.flush();
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

}  // namespace mtsim
