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

#include "mtsim/cli.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtsim/corpus.h"
#include "mtsim/error.h"
#include "mtsim/formats.h"
#include "mtsim/metrics.h"
#include "mtsim/simulate.h"
#include "mtsim/wav.h"

namespace mtsim::cli {
namespace {

using nlohmann::json;

struct GlobalFlags {
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string config;
};

int worker_count(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on `jobs` threads. Exceptions are captured per
// index; the one with the smallest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- simulate ------------------------------------------------------------

struct SimulateFlags {
  std::string pool;
  std::string irs;
  std::string preset = "librispeechmix2";
  std::string out;
  std::size_t num = 1;
  std::uint64_t start_index = 0;
  std::optional<int> max_speakers;
  bool near_field = false;
  bool far_field = false;
  bool no_audio = false;
  bool emit_cot = false;
  std::string arrangement;
};

int cmd_simulate(const SimulateFlags& f, const GlobalFlags& g, std::ostream& out) {
  RunSettings settings;
  settings.simulation = preset(f.preset);
  if (!g.config.empty()) settings = load_config(g.config, settings);
  auto& cfg = settings.simulation;
  if (f.max_speakers) cfg.max_speakers = *f.max_speakers;
  if (f.near_field) cfg.far_field = false;
  if (f.far_field) cfg.far_field = true;
  if (f.emit_cot) settings.targets.emit_cot = true;
  if (!f.arrangement.empty())
    settings = apply_config(json{{"arrangement", f.arrangement}}, settings);
  validate(cfg);

  const Pool pool = load_manifest(f.pool);
  std::vector<ImpulseResponse> irs;
  if (!f.irs.empty()) irs = load_ir_manifest(f.irs, cfg.sample_rate_hz);
  if (cfg.far_field && irs.empty())
    throw ConfigError("far-field simulation needs --irs (or pass --near-field)");

  const std::filesystem::path out_dir(f.out);
  std::filesystem::create_directories(out_dir / "mixtures");

  EnergyCache energy(cfg.sample_rate_hz);
  const EnergyFn energy_fn = [&energy](const Utterance& u) { return energy(u); };
  const int rate = cfg.sample_rate_hz;
  const AudioLoader loader = [rate](const Utterance& u) { return load_audio(u, rate); };

  std::vector<std::string> records(f.num);
  std::vector<double> durations(f.num), overlaps(f.num);
  std::vector<std::size_t> speaker_counts(f.num);
  parallel_for(f.num, worker_count(g.jobs), [&](std::size_t k) {
    const std::uint64_t index = f.start_index + k;
    const MixturePlan plan = simulate_plan(pool, irs, cfg, energy_fn, g.seed, index);
    std::vector<Turn> turns;
    double duration;
    std::optional<double> peak;
    if (f.no_audio) {
      turns = plan_turns(plan, pool);
      duration = planned_duration_s(plan, irs, cfg);
    } else {
      Mixture mix = render(plan, pool, irs, cfg, loader);
      write_wav_pcm16(out_dir / "mixtures" / (plan.mixture_id + ".wav"), mix.audio.samples,
                      rate);
      turns = std::move(mix.turns);
      duration = mix.audio.duration_s();
      peak = mix.peak_normalization_gain;
    }
    records[k] = make_target_record(plan, turns, duration, peak, settings.targets).dump();
    durations[k] = duration;
    overlaps[k] = overlap_ratio(turns, duration);
    std::set<std::string> speakers;
    for (const auto& t : turns) speakers.insert(t.speaker);
    speaker_counts[k] = speakers.size();
  });

  std::string targets;
  for (const auto& r : records) targets += r + '\n';
  write_file_atomic(out_dir / "targets.jsonl", targets);

  double total = 0.0;
  for (double d : durations) total += d;
  std::array<std::size_t, 10> hist{};
  for (double r : overlaps) hist[std::min<std::size_t>(9, static_cast<std::size_t>(r * 10.0))]++;
  std::map<std::size_t, std::size_t> by_speakers;
  for (auto s : speaker_counts) ++by_speakers[s];

  out << "mixtures: " << f.num << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", total / 3600.0);
  out << "total hours: " << buf << '\n';
  out << "speakers per mixture:";
  for (const auto& [s, n] : by_speakers) out << ' ' << s << ':' << n;
  out << "\noverlap ratio histogram:\n";
  for (std::size_t b = 0; b < hist.size(); ++b)
    out << "  [" << std::setw(3) << b * 10 << "%, " << std::setw(3) << (b + 1) * 10
        << "%" << (b == 9 ? "]" : ")") << ' ' << hist[b] << '\n';
  return kOk;
}

// ---- score ---------------------------------------------------------------

struct ScoreFlags {
  std::string ref;
  std::string hyp;
  std::string out;
  std::size_t max_exhaustive_turns = kDefaultMaxExhaustiveTurns;
  std::uint64_t max_states = kDefaultMaxFastStates;
  bool fast = false;
  bool normalize = false;
};

struct Pairing {
  std::vector<ReferenceRecord> refs;
  std::map<std::string, const HypothesisRecord*> hyp_by_id;
  std::vector<HypothesisRecord> hyps;
  std::vector<std::string> unmatched;
};

void pair_up(const std::string& ref_path, const std::string& hyp_path, Pairing& p) {
  p.refs = load_references(ref_path);
  p.hyps = load_hypotheses(hyp_path);
  std::set<std::string> ref_ids;
  for (const auto& r : p.refs) ref_ids.insert(r.id);
  for (const auto& h : p.hyps) {
    p.hyp_by_id[h.id] = &h;
    if (!ref_ids.contains(h.id)) p.unmatched.push_back(h.id);
  }
}

Tokens prepare(const std::string& text, bool norm) {
  Tokens toks = strip_token(tokenize(text), kCotToken);
  return norm ? normalize(toks) : toks;
}

int cmd_score(const std::string& metric, const ScoreFlags& f, const GlobalFlags& g,
              std::ostream& out) {
  Pairing p;
  pair_up(f.ref, f.hyp, p);

  std::vector<UtteranceScore> scores(p.refs.size());
  std::vector<json> details(p.refs.size());
  parallel_for(p.refs.size(), worker_count(g.jobs), [&](std::size_t k) {
    const ReferenceRecord& ref = p.refs[k];
    UtteranceScore& s = scores[k];
    s.id = ref.id;
    s.partition = ref.partition;
    std::vector<std::string> channels;
    auto it = p.hyp_by_id.find(ref.id);
    if (it == p.hyp_by_id.end()) {
      s.missing_hypothesis = true;
    } else {
      channels = it->second->channels;
    }
    json d = {{"id", ref.id}, {"turns", ref.turns.size()}};

    if (metric == "orc") {
      if (!s.missing_hypothesis && channels.size() != 2)
        throw ConfigError("hypothesis '" + ref.id + "' must have exactly 2 channels for ORC");
      channels.resize(2);
      std::vector<Turn> turns = ref.turns;
      if (f.normalize)
        for (auto& t : turns) t.text = join(normalize(tokenize(t.text)));
      const std::array<Tokens, 2> hyps{prepare(channels[0], f.normalize),
                                       prepare(channels[1], f.normalize)};
      std::optional<OrcResult> r;
      if (f.fast) {
        try {
          r = orc_wer_fast(turns, hyps, f.max_states);
        } catch (const ScoringError& e) {
          d["skip_reason"] = e.what();
        }
      } else if (turns.size() > f.max_exhaustive_turns) {
        d["skip_reason"] = "turn count exceeds --max-exhaustive-turns";
      } else {
        r = orc_wer(turns, hyps, f.max_exhaustive_turns);
      }
      if (r) {
        s.stats = r->stats;
        d["assignment"] = r->assignment;
      } else {
        s.skipped = true;
      }
    } else {
      std::vector<std::string> speaker_order;
      std::map<std::string, Tokens> by_speaker;
      for (std::size_t i : start_order(ref.turns)) {
        const Turn& t = ref.turns[i];
        auto [pos, fresh] = by_speaker.try_emplace(t.speaker);
        if (fresh) speaker_order.push_back(t.speaker);
        for (auto& w : prepare(t.text, f.normalize)) pos->second.push_back(std::move(w));
      }
      std::vector<Tokens> refs, hyps;
      for (const auto& spk : speaker_order) refs.push_back(by_speaker[spk]);
      for (const auto& c : channels) hyps.push_back(prepare(c, f.normalize));
      const OedResult r = oed_wer(refs, hyps);
      s.stats = r.stats;
      d["permutation"] = r.permutation;
    }
    d["skipped"] = s.skipped;
    d["missing_hypothesis"] = s.missing_hypothesis;
    if (!s.skipped) d["stats"] = to_json(s.stats);
    details[k] = std::move(d);
  });

  const CorpusReport report = aggregate_report(scores);
  json j = to_json(report);
  j["metric"] = metric;
  j["unmatched_hypotheses"] = p.unmatched;
  j["utterances"] = details;
  if (metric == "orc") {
    j["max_exhaustive_turns"] = f.max_exhaustive_turns;
    j["fast"] = f.fast;
  }
  if (!f.out.empty()) write_file_atomic(f.out, j.dump(2) + "\n");

  out << (metric == "orc" ? "ORC WER" : "OED WER") << '\n' << report.render_text();
  if (!p.unmatched.empty()) {
    out << "hypotheses without reference (" << p.unmatched.size() << "):";
    for (const auto& id : p.unmatched) out << ' ' << id;
    out << '\n';
  }
  return kOk;
}

// ---- turns ---------------------------------------------------------------

struct TurnsFlags {
  std::string ref;
  std::string hyp;
  std::string out;
  std::string cot = std::string(kCotToken);
};

int cmd_turns(const TurnsFlags& f, std::ostream& out) {
  Pairing p;
  pair_up(f.ref, f.hyp, p);
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::string> missing;
  for (const auto& ref : p.refs) {
    auto it = p.hyp_by_id.find(ref.id);
    if (it == p.hyp_by_id.end()) {
      missing.push_back(ref.id);
      continue;
    }
    if (ref.turns.empty()) continue;
    pairs.emplace_back(static_cast<int>(ref.turns.size()),
                       count_estimated_turns(it->second->channels, f.cot));
  }
  const TurnConfusion confusion = turn_confusion(pairs);
  if (!f.out.empty()) {
    json j = to_json(confusion);
    j["missing_hypotheses"] = missing;
    j["unmatched_hypotheses"] = p.unmatched;
    write_file_atomic(f.out, j.dump(2) + "\n");
  }
  out << confusion.render_text();
  if (!missing.empty()) out << "missing hypotheses: " << missing.size() << '\n';
  return kOk;
}

// ---- validate ------------------------------------------------------------

int cmd_validate(const std::string& pool_path, int rate, std::ostream& out) {
  const Pool pool = load_manifest(pool_path);
  const ValidationReport report = validate_pool(pool, rate);
  out << "utterances: " << report.checked << ", speakers: " << pool.speakers().size()
      << ", issues: " << report.issues.size() << '\n';
  for (const auto& issue : report.issues)
    out << "  " << issue.utterance_id << ": " << to_string(issue.kind) << " ("
        << issue.detail << ")\n";
  if (pool.speakers().size() < 2)
    out << "note: fewer than 2 speakers; multi-speaker simulation will fail\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-speaker mixture simulation and multi-channel ASR scoring", "mtsim"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--seed", global.seed, "Master random seed");
  app.add_option("--jobs", global.jobs, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--config", global.config, "JSON config file")->check(CLI::ExistingFile);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Generate mixtures and targets.jsonl");
  simulate->add_option("--pool", sim.pool, "Utterance manifest (JSONL)")->required();
  simulate->add_option("--irs", sim.irs, "Impulse-response manifest (JSONL)");
  simulate->add_option("--preset", sim.preset, "librispeechmix2 | libricss_style")
      ->check(CLI::IsMember(preset_names()));
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--num", sim.num, "Number of mixtures")->check(CLI::PositiveNumber);
  simulate->add_option("--start-index", sim.start_index, "First mixture index");
  simulate->add_option("--max-speakers", sim.max_speakers, "Override max speakers S")
      ->check(CLI::PositiveNumber);
  auto* near = simulate->add_flag("--near-field", sim.near_field, "Disable convolution");
  simulate->add_flag("--far-field", sim.far_field, "Convolve with impulse responses")
      ->excludes(near);
  simulate->add_flag("--no-audio", sim.no_audio, "Write targets only");
  simulate->add_flag("--emit-cot", sim.emit_cot, "Insert <cot> in channel_texts");
  simulate->add_option("--arrangement", sim.arrangement, "overlap | speaker | both")
      ->check(CLI::IsMember({"overlap", "speaker", "both"}));

  ScoreFlags score_flags;
  auto* score = app.add_subcommand("score", "Score multi-channel hypotheses");
  score->require_subcommand(1);
  std::string metric;
  for (const char* name : {"orc", "oed"}) {
    auto* sub = score->add_subcommand(name, name == std::string("orc")
                                                ? "Optimal reference combination WER"
                                                : "Optimal speaker/channel pairing WER");
    sub->add_option("--ref", score_flags.ref, "Reference targets (JSONL)")
        ->required()->check(CLI::ExistingFile);
    sub->add_option("--hyp", score_flags.hyp, "Hypotheses (JSONL)")
        ->required()->check(CLI::ExistingFile);
    sub->add_option("--out", score_flags.out, "Report path (JSON)");
    sub->add_flag("--normalize", score_flags.normalize, "Lowercase and strip punctuation");
    if (name == std::string("orc")) {
      sub->add_option("--max-exhaustive-turns", score_flags.max_exhaustive_turns,
                      "Skip groups with more turns (exhaustive search)");
      auto* fast = sub->add_flag("--fast", score_flags.fast, "Dynamic-programming search");
      sub->add_option("--max-states", score_flags.max_states, "State limit for --fast")
          ->needs(fast);
    }
    sub->callback([&metric, name] { metric = name; });
  }

  TurnsFlags turns_flags;
  auto* turns = app.add_subcommand("turns", "Turn-count confusion matrix");
  turns->add_option("--ref", turns_flags.ref)->required()->check(CLI::ExistingFile);
  turns->add_option("--hyp", turns_flags.hyp)->required()->check(CLI::ExistingFile);
  turns->add_option("--out", turns_flags.out, "Matrix path (JSON)");
  turns->add_option("--cot", turns_flags.cot, "Change-of-turn token");

  std::string validate_pool_path;
  int validate_rate = kDefaultSampleRate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a pool manifest and its audio");
  validate_cmd->add_option("--pool", validate_pool_path)->required();
  validate_cmd->add_option("--rate", validate_rate, "Expected sample rate")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  if (!argv.empty()) argv.pop_back();
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, global, out);
    if (score->parsed()) {
      if (!global.config.empty()) {
        const json cfg = json::parse(read_file(global.config));
        if (auto it = cfg.find("max_exhaustive_turns"); it != cfg.end())
          score_flags.max_exhaustive_turns = it->get<std::size_t>();
        if (auto it = cfg.find("normalize"); it != cfg.end())
          score_flags.normalize = it->get<bool>();
      }
      return cmd_score(metric, score_flags, global, out);
    }
    if (turns->parsed()) return cmd_turns(turns_flags, out);
    if (validate_cmd->parsed()) return cmd_validate(validate_pool_path, validate_rate, out);
  } catch (const ArrangementError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace mtsim::cli
