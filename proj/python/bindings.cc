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

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mtsim/arrange.h"
#include "mtsim/cli.h"
#include "mtsim/corpus.h"
#include "mtsim/error.h"
#include "mtsim/metrics.h"
#include "mtsim/simulate.h"
#include "mtsim/text.h"

namespace py = pybind11;
using namespace mtsim;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw ConfigError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

// Accepts either a token list or a whitespace-separated string.
Tokens as_tokens(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return tokenize(obj.cast<std::string>());
  return obj.cast<Tokens>();
}

EnergyFn disk_energy(int rate) {
  auto cache = std::make_shared<EnergyCache>(rate);
  return [cache](const Utterance& u) { return (*cache)(u); };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-speaker mixture simulation, target arrangement and multi-channel WER";

  auto base = py::register_exception<Error>(m, "Error");
  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", config_error.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<ArrangementError>(m, "ArrangementError", base.ptr());
  py::register_exception<ScoringError>(m, "ScoringError", base.ptr());

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("normalize", [](const py::object& t) { return normalize(as_tokens(t)); },
        py::arg("tokens"));

  py::class_<Turn>(m, "Turn")
      .def(py::init<std::string, double, double, std::string>(), py::arg("speaker"),
           py::arg("start_s"), py::arg("end_s"), py::arg("text"))
      .def_readwrite("speaker", &Turn::speaker)
      .def_readwrite("start_s", &Turn::start_s)
      .def_readwrite("end_s", &Turn::end_s)
      .def_readwrite("text", &Turn::text)
      .def("tokens", &Turn::tokens)
      .def(py::self == py::self)
      .def("__repr__", [](const Turn& t) {
        std::ostringstream os;
        os << "Turn(" << t.speaker << ", " << t.start_s << ", " << t.end_s << ", '" << t.text
           << "')";
        return os.str();
      });

  // corpus
  py::class_<Utterance>(m, "Utterance")
      .def_readonly("id", &Utterance::id)
      .def_readonly("speaker_id", &Utterance::speaker_id)
      .def_readonly("audio_path", &Utterance::audio_path)
      .def_readonly("duration_s", &Utterance::duration_s)
      .def_readonly("transcript", &Utterance::transcript);

  py::class_<Pool>(m, "Pool")
      .def("__len__", &Pool::size)
      .def_property_readonly("utterances", &Pool::utterances)
      .def_property_readonly("speakers", &Pool::speakers)
      .def("__getitem__", &Pool::at, py::return_value_policy::reference_internal);

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def(
      "load_audio",
      [](const Pool& pool, const std::string& id, int rate) {
        return to_numpy(load_audio(pool.at(id), rate).samples);
      },
      py::arg("pool"), py::arg("utterance_id"), py::arg("sample_rate_hz") = kDefaultSampleRate);

  py::class_<ImpulseResponse>(m, "ImpulseResponse")
      .def(py::init([](std::string id, const py::array_t<double>& samples, int rate) {
             return ImpulseResponse{std::move(id), from_numpy(samples), rate};
           }),
           py::arg("id"), py::arg("samples"), py::arg("sample_rate_hz") = kDefaultSampleRate)
      .def_readonly("id", &ImpulseResponse::id)
      .def_property_readonly("samples", [](const ImpulseResponse& ir) { return to_numpy(ir.samples); })
      .def_readonly("sample_rate_hz", &ImpulseResponse::sample_rate_hz);
  m.def("load_ir_manifest", &load_ir_manifest, py::arg("path"),
        py::arg("sample_rate_hz") = kDefaultSampleRate);

  // simulate
  py::enum_<CountMode>(m, "CountMode")
      .value("FIXED", CountMode::kFixed)
      .value("UNIFORM", CountMode::kUniform);
  py::enum_<EnergyMode>(m, "EnergyMode")
      .value("INTACT", EnergyMode::kIntact)
      .value("RATIO_RANGE", EnergyMode::kRatioRange);

  py::class_<SimulationConfig>(m, "SimulationConfig")
      .def(py::init<>())
      .def_readwrite("max_speakers", &SimulationConfig::max_speakers)
      .def_readwrite("count_mode", &SimulationConfig::count_mode)
      .def_readwrite("min_delay_s", &SimulationConfig::min_delay_s)
      .def_readwrite("energy_mode", &SimulationConfig::energy_mode)
      .def_readwrite("ratio_lo_db", &SimulationConfig::ratio_lo_db)
      .def_readwrite("ratio_hi_db", &SimulationConfig::ratio_hi_db)
      .def_readwrite("far_field", &SimulationConfig::far_field)
      .def_readwrite("max_duration_s", &SimulationConfig::max_duration_s)
      .def_readwrite("allow_same_speaker", &SimulationConfig::allow_same_speaker)
      .def_readwrite("max_simultaneous", &SimulationConfig::max_simultaneous)
      .def_readwrite("sample_rate_hz", &SimulationConfig::sample_rate_hz)
      .def_readwrite("max_retries", &SimulationConfig::max_retries)
      .def("validate", [](const SimulationConfig& c) { validate(c); });
  m.def("preset", &preset, py::arg("name"));
  m.def("preset_names", &preset_names);

  py::class_<PlanEntry>(m, "PlanEntry")
      .def_readonly("utterance_id", &PlanEntry::utterance_id)
      .def_readonly("speaker_id", &PlanEntry::speaker_id)
      .def_readonly("start_offset_s", &PlanEntry::start_offset_s)
      .def_readonly("duration_s", &PlanEntry::duration_s)
      .def_readonly("gain_linear", &PlanEntry::gain_linear)
      .def_readonly("energy_ratio_db", &PlanEntry::energy_ratio_db)
      .def_readonly("impulse_response_id", &PlanEntry::impulse_response_id)
      .def_property_readonly("end_s", &PlanEntry::end_s);

  py::class_<MixturePlan>(m, "MixturePlan")
      .def_readonly("mixture_id", &MixturePlan::mixture_id)
      .def_readonly("entries", &MixturePlan::entries)
      .def_readonly("reference_index", &MixturePlan::reference_index)
      .def_readonly("attempts", &MixturePlan::attempts)
      .def(py::self == py::self);

  py::class_<Mixture>(m, "Mixture")
      .def_readonly("plan", &Mixture::plan)
      .def_property_readonly("audio", [](const Mixture& x) { return to_numpy(x.audio.samples); })
      .def_property_readonly("sample_rate_hz", [](const Mixture& x) { return x.audio.sample_rate_hz; })
      .def_readonly("turns", &Mixture::turns)
      .def_readonly("peak_normalization_gain", &Mixture::peak_normalization_gain);

  m.def(
      "simulate_plan",
      [](const Pool& pool, const std::vector<ImpulseResponse>& irs, const SimulationConfig& cfg,
         std::uint64_t seed, std::uint64_t index) {
        return simulate_plan(pool, irs, cfg, disk_energy(cfg.sample_rate_hz), seed, index);
      },
      py::arg("pool"), py::arg("irs"), py::arg("config"), py::arg("seed"), py::arg("index"));
  m.def(
      "simulate",
      [](const Pool& pool, const std::vector<ImpulseResponse>& irs, const SimulationConfig& cfg,
         std::uint64_t seed, std::uint64_t index) {
        const int rate = cfg.sample_rate_hz;
        py::gil_scoped_release release;
        return simulate(pool, irs, cfg, disk_energy(rate),
                        [rate](const Utterance& u) { return load_audio(u, rate); }, seed, index);
      },
      py::arg("pool"), py::arg("irs"), py::arg("config"), py::arg("seed"), py::arg("index"));
  m.def("plan_turns", &plan_turns, py::arg("plan"), py::arg("pool"));
  m.def(
      "convolve",
      [](const py::array_t<double>& source, const py::array_t<double>& ir, int rate) {
        return to_numpy(convolve({from_numpy(source), rate}, {"ir", from_numpy(ir), rate}).samples);
      },
      py::arg("source"), py::arg("ir"), py::arg("sample_rate_hz") = kDefaultSampleRate);
  m.def("gain_for_energy_ratio", &gain_for_energy_ratio, py::arg("ref_energy"),
        py::arg("other_energy"), py::arg("ratio_db"));
  m.def("max_concurrent", [](const std::vector<Turn>& t) { return max_concurrent(t); },
        py::arg("turns"));
  m.def("overlap_ratio", [](const std::vector<Turn>& t, double d) { return overlap_ratio(t, d); },
        py::arg("turns"), py::arg("duration_s"));

  // arrange
  m.def(
      "arrange_overlap_based",
      [](const std::vector<Turn>& turns, std::size_t n) {
        return arrange_overlap_based(turns, n).channels;
      },
      py::arg("turns"), py::arg("n_channels") = 2);
  m.def(
      "arrange_speaker_based",
      [](const std::vector<Turn>& turns, std::size_t n) {
        return arrange_speaker_based(turns, n).channels;
      },
      py::arg("turns"), py::arg("n_channels") = 2);
  m.def(
      "serialize_channel",
      [](const std::vector<Turn>& channel, bool with_cot) { return serialize_channel(channel, with_cot); },
      py::arg("channel"), py::arg("with_cot") = false);
  m.def(
      "pit_best_permutation",
      [](const std::vector<std::vector<double>>& rows) {
        const auto r = pit_best_permutation(LossMatrix::from_rows(rows));
        return py::make_tuple(r.permutation, r.total);
      },
      py::arg("losses"));

  // metrics
  py::class_<EditStats>(m, "EditStats")
      .def_readonly("substitutions", &EditStats::substitutions)
      .def_readonly("insertions", &EditStats::insertions)
      .def_readonly("deletions", &EditStats::deletions)
      .def_readonly("hits", &EditStats::hits)
      .def_readonly("ref_words", &EditStats::ref_words)
      .def_property_readonly("errors", &EditStats::errors)
      .def_property_readonly("wer", &EditStats::wer)
      .def(py::self == py::self)
      .def("__repr__", [](const EditStats& s) {
        std::ostringstream os;
        os << "EditStats(S=" << s.substitutions << ", I=" << s.insertions
           << ", D=" << s.deletions << ", ref_words=" << s.ref_words << ")";
        return os.str();
      });

  py::class_<OrcResult>(m, "OrcResult")
      .def_readonly("stats", &OrcResult::stats)
      .def_readonly("assignment", &OrcResult::assignment)
      .def_readonly("combinations_evaluated", &OrcResult::combinations_evaluated)
      .def_property_readonly("wer", &OrcResult::wer);

  py::class_<OedResult>(m, "OedResult")
      .def_readonly("stats", &OedResult::stats)
      .def_readonly("permutation", &OedResult::permutation)
      .def_property_readonly("wer", &OedResult::wer);

  m.def(
      "word_edit_distance",
      [](const py::object& ref, const py::object& hyp) {
        return word_edit_distance(as_tokens(ref), as_tokens(hyp));
      },
      py::arg("ref"), py::arg("hyp"));
  m.def(
      "orc_wer",
      [](const std::vector<Turn>& turns, const py::object& h0, const py::object& h1,
         std::size_t cap) {
        const std::array<Tokens, 2> hyps{as_tokens(h0), as_tokens(h1)};
        py::gil_scoped_release release;
        return orc_wer(turns, hyps, cap);
      },
      py::arg("turns"), py::arg("hyp0"), py::arg("hyp1"),
      py::arg("max_exhaustive_turns") = kDefaultMaxExhaustiveTurns);
  m.def(
      "orc_wer_fast",
      [](const std::vector<Turn>& turns, const py::object& h0, const py::object& h1,
         std::uint64_t max_states) {
        const std::array<Tokens, 2> hyps{as_tokens(h0), as_tokens(h1)};
        py::gil_scoped_release release;
        return orc_wer_fast(turns, hyps, max_states);
      },
      py::arg("turns"), py::arg("hyp0"), py::arg("hyp1"),
      py::arg("max_states") = kDefaultMaxFastStates);
  m.def(
      "oed_wer",
      [](const std::vector<py::object>& refs, const std::vector<py::object>& hyps) {
        std::vector<Tokens> r, h;
        for (const auto& x : refs) r.push_back(as_tokens(x));
        for (const auto& x : hyps) h.push_back(as_tokens(x));
        return oed_wer(r, h);
      },
      py::arg("refs"), py::arg("hyps"));
  m.def(
      "count_estimated_turns",
      [](const std::vector<std::string>& channels, const std::string& cot) {
        return count_estimated_turns(channels, cot);
      },
      py::arg("channels"), py::arg("cot_token") = std::string(kCotToken));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "mtsim");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line; returns (exit_code, stdout, stderr).");
}
