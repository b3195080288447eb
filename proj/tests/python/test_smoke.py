# Copyright 2026 The mtsim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os
import pathlib
import wave

import numpy as np
import pytest

import mtsim

RATE = 16000


def write_pool(root, speakers=4, per_speaker=2):
    rng = np.random.default_rng(3)
    (root / "audio").mkdir()
    lines = []
    for s in range(speakers):
        for u in range(per_speaker):
            uid = "s%du%d" % (s, u)
            n = int(rng.integers(2 * RATE, 4 * RATE))
            pcm = (rng.normal(0.0, 0.05, n) * 32767).clip(-32768, 32767).astype("<i2")
            with wave.open(str(root / "audio" / (uid + ".wav")), "wb") as w:
                w.setnchannels(1)
                w.setsampwidth(2)
                w.setframerate(RATE)
                w.writeframes(pcm.tobytes())
            lines.append(json.dumps({"id": uid, "speaker": "spk%d" % s,
                                     "audio": "audio/%s.wav" % uid,
                                     "duration_s": n / RATE, "text": "word%d hello there" % s}))
    (root / "pool.jsonl").write_text("\n".join(lines) + "\n")
    return root / "pool.jsonl"


def test_word_edit_distance():
    s = mtsim.word_edit_distance("a b c", "a x c")
    assert (s.substitutions, s.insertions, s.deletions, s.ref_words) == (1, 0, 0, 3)
    assert s.wer == pytest.approx(1 / 3)
    assert mtsim.word_edit_distance("", "a b").wer is None


def test_orc_and_oed():
    turns = [mtsim.Turn("A", 0, 2, "hello world"), mtsim.Turn("B", 1, 4, "good morning"),
             mtsim.Turn("A", 3, 5, "bye")]
    r = mtsim.orc_wer(turns, "hello word bye", "good morning")
    assert r.stats.errors == 1
    assert r.wer == pytest.approx(0.2)
    assert r.assignment == [0, 1, 0]
    f = mtsim.orc_wer_fast(turns, "hello word bye", "good morning")
    assert f.stats == r.stats
    o = mtsim.oed_wer(["a b c", "d e"], ["d e", "a b c"])
    assert o.stats.errors == 0 and o.permutation == [1, 0]
    with pytest.raises(mtsim.ScoringError):
        mtsim.orc_wer(turns * 6, "", "", max_exhaustive_turns=16)


def test_arrangement_round_trip():
    turns = [mtsim.Turn("A", 0, 4, "one two"), mtsim.Turn("B", 3, 7, "three"),
             mtsim.Turn("A", 6, 10, "four")]
    channels = mtsim.arrange_overlap_based(turns)
    assert channels == [[0, 2], [1]]
    texts = [" ".join(mtsim.serialize_channel([turns[i] for i in ch], True)) for ch in channels]
    assert texts[0] == "one two <cot> four"
    assert mtsim.count_estimated_turns(texts) == 3
    with pytest.raises(mtsim.ArrangementError):
        mtsim.arrange_speaker_based([mtsim.Turn("A", 0, 2, "x"), mtsim.Turn("A", 1, 3, "y")])


def test_convolve_identity_and_tail():
    x = np.random.default_rng(0).normal(size=500)
    assert np.array_equal(mtsim.convolve(x, np.array([1.0])), x)
    y = mtsim.convolve(np.array([1.0, 0.0, 0.0]), np.array([0.5, 0.25]))
    assert list(y) == [0.5, 0.25, 0.0, 0.0]


def test_simulate_is_deterministic(tmp_path):
    pool = mtsim.load_manifest(write_pool(tmp_path))
    cfg = mtsim.preset("librispeechmix2")
    a = mtsim.simulate(pool, [], cfg, 5, 3)
    b = mtsim.simulate(pool, [], cfg, 5, 3)
    assert a.plan == b.plan
    assert np.array_equal(a.audio, b.audio)
    assert len(a.turns) == 2
    assert a.plan.mixture_id == "mix000003"
    assert mtsim.max_concurrent(a.turns) == 2
    cfg.max_speakers = 9
    with pytest.raises(mtsim.InfeasibleError):
        mtsim.simulate_plan(pool, [], cfg, 5, 0)
    with pytest.raises(mtsim.ConfigError):
        mtsim.preset("unknown")


def test_cli_toy_corpus():
    data = pathlib.Path(os.environ.get("MTSIM_TEST_DATA",
                                       pathlib.Path(__file__).parents[1] / "data"))
    refs = str(data / "toy_corpus" / "refs.jsonl")
    hyps = str(data / "toy_corpus" / "hyps.jsonl")
    code, out, _ = mtsim.run_cli(["score", "orc", "--ref", refs, "--hyp", hyps])
    assert code == 0
    assert "skipped (1)" in out
    code, out, _ = mtsim.run_cli(["score", "orc", "--fast", "--ref", refs, "--hyp", hyps])
    assert code == 0
    assert "skipped" not in out
    code, _, err = mtsim.run_cli(["simulate"])
    assert code == 2 and "error" in err
