# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The MFN Authors.

import math

import pytest

import mfn


@pytest.fixture(scope="module")
def data():
    d, latents = mfn.synth(samples=40, steps=6, input_dim=3, seed=3)
    return d, latents


def test_default_config_parameter_count():
    assert 100_000 <= mfn.param_count(mfn.default_config())["total"] <= 1_000_000


def test_tiny_config_variants():
    cfg = mfn.tiny_config()
    assert mfn.ablation_variants(cfg) == ["full", "no_delta", "no_mem", "single_view:l", "single_view:v", "single_view:a"]
    counts = {v: mfn.param_count(mfn.with_variant(cfg, v))["total"] for v in mfn.ablation_variants(cfg)}
    assert counts["no_mem"] < counts["no_delta"] < counts["full"]


def test_synth_is_deterministic(data):
    d, latents = data
    again, latents_again = mfn.synth(samples=40, steps=6, input_dim=3, seed=3)
    assert d.to_jsonl() == again.to_jsonl()
    assert latents == latents_again
    assert len(d) == 40
    assert all(rec["label"] in (0, 1) for rec in latents)


def test_dataset_round_trip(tmp_path, data):
    d, _ = data
    path = tmp_path / "d.jsonl"
    d.save(str(path))
    assert mfn.Dataset.load(str(path)).to_jsonl() == d.to_jsonl()
    assert mfn.Dataset.from_jsonl(d.to_jsonl()).ids() == d.ids()


def test_split_is_group_disjoint(data):
    d, _ = data
    s = mfn.split(d, (0.6, 0.2, 0.2), seed=1)
    parts = [set(s["train"]), set(s["valid"]), set(s["test"])]
    assert sum(map(len, parts)) == len(d)
    assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])


def test_forward_and_predict(data):
    d, _ = data
    cfg = mfn.config_for(d, 4, 5)
    assert cfg["task"]["kind"] == "classification"
    model = mfn.Model(cfg, seed=2)
    feats = model.features(d)
    assert len(feats) == len(d) and len(feats[0]) == 3 * 4 + 5
    probs = model.predict(d)
    assert all(math.isclose(sum(p), 1.0, abs_tol=1e-9) for p in probs)


def test_train_evaluate_checkpoint(tmp_path, data):
    d, _ = data
    s = mfn.split(d, seed=0)
    tr, va, te = d.select(s["train"]), d.select(s["valid"]), d.select(s["test"])
    model = mfn.Model(mfn.config_for(d, 3, 4), seed=5)
    history = model.train(tr, va, max_epochs=2, seed=5)
    assert len(history["epochs"]) == 2
    report = model.evaluate(te)
    assert 0.0 <= report["metrics"]["ma2"] <= 1.0
    path = tmp_path / "ck.json"
    model.save(str(path))
    loaded = mfn.Model.load(str(path))
    assert loaded.predict(te) == model.predict(te)
    assert loaded.config == model.config


def test_grad_check_and_bench(data):
    d, _ = data
    model = mfn.Model(mfn.config_for(d, 3, 4), seed=1)
    assert model.grad_check(d, 0)["max_relative_error"] < 1e-4
    assert model.bench(d, repeats=1)["inferences_per_second"] > 0


def test_errors_map_to_python_exceptions(data):
    d, _ = data
    with pytest.raises(mfn.ConfigError):
        mfn.with_variant(mfn.tiny_config(), "bogus")
    with pytest.raises(mfn.ParseError):
        mfn.Dataset.from_jsonl("{not json}\n")
    assert issubclass(mfn.SchemaError, mfn.Error)
