import json

import numpy as np
import pytest

import deepcausal as dc


def test_swiss_roll_shapes():
    d = dc.gen_swiss_roll(n=200, seed=3)
    assert d["x"].shape == (200, 3)
    assert len(d["w"]) == 200
    assert np.allclose(d["ite_true"], d["y1"] - d["y0"])


def test_twin_matching_is_exact():
    d = dc.gen_swiss_roll(n=100, noise_sigma=0.0, duplicate_twins=True)
    est = dc.estimate_effects(d["x"], d["w"], d["y_obs"])
    assert np.max(np.abs(est["ite"] - d["ite_true"])) < 1e-10


def test_nearest_opposite_tie_rule():
    z = np.array([[0.0], [-1.0], [1.0]])
    idx, dist = dc.nearest_opposite(z, [1, 0, 0], 0, 2)
    assert idx == [1, 2]
    assert dist == [1.0, 1.0]


def test_embedders_round_trip(tmp_path):
    d = dc.gen_swiss_roll(n=150, seed=1)
    for e in (dc.fit_pca(d["x"], 2), dc.fit_lle(d["x"], 2), dc.fit_autoencoder(d["x"], 2, epochs=3)):
        z = e.transform(d["x"])
        assert z.shape == (150, 2)
        path = str(tmp_path / f"{e.kind}.json")
        e.save(path)
        assert np.array_equal(dc.Embedder.load(path).transform(d["x"]), z)


def test_propensity_models():
    assert dc.propensity_net_param_count(2) == 382
    d = dc.gen_propensity_pairs(n=100, seed=2)
    m = dc.fit_propensity("logistic", d["x"], d["w"])
    p = m.predict(d["x"])
    assert p.shape == (200,)
    assert np.all((p >= 0) & (p <= 1))
    matches = dc.propensity_match(p, d["w"])
    assert len(matches) == 100
    assert 0.0 <= dc.holdout_accuracy(m, d["x"], d["w"]) <= 1.0


def test_silhouette_separated():
    z = np.vstack([np.zeros((5, 2)), np.full((5, 2), 10.0)])
    assert dc.silhouette(z, [0] * 5 + [1] * 5) == pytest.approx(1.0)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        dc.fit_pca(np.zeros((5, 2)), 3)
    with pytest.raises(dc.ValidationError):
        dc.run_experiment("swissroll", {"version": 1, "experiment": "swissroll", "typo": 1})


def test_run_experiment_reports():
    cfg = dc.default_config("gradcheck")
    cfg["gradcheck"]["random_specs"] = 3
    out = dc.run_experiment("gradcheck", json.dumps(cfg), seed=5)
    assert out["all_passed"]
    assert len(out["entries"]) == 3

    cfg = dc.default_config("propensity")
    cfg["propensity"]["n_pairs"] = 50
    cfg["propensity"]["methods"] = ["logistic"]
    a = dc.run_experiment("propensity", cfg, seed=1)
    b = dc.run_experiment("propensity", cfg, seed=1)
    assert a == b
    assert a["reports"][0]["method"] == "logistic"
