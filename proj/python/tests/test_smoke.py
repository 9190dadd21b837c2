import math

import numpy as np
import pytest

import npcvx


def test_surrogates():
    h = npcvx.Surrogate.hinge()
    assert h(0.0) == 1.0
    assert h.value_at_one == 2.0
    lg = npcvx.Surrogate.from_name("logit")
    assert lg.lipschitz == pytest.approx(1.0546945859888424, rel=1e-14)
    assert lg(1.0) == pytest.approx(1.8946361239720116, rel=1e-14)
    with pytest.raises(npcvx.ValidationError) as err:
        npcvx.Surrogate.from_name("square")
    assert err.value.code == "config"


def test_kappa_and_bounds():
    k = npcvx.kappa(1.0, 2, 0.2)
    assert k == pytest.approx(9.790987322723266094, rel=1e-13)
    b = npcvx.n0_and_bound(k, 0.0, 0.5, 10000, 10000, 2.0)
    assert b["n0"] == 6136
    assert b["thm42_bound"] == pytest.approx(1.762377718090187897, rel=1e-12)
    assert npcvx.binomial_tail_exact(500, 0.2, 100) == pytest.approx(0.5178363215654738, rel=1e-12)
    with pytest.raises(npcvx.ValidationError):
        npcvx.alpha_kappa(0.1, k, 100)


def test_solve_and_predict():
    rng = np.random.default_rng(0)
    neg = rng.normal(0.0, 1.0, size=(3000, 2))
    pos = rng.normal(0.0, 1.0, size=(3000, 2)) + [1.5, 0.0]
    d = npcvx.stump_dictionary(np.vstack([neg, pos]), 3)
    assert len(d["bases"]) == 12
    sol = npcvx.solve(neg, pos, d, alpha=0.9, delta=0.1)
    assert sol["status"] == "optimal"
    w = sol["weights"]
    assert math.isclose(sum(w), 1.0, abs_tol=1e-12)
    assert sol["r_minus_phi"] <= sol["alpha_kappa"] + 1e-8
    scores = npcvx.decision_function(d, w, neg)
    assert scores.shape == (3000,)
    assert np.all(np.abs(scores) <= 1.0)
    # Type-I error on the training negatives is bounded by the phi risk.
    assert np.mean(scores >= 0) <= sol["r_minus_phi"] + 1e-12

    small = npcvx.solve(neg[:50], pos[:50], d, alpha=0.1)
    assert small["status"] == "sample_too_small"
    assert small["weights"] is None


def test_bad_inputs():
    d = {"dim": 1, "bases": [{"kind": "constant", "value": -1.0}]}
    with pytest.raises(npcvx.ValidationError) as err:
        npcvx.solve(np.zeros((10, 2)), np.zeros((10, 2)), d)
    assert err.value.code == "dimension_mismatch"
    with pytest.raises(ValueError):
        npcvx.solve(np.array([[np.nan]]), np.zeros((1, 1)), d)


def test_ccp():
    rng = np.random.default_rng(1)
    g = np.column_stack([np.full(20000, -0.9), rng.uniform(-1, 1, 20000)])
    sol = npcvx.solve_ccp([1.0, 0.0], g, alpha=0.25, delta=0.1)
    assert sol["status"] == "optimal"
    assert sol["empirical_constraint_value"] <= sol["level"] + 1e-8


def test_experiment_and_lemmas():
    summary, csv = npcvx.run_experiment("counterexample", {"trials": 200}, seed=3)
    assert summary["trials"] == 200
    assert csv.splitlines()[0].startswith("trial,")
    assert len(csv.splitlines()) == 201
    again, csv2 = npcvx.run_experiment("counterexample", {"trials": 200}, seed=3)
    assert again == summary and csv2 == csv
    with pytest.raises(npcvx.ValidationError):
        npcvx.run_experiment("nope")
    sweep = npcvx.sweep_binomial_lemmas(40, 10)
    assert sweep["violations"] == 0


def test_np_lemma_oracle():
    r = npcvx.np_lemma_oracle({"kind": "gaussian_1d", "mu_minus": 0.0, "mu_plus": 2.0, "sigma": 1.0}, 0.1)
    assert r["type2_error"] == pytest.approx(0.23624041589411682, rel=1e-12)
