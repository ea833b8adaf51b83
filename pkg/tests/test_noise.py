import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detect422.circuit import Circuit
from detect422.code422 import TABLE1, build_encoded_run, catalog, prep_for, task
from detect422.experiment import LOGICAL_OUTCOMES, stat_distance_hat
from detect422.noise import (
    FRIDGE_MK,
    CalibrationRecord,
    NoiseConfig,
    exact_noisy_logical,
    exact_noisy_raw,
    noise_sites,
    noisy_run,
    sample_raw,
    trajectory_run,
)
from detect422.sim import exact_distribution
from detect422.synthesis import synthesize_words

QUIET = dict(drift=0.0)


@pytest.fixture(scope="module")
def bare():
    return {r.target.row: r.circuit for r in synthesize_words()}


def exact_d(c, nc, row):
    res = exact_noisy_logical(c, nc)
    ideal = task(row).ideal_logical_distribution
    return 0.5 * sum(abs(res.logical.prob(k) - ideal.prob(k)) for k in LOGICAL_OUTCOMES)


def five_sigma_match(counts, dist, n):
    for k in set(counts.counts) | set(dist.probabilities):
        p = dist.prob(k)
        sigma = max(np.sqrt(n * p * (1 - p)), 1.0)
        assert abs(counts.get(k) - n * p) < 5 * sigma, (k, counts.get(k), n * p)


def test_defaults():
    nc = NoiseConfig()
    assert (nc.p1, nc.p2, nc.r, nc.prep_flip, nc.seed, nc.drift) == (0.002, 0.025, 0.03, 0.0, 0, 0.1)


def test_validation():
    with pytest.raises(ValueError):
        NoiseConfig(p1=1.5)
    with pytest.raises(ValueError):
        NoiseConfig(r=-0.1)
    with pytest.raises(ValueError):
        NoiseConfig(drift=-1)
    with pytest.raises(ValueError):
        NoiseConfig(p2_edge={(2, 0): 2.0})
    with pytest.raises(ValueError):
        NoiseConfig.from_dict({"p3": 0.1})


def test_json_round_trip(tmp_path):
    nc = NoiseConfig(p1=0.01, seed=4, p2_edge={(2, 0): 0.05}, r_qubit={1: 0.1}, drift=0.2)
    p = tmp_path / "noise.json"
    p.write_text(json.dumps(nc.to_dict()))
    assert NoiseConfig.load(p) == nc


def test_per_qubit_overrides():
    nc = NoiseConfig(p2=0.01, p2_edge={(2, 0): 0.2}, r=0.0, r_qubit={3: 0.4}, **QUIET)
    c = Circuit.from_ops(5, [("CNOT", 2, 0), ("CNOT", 2, 1)])
    assert [s.probability for s in noise_sites(c, nc)] == [0.2, 0.01]
    assert nc.readout_p(3) == 0.4 and nc.readout_p(0) == 0.0


@given(st.integers(0, 10**6), st.floats(0, 0.5))
def test_jitter_within_bounds(seed, drift):
    nc = NoiseConfig(drift=drift)
    j = nc.jittered(np.random.default_rng(seed))
    for k in ("p1", "p2", "r"):
        base = getattr(nc, k)
        assert base * (1 - drift) - 1e-15 <= getattr(j, k) <= base * (1 + drift) + 1e-15
    assert nc.jittered(np.random.default_rng(seed)) == j


def test_zero_drift_is_identity():
    nc = NoiseConfig(**QUIET)
    assert nc.jittered(np.random.default_rng(0)) is nc


def test_calibration_record():
    cal = CalibrationRecord("2019-03-01T10:00:00", {0: 50.0}, {0: 40.0}, {0: 0.001, 1: 0.003}, {(2, 0): 0.03},
                            {0: 0.05}, FRIDGE_MK["raven"])
    assert CalibrationRecord.from_dict(json.loads(json.dumps(cal.to_dict()))) == cal
    nc = cal.to_noise_config()
    assert nc.p1 == pytest.approx(0.002) and nc.p2_edge == {(2, 0): 0.03}
    with pytest.raises(ValueError):
        CalibrationRecord("2019-03-01", {0: -1.0}, {}, {}, {}, {}, 20.0)
    assert FRIDGE_MK == {"raven": 21.0, "sparrow": 19.0}


def test_noiseless_ftv1_row1():
    c = catalog()["row01-FTv1"]
    counts = noisy_run(c, NoiseConfig.noiseless(), 8192, seed=3)
    assert counts.counts == {"00": 8192} and counts.ratio == 1
    assert stat_distance_hat(counts, task(1).ideal_logical_distribution) == 0


def test_readout_half_randomises_bare_zero(bare):
    nc = NoiseConfig(0, 0, 0.5, **QUIET)
    assert exact_d(bare[1], nc, 1) == pytest.approx(0.75, abs=1e-12)
    counts = noisy_run(bare[1], nc, 8192, seed=1)
    assert stat_distance_hat(counts, task(1).ideal_logical_distribution) == pytest.approx(0.75, abs=0.03)


def test_same_seed_same_counts():
    c = catalog()["row12-FTv2"]
    nc = NoiseConfig(seed=11)
    assert noisy_run(c, nc, 2000) == noisy_run(c, nc, 2000)
    assert noisy_run(c, nc, 2000) != noisy_run(c, nc, 2000, seed=12)


def test_shots_validation():
    with pytest.raises(ValueError):
        noisy_run(catalog()["row01-FTv1"], NoiseConfig(), 0)


def test_exact_noisy_raw_is_a_distribution():
    for name in ("row01-FTv1", "row05-LogicalBell", "row20-NFT"):
        d = exact_noisy_raw(catalog()[name], NoiseConfig(p1=0.05, p2=0.1, r=0.07, prep_flip=0.02))
        assert sum(d.probabilities.values()) == pytest.approx(1, abs=1e-12)


def test_noiseless_exact_matches_ideal():
    for name, c in list(catalog().items())[::5]:
        ideal = exact_distribution(c).raw
        noisy = exact_noisy_raw(c, NoiseConfig.noiseless())
        for k in set(ideal.probabilities) | set(noisy.probabilities):
            assert noisy.prob(k) == pytest.approx(ideal.prob(k), abs=1e-12)


HEAVY = NoiseConfig(p1=0.05, p2=0.12, r=0.06, prep_flip=0.04, **QUIET)


@pytest.mark.parametrize("name", ["row01-FTv1", "row07-FTv2", "row17-NFT", "row02-ZeroPlus", "row11-LogicalBell"])
def test_sampler_matches_exact(name):
    c = catalog()[name]
    n = 40000
    raw = sample_raw(c, HEAVY, n, np.random.default_rng(9))
    exact = exact_noisy_raw(c, HEAVY)
    values, counts = np.unique(raw, return_counts=True)
    from detect422.sim import ShotCounts

    m = c.n_cbits
    tally = {"".join(str((int(v) >> k) & 1) for k in range(m)): int(cnt) for v, cnt in zip(values, counts)}
    five_sigma_match(ShotCounts(tally, n), exact, n)


@pytest.mark.parametrize("name", ["row01-FTv1", "row07-FTv2", "row17-NFT", "row15-LogicalBell"])
def test_trajectory_oracle_matches_exact(name):
    c = catalog()[name]
    n = 3000
    counts = trajectory_run(c, HEAVY, n, seed=2)
    exact = exact_noisy_logical(c, HEAVY)
    assert counts.total_shots == n
    assert counts.n_valid / n == pytest.approx(exact.acceptance, abs=5 * np.sqrt(0.25 / n))
    five_sigma_match(counts, exact.logical, counts.n_valid)


def test_trajectory_matches_sampler_on_bare(bare):
    c = bare[20]
    n = 3000
    a = trajectory_run(c, HEAVY, n, seed=4)
    exact = exact_noisy_logical(c, HEAVY).logical
    five_sigma_match(a, exact, n)
    five_sigma_match(noisy_run(c, HEAVY, n, seed=4), exact, n)


def test_bare_never_rejects(bare):
    for c in bare.values():
        assert noisy_run(c, HEAVY, 500, seed=1).ratio == 1


def test_encoded_rejects_under_noise():
    assert noisy_run(catalog()["row01-FTv1"], NoiseConfig(), 8192, seed=1).ratio < 1


@pytest.mark.parametrize("axis", ["p1", "p2", "r"])
def test_suite_average_monotone(axis, bare):
    grid = [0.0, 0.02, 0.05]
    circuits = {
        "bare": {t.row: bare[t.row] for t in TABLE1},
        "FTv1": {t.row: build_encoded_run(t, prep_for(t.initial)) for t in TABLE1},
    }
    for impl, by_row in circuits.items():
        avgs = []
        for v in grid:
            nc = NoiseConfig(**{"p1": 0.001, "p2": 0.01, "r": 0.01, axis: v}, **QUIET)
            avgs.append(np.mean([exact_d(by_row[r], nc, r) for r in by_row]))
        assert avgs == sorted(avgs), (impl, axis, avgs)


@settings(max_examples=15)
@given(st.floats(0.0, 0.2), st.sampled_from(TABLE1))
def test_postselection_helps_under_readout_noise(r, t):
    # readout-only noise: the encoded run's D never exceeds the bare run's D
    bare = {res.target.row: res.circuit for res in synthesize_words()}
    nc = NoiseConfig(0, 0, r, **QUIET)
    enc = exact_d(build_encoded_run(t, prep_for(t.initial)), nc, t.row)
    assert enc <= exact_d(bare[t.row], nc, t.row) + 1e-12


def test_postselection_helps_empirically(bare):
    nc = NoiseConfig(0, 0, 0.05, **QUIET)
    diffs = []
    for seed in range(30):
        e = stat_distance_hat(noisy_run(catalog()["row01-FTv1"], nc, 8192, seed), task(1).ideal_logical_distribution)
        b = stat_distance_hat(noisy_run(bare[1], nc, 8192, seed), task(1).ideal_logical_distribution)
        diffs.append(b - e)
    diffs = np.array(diffs)
    assert diffs.mean() > -5 * diffs.std(ddof=1) / np.sqrt(len(diffs))
    assert diffs.mean() > 0
