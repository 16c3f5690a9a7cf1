import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbandit.harness import ExperimentConfig, run_experiment
from qbandit.estimators import beta_mom
from qbandit.policies import EigenBatchState, MODE_MOM
from qbandit.qubit import DIVERGENT, PureQubit, relative_entropy, QubitDensity
from qbandit.rng import random_unit, stream
from qbandit.thermo import (
    DissipationLedger, JCConfig, ThermalConfig, default_epsilon_schedule,
    expected_dissipation, expected_work, jc_angle, jc_round, landauer_entropy,
    run_extraction, thermal_gaps, thermal_round, work_thresholds,
)

Z = PureQubit((0.0, 0.0, 1.0))
MINUS_Z = PureQubit((0.0, 0.0, -1.0))


def test_config_validation():
    with pytest.raises(ValueError):
        JCConfig(0.0)
    with pytest.raises(ValueError):
        JCConfig(1.0, initial_level=-1)
    with pytest.raises(ValueError):
        ThermalConfig(0.0, 10)
    with pytest.raises(ValueError):
        ThermalConfig(1.0, 0)
    with pytest.raises(ValueError):
        ThermalConfig(1.0, 10, schedule_constant=0.0)


def test_jc_perfect_direction():
    cfg = JCConfig(1.5)
    rng = stream(0, "env")
    n = 0
    for _ in range(50):
        n, bit, work, diss = jc_round(cfg, Z, Z, n, rng)
        assert bit == 1 and work == 1.5 and diss == 0.0
    assert n == 50


def test_jc_ground_level_never_drops():
    cfg = JCConfig(1.0)
    rng = stream(1, "env")
    for _ in range(2000):
        n, _, work, _ = jc_round(cfg, Z, MINUS_Z, 0, rng)
        assert n >= 0 and work >= 0.0


def test_jc_orthogonal_split_at_level_three():
    # p = 0 at n = 3: drop probability is sin^2(pi sqrt(3)/4) ~ 0.9564
    s2 = math.sin(math.pi * math.sqrt(3.0) / 4.0) ** 2
    assert s2 == pytest.approx(0.9563621, abs=5e-7)
    cfg = JCConfig(1.0)
    rng = stream(2, "env")
    drops = stays = 0
    n_draws = 100_000
    for _ in range(n_draws):
        n, bit, _, _ = jc_round(cfg, Z, MINUS_Z, 3, rng)
        assert bit == 0
        if n == 2:
            drops += 1
        else:
            stays += 1
    for freq, want in ((drops / n_draws, s2), (stays / n_draws, 1.0 - s2)):
        assert abs(freq - want) <= 4.0 * math.sqrt(want * (1 - want) / n_draws)


@given(st.floats(0.0, 1.0), st.integers(0, 40))
@settings(max_examples=60, deadline=None)
def test_jc_probability_triple_sums_to_one(p, n):
    s2 = math.sin(jc_angle(n)) ** 2
    assert p + (1.0 - p) * (1.0 - s2) + (1.0 - p) * s2 == pytest.approx(
        1.0, abs=1e-15)


def test_jc_dissipation_bounds():
    cfg = JCConfig(2.0)
    gen = stream(3, "envgen")
    rng = stream(3, "env")
    for _ in range(500):
        direction = random_unit(gen, 3)
        n = int(rng.integers(0, 6))
        _, _, _, diss = jc_round(cfg, Z, direction, n, rng)
        assert 0.0 <= diss <= 2.0 * cfg.omega


def test_jc_expected_work():
    # E[work] = omega (p(1 + sin^2) - sin^2) at fixed level
    cfg = JCConfig(1.0)
    direction = PureQubit((math.sin(0.8), 0.0, math.cos(0.8)))
    p = 0.5 * (1.0 + math.cos(0.8))
    s2 = math.sin(jc_angle(2)) ** 2
    want = p * (1.0 + s2) - s2
    rng = stream(4, "env")
    n_draws = 100_000
    works = np.empty(n_draws)
    for i in range(n_draws):
        _, _, works[i], _ = jc_round(cfg, Z, direction, 2, rng)
    se = works.std(ddof=1) / math.sqrt(n_draws)
    assert abs(works.mean() - want) <= 4.0 * se


def test_thermal_gap_endpoints():
    nus = thermal_gaps(0.1, 64, beta=2.0)
    assert nus[-1] == 0.0  # exactly: both occupations reach 1/2
    assert nus[0] == pytest.approx(
        math.log((1 - 1 / 128 - (1 - 1 / 64) * 0.1)
                 / (1 / 128 + (1 - 1 / 64) * 0.1)) / 2.0)
    # increments are nonnegative and obey the Hoeffding step bound
    for eps, m in ((0.05, 100), (0.2, 37), (0.4, 500)):
        nus = thermal_gaps(eps, m, beta=1.0)
        diffs = nus[:-1] - nus[1:]
        dp = (0.5 - eps) / m
        assert np.all(diffs >= 0.0)
        assert np.all(diffs <= (2.0 / eps) * dp + 1e-12)
    with pytest.raises(ValueError):
        thermal_gaps(0.6, 10, 1.0)
    with pytest.raises(ValueError):
        thermal_gaps(0.0, 10, 1.0)


def test_thermal_half_accuracy_is_flat():
    cfg = ThermalConfig(1.0, 25)
    rng = stream(5, "env")
    assert work_thresholds(0.5, 1.0) == (0.0, 0.0)
    for _ in range(20):
        work, _ = thermal_round(cfg, Z, MINUS_Z, 0.5, rng)
        assert work == 0.0


def test_thermal_branch_zero_limit():
    # state == direction forces branch 0; mean work -> ln2 + ln(1-eps)
    m, eps, runs = 1000, 0.1, 100_000
    cfg = ThermalConfig(1.0, m)
    nus = thermal_gaps(eps, m, 1.0)
    dnu = nus[:-1] - nus[1:]
    ramp = np.linspace(1, m, m) / (2.0 * m) + (1.0 - np.linspace(1, m, m) / m) * eps
    rng = stream(6, "env")
    total = 0.0
    total_sq = 0.0
    for _ in range(10):
        bits = rng.random((runs // 10, m)) < ramp
        works = bits[:, :-1] @ dnu + bits[:, -1] * nus[-1]
        total += works.sum()
        total_sq += (works ** 2).sum()
    mean = total / runs
    var = total_sq / runs - mean ** 2
    want = math.log(2.0) + math.log(1.0 - eps)
    assert abs(mean - want) <= 3.0 * math.sqrt(var / runs) + 10.0 / m


def test_thermal_reward_tracks_fidelity():
    # the work threshold recovers the branch bit with high probability
    m, eps = 300, 0.1
    cfg = ThermalConfig(1.0, m)
    direction = PureQubit((math.sin(0.9273), 0.0, math.cos(0.9273)))
    fid = 0.5 * (1.0 + math.cos(0.9273))
    rng = stream(7, "env")
    n_draws = 3000
    hits = sum(thermal_round(cfg, Z, direction, eps, rng)[1]
               for _ in range(n_draws))
    band = 4.0 * math.sqrt(fid * (1 - fid) / n_draws) + 0.01
    assert abs(hits / n_draws - fid) <= band


def test_expected_work_closed_form():
    assert expected_work(Z, Z, 0.5, 2.0) == pytest.approx(0.0, abs=1e-12)
    # perfect estimate: deficit ln2 - E[W] shrinks as eps drops
    w3 = expected_work(Z, Z, 1e-3, 1.0)
    w4 = expected_work(Z, Z, 1e-4, 1.0)
    assert w3 < w4 < math.log(2.0)
    assert math.log(2.0) - w4 < math.log(2.0) - w3 < 0.02
    # generic identity: E[W] = F w1 + (1-F) w0 with the branch limits
    gen = stream(8, "envgen")
    for _ in range(20):
        a, b = random_unit(gen, 3), random_unit(gen, 3)
        eps = 0.05 + 0.4 * gen.random()
        fid = 0.5 * (1.0 + float(a @ b))
        w0, w1 = work_thresholds(eps, 1.7)
        want = fid * w1 + (1.0 - fid) * w0
        assert expected_work(PureQubit(a), PureQubit(b), eps, 1.7) == (
            pytest.approx(want, abs=1e-10))


def test_expected_dissipation_oracles():
    # antipodal estimate: D(psi || Delta_{2 eps}(psi-hat)) = -ln(eps)
    assert expected_dissipation(Z, MINUS_Z, 0.05, 1.0) == pytest.approx(
        -math.log(0.05), abs=1e-12)
    assert expected_dissipation(Z, MINUS_Z, 0.1, 1.0) == pytest.approx(
        -math.log(0.1), abs=1e-12)
    # the same value through the raw entropy call on 0.9 * bloch
    direct = relative_entropy(Z, QubitDensity((0.0, 0.0, -0.9)))
    assert direct == pytest.approx(-math.log(0.05), abs=1e-12)
    assert expected_work(Z, MINUS_Z, 0.0, 1.0) is DIVERGENT
    with pytest.raises(ValueError):
        expected_work(Z, Z, 0.7, 1.0)


def test_landauer_entropy_values():
    assert landauer_entropy("thermal", 1.0) == 0.0
    assert landauer_entropy("thermal", 0.0) == 0.0
    assert landauer_entropy("thermal", 0.5) == pytest.approx(math.log(2.0))
    alpha = 0.1
    binary = -(0.9 * math.log(0.9) + 0.1 * math.log(0.1))
    got = landauer_entropy("jc", 0.9, math.pi / 4.0)
    assert got == pytest.approx(binary + alpha * math.log(2.0), abs=1e-12)
    with pytest.raises(ValueError):
        landauer_entropy("spin", 0.5)
    with pytest.raises(ValueError):
        landauer_entropy("jc", 1.5)


@given(st.floats(0.0, 1.0), st.floats(0.0, math.pi / 2.0))
@settings(max_examples=80, deadline=None)
def test_landauer_jc_bound(p, theta):
    alpha = 1.0 - p
    bound = 2.0 * alpha - (alpha * math.log(alpha) if alpha > 0 else 0.0)
    assert landauer_entropy("jc", p, theta) <= bound + 1e-12


def test_ledger_consistency():
    ledger = DissipationLedger()
    gen = stream(9, "env")
    for _ in range(5000):
        ledger.append(gen.random())
    assert ledger.cumulative == pytest.approx(np.sum(ledger.per_round),
                                              abs=1e-9)


def test_run_extraction_oracle_jc():
    trace, ledger = run_extraction("jc", Z, "oracle", 40, JCConfig(0.7),
                                   stream(10, "env"))
    assert np.all(trace.work == 0.7)
    assert np.all(trace.rewards == 1.0)
    assert np.all(trace.inst_regret == 0.0)
    assert ledger.cumulative == 0.0


def test_run_extraction_etc_matches_harness():
    seed = 13
    cfg = ExperimentConfig({"schema_version": 1,
                            "environment": {"kind": "jc", "omega": 1.25,
                                            "n0": 2},
                            "policy": {"kind": "etc"},
                            "T": 200, "seeds": [seed]})
    (ktrace,) = run_experiment(cfg)
    theta = random_unit(stream(seed, "envgen"), 3)
    trace, _ = run_extraction("jc", PureQubit(theta), "etc", 200,
                              JCConfig(1.25, initial_level=2),
                              stream(seed, "env"))
    assert np.array_equal(trace.actions, ktrace.actions)
    assert np.array_equal(trace.work, ktrace.work)
    assert np.array_equal(trace.dissipation, ktrace.dissipation)
    assert np.array_equal(trace.rewards, ktrace.rewards)


def test_run_extraction_vvn_matches_harness():
    seed = 17
    cfg = ExperimentConfig({"schema_version": 1,
                            "environment": {"kind": "jc", "omega": 1.0,
                                            "n0": 0},
                            "policy": {"kind": "vvn", "k": 3},
                            "T": 120, "seeds": [seed]})
    (ktrace,) = run_experiment(cfg)
    theta = random_unit(stream(seed, "envgen"), 3)
    c0 = random_unit(stream(seed, "policy"), 3)
    policy = EigenBatchState(3, MODE_MOM, c0, k=3,
                             beta_const=beta_mom(3, 2.0, 1.0))
    trace, ledger = run_extraction("jc", PureQubit(theta), policy, 120,
                                   JCConfig(1.0), stream(seed, "env"))
    assert np.array_equal(trace.actions, ktrace.actions)
    assert np.array_equal(trace.work, ktrace.work)
    assert np.array_equal(trace.dissipation, ktrace.dissipation)
    assert ledger.cumulative == pytest.approx(np.sum(ktrace.dissipation))


def test_run_extraction_thermal_smoke():
    theta = random_unit(stream(19, "envgen"), 3)
    c0 = random_unit(stream(19, "policy"), 3)
    policy = EigenBatchState(3, MODE_MOM, c0, k=2,
                             beta_const=beta_mom(3, 2.0, 1.0))
    cfg = ThermalConfig(2.0, 50, schedule_constant=1.0, delta=0.1)
    trace, ledger = run_extraction("thermal", PureQubit(theta), policy, 40,
                                   cfg, stream(19, "env"), landauer=True)
    assert len(trace) == 40
    assert np.all(np.isfinite(trace.work))
    assert np.all(trace.dissipation >= 0.0)
    assert len(ledger.landauer_entropy) == 40
    assert all(s >= 0.0 for s in ledger.landauer_entropy)
    assert ledger.cumulative == pytest.approx(np.sum(trace.dissipation),
                                              abs=1e-9)
    sched = default_epsilon_schedule(1000, 2.5, 0.1)
    assert sched(1) == 0.5
    assert 0.0 < sched(1000) < 0.5


def test_run_extraction_rejects_mismatches():
    with pytest.raises(TypeError):
        run_extraction("jc", Z, "oracle", 10, ThermalConfig(1.0, 10),
                       stream(0, "env"))
    with pytest.raises(ValueError):
        run_extraction("spin", Z, "oracle", 10, JCConfig(1.0),
                       stream(0, "env"))
    with pytest.raises(ValueError):
        run_extraction("jc", Z, "greedy", 10, JCConfig(1.0),
                       stream(0, "env"))
    policy = EigenBatchState(3, MODE_MOM, np.array([1.0, 0.0, 0.0]),
                             k=3, beta_const=beta_mom(3, 2.0, 1.0))
    with pytest.raises(ValueError):
        run_extraction("jc", Z, policy, 10, JCConfig(1.0), stream(0, "env"))
