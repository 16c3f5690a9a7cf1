import numpy as np
import pytest

from qbandit.harness import (
    ConfigError, EpisodeTrace, ExperimentConfig, aggregate, fit_scaling,
    read_trace_csv, run_experiment, write_trace_csv,
)


def _cfg(env, pol, T, seeds=(3,), extra_env=None, extra_pol=None):
    e = {"kind": env}
    e.update(extra_env or {})
    p = {"kind": pol}
    p.update(extra_pol or {})
    return ExperimentConfig({"schema_version": 1, "environment": e,
                             "policy": p, "T": T, "seeds": list(seeds)})


def test_config_rejects_bad_shapes():
    with pytest.raises(ConfigError):
        ExperimentConfig({"schema_version": 2, "environment": {}, "policy": {},
                          "T": 10, "seeds": [0]})
    with pytest.raises(ConfigError):
        ExperimentConfig({"environment": {"kind": "psmaqb"}, "T": 10,
                          "seeds": [0]})
    with pytest.raises(ConfigError):
        _cfg("maze", "vvn", 12)
    with pytest.raises(ConfigError):
        _cfg("sphere", "ucb", 12, extra_env={"dim": 2, "noise":
                                             {"kind": "gaussian"}})
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "vvn", 10, extra_pol={"k": 3})  # 10 % 12 != 0
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "vvn", 12, seeds=[1, 1], extra_pol={"k": 3})
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "vvn", 0, extra_pol={"k": 1})
    with pytest.raises(ConfigError):
        _cfg("sphere", "vn", 12, extra_env={"dim": 2,
                                            "noise": {"kind": "levy"}})
    # misspelled keys must fail loudly, not silently fall back to defaults
    with pytest.raises(ConfigError):
        _cfg("jc", "etc", 10, extra_env={"omega": 1.0, "n_cav": 2})
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "vvn", 12, extra_pol={"k": 3, "bata_const": 4.0})


def test_config_json_roundtrip():
    cfg = _cfg("sphere", "vn", 80, extra_env={"dim": 2, "noise":
                                              {"kind": "gaussian",
                                               "sigma": 0.5}})
    again = ExperimentConfig.from_json(cfg.to_json())
    assert again.environment == cfg.environment
    assert again.policy == cfg.policy
    assert again.T == cfg.T and again.seeds == cfg.seeds


def test_same_seed_is_bit_identical():
    cfg = _cfg("psmaqb", "vvn", 120, extra_pol={"k": 3})
    (a,) = run_experiment(cfg)
    (b,) = run_experiment(cfg)
    assert np.array_equal(a.actions, b.actions)
    assert np.array_equal(a.rewards, b.rewards)
    assert np.array_equal(a.cum_regret, b.cum_regret)
    assert np.array_equal(a.lmin, b.lmin)


def test_thread_count_does_not_change_traces():
    cfg = _cfg("psmaqb", "vn", 120, seeds=[0, 1, 2, 3])
    serial = run_experiment(cfg, threads=1)
    parallel = run_experiment(cfg, threads=4)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.actions, b.actions)
        assert np.array_equal(a.rewards, b.rewards)
        assert np.array_equal(a.cum_regret, b.cum_regret)


def test_trace_csv_roundtrip_bytes(tmp_path):
    cfg = _cfg("psmaqb", "vvn", 120, extra_pol={"k": 3})
    (trace,) = run_experiment(cfg)
    p1 = tmp_path / "one.csv"
    p2 = tmp_path / "two.csv"
    write_trace_csv(p1, trace)
    write_trace_csv(p2, trace)
    assert p1.read_bytes() == p2.read_bytes()
    back = read_trace_csv(p1)
    p3 = tmp_path / "three.csv"
    write_trace_csv(p3, back)
    assert p3.read_bytes() == p1.read_bytes()
    assert np.array_equal(back.actions, trace.actions)
    assert np.array_equal(back.rewards, trace.rewards)
    assert np.array_equal(back.lmin, trace.lmin)
    assert np.array_equal(back.coverage, trace.coverage)


def test_trace_csv_optional_columns(tmp_path):
    cfg = _cfg("psmaqb", "etc", 100)
    (trace,) = run_experiment(cfg)
    assert trace.lmin is None and trace.coverage is None
    path = tmp_path / "etc.csv"
    write_trace_csv(path, trace)
    back = read_trace_csv(path)
    assert back.lmin is None and back.coverage is None
    assert np.array_equal(back.cum_regret, trace.cum_regret)


def test_reward_recording_conventions():
    (qs,) = run_experiment(_cfg("psmaqb", "vvn", 24, extra_pol={"k": 2}))
    assert set(np.unique(qs.rewards)) <= {0.0, 1.0}
    (sb,) = run_experiment(_cfg("sphere", "circle", 24,
                                extra_env={"dim": 2,
                                           "noise": {"kind": "bernoulli"}}))
    assert set(np.unique(sb.rewards)) <= {-1.0, 1.0}


def test_oracle_trace_is_flat():
    (tr,) = run_experiment(_cfg("psmaqb", "oracle", 50))
    assert np.all(tr.rewards == 1.0)
    assert np.all(tr.cum_regret == 0.0)
    assert np.all(tr.inst_regret == 0.0)


def test_batched_telemetry_shape():
    (tr,) = run_experiment(_cfg("psmaqb", "vn", 80))
    assert tr.lmin.shape == (80,)
    # per-batch values repeated across the 4 rounds of each batch
    for tb in range(20):
        assert np.all(tr.lmin[4 * tb:4 * (tb + 1)] == tr.lmin[4 * tb])
    assert set(np.unique(tr.coverage)) <= {0.0, 1.0}
    assert np.all(np.diff(tr.cum_regret) >= -1e-12)


def test_vvn_radius_variants():
    base = {"k": 2, "delta": 0.5}
    (const,) = run_experiment(_cfg("psmaqb", "vvn", 160, extra_pol=base))
    (logdet,) = run_experiment(_cfg("psmaqb", "vvn", 160,
                                    extra_pol=dict(base, beta="logdet")))
    (scaled,) = run_experiment(_cfg("psmaqb", "vvn", 160,
                                    extra_pol=dict(base, beta="logdet",
                                                   omega_scale=12.0)))
    # same draws, first batch has weight 1 in every mode, then radii diverge
    per_batch = 8
    assert np.array_equal(const.actions[:per_batch],
                          logdet.actions[:per_batch])
    assert not np.array_equal(const.actions, logdet.actions)
    assert not np.array_equal(logdet.actions, scaled.actions)
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "vvn", 160, extra_pol=dict(base, beta="fixed"))
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "vvn", 160, extra_pol=dict(base, omega_scale=0.0))
    with pytest.raises(ConfigError):
        _cfg("psmaqb", "circle", 160, extra_pol={"omega_scale": 2.0})


def test_trace_validation():
    with pytest.raises(ValueError):
        EpisodeTrace(np.zeros((3, 2)), np.zeros(2), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        EpisodeTrace(np.zeros((3, 2)), np.zeros(3), np.zeros(3),
                     np.array([1.0, 0.5, 2.0]))  # cum regret dips


def test_aggregate_examples():
    mean, std = aggregate([np.array([1.0, 2.0, 3.0])])
    assert np.array_equal(mean, [1.0, 2.0, 3.0])
    assert np.array_equal(std, [0.0, 0.0, 0.0])
    mean, std = aggregate([np.full(4, 2.0), np.full(4, 4.0)])
    assert np.allclose(mean, 3.0)
    assert np.allclose(std, np.sqrt(2.0))
    series = [np.array([0.0, 3.0]), np.array([3.0, 6.0]),
              np.array([6.0, 9.0])]
    mean, std = aggregate(series)
    assert np.allclose(mean, [3.0, 6.0])
    assert np.allclose(std, 3.0)
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([np.zeros(3), np.zeros(4)])


def test_fit_scaling_recovers_planted_curves():
    ts = np.arange(10, 400, 7, dtype=float)
    fit = fit_scaling(ts, 3.0 * np.log(ts) ** 2 + 1.5, "polylog")
    assert fit.params["c"] == pytest.approx(3.0, abs=1e-9)
    assert fit.params["b"] == pytest.approx(1.5, abs=1e-9)
    assert fit.residual < 1e-9
    fit = fit_scaling(ts, 0.7 * np.sqrt(ts * np.log(ts)), "sqrtlog")
    assert fit.params["c"] == pytest.approx(0.7, abs=1e-9)
    fit = fit_scaling(ts, 2.0 * ts ** 0.5, "power")
    assert fit.params["m"] == pytest.approx(0.5, abs=1e-9)
    assert fit.params["c"] == pytest.approx(2.0, abs=1e-9)
    fit = fit_scaling(ts, 5.0 * ts ** 1.3, "power", exponent=1.3)
    assert fit.params["c"] == pytest.approx(5.0, abs=1e-9)
    fit = fit_scaling(ts, 4.0 * (np.log(ts) / ts) ** 0.9, "loglin")
    assert fit.params["m"] == pytest.approx(0.9, abs=1e-9)
    assert fit.params["b"] == pytest.approx(4.0, abs=1e-9)


def test_fit_scaling_model_comparison():
    # a genuinely polylog curve should beat the root-t model on residual
    ts = np.arange(20, 2000, 13, dtype=float)
    ys = 2.0 * np.log(ts) ** 2 + 3.0
    poly = fit_scaling(ts, ys, "polylog")
    root = fit_scaling(ts, ys, "power", exponent=0.5)
    assert poly.residual < root.residual


def test_fit_scaling_input_checks():
    ts = np.arange(10, 400, 7, dtype=float)
    with pytest.raises(ValueError):
        fit_scaling(ts[:5], np.ones(5), "polylog")
    with pytest.raises(ValueError):
        fit_scaling(np.array([0.5] * 12), np.ones(12), "polylog")
    with pytest.raises(ValueError):
        fit_scaling(ts, np.zeros_like(ts), "power")
    with pytest.raises(ValueError):
        fit_scaling(ts, np.ones_like(ts), "fractal")
    prediction = fit_scaling(ts, 3.0 * np.log(ts) ** 2, "polylog")
    assert np.allclose(prediction.predict(ts), 3.0 * np.log(ts) ** 2,
                       atol=1e-8)
