"""Experiment configuration, seeded execution, persistence, and scaling fits.

A config names an environment, a policy, a horizon and seeds; running it
yields one trace per seed, bit-identical for identical (config, seed) no
matter the thread count or compilation mode.  Episodes execute through the
fused kernels with pre-drawn randomness, one independent stream per seed and
consumer.
"""

import concurrent.futures
import json

import numpy as np

from . import _kernels as K
from .estimators import beta_mom
from .rng import random_unit, stream, truncated_standard_normal

SCHEMA_VERSION = 1

CSV_COLUMNS = ("round", "action", "reward", "inst_regret", "cum_regret",
               "lmin", "lmax", "coverage")


class ConfigError(ValueError):
    """Invalid or incompatible experiment configuration."""


class EpisodeTrace:
    """Per-round record of one episode, plus optional telemetry series."""

    def __init__(self, actions, rewards, inst_regret, cum_regret,
                 lmin=None, lmax=None, coverage=None, infidelity=None,
                 work=None, dissipation=None):
        self.actions = actions
        self.rewards = np.asarray(rewards, dtype=float)
        self.inst_regret = np.asarray(inst_regret, dtype=float)
        self.cum_regret = np.asarray(cum_regret, dtype=float)
        n = len(self.rewards)
        if len(self.inst_regret) != n or len(self.cum_regret) != n:
            raise ValueError("trace series lengths disagree")
        if np.all(self.inst_regret >= 0.0) and np.any(
                np.diff(self.cum_regret) < -1e-12):
            raise ValueError("cumulative regret must be nondecreasing")
        self.lmin = None if lmin is None else np.asarray(lmin, dtype=float)
        self.lmax = None if lmax is None else np.asarray(lmax, dtype=float)
        self.coverage = (None if coverage is None
                         else np.asarray(coverage, dtype=float))
        self.infidelity = (None if infidelity is None
                           else np.asarray(infidelity, dtype=float))
        self.work = None if work is None else np.asarray(work, dtype=float)
        self.dissipation = (None if dissipation is None
                            else np.asarray(dissipation, dtype=float))

    def __len__(self):
        return len(self.rewards)


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


class ExperimentConfig:
    """Validated view of a config mapping (JSON-compatible)."""

    def __init__(self, mapping):
        m = dict(mapping)
        version = m.get("schema_version", SCHEMA_VERSION)
        _require(version == SCHEMA_VERSION,
                 f"unsupported schema_version {version}")
        _require("environment" in m and "policy" in m,
                 "config needs 'environment' and 'policy' sections")
        self.environment = dict(m["environment"])
        self.policy = dict(m["policy"])
        self.T = int(m.get("T", 0))
        _require(self.T >= 1, "T must be >= 1")
        seeds = list(m.get("seeds", []))
        _require(len(seeds) >= 1, "need at least one seed")
        _require(len(set(seeds)) == len(seeds), "seeds must be distinct")
        self.seeds = [int(s) for s in seeds]
        self.out = m.get("out")
        self.telemetry = dict(m.get("telemetry", {}))
        self._check_pairing()

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))

    def to_json(self):
        return json.dumps({
            "schema_version": SCHEMA_VERSION,
            "environment": self.environment,
            "policy": self.policy,
            "T": self.T,
            "seeds": self.seeds,
            "out": self.out,
            "telemetry": self.telemetry,
        }, indent=2, sort_keys=True)

    _ENV_KEYS = {
        "psmaqb": {"kind", "theta"},
        "sphere": {"kind", "dim", "noise", "theta"},
        "discrete": {"kind", "state", "arms"},
        "jc": {"kind", "omega", "n0", "theta"},
    }
    _POLICY_KEYS = {
        "vvn": {"kind", "k", "lam0", "delta", "beta", "beta_const",
                "omega_scale"},
        "vn": {"kind", "lam0", "delta", "omega_scale"},
        "circle": {"kind", "lam0", "delta"},
        "etc": {"kind"},
        "oracle": {"kind"},
        "linucb": {"kind", "arms", "n_arms", "eta", "lam", "delta", "big_l"},
        "ucb": {"kind", "eta", "delta"},
    }

    def _check_pairing(self):
        env_kind = self.environment.get("kind")
        pol_kind = self.policy.get("kind")
        allowed = {
            "psmaqb": {"vvn", "vn", "circle", "etc", "oracle"},
            "sphere": {"vvn", "vn", "circle", "linucb"},
            "discrete": {"ucb"},
            "jc": {"vvn", "etc", "oracle"},
        }
        _require(env_kind in allowed,
                 f"unknown environment kind {env_kind!r}")
        _require(pol_kind in allowed[env_kind],
                 f"policy {pol_kind!r} cannot run on a {env_kind!r} "
                 f"environment")
        stray = set(self.environment) - self._ENV_KEYS[env_kind]
        _require(not stray,
                 f"unknown environment keys for {env_kind!r}: {sorted(stray)}")
        stray = set(self.policy) - self._POLICY_KEYS[pol_kind]
        _require(not stray,
                 f"unknown policy keys for {pol_kind!r}: {sorted(stray)}")
        if env_kind == "sphere":
            noise = self.environment.get("noise", {})
            _require(noise.get("kind") in
                     {"gaussian", "vanishing", "bernoulli"},
                     f"unknown noise kind {noise.get('kind')!r}")
            _require(not set(noise) - {"kind", "sigma"},
                     "noise section only takes 'kind' and 'sigma'")
        if pol_kind in {"vvn", "vn", "circle"}:
            d = self._dim()
            k = int(self.policy.get("k", 1)) if pol_kind == "vvn" else 1
            per_batch = 2 * (d - 1) * k
            _require(self.T % per_batch == 0,
                     f"T={self.T} must be a multiple of the batch size "
                     f"{per_batch}")
            _require(float(self.policy.get("omega_scale", 1.0)) > 0.0,
                     "omega_scale must be positive")
        if pol_kind == "vvn":
            _require(self.policy.get("beta", "const") in {"const", "logdet"},
                     f"unknown beta variant {self.policy.get('beta')!r}")

    def _dim(self):
        if self.environment.get("kind") in ("psmaqb", "jc", "discrete"):
            return 3
        return int(self.environment.get("dim", 3))


# ---------------------------------------------------------------------------
# per-seed episode execution

def _env_draws(seed, shape, env_code):
    gen = stream(seed, "env")
    if env_code == K.ENV_GAUSS:
        return gen.standard_normal(shape)
    if env_code == K.ENV_VANISHING:
        return truncated_standard_normal(gen.random(shape))
    return gen.random(shape)


def _theta_for(cfg, seed, d):
    fixed = cfg.environment.get("theta")
    if fixed is not None:
        theta = np.asarray(fixed, dtype=float)
        if theta.shape != (d,) or abs(np.linalg.norm(theta) - 1.0) > 1e-10:
            raise ConfigError("environment theta must be a unit vector")
        return theta
    return random_unit(stream(seed, "envgen"), d)


def _sphere_env_code(cfg):
    kind = cfg.environment.get("noise", {}).get("kind", "gaussian")
    return {"gaussian": K.ENV_GAUSS, "vanishing": K.ENV_VANISHING,
            "bernoulli": K.ENV_BERNOULLI}[kind]


def _batched_seed_run(cfg, seed):
    env_kind = cfg.environment["kind"]
    pol = cfg.policy
    d = cfg._dim()
    theta = _theta_for(cfg, seed, d)
    k = int(pol.get("k", 1)) if pol["kind"] == "vvn" else 1
    per_batch = 2 * (d - 1) * k
    n_batches = cfg.T // per_batch

    omega_scale = float(pol.get("omega_scale", 1.0))
    if pol["kind"] == "vvn":
        variant = pol.get("beta", "const")
        if variant == "const":
            beta_const = float(pol.get("beta_const") or beta_mom(d, 2.0, 1.0))
            mode = K.BETA_CONST
        elif variant == "logdet":
            # growing radius instead of the worst-case constant
            beta_const = 0.0
            mode = K.BETA_WEIGHTED
        else:
            raise ConfigError(f"unknown beta variant {variant!r}")
        lam0 = float(pol.get("lam0", 2.0))
        delta = float(pol.get("delta", 0.1))
    elif pol["kind"] == "vn":
        beta_const = 0.0
        mode = K.BETA_WEIGHTED
        from .policies import lam0_floor
        lam0 = float(pol.get("lam0") or lam0_floor(d))
        # theorem's split: delta' spread over the batch budget
        delta = float(pol.get("delta") or 1.0 / max(n_batches, 2) ** 2)
    else:
        beta_const = 0.0
        mode = K.BETA_CIRCLE
        lam0 = float(pol.get("lam0", 1.0))
        delta = float(pol.get("delta") or 1.0 / cfg.T)

    if env_kind == "sphere":
        env_code = _sphere_env_code(cfg)
        regret_scale = 1.0
        sigma = float(cfg.environment.get("noise", {}).get("sigma", 1.0))
    elif env_kind == "jc":
        env_code = K.ENV_JC
        regret_scale = 0.5
        sigma = 0.0
    else:
        env_code = K.ENV_BERNOULLI
        regret_scale = 0.5
        sigma = 0.0

    draws = _env_draws(seed, (n_batches, d - 1, 2, k), env_code)
    c0 = random_unit(stream(seed, "policy"), d)
    jc_omega = float(cfg.environment.get("omega", 1.0))
    jc_n0 = int(cfg.environment.get("n0", 0))

    acts, xs, regret, infid, work, diss, lmin, lmax, cover = K.batched_episode(
        theta, lam0, k, n_batches, mode, beta_const, omega_scale,
        np.log(1.0 / delta), env_code, sigma, regret_scale, draws, c0,
        jc_omega, jc_n0)

    rewards = 0.5 * (xs + 1.0) if env_kind in ("psmaqb", "jc") else xs
    rep = np.repeat
    trace = EpisodeTrace(
        actions=acts, rewards=rewards, inst_regret=regret,
        cum_regret=np.cumsum(regret),
        lmin=rep(lmin, per_batch), lmax=rep(lmax, per_batch),
        coverage=rep(cover.astype(float), per_batch),
        infidelity=infid,
        work=work if env_kind == "jc" else None,
        dissipation=diss if env_kind == "jc" else None)
    return trace


def _etc_seed_run(cfg, seed):
    env_kind = cfg.environment["kind"]
    theta = _theta_for(cfg, seed, 3)
    env_code = K.ENV_JC if env_kind == "jc" else K.ENV_BERNOULLI
    draws = stream(seed, "env").random(cfg.T)
    jc_omega = float(cfg.environment.get("omega", 1.0))
    jc_n0 = int(cfg.environment.get("n0", 0))
    acts, xs, regret, work, diss = K.etc_episode(
        theta, cfg.T, draws, env_code, jc_omega, jc_n0, 0.5)
    return EpisodeTrace(
        actions=acts, rewards=0.5 * (xs + 1.0), inst_regret=regret,
        cum_regret=np.cumsum(regret),
        work=work if env_kind == "jc" else None,
        dissipation=diss if env_kind == "jc" else None)


def _oracle_seed_run(cfg, seed):
    # best state-aware protocol: always play theta, so p = 1 every round
    env_kind = cfg.environment["kind"]
    theta = _theta_for(cfg, seed, 3)
    T = cfg.T
    acts = np.tile(theta, (T, 1))
    rewards = np.ones(T)
    zeros = np.zeros(T)
    jc_omega = float(cfg.environment.get("omega", 1.0))
    return EpisodeTrace(
        actions=acts, rewards=rewards, inst_regret=zeros, cum_regret=zeros,
        work=np.full(T, jc_omega) if env_kind == "jc" else None,
        dissipation=zeros if env_kind == "jc" else None)


def _ball_arms(gen, n_arms, d):
    arms = np.empty((n_arms, d))
    for i in range(n_arms):
        arms[i] = random_unit(gen, d) * gen.random() ** (1.0 / d)
    return arms


def _linucb_seed_run(cfg, seed):
    pol = cfg.policy
    d = cfg._dim()
    env_gen = stream(seed, "envgen")
    theta = _theta_for(cfg, seed, d)
    arms_spec = pol.get("arms", "ball")
    arms = None
    if arms_spec == "ball":
        arms = _ball_arms(env_gen, int(pol.get("n_arms", 64)), d)
    elif arms_spec != "sphere":
        arms = np.asarray(arms_spec, dtype=float)
        if arms.ndim != 2 or arms.shape[1] != d:
            raise ConfigError("explicit arms must be an (n, dim) matrix")
    env_code = _sphere_env_code(cfg)
    _require(env_code != K.ENV_BERNOULLI,
             "linucb runs support gaussian or vanishing noise")
    sigma = float(cfg.environment.get("noise", {}).get("sigma", 1.0))
    eta = float(pol.get("eta", max(sigma, 1.0)))
    lam = float(pol.get("lam", 1.0))
    delta = float(pol.get("delta", 0.1))
    big_l = float(pol.get("big_l", 1.0))
    draws = _env_draws(seed, cfg.T, env_code)
    if arms is None:
        c0 = random_unit(stream(seed, "policy"), d)
        acts, xs, regret, cover, lmin, lmax = K.linucb_sphere_episode(
            theta, c0, lam, eta, np.log(1.0 / delta), big_l, draws,
            env_code, sigma)
    else:
        acts, xs, regret, cover, lmin, lmax = K.linucb_finite_episode(
            arms, theta, lam, eta, np.log(1.0 / delta), big_l, draws,
            env_code, sigma)
    return EpisodeTrace(
        actions=acts, rewards=xs, inst_regret=regret,
        cum_regret=np.cumsum(regret), lmin=lmin, lmax=lmax,
        coverage=cover.astype(float))


def _ucb_seed_run(cfg, seed):
    from .environments import DiscreteMAQB, suboptimality_gaps
    from .qubit import DiscreteObservable

    env_spec = cfg.environment
    state = np.asarray(env_spec.get("state", (0.0, 0.0, 1.0)), dtype=float)
    arms_cfg = env_spec.get("arms")
    _require(arms_cfg is not None and len(arms_cfg) >= 1,
             "discrete environment needs an 'arms' list")
    observables = []
    for arm in arms_cfg:
        axis = np.asarray(arm["axis"], dtype=float)
        hi = float(arm.get("hi", 1.0))
        lo = float(arm.get("lo", -1.0))
        observables.append(DiscreteObservable.from_direction(axis, hi, lo))
    env = DiscreteMAQB(observables, state)

    outcome_hi = np.array([obs.eigenvalues[0] for obs in observables])
    outcome_lo = np.array([obs.eigenvalues[1] for obs in observables])
    p_hi = np.array([0.5 * (1.0 + state @ obs.projector_blochs[0])
                     for obs in observables])
    spread = np.max(outcome_hi - outcome_lo)
    eta = float(cfg.policy.get("eta", spread / 2.0))
    delta = float(cfg.policy.get("delta") or 1.0 / cfg.T ** 2)
    draws = stream(seed, "env").random(cfg.T)
    idx, xs, regret = K.ucb_episode(outcome_hi, outcome_lo, p_hi, cfg.T,
                                    eta, np.log(1.0 / delta), draws)
    trace = EpisodeTrace(actions=idx, rewards=xs, inst_regret=regret,
                         cum_regret=np.cumsum(regret))
    trace.gaps = suboptimality_gaps(env)
    return trace


_RUNNERS = {
    "vvn": _batched_seed_run,
    "vn": _batched_seed_run,
    "circle": _batched_seed_run,
    "etc": _etc_seed_run,
    "oracle": _oracle_seed_run,
    "linucb": _linucb_seed_run,
    "ucb": _ucb_seed_run,
}


def run_experiment(cfg, threads=1):
    """One trace per seed, assembled in seed order."""
    if not isinstance(cfg, ExperimentConfig):
        cfg = ExperimentConfig(cfg)
    runner = _RUNNERS[cfg.policy["kind"]]
    if threads <= 1 or len(cfg.seeds) == 1:
        return [runner(cfg, seed) for seed in cfg.seeds]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(runner, cfg, seed) for seed in cfg.seeds]
        return [f.result() for f in futures]


def aggregate(series_list):
    """Pointwise mean and sample standard deviation of equal-length series."""
    arr = np.asarray(series_list, dtype=float)
    if arr.ndim != 2:
        raise ValueError("need a list of equal-length series")
    mean = arr.mean(axis=0)
    if arr.shape[0] == 1:
        return mean, np.zeros_like(mean)
    return mean, arr.std(axis=0, ddof=1)


# ---------------------------------------------------------------------------
# scaling-law fits

FIT_MODELS = ("polylog", "sqrtlog", "loglin", "power")


class FitResult:
    """Least-squares fit of one scaling model; residual in raw y units."""

    def __init__(self, model, params, residual):
        self.model = model
        self.params = dict(params)
        self.residual = float(residual)

    def predict(self, ts):
        ts = np.asarray(ts, dtype=float)
        p = self.params
        if self.model == "polylog":
            return p["c"] * np.log(ts) ** 2 + p["b"]
        if self.model == "sqrtlog":
            return p["c"] * np.sqrt(ts * np.log(ts))
        if self.model == "loglin":
            return p["b"] * (np.log(ts) / ts) ** p["m"]
        return p["c"] * ts ** p["m"]

    def __repr__(self):
        terms = ", ".join(f"{k}={v:.6g}" for k, v in self.params.items())
        return f"FitResult({self.model}: {terms}, residual={self.residual:.6g})"


def fit_scaling(ts, ys, model, exponent=None):
    """Ordinary least squares in the model's linearized coordinates.

    `exponent` pins m for the power model (e.g. 0.5 for a pure sqrt fit).
    Residual is the root-mean-square error in raw y space for every model,
    so fits of different shapes compare directly.
    """
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if model not in FIT_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if len(ts) < 10:
        raise ValueError("need at least 10 points")
    if np.min(ts) <= 1.0:
        raise ValueError("abscissae must exceed 1 for the log models")
    if np.all(ts == ts[0]):
        raise ValueError("degenerate design: all abscissae equal")

    if model == "polylog":
        z = np.log(ts) ** 2
        a = np.vstack([z, np.ones_like(z)]).T
        (c, b), *_ = np.linalg.lstsq(a, ys, rcond=None)
        params = {"c": c, "b": b}
    elif model == "sqrtlog":
        phi = np.sqrt(ts * np.log(ts))
        c = float(phi @ ys) / float(phi @ phi)
        params = {"c": c}
    elif model == "loglin":
        if np.any(ys <= 0.0):
            raise ValueError("log-space fit needs positive values")
        z = np.log(np.log(ts) / ts)
        a = np.vstack([z, np.ones_like(z)]).T
        (m, logb), *_ = np.linalg.lstsq(a, np.log(ys), rcond=None)
        params = {"m": m, "b": float(np.exp(logb))}
    else:
        if np.any(ys <= 0.0):
            raise ValueError("log-space fit needs positive values")
        z = np.log(ts)
        if exponent is None:
            a = np.vstack([z, np.ones_like(z)]).T
            (m, logc), *_ = np.linalg.lstsq(a, np.log(ys), rcond=None)
        else:
            m = float(exponent)
            logc = float(np.mean(np.log(ys) - m * z))
        params = {"m": float(m), "c": float(np.exp(logc))}

    fit = FitResult(model, params, 0.0)
    resid = ys - fit.predict(ts)
    fit.residual = float(np.sqrt(np.mean(resid * resid)))
    return fit


# ---------------------------------------------------------------------------
# CSV persistence

def _format_action(action):
    if action is None:
        return ""
    if np.isscalar(action) or getattr(action, "ndim", 1) == 0:
        return repr(int(action))
    return ";".join(repr(float(x)) for x in np.asarray(action).ravel())


def _format_opt(value):
    return "" if value is None else repr(float(value))


def write_trace_csv(path, trace):
    """Fixed-column CSV; floats via repr so round-trips are byte-exact."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for t in range(len(trace)):
            action = None if trace.actions is None else trace.actions[t]
            row = [
                repr(t),
                _format_action(action),
                repr(float(trace.rewards[t])),
                repr(float(trace.inst_regret[t])),
                repr(float(trace.cum_regret[t])),
                _format_opt(None if trace.lmin is None else trace.lmin[t]),
                _format_opt(None if trace.lmax is None else trace.lmax[t]),
                _format_opt(None if trace.coverage is None
                            else trace.coverage[t]),
            ]
            fh.write(",".join(row) + "\n")


def read_trace_csv(path):
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if tuple(header.split(",")) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header!r}")
        actions, rewards, inst, cum = [], [], [], []
        lmin, lmax, cover = [], [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            act = parts[1]
            if act == "":
                actions.append(None)
            elif ";" in act:
                actions.append(np.array([float(x) for x in act.split(";")]))
            else:
                actions.append(int(act))
            rewards.append(float(parts[2]))
            inst.append(float(parts[3]))
            cum.append(float(parts[4]))
            lmin.append(float(parts[5]) if parts[5] else None)
            lmax.append(float(parts[6]) if parts[6] else None)
            cover.append(float(parts[7]) if parts[7] else None)

    def _col(vals):
        if all(v is None for v in vals):
            return None
        return np.array([np.nan if v is None else v for v in vals])

    if all(a is None for a in actions):
        acts = None
    elif all(isinstance(a, (int, np.integer)) for a in actions):
        acts = np.array(actions, dtype=np.int64)
    else:
        acts = np.vstack(actions)
    return EpisodeTrace(actions=acts, rewards=rewards, inst_regret=inst,
                        cum_regret=cum, lmin=_col(lmin), lmax=_col(lmax),
                        coverage=_col(cover))
