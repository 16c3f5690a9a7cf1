"""Hamiltonian-context recommender on translation-invariant spin chains.

Contexts are few-parameter Hamiltonians (transverse-field Ising, generalized
cluster); actions are fixed product states described only by their per-family
Pauli expectations.  Rewards are sums of single-term Pauli measurements with
the sign flipped, so the recommender hunts the lowest-energy state.  Contexts
live in the span of the term families, which a running Gram-Schmidt basis
compresses to the effective dimension before the per-arm linear models see
them.
"""

import csv
import math

import numpy as np

from ._kernels import dot_
from .estimators import DesignMatrix, LSEAccumulator, lse_estimate, lse_update
from .rng import stream

GRAM_TOL = 1e-8


class ContextVector:
    """One Hamiltonian: named term families with one coefficient each."""

    def __init__(self, families, coefficients, n_qubits, params):
        families = tuple(families)
        coefficients = tuple(float(c) for c in coefficients)
        if len(set(families)) != len(families):
            raise ValueError("term families must be distinct")
        if len(families) != len(coefficients):
            raise ValueError("one coefficient per family")
        if not all(np.isfinite(c) for c in coefficients):
            raise ValueError("coefficients must be finite")
        if int(n_qubits) < 1:
            raise ValueError("need at least one site")
        self.families = families
        self.coefficients = coefficients
        self.n_qubits = int(n_qubits)
        self.params = tuple(params)

    def as_array(self):
        return np.array(self.coefficients)


def ising_context(h, n):
    """Sum over sites of Z_i Z_{i+1} + h X_i, periodic."""
    if n < 2:
        raise ValueError("ising chain needs n >= 2")
    return ContextVector(("ZZ", "X"), (1.0, float(h)), n, (float(h),))


def cluster_context(j1, j2, n):
    """Sum over sites of Z_i - j1 X_i X_{i+1} - j2 X_{i-1} Z_i X_{i+1}."""
    if n < 3:
        raise ValueError("cluster chain needs n >= 3")
    return ContextVector(("Z", "XX", "XZX"), (1.0, -float(j1), -float(j2)),
                         n, (float(j1), float(j2)))


class ActionProfile:
    """A preparable state, known only through per-family expectations."""

    def __init__(self, expectations, name=None):
        self.expectations = {}
        for family, value in expectations.items():
            value = float(value)
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"expectation for {family!r} outside [-1, 1]")
            self.expectations[family] = value
        self.name = name

    def expectation(self, family):
        if family not in self.expectations:
            raise KeyError(f"profile has no expectation for family "
                           f"{family!r}")
        return self.expectations[family]


# limiting-case ground states of the two models; overridable per run
ISING_ARMS = (
    ActionProfile({"ZZ": -1.0, "X": 0.0}, name="neel"),
    ActionProfile({"ZZ": 0.0, "X": -1.0}, name="x-down"),
    ActionProfile({"ZZ": 0.0, "X": 1.0}, name="x-up"),
)
CLUSTER_ARMS = (
    ActionProfile({"Z": -1.0, "XX": 0.0, "XZX": 0.0}, name="z-down"),
    ActionProfile({"Z": 0.0, "XX": 1.0, "XZX": 0.0}, name="xx-up"),
    ActionProfile({"Z": 0.0, "XX": -1.0, "XZX": 0.0}, name="xx-down"),
    ActionProfile({"Z": 0.0, "XX": 0.0, "XZX": 1.0}, name="xzx-up"),
    ActionProfile({"Z": 0.0, "XX": 0.0, "XZX": -1.0}, name="xzx-down"),
)


def qcb_reward(profile, ctx, rng):
    """Measure every term once and return minus the weighted outcome sum.

    Each of the n sites of each family yields an independent +-1 with mean
    equal to the stored expectation.
    """
    reward = 0.0
    for family, coeff in zip(ctx.families, ctx.coefficients):
        mean = profile.expectation(family)
        ups = np.count_nonzero(rng.random(ctx.n_qubits)
                               < 0.5 * (1.0 + mean))
        reward -= coeff * (2.0 * ups - ctx.n_qubits)
    return reward


def expected_reward(profile, ctx):
    return -sum(c * ctx.n_qubits * profile.expectation(f)
                for f, c in zip(ctx.families, ctx.coefficients))


class GramBasis:
    """Orthonormal basis of the context coefficient vectors seen so far."""

    def __init__(self):
        self.basis = []

    @property
    def d_eff(self):
        return len(self.basis)


def gram_ingest(basis, c):
    """Coordinates of c in the running basis, growing it if c leaves the
    span.  A new direction's coordinate is the residual norm."""
    residual = np.array(c, dtype=float)
    scale = float(np.linalg.norm(residual))
    coords = []
    for v in basis.basis:
        coord = float(dot_(v, residual))
        coords.append(coord)
        residual -= coord * v
    leftover = float(np.linalg.norm(residual))
    if leftover > GRAM_TOL * scale:
        basis.basis.append(residual / leftover)
        coords.append(leftover)
    return np.array(coords)


def _pad_arm(acc, d_eff):
    # basis growth appends identity-regularized blocks to every arm
    old = acc.design.dim
    if old == d_eff:
        return acc
    design = DesignMatrix(d_eff, 1.0)
    design.v[:old, :old] = acc.design.v
    design._refresh()
    moment = np.zeros(d_eff)
    moment[:old] = acc.moment
    return LSEAccumulator(design, moment)


def clinucb_step(per_arm, c_eff, alpha):
    """Pick argmax of estimate.c + alpha sqrt(c V^-1 c), lowest index on
    ties.  Accumulators must already live in len(c_eff) coordinates."""
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    best = -math.inf
    pick = 0
    for i, acc in enumerate(per_arm):
        theta = lse_estimate(acc)
        width = math.sqrt(float(dot_(c_eff, acc.design.solve(c_eff))))
        p = float(dot_(theta, c_eff)) + alpha * width
        if p > best:
            best = p
            pick = i
    return pick


def book_alpha(t, d_eff, big_l, delta, m=1.0):
    return m + math.sqrt(2.0 * math.log(1.0 / delta)
                         + d_eff * math.log(1.0 + t * big_l ** 2 / d_eff))


class QCBTrace:
    """Per-round record of one recommender run."""

    def __init__(self, params, arms, rewards, linear_regret, optimal):
        self.params = np.asarray(params, dtype=float)
        self.arms = np.asarray(arms, dtype=int)
        self.rewards = np.asarray(rewards, dtype=float)
        self.linear_regret = np.asarray(linear_regret, dtype=float)
        self.optimal = np.asarray(optimal, dtype=int)
        n = len(self.arms)
        if not (len(self.params) == len(self.rewards)
                == len(self.linear_regret) == len(self.optimal) == n):
            raise ValueError("trace columns must share one length")
        if np.any(self.linear_regret < -1e-9):
            raise ValueError("linear regret cannot be negative")
        self.flags = (self.arms != self.optimal).astype(int)

    def __len__(self):
        return len(self.arms)


def classifier_regret(trace):
    return int(np.sum(trace.flags))


def phase_map_export(trace, burn_in, path=None):
    """Rows (param1, param2, arm) for rounds past burn_in; optional CSV."""
    if not 0 <= burn_in < len(trace):
        raise ValueError("burn_in must lie in [0, T)")
    rows = []
    for t in range(burn_in, len(trace)):
        p1 = trace.params[t, 0]
        p2 = trace.params[t, 1]
        rows.append((p1, "" if np.isnan(p2) else p2, int(trace.arms[t])))
    if path is not None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("param1", "param2", "arm"))
            for p1, p2, arm in rows:
                writer.writerow((repr(float(p1)),
                                 "" if p2 == "" else repr(float(p2)), arm))
    return rows


def run_qcb(model, horizon, seed, arms=None, n_qubits=10,
            interval=(-2.0, 2.0), alpha=None, delta=0.1):
    """Run the Gram-compressed recommender over uniform random contexts.

    model is "ising" (one parameter) or "cluster" (two); alpha=None uses the
    growing book radius with L set by the largest context in the interval.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must be increasing")
    if model == "ising":
        arms = ISING_ARMS if arms is None else tuple(arms)
        big_l = math.sqrt(1.0 + max(lo * lo, hi * hi))

        def draw_context(gen):
            return ising_context(lo + (hi - lo) * gen.random(), n_qubits)
    elif model == "cluster":
        arms = CLUSTER_ARMS if arms is None else tuple(arms)
        big_l = math.sqrt(1.0 + 2.0 * max(lo * lo, hi * hi))

        def draw_context(gen):
            j1 = lo + (hi - lo) * gen.random()
            j2 = lo + (hi - lo) * gen.random()
            return cluster_context(j1, j2, n_qubits)
    else:
        raise ValueError(f"unknown model {model!r}")

    ctx_gen = stream(seed, "envgen")
    reward_gen = stream(seed, "env")
    basis = GramBasis()
    accs = [LSEAccumulator(DesignMatrix(1, 1.0)) for _ in arms]

    params = np.full((horizon, 2), np.nan)
    chosen = np.empty(horizon, dtype=int)
    rewards = np.empty(horizon)
    regret = np.empty(horizon)
    optimal = np.empty(horizon, dtype=int)

    for t in range(horizon):
        ctx = draw_context(ctx_gen)
        params[t, :len(ctx.params)] = ctx.params
        coords = gram_ingest(basis, ctx.as_array())
        accs = [_pad_arm(acc, basis.d_eff) for acc in accs]
        radius = book_alpha(t + 1, basis.d_eff, big_l, delta) \
            if alpha is None else alpha
        pick = clinucb_step(accs, coords, radius)
        x = qcb_reward(arms[pick], ctx, reward_gen)
        lse_update(accs[pick], coords, x, 1.0)

        means = [expected_reward(a, ctx) for a in arms]
        best = int(np.argmax(means))
        chosen[t] = pick
        rewards[t] = x
        regret[t] = means[best] - means[pick]
        optimal[t] = best

    trace = QCBTrace(params, chosen, rewards, regret, optimal)
    trace.d_eff = basis.d_eff
    return trace
