"""Work-extraction batteries driven by sphere-bandit direction policies.

Two machines turn state knowledge into energy.  The Jaynes-Cummings battery
couples the qubit to a harmonic oscillator and climbs or drops one level per
round.  The thermal battery runs M swap repetitions against a reservoir at
inverse temperature beta; its work distribution reduces exactly to a
classical chain (a branch bit plus M independent bits), which is what we
simulate.  Both report per-round dissipation and optional memory-erasure
entropy through a shared ledger.
"""

import math

import numpy as np

from ._kernels import dot_
from .qubit import (DIVERGENT, PureQubit, QubitDensity, depolarize,
                    relative_entropy)

MAX_HALF = 0.5


class JCConfig:
    """Oscillator battery: one quantum omega per level, starting at n0."""

    def __init__(self, omega, initial_level=0):
        omega = float(omega)
        if not np.isfinite(omega) or omega <= 0.0:
            raise ValueError("omega must be finite and positive")
        level = int(initial_level)
        if level < 0:
            raise ValueError("initial_level must be >= 0")
        self.omega = omega
        self.initial_level = level


class ThermalConfig:
    """Quasi-static battery: M repetitions against a bath at beta.

    epsilon_schedule maps the 1-based round to an accuracy in (0, 1/2];
    when None the runner builds min{C ln(T/delta)/t, 1/2} from
    schedule_constant and delta.
    """

    def __init__(self, beta, m_reps, schedule_constant=2.5, delta=0.1,
                 epsilon_schedule=None):
        beta = float(beta)
        if not np.isfinite(beta) or beta <= 0.0:
            raise ValueError("beta must be finite and positive")
        m_reps = int(m_reps)
        if m_reps < 1:
            raise ValueError("m_reps must be >= 1")
        if float(schedule_constant) <= 0.0:
            raise ValueError("schedule_constant must be positive")
        self.beta = beta
        self.m_reps = m_reps
        self.schedule_constant = float(schedule_constant)
        self.delta = float(delta)
        self.epsilon_schedule = epsilon_schedule


class DissipationLedger:
    """Additive bookkeeping of dissipation and optional erasure entropy."""

    def __init__(self):
        self.per_round = []
        self.landauer_entropy = []
        self._cumulative = 0.0

    def append(self, dissipation, entropy=None):
        value = float(dissipation)
        self.per_round.append(value)
        self._cumulative += value
        if entropy is not None:
            self.landauer_entropy.append(float(entropy))

    @property
    def cumulative(self):
        return self._cumulative


def _direction_bloch(direction):
    return direction.bloch if hasattr(direction, "bloch") else np.asarray(
        direction, dtype=float)


def jc_angle(n_level):
    return (math.pi / 2.0) * math.sqrt(n_level / (n_level + 1.0))


def jc_round(cfg, state, direction, n_level, rng):
    """One oscillator round: returns (n_next, reward bit, work, dissipation).

    The level climbs with probability p = F(state, direction) and otherwise
    stays or drops with the sine split at theta_n = (pi/2) sqrt(n/(n+1)).
    Only the climb pays the reward bit.
    """
    if n_level < 0:
        raise ValueError("n_level must be >= 0")
    p = 0.5 * (1.0 + dot_(state.bloch, _direction_bloch(direction)))
    s2 = math.sin(jc_angle(n_level)) ** 2
    dissipation = cfg.omega * (1.0 + s2) * (1.0 - p)
    u = rng.random()
    if u < p:
        return n_level + 1, 1, cfg.omega, dissipation
    if u < p + (1.0 - p) * (1.0 - s2):
        return n_level, 0, 0.0, dissipation
    return n_level - 1, 0, -cfg.omega, dissipation


def _ramp(eps, m_reps):
    # tau/2M + (1 - tau/M) eps, written so tau = M lands on 1/2 exactly
    taus = np.arange(1, m_reps + 1, dtype=float)
    return taus / (2.0 * m_reps) + (1.0 - taus / m_reps) * eps


def thermal_gaps(eps, m_reps, beta):
    """Energy gaps nu(tau, eps) for tau = 1..M.

    nu(tau) = beta^-1 ln((1 - q_tau)/q_tau) with q_tau the ramp from eps to
    1/2; nu(M) = 0 exactly since both sides reach 1/2.
    """
    if not 0.0 < eps <= MAX_HALF:
        raise ValueError("eps must lie in (0, 1/2]")
    ramp = _ramp(eps, m_reps)
    return np.log((1.0 - ramp) / ramp) / beta


def work_thresholds(eps, beta):
    """Limiting works (w_wrong, w_right) for the two chain branches."""
    return ((math.log(2.0) + math.log(eps)) / beta,
            (math.log(2.0) + math.log(1.0 - eps)) / beta)


def thermal_round(cfg, state, direction, eps, rng):
    """One quasi-static round: returns (work, reward bit).

    The quantum protocol is distributionally a classical chain: a branch
    bit i (0 with probability F), then M independent bits x_tau with
    P(x_tau = 1) = eps + tau dp, and
    work = -i nu(1) + sum_tau x_tau (nu(tau) - nu(tau+1)) + x_M nu(M).
    The reward bit fires when the work clears the midpoint of the two
    branch limits.
    """
    nus = thermal_gaps(eps, cfg.m_reps, cfg.beta)
    p = 0.5 * (1.0 + dot_(state.bloch, _direction_bloch(direction)))
    branch = 0 if rng.random() < p else 1
    bits = rng.random(cfg.m_reps) < _ramp(eps, cfg.m_reps)
    work = -branch * nus[0] + float(bits[-1]) * nus[-1]
    if cfg.m_reps > 1:
        work += float(bits[:-1] @ (nus[:-1] - nus[1:]))
    w_wrong, w_right = work_thresholds(eps, cfg.beta)
    return work, 1 if work >= 0.5 * (w_wrong + w_right) else 0


def _smoothed_estimate(direction, eps):
    hat = PureQubit(_direction_bloch(direction))
    return depolarize(hat, 2.0 * eps)


def expected_work(state, direction, eps, beta):
    """Quasi-static limit E[work] = beta^-1 (D(psi||I/2) - D(psi||sigma))
    with sigma the estimate depolarized by 2 eps."""
    if not 0.0 <= eps <= MAX_HALF:
        raise ValueError("eps must lie in [0, 1/2]")
    base = relative_entropy(state, QubitDensity(np.zeros(3)))
    loss = relative_entropy(state, _smoothed_estimate(direction, eps))
    if base is DIVERGENT or loss is DIVERGENT:
        return DIVERGENT
    return (base - loss) / beta


def expected_dissipation(state, direction, eps, beta):
    if not 0.0 <= eps <= MAX_HALF:
        raise ValueError("eps must lie in [0, 1/2]")
    loss = relative_entropy(state, _smoothed_estimate(direction, eps))
    if loss is DIVERGENT:
        return DIVERGENT
    return loss / beta


def _plogp(x):
    return x * math.log(x) if x > 0.0 else 0.0


def landauer_entropy(model, p_success, theta_t=0.0):
    """Memory-register entropy of one round's outcome record, in nats.

    Thermal rounds store the branch bit; oscillator rounds additionally
    resolve the stay/drop split at angle theta_t.
    """
    if model not in ("jc", "thermal"):
        raise ValueError(f"unknown model {model!r}")
    if not 0.0 <= p_success <= 1.0:
        raise ValueError("p_success must lie in [0, 1]")
    alpha = 1.0 - p_success
    entropy = -_plogp(1.0 - alpha) - _plogp(alpha)
    if model == "jc":
        c2 = math.cos(theta_t) ** 2
        entropy += -alpha * (_plogp(c2) + _plogp(1.0 - c2))
    return entropy


def default_epsilon_schedule(horizon, constant, delta):
    scale = constant * math.log(horizon / delta)

    def schedule(t):
        return min(scale / t, MAX_HALF)

    return schedule


class _EtcDirections:
    """Explore-then-commit over the Bloch axes, fed by linear rewards."""

    def __init__(self, dim, horizon):
        self.dim = dim
        self.budget = min(int(math.ceil(math.sqrt(horizon))), horizon)
        self.counts = np.zeros(dim)
        self.ones = np.zeros(dim)
        self.t = 0
        self.committed = None

    def select(self):
        if self.committed is not None:
            return self.committed
        axis = int(np.argmin(self.counts))
        a = np.zeros(self.dim)
        a[axis] = 1.0
        return a

    def update(self, action, x):
        self.t += 1
        if self.committed is not None:
            return
        axis = int(np.argmax(action))
        self.counts[axis] += 1.0
        if x > 0.0:
            self.ones[axis] += 1.0
        if self.t >= self.budget and self.counts[-1] >= self.counts[0]:
            r_hat = 2.0 * self.ones / self.counts - 1.0
            nrm = float(np.linalg.norm(r_hat))
            if nrm > 0.0:
                self.committed = r_hat / nrm
            else:
                self.budget += self.dim


def run_extraction(protocol, state, policy, horizon, cfg, rng,
                   landauer=False):
    """Drive a battery for `horizon` rounds with a direction policy.

    policy is "oracle" (always plays the true state), "etc", or a batched
    eigenvalue-controlled policy state.  Returns (EpisodeTrace, ledger);
    the trace records the physical reward bits and the sphere-bandit regret
    of the played directions.
    """
    from .harness import EpisodeTrace

    if protocol == "jc":
        if not isinstance(cfg, JCConfig):
            raise TypeError("jc protocol needs a JCConfig")
    elif protocol == "thermal":
        if not isinstance(cfg, ThermalConfig):
            raise TypeError("thermal protocol needs a ThermalConfig")
        schedule = cfg.epsilon_schedule or default_epsilon_schedule(
            horizon, cfg.schedule_constant, cfg.delta)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")

    theta = state.bloch
    d = theta.shape[0]
    etc = None
    batched = not isinstance(policy, str)
    if batched:
        per_batch = 2 * (policy.dim - 1) * policy.k
        if horizon % per_batch:
            raise ValueError(f"horizon {horizon} must be a multiple of the "
                             f"batch size {per_batch}")
    elif policy == "etc":
        etc = _EtcDirections(d, horizon)
    elif policy != "oracle":
        raise ValueError(f"unknown policy {policy!r}")

    actions = np.empty((horizon, d))
    bits = np.empty(horizon)
    inst = np.empty(horizon)
    works = np.empty(horizon)
    ledger = DissipationLedger()
    n_level = cfg.initial_level if protocol == "jc" else 0

    pending = []
    batch_rewards = []

    def play(t, a):
        nonlocal n_level
        p = 0.5 * (1.0 + dot_(theta, a))
        entropy = None
        if protocol == "jc":
            angle = jc_angle(n_level)
            n_level, bit, w, diss = jc_round(cfg, state, a, n_level, rng)
            if landauer:
                entropy = landauer_entropy("jc", p, angle)
        else:
            eps = schedule(t + 1)
            w, bit = thermal_round(cfg, state, a, eps, rng)
            diss = expected_dissipation(state, a, eps, cfg.beta)
            if landauer:
                entropy = landauer_entropy("thermal", p)
        actions[t] = a
        bits[t] = bit
        works[t] = w
        inst[t] = 0.5 * (1.0 - dot_(theta, a))
        ledger.append(diss, entropy)
        return 2.0 * bit - 1.0

    for t in range(horizon):
        if batched:
            if not pending:
                batch = policy.propose()
                pending = [row for row in batch.actions
                           for _ in range(batch.repeats)]
                batch_rewards = []
            a = pending.pop(0)
            batch_rewards.append(play(t, a))
            if not pending:
                policy.ingest(np.asarray(batch_rewards).reshape(
                    2 * (policy.dim - 1), policy.k))
        elif etc is not None:
            a = etc.select()
            etc.update(a, play(t, a))
        else:
            a = theta
            play(t, a)

    trace = EpisodeTrace(actions, bits, inst, np.cumsum(inst),
                         work=works, dissipation=np.array(ledger.per_round))
    return trace, ledger
