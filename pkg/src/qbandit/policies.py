"""Decision rules: UCB, LinUCB, Phased Elimination, explore-then-commit
tomography, and the eigenvalue-controlled batch algorithms.

The batch policies (circle LinUCB, variance-weighted, and its median-of-means
variant) share one state class whose updates go through the same kernel
helpers as the fused episode kernels, so both execution paths emit identical
floats for identical reward streams.
"""

import math

import numpy as np

from ._kernels import (beta_circle_t, beta_logdet, dot_, ec_directions,
                       jacobi_eig, mom_pick, norm_, omega_weight, qform_)
from .environments import PSMAQB, pull
from .estimators import MoMBank, lse_estimate
from .qubit import ProjectorAction

UNIT_TOL = 1e-10


def ucb_index(mean, count, eta, delta):
    """Upper confidence index; unvisited arms get an infinite index."""
    if count == 0:
        return math.inf
    return mean + np.sqrt(2.0 * eta * eta * np.log(1.0 / delta) / count)


class UCBState:
    """Per-arm counts and means for index-based selection."""

    def __init__(self, n_arms, eta, delta):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)
        self.eta = float(eta)
        self.delta = float(delta)

    def select(self):
        best, best_val = 0, -math.inf
        for a in range(self.counts.shape[0]):
            mean = self.sums[a] / self.counts[a] if self.counts[a] else 0.0
            val = ucb_index(mean, int(self.counts[a]), self.eta, self.delta)
            if val > best_val:
                best, best_val = a, val
        return best

    def update(self, arm, x):
        self.counts[arm] += 1
        self.sums[arm] += x


def linucb_select(acc, actions, beta):
    """Optimistic action from a finite arm set (or the sphere extremal pair).

    Finite sets score <theta_hat, a> + sqrt(beta) ||a|| in the inverse design
    metric; the string "sphere" returns the extremal pair around the
    normalized estimate along the weakest design direction, spread by the
    full confidence radius sqrt(beta/lam_min).
    """
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    design = acc.design
    theta_hat = lse_estimate(acc)
    if isinstance(actions, str):
        if actions != "sphere":
            raise ValueError(f"unknown action set {actions!r}")
        nrm = norm_(theta_hat)
        c = theta_hat / nrm if nrm > 0.0 else _first_axis(design.dim)
        v_min = design.eig.eigenvectors[:, 0]
        # same formula as project_extremal with lam = lam_min/beta, except
        # the radius may exceed 1 early on (the Lemma needs lam > 1)
        spread = np.sqrt(beta / design.lambda_min)
        pair = []
        for sign in (1.0, -1.0):
            raw = c + sign * spread * v_min
            nn = norm_(raw)
            pair.append(raw / nn if nn > 0.0 else v_min * sign)
        return pair[0], pair[1]
    arms = np.asarray(actions, dtype=float)
    if arms.ndim != 2 or arms.shape[0] == 0:
        raise ValueError("empty action set")
    sq_beta = np.sqrt(beta)
    best, best_val = 0, -math.inf
    for j in range(arms.shape[0]):
        width = np.sqrt(dot_(arms[j], design.solve(arms[j])))
        val = dot_(theta_hat, arms[j]) + sq_beta * width
        if val > best_val:
            best, best_val = j, val
    return best


def _first_axis(d):
    e = np.zeros(d)
    e[0] = 1.0
    return e


def project_extremal(c, v, lam_min):
    """Normalized c +- v/sqrt(lam_min); displacement bounded by 2/lam_min."""
    if lam_min <= 1.0:
        raise ValueError(f"need lam_min > 1, got {lam_min}")
    c = np.asarray(c, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.empty((1, 2, c.shape[0]))
    vecs = v.reshape(-1, 1)
    ec_directions(c, vecs, lam_min, out)
    return out[0, 0].copy(), out[0, 1].copy()


class BatchActions:
    """Unit actions of one batch, each to be played `repeats` times."""

    def __init__(self, actions, repeats=1):
        actions = np.asarray(actions, dtype=float)
        norms = np.sqrt((actions * actions).sum(axis=1))
        if np.max(np.abs(norms - 1.0)) > UNIT_TOL:
            raise ValueError("batch actions must be unit norm")
        self.actions = actions
        self.repeats = int(repeats)


# update-weight / confidence regimes of the batch policies
MODE_CIRCLE = "circle"      # unit weights, growing circle radius
MODE_WEIGHTED = "weighted"  # omega weights from the log-det radius
MODE_MOM = "mom"            # omega weights from a constant radius


def lam0_floor(d, beta_w=None):
    """Smallest regularizer meeting the eigenvalue-control requirement.

    beta_w=None gives the plain variance-weighted constant C = 1/(12 sqrt(d-1));
    a constant radius beta_w divides it.  d=2 uses the stronger circle-theorem
    floor 4 sqrt(2) C + 2.
    """
    if d < 2:
        raise ValueError("need dimension >= 2")
    c = 1.0 / (12.0 * np.sqrt(d - 1.0))
    if beta_w is not None:
        c = c / float(beta_w)
    if d == 2:
        return 2.0 + 4.0 * np.sqrt(2.0) * c
    return max(2.0, np.sqrt(2.0 / (3.0 * (d - 1.0))) * 2.0 * d * c
               + 2.0 / (3.0 * (d - 1.0)))


class EigenBatchState:
    """State of the eigenvalue-controlled batch policies.

    One batch: propose 2(d-1) actions around the current center, each played
    k times; ingest the rewards, update the shared design with the mode's
    weight, re-estimate, recenter.  Eigenvalue and coverage telemetry are
    recorded per batch.
    """

    def __init__(self, dim, mode, c0, k=1, lam0=None, delta=None,
                 beta_const=None, omega_scale=1.0):
        dim = int(dim)
        if dim < 2:
            raise ValueError("need dimension >= 2")
        if mode not in (MODE_CIRCLE, MODE_WEIGHTED, MODE_MOM):
            raise ValueError(f"unknown mode {mode!r}")
        if omega_scale <= 0.0:
            raise ValueError("omega_scale must be positive")
        if mode == MODE_MOM:
            if beta_const is None or beta_const <= 0.0:
                raise ValueError("mom mode needs a positive constant radius")
            floor = lam0_floor(dim, beta_const)
        elif mode == MODE_WEIGHTED:
            floor = lam0_floor(dim)
        else:
            floor = None  # circle algorithm runs unregularized-style, V0 = I
        if lam0 is None:
            lam0 = 1.0 if floor is None else floor
        if floor is not None and lam0 < floor - 1e-12:
            raise ValueError(
                f"lam0={lam0} below the eigenvalue-control floor {floor}")
        if mode != MODE_MOM and delta is None:
            raise ValueError("delta required for the growing radii")
        c0 = np.asarray(c0, dtype=float)
        if abs(norm_(c0) - 1.0) > UNIT_TOL:
            raise ValueError("initial center must be unit norm")

        self.mode = mode
        self.k = 1 if mode == MODE_CIRCLE else int(k)
        if self.k < 1:
            raise ValueError("need k >= 1 rewards per action")
        self.omega_scale = float(omega_scale)
        self.lam0 = float(lam0)
        self.log_inv_delta = 0.0 if delta is None else np.log(1.0 / delta)
        self.beta_const = 0.0 if beta_const is None else float(beta_const)
        self.bank = MoMBank(dim, self.k, self.lam0)
        self.logdet0 = dim * np.log(self.lam0)
        self.c = c0.copy()
        self.batch_index = 0
        self._pending = None
        self.lmin_log = []
        self.lmax_log = []
        self.cover_log = []
        self.estimate = np.zeros(dim)

    @property
    def dim(self):
        return self.bank.design.dim

    def _weight(self, eig):
        if self.mode == MODE_CIRCLE or self.batch_index == 0:
            return 1.0
        if self.mode == MODE_MOM:
            beta_prev = self.beta_const
        else:
            beta_prev = beta_logdet(self.log_inv_delta,
                                    self.bank.design.logdet,
                                    self.logdet0, self.lam0)
        return self.omega_scale * omega_weight(eig.eigenvalues[-1], self.dim,
                                               beta_prev)

    def propose(self):
        """Actions of the next batch, in fixed direction-pair order."""
        if self._pending is not None:
            raise RuntimeError("previous batch still awaiting rewards")
        eig = self.bank.design.eig
        d = self.dim
        dirs = np.empty((d - 1, 2, d))
        ec_directions(self.c, eig.eigenvectors, eig.eigenvalues[0], dirs)
        self._pending = (dirs, self._weight(eig))
        return BatchActions(dirs.reshape(2 * (d - 1), d), repeats=self.k)

    def ingest(self, rewards):
        """Feed back rewards shaped (2(d-1), k) in proposal order."""
        if self._pending is None:
            raise RuntimeError("no batch outstanding")
        dirs, wt = self._pending
        self._pending = None
        d = self.dim
        rewards = np.asarray(rewards, dtype=float).reshape(2 * (d - 1), self.k)
        flat = dirs.reshape(2 * (d - 1), d)
        for row in range(flat.shape[0]):
            self.bank.update(flat[row], wt, rewards[row])
        ests = self.bank.estimates()
        pick = mom_pick(ests, self.bank.design.v)
        self.estimate = ests[pick]
        nrm = norm_(ests[pick])
        if nrm > 0.0:
            self.c = ests[pick] / nrm
        self.batch_index += 1
        eig = self.bank.design.eig
        self.lmin_log.append(eig.eigenvalues[0])
        self.lmax_log.append(eig.eigenvalues[-1])

    def record_coverage(self, theta):
        """Telemetry: is theta inside the mode's current confidence region?"""
        if self.mode == MODE_MOM:
            beta_now = self.beta_const
        elif self.mode == MODE_WEIGHTED:
            beta_now = beta_logdet(self.log_inv_delta,
                                   self.bank.design.logdet,
                                   self.logdet0, self.lam0)
        else:
            beta_now = beta_circle_t(self.log_inv_delta,
                                     float(self.batch_index))
        diff = np.asarray(theta, dtype=float) - self.estimate
        inside = qform_(diff, self.bank.design.v) <= beta_now
        self.cover_log.append(1 if inside else 0)
        return inside


def vn_batch(state):
    """Next batch of the variance-weighted policy (one reward per action)."""
    if state.mode != MODE_WEIGHTED:
        raise ValueError("vn_batch needs a weighted-mode state")
    return state.propose()


def vvn_batch(state):
    """Next batch of the median-of-means variant (k rewards per action)."""
    if state.mode != MODE_MOM:
        raise ValueError("vvn_batch needs a mom-mode state")
    return state.propose()


def g_optimal_design(arms, iters=200, tol=1e-6, trim=1e-6):
    """D-optimal design weights by Frank-Wolfe ascent on ln det.

    Returns (weights over arms, converged flag).  Weights below the trim
    threshold are zeroed and the rest renormalized.
    """
    arms = np.asarray(arms, dtype=float)
    n, d = arms.shape
    pi = np.full(n, 1.0 / n)
    converged = False
    for _ in range(iters):
        v = np.zeros((d, d))
        for j in range(n):
            if pi[j] > 0.0:
                v += pi[j] * np.outer(arms[j], arms[j])
        w, vecs = jacobi_eig(v)
        if w[0] <= 1e-14:
            return np.full(n, 1.0 / n), False
        inv = vecs @ np.diag(1.0 / w) @ vecs.T
        scores = np.einsum("ij,jk,ik->i", arms, inv, arms)
        j_star = int(np.argmax(scores))
        g = scores[j_star]
        if g - d <= tol:
            converged = True
            break
        gamma = (g - d) / (d * (g - 1.0))
        pi *= 1.0 - gamma
        pi[j_star] += gamma
    pi[pi <= trim] = 0.0
    total = pi.sum()
    if total <= 0.0:
        return np.full(n, 1.0 / n), False
    return pi / total, converged


def phase_counts(pi, eps, phase, n_arms, delta, d):
    """Per-arm sample counts for one elimination phase."""
    log_term = np.log(n_arms * phase * (phase + 1) / delta)
    return np.array([int(np.ceil(2.0 * d * p / (eps * eps) * log_term))
                     if p > 0.0 else 0 for p in pi])


class PhasedElimState:
    """Surviving arm set with a halving accuracy level."""

    def __init__(self, arms, delta):
        arms = np.asarray(arms, dtype=float)
        if arms.ndim != 2 or arms.shape[0] == 0:
            raise ValueError("need a nonempty arm matrix")
        self.arms = arms
        self.delta = float(delta)
        self.phase = 1
        self.surviving = list(range(arms.shape[0]))
        self.used_uniform = []  # phases where the design optimizer fell back

    @property
    def eps(self):
        return 0.5 ** self.phase

    def design(self):
        pi_sub, converged = g_optimal_design(self.arms[self.surviving])
        if not converged:
            self.used_uniform.append(self.phase)
            pi_sub = np.full(len(self.surviving), 1.0 / len(self.surviving))
        pi = np.zeros(self.arms.shape[0])
        for local, arm in enumerate(self.surviving):
            pi[arm] = pi_sub[local]
        return pi


def phased_elim_round(state, theta_hat):
    """Drop arms whose estimated deficit exceeds 2 eps; advance the phase."""
    if not state.surviving:
        raise ValueError("surviving set is empty")
    theta_hat = np.asarray(theta_hat, dtype=float)
    vals = {a: float(theta_hat @ state.arms[a]) for a in state.surviving}
    best = max(vals.values())
    threshold = 2.0 * state.eps
    state.surviving = [a for a in state.surviving
                       if best - vals[a] <= threshold]
    state.phase += 1
    return list(state.surviving)


PAULI_AXES = np.eye(3)


def bandit_pls(env, T, rng):
    """Explore-then-commit tomography on a pure-state environment.

    ceil(sqrt(T)) exploration rounds round-robin over the Bloch axes, Bloch
    vector estimated from outcome frequencies, then the normalized estimate is
    played for the rest of the horizon.  A zero estimate buys one extra round
    per axis.
    """
    from .harness import EpisodeTrace

    if not isinstance(env, PSMAQB):
        raise TypeError("explore-then-commit needs a pure-state environment")
    T = int(T)
    if T < 9:
        raise ValueError("need T >= 9 for three rounds per axis")
    m = math.ceil(math.sqrt(T))
    counts = np.zeros(3)
    ones = np.zeros(3)
    committed = None
    actions = np.empty((T, 3))
    rewards = np.empty(T)
    inst = np.empty(T)
    for t in range(T):
        if committed is None:
            axis = int(np.argmin(counts))
            a = PAULI_AXES[axis]
        else:
            a = committed
        out = pull(env, ProjectorAction(a), rng)
        actions[t] = a
        rewards[t] = out.reward
        inst[t] = out.instantaneous_regret
        if committed is None:
            counts[axis] += 1
            ones[axis] += out.reward
            if t + 1 >= m and counts[2] >= counts[0]:
                r_hat = 2.0 * ones / counts - 1.0
                nrm = float(np.linalg.norm(r_hat))
                if nrm > 0.0:
                    committed = r_hat / nrm
                else:
                    m += 3
    return EpisodeTrace(actions=actions, rewards=rewards, inst_regret=inst,
                        cum_regret=np.cumsum(inst))
