"""Bandit environments: discrete observable arms, pure-state rank-1 arms,
and classical sphere bandits under three noise models.

Every pull returns the sampled reward together with the optimal and the
chosen mean, so regret accounting never has to re-derive environment
internals.
"""

from collections import namedtuple

import numpy as np

from .qubit import (DiscreteObservable, ProjectorAction, PureQubit,
                    QubitDensity, born_sample, measure_observable)
from .rng import truncated_standard_normal

UNIT_TOL = 1e-10

StepOutcome = namedtuple(
    "StepOutcome", ["reward", "optimal_mean", "chosen_mean", "instantaneous_regret"])


class GaussianConst:
    """Additive N(0, sigma^2) noise, action independent."""

    def __init__(self, sigma):
        sigma = float(sigma)
        if not (np.isfinite(sigma) and sigma > 0.0):
            raise ValueError(f"sigma must be finite positive, got {sigma}")
        self.sigma = sigma


class VanishingSubgaussian:
    """Truncated Gaussian with subgaussian constant sqrt(1 - <theta,a>^2)."""


class VanishingVarianceBernoulli:
    """Born coin rescaled to {-1,+1}; variance 1 - <theta,a>^2 exactly."""


class DiscreteMAQB:
    """Finitely many observables measured on a fixed (possibly mixed) state."""

    def __init__(self, observables, state):
        observables = list(observables)
        if not observables:
            raise ValueError("need at least one observable arm")
        for obs in observables:
            if not isinstance(obs, DiscreteObservable):
                raise TypeError("arms must be DiscreteObservable")
        if not isinstance(state, QubitDensity):
            state = QubitDensity(state)
        self.observables = observables
        self.state = state
        self.means = tuple(obs.expectation(state) for obs in observables)
        self.optimal_mean = max(self.means)

    @property
    def n_arms(self):
        return len(self.observables)


class PSMAQB:
    """Rank-1 projector arms on a hidden pure state; Bernoulli rewards."""

    def __init__(self, state):
        if not isinstance(state, PureQubit):
            state = PureQubit(state)
        self.state = state
        self.optimal_mean = 1.0


class SphereLinear:
    """Classical linear bandit with actions and parameter on the unit sphere."""

    def __init__(self, theta, noise):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1 or theta.shape[0] < 2:
            raise ValueError("theta must be a vector of dimension >= 2")
        n = float(np.linalg.norm(theta))
        if abs(n - 1.0) > UNIT_TOL:
            raise ValueError(f"theta must be unit norm, got {n}")
        if not isinstance(noise, (GaussianConst, VanishingSubgaussian,
                                  VanishingVarianceBernoulli)):
            raise TypeError("unknown noise model")
        self.theta = theta
        self.noise = noise
        self.optimal_mean = 1.0

    @property
    def dim(self):
        return self.theta.shape[0]


def _outcome(reward, optimal, chosen):
    gap = optimal - chosen
    if gap < -1e-12:
        raise ValueError(f"chosen mean {chosen} exceeds optimal {optimal}")
    return StepOutcome(reward, optimal, chosen, max(0.0, gap))


def pull(env, action, rng):
    """One environment round; returns the StepOutcome for regret accounting."""
    if isinstance(env, DiscreteMAQB):
        idx = int(action)
        if not 0 <= idx < env.n_arms:
            raise IndexError(f"arm index {idx} out of range")
        x = measure_observable(env.state, env.observables[idx], rng)
        return _outcome(x, env.optimal_mean, env.means[idx])

    if isinstance(env, PSMAQB):
        if not isinstance(action, ProjectorAction):
            action = ProjectorAction(action)
        x = born_sample(env.state, action, rng)
        chosen = 0.5 * (1.0 + float(env.state.bloch @ action.bloch))
        return _outcome(float(x), 1.0, chosen)

    if isinstance(env, SphereLinear):
        a = np.asarray(action, dtype=float)
        if a.shape != env.theta.shape:
            raise ValueError("action dimension mismatch")
        n = float(np.linalg.norm(a))
        if abs(n - 1.0) > UNIT_TOL:
            raise ValueError(f"sphere action must be unit norm, got {n}")
        mean = float(env.theta @ a)
        noise = env.noise
        if isinstance(noise, GaussianConst):
            x = mean + noise.sigma * float(rng.standard_normal())
        elif isinstance(noise, VanishingSubgaussian):
            std = np.sqrt(max(0.0, 1.0 - mean * mean))
            x = mean + std * float(truncated_standard_normal(rng.random()))
        else:
            p = 0.5 * (1.0 + mean)
            x = 1.0 if rng.random() < p else -1.0
        return _outcome(x, 1.0, mean)

    raise TypeError(f"unknown environment {type(env).__name__}")


def suboptimality_gaps(env):
    """Per-arm mean gaps for discrete environments; min is always 0."""
    if not isinstance(env, DiscreteMAQB):
        raise TypeError("gaps are defined for discrete environments only")
    return tuple(env.optimal_mean - m for m in env.means)
