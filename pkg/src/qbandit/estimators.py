"""Online least squares, confidence ellipsoids, and the median-of-means bank.

Design matrices keep a current eigendecomposition at all times; determinants
only ever appear as log-dets built from eigenvalues.  Updates go through the
kernel helpers so an estimator-driven run and a fused episode kernel produce
the same floats.
"""

import numpy as np

from ._kernels import (add_moment, add_outer, beta_logdet, eig_solve,
                       jacobi_eig, mom_pick, qform_, sum_log)
from .matcore import EigenDecomposition


class DesignMatrix:
    """Regularized weighted sum of action outer products, eig kept current."""

    def __init__(self, dim, lambda0):
        lambda0 = float(lambda0)
        if not (np.isfinite(lambda0) and lambda0 > 0.0):
            raise ValueError(f"lambda0 must be finite positive, got {lambda0}")
        self.lambda0 = lambda0
        self.v = lambda0 * np.eye(int(dim))
        self._refresh()

    def _refresh(self):
        w, vecs = jacobi_eig(self.v)
        self.eig = EigenDecomposition(w, vecs)
        self.logdet = sum_log(w)

    @property
    def dim(self):
        return self.v.shape[0]

    @property
    def lambda_min(self):
        return self.eig.eigenvalues[0]

    @property
    def lambda_max(self):
        return self.eig.eigenvalues[-1]

    def update(self, a, weight):
        a = np.asarray(a, dtype=float)
        if a.shape != (self.dim,):
            raise ValueError("action dimension mismatch")
        weight = float(weight)
        if not (np.isfinite(weight) and weight > 0.0):
            raise ValueError(f"weight must be finite positive, got {weight}")
        add_outer(self.v, a, weight)
        self._refresh()

    def solve(self, b):
        return eig_solve(self.eig.eigenvalues, self.eig.eigenvectors,
                         np.asarray(b, dtype=float))


class LSEAccumulator:
    """Design matrix plus reward-weighted action moment."""

    def __init__(self, design, moment=None):
        self.design = design
        self.moment = (np.zeros(design.dim) if moment is None
                       else np.asarray(moment, dtype=float).copy())
        if self.moment.shape != (design.dim,):
            raise ValueError("moment dimension mismatch")


def lse_update(acc, a, x, weight):
    """Weighted least-squares data point: design += w aa^T, moment += w x a."""
    a = np.asarray(a, dtype=float)
    acc.design.update(a, weight)
    add_moment(acc.moment, a, float(weight), float(x))
    return acc


def lse_estimate(acc):
    """Current estimate V^{-1} moment."""
    if acc.design.lambda_min <= 1e-12:
        raise np.linalg.LinAlgError("design matrix is singular")
    return acc.design.solve(acc.moment)


class VarianceEstimator:
    """Reciprocal noise-variance weight applied to the next batch."""

    def __init__(self, current_weight=1.0):
        self.set(current_weight)

    def set(self, weight):
        weight = float(weight)
        if not (np.isfinite(weight) and weight > 0.0):
            raise ValueError(f"weight must be finite positive, got {weight}")
        self.current_weight = weight

    @property
    def variance(self):
        return 1.0 / self.current_weight


class MoMBank:
    """k independent moments over one shared design matrix."""

    def __init__(self, dim, k, lambda0):
        k = int(k)
        if k < 1:
            raise ValueError(f"need k >= 1 subsamples, got {k}")
        self.k = k
        self.design = DesignMatrix(dim, lambda0)
        self.moments = np.zeros((k, dim))

    def update(self, a, weight, rewards):
        """One round: shared design updated once, each moment takes its reward."""
        a = np.asarray(a, dtype=float)
        rewards = np.asarray(rewards, dtype=float)
        if rewards.shape != (self.k,):
            raise ValueError(f"need {self.k} rewards, got {rewards.shape}")
        self.design.update(a, weight)
        for j in range(self.k):
            add_moment(self.moments[j], a, float(weight), rewards[j])

    def estimates(self):
        out = np.empty_like(self.moments)
        for j in range(self.k):
            out[j] = self.design.solve(self.moments[j])
        return out


def mom_select(bank):
    """Estimate with the smallest lower-median pairwise design-metric distance.

    With k <= 2 the median is over at most one distance, so the first
    accumulator wins by convention.
    """
    estimates = bank.estimates()
    if bank.k <= 2:
        return estimates[0]
    return estimates[mom_pick(estimates, bank.design.v)]


class ConfidenceEllipsoid:
    """{x : ||x - center||^2_metric <= radius_sq}."""

    def __init__(self, center, metric, radius_sq):
        center = np.asarray(center, dtype=float)
        metric = np.asarray(metric, dtype=float)
        radius_sq = float(radius_sq)
        if not (np.isfinite(radius_sq) and radius_sq > 0.0):
            raise ValueError(f"radius_sq must be finite positive, got {radius_sq}")
        w, _ = jacobi_eig(metric)
        if w[0] <= 0.0:
            raise ValueError("metric must be positive definite")
        self.center = center
        self.metric = metric
        self.radius_sq = radius_sq


def contains(ell, x):
    x = np.asarray(x, dtype=float)
    if x.shape != ell.center.shape:
        raise ValueError("dimension mismatch")
    return bool(qform_(x - ell.center, ell.metric) <= ell.radius_sq)


def beta_linucb(t, delta, lam, big_l, eta, d):
    """Book-style radius for unit-weight least squares after t samples."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    if t < 0:
        raise ValueError("round count must be nonnegative")
    eta = float(eta)
    lam = float(lam)
    log_term = d * np.log((d * lam + t * big_l * big_l) / (d * lam))
    return (eta * np.sqrt(2.0 * np.log(1.0 / delta) + log_term)
            + eta * np.sqrt(lam)) ** 2


def beta_weighted(design, delta, lam, v0_det):
    """Growing radius from the weighted design's log-det ratio."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0,1), got {delta}")
    log_ratio = design.logdet - np.log(float(v0_det))
    if log_ratio < np.log1p(-1e-9):
        raise ValueError("design determinant shrank below its initial value")
    return beta_logdet(np.log(1.0 / delta), design.logdet,
                       np.log(float(v0_det)), lam)


def beta_mom(d, lam, theta_norm):
    """Constant radius 9(sqrt(9d) + lam*norm)^2 for the median of means."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return 9.0 * (np.sqrt(9.0 * d) + float(lam) * float(theta_norm)) ** 2
