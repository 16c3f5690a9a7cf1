"""Qubit states, rank-1 measurements, and Bloch-space information quantities.

All algebra is done in Bloch coordinates; Born probabilities, fidelity and
relative entropy have closed forms there, so no complex 2x2 matrices appear
anywhere in the package.
"""

import numpy as np

UNIT_TOL = 1e-10
EIG_CLAMP = 1e-12


class Divergent:
    """Tagged infinite relative entropy; never a floating inf."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "divergent"


DIVERGENT = Divergent()


def _bloch(v, max_norm=None, name="bloch"):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} vector must have 3 components, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} vector must be finite")
    n = float(np.linalg.norm(v))
    if max_norm is None:
        if abs(n - 1.0) > UNIT_TOL:
            raise ValueError(f"{name} vector must be unit norm, got {n}")
    elif n > max_norm + UNIT_TOL:
        raise ValueError(f"{name} vector norm {n} exceeds {max_norm}")
    return v


class PureQubit:
    """Pure state as a unit Bloch vector."""

    def __init__(self, bloch):
        self.bloch = _bloch(bloch)


class QubitDensity:
    """Mixed state as a Bloch vector of norm at most 1."""

    def __init__(self, bloch):
        self.bloch = _bloch(bloch, max_norm=1.0)


class ProjectorAction:
    """Rank-1 measurement direction as a unit Bloch vector."""

    def __init__(self, bloch):
        self.bloch = _bloch(bloch)


class DiscreteObservable:
    """Two-outcome observable O = hi * P(+a) + lo * P(-a).

    Stored as two eigenvalues and their antipodal projector Bloch vectors;
    the two rank-1 projectors resolve the identity by construction, which the
    constructor checks.
    """

    def __init__(self, eigenvalues, projector_blochs):
        vals = [float(x) for x in eigenvalues]
        blochs = [_bloch(b, name="projector") for b in projector_blochs]
        if len(vals) != 2 or len(blochs) != 2:
            raise ValueError("observable needs exactly two eigenvalue branches")
        if vals[0] == vals[1]:
            raise ValueError("eigenvalues must be distinct")
        if np.linalg.norm(blochs[0] + blochs[1]) > UNIT_TOL:
            raise ValueError("projectors do not resolve the identity")
        self.eigenvalues = vals
        self.projector_blochs = blochs

    @classmethod
    def from_direction(cls, axis, hi=1.0, lo=-1.0):
        axis = _bloch(axis, name="axis")
        return cls((hi, lo), (axis, -axis))

    def expectation(self, state):
        """Tr(rho O) from Bloch algebra."""
        r = state.bloch
        total = 0.0
        for lam, b in zip(self.eigenvalues, self.projector_blochs):
            total += lam * 0.5 * (1.0 + float(r @ b))
        return total


def pauli_x():
    return DiscreteObservable.from_direction((1.0, 0.0, 0.0))


def pauli_y():
    return DiscreteObservable.from_direction((0.0, 1.0, 0.0))


def pauli_z():
    return DiscreteObservable.from_direction((0.0, 0.0, 1.0))


def born_sample(state, action, rng):
    """Binary reward: 1 with probability (1 + <r_state, r_action>)/2."""
    p = 0.5 * (1.0 + float(state.bloch @ action.bloch))
    return 1 if rng.random() < p else 0


def measure_observable(state, obs, rng):
    """Sample an eigenvalue of obs on state per Born's rule."""
    r = state.bloch
    probs = [0.5 * (1.0 + float(r @ b)) for b in obs.projector_blochs]
    for p in probs:
        if p < -1e-10 or p > 1.0 + 1e-10:
            raise ValueError(f"Born probability {p} outside [0,1]")
    return obs.eigenvalues[0] if rng.random() < probs[0] else obs.eigenvalues[1]


def fidelity(a, b):
    """Uhlmann fidelity of two qubit densities (closed Bloch form)."""
    ra, rb = a.bloch, b.bloch
    na2 = float(ra @ ra)
    nb2 = float(rb @ rb)
    val = 0.5 * (1.0 + float(ra @ rb)
                 + np.sqrt(max(0.0, (1.0 - na2) * (1.0 - nb2))))
    return min(1.0, max(0.0, val))


def _clamped_log(x):
    # density eigenvalues in [-1e-12, 0) are treated as exactly 0
    if x < -EIG_CLAMP:
        raise ValueError(f"negative density eigenvalue {x}")
    return None if x <= EIG_CLAMP else np.log(x)


def relative_entropy(a, b):
    """D(a||b) in nats, or the DIVERGENT tag on support violation.

    Eigenvalues of (I + r.sigma)/2 are (1 +- |r|)/2; the cross term only
    needs the overlap of r_a with b's eigenbasis.
    """
    ra, rb = a.bloch, b.bloch
    na = float(np.linalg.norm(ra))
    nb = float(np.linalg.norm(rb))
    lam_a = (0.5 * (1.0 + na), 0.5 * (1.0 - na))
    lam_b = (0.5 * (1.0 + nb), 0.5 * (1.0 - nb))
    # Tr rho_a log rho_a
    ent = 0.0
    for lam in lam_a:
        lg = _clamped_log(lam)
        if lg is not None:
            ent += lam * lg
    # overlap of a with b's +- eigenprojectors
    c = float(ra @ rb) / nb if nb > EIG_CLAMP else 0.0
    weights = (0.5 * (1.0 + c), 0.5 * (1.0 - c))
    cross = 0.0
    for wgt, lam in zip(weights, lam_b):
        lg = _clamped_log(lam)
        if lg is None:
            if wgt > EIG_CLAMP:
                return DIVERGENT
            continue
        cross += wgt * lg
    return max(0.0, ent - cross)


def depolarize(state, alpha):
    """Bloch vector scaled by (1 - alpha)."""
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    return QubitDensity((1.0 - alpha) * state.bloch)
