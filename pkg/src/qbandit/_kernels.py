"""Numerical kernels, numba-compiled when available.

Everything in this module is plain-array code (no classes, no kwargs) so the
same source runs compiled or, when numba is missing or QBANDIT_NO_NUMBA=1 is
set, as ordinary Python.  fastmath stays off: the compiled and fallback paths
must produce bit-identical traces.

All randomness enters through pre-drawn arrays.  Episode kernels consume a
fixed number of draws per round, so a trace is fully determined by the draw
arrays regardless of compilation mode or thread count.
"""

import os

import numpy as np

if os.environ.get("QBANDIT_NO_NUMBA"):
    HAS_NUMBA = False
else:
    try:
        import numba

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False

if HAS_NUMBA:
    def njit(fn):
        return numba.njit(cache=True, nogil=True, fastmath=False)(fn)
else:
    def njit(fn):
        return fn


@njit
def dot_(a, b):
    """Plain sequential dot product, identical arithmetic on both paths."""
    s = 0.0
    for i in range(a.shape[0]):
        s += a[i] * b[i]
    return s


@njit
def norm_(a):
    return np.sqrt(dot_(a, a))


@njit
def qform_(x, m):
    """x^T m x for symmetric m."""
    s = 0.0
    for i in range(x.shape[0]):
        row = 0.0
        for j in range(x.shape[0]):
            row += m[i, j] * x[j]
        s += x[i] * row
    return s


@njit
def sum_log(w):
    """Sequential sum of logs (log-determinant from eigenvalues)."""
    s = 0.0
    for i in range(w.shape[0]):
        s += np.log(w[i])
    return s


@njit
def add_outer(v, a, wt):
    """In-place v += wt * a a^T, fixed evaluation order."""
    d = a.shape[0]
    for i in range(d):
        for j in range(d):
            v[i, j] += wt * a[i] * a[j]


@njit
def add_moment(m, a, wt, x):
    """In-place m += wt * x * a, fixed evaluation order."""
    for i in range(a.shape[0]):
        m[i] += wt * x * a[i]


@njit
def jacobi_eig(a_in):
    """Cyclic Jacobi eigendecomposition for small dense symmetric matrices.

    Returns (eigenvalues ascending, eigenvectors as columns).  Ties keep the
    diagonal order in which they appear, and each eigenvector's sign is fixed
    so its largest-magnitude component is positive, which makes the output a
    deterministic function of the input.
    """
    n = a_in.shape[0]
    a = a_in.copy()
    q = np.eye(n)
    if n > 1:
        for _sweep in range(60):
            off = 0.0
            scale = 0.0
            for i in range(n):
                scale += a[i, i] * a[i, i]
                for j in range(i + 1, n):
                    off += a[i, j] * a[i, j]
            if off <= 1e-28 * (scale + off + 1e-300):
                break
            for p in range(n - 1):
                for r in range(p + 1, n):
                    apq = a[p, r]
                    if apq == 0.0:
                        continue
                    theta = (a[r, r] - a[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        aip = a[i, p]
                        air = a[i, r]
                        a[i, p] = c * aip - s * air
                        a[i, r] = s * aip + c * air
                    for j in range(n):
                        apj = a[p, j]
                        arj = a[r, j]
                        a[p, j] = c * apj - s * arj
                        a[r, j] = s * apj + c * arj
                    for i in range(n):
                        qip = q[i, p]
                        qir = q[i, r]
                        q[i, p] = c * qip - s * qir
                        q[i, r] = s * qip + c * qir
    evals = np.empty(n)
    for i in range(n):
        evals[i] = a[i, i]
    # stable insertion sort ascending, ties keep diagonal order
    order = np.arange(n)
    for i in range(1, n):
        key = order[i]
        kv = evals[key]
        j = i - 1
        while j >= 0 and evals[order[j]] > kv:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key
    w = np.empty(n)
    vecs = np.empty((n, n))
    for col in range(n):
        src = order[col]
        w[col] = evals[src]
        imax = 0
        amax = -1.0
        for i in range(n):
            av = np.abs(q[i, src])
            if av > amax:
                amax = av
                imax = i
        sgn = 1.0 if q[imax, src] >= 0.0 else -1.0
        for i in range(n):
            vecs[i, col] = sgn * q[i, src]
    return w, vecs


@njit
def eig_solve(w, vecs, b):
    """Solve V x = b given V's eigendecomposition."""
    n = b.shape[0]
    x = np.zeros(n)
    for col in range(n):
        coef = 0.0
        for i in range(n):
            coef += vecs[i, col] * b[i]
        coef /= w[col]
        for i in range(n):
            x[i] += coef * vecs[i, col]
    return x


@njit
def _lower_median(vals):
    """Lower median of a 1-d array (sorted copy, element at (m-1)//2)."""
    m = vals.shape[0]
    srt = np.sort(vals)
    return srt[(m - 1) // 2]


@njit
def mom_pick(estimates, v):
    """Index of the estimate minimizing the lower-median pairwise V-distance.

    estimates: (k, d), v: (d, d) design matrix.  Lowest index wins ties.
    """
    k = estimates.shape[0]
    if k == 1:
        return 0
    med = np.empty(k)
    diff = np.empty(estimates.shape[1])
    dist = np.empty((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            for c in range(estimates.shape[1]):
                diff[c] = estimates[i, c] - estimates[j, c]
            dij = np.sqrt(qform_(diff, v))
            dist[i, j] = dij
            dist[j, i] = dij
    others = np.empty(k - 1)
    for i in range(k):
        pos = 0
        for j in range(k):
            if j != i:
                others[pos] = dist[i, j]
                pos += 1
        med[i] = _lower_median(others)
    best = 0
    for i in range(1, k):
        if med[i] < med[best]:
            best = i
    return best


@njit
def ec_directions(c, vecs, lam_min_prev, out):
    """Eigenvalue-controlled action pairs around center c.

    Fills out[(d-1), 2, d] with normalized c +- v_i/sqrt(lam_min_prev) for the
    d-1 lowest-eigenvalue directions, the +/- pair per direction.
    """
    d = c.shape[0]
    inv_sqrt_lmin = 1.0 / np.sqrt(lam_min_prev)
    atil = np.empty(d)
    for i in range(d - 1):
        for s in range(2):
            sgn = 1.0 if s == 0 else -1.0
            for ci in range(d):
                atil[ci] = c[ci] + sgn * inv_sqrt_lmin * vecs[ci, i]
            an = norm_(atil)
            for ci in range(d):
                out[i, s, ci] = atil[ci] / an


@njit
def omega_weight(lam_max_prev, d, beta_prev):
    """Update weight omega(V) = sqrt(lam_max)/(12 sqrt(d-1) beta)."""
    return np.sqrt(lam_max_prev) / (12.0 * np.sqrt(d - 1.0) * beta_prev)


@njit
def beta_logdet(log_inv_delta, logdet, logdet0, lam0):
    """Weighted-estimator radius (sqrt(2 ln(1/d) + ln det ratio) + sqrt(l))^2."""
    return (np.sqrt(2.0 * log_inv_delta + logdet - logdet0)
            + np.sqrt(lam0)) ** 2


@njit
def beta_circle_t(log_inv_delta, t):
    """Circle-algorithm radius (1 + sqrt(2 ln(1/d) + 2 ln(1+t)))^2."""
    return (1.0 + np.sqrt(2.0 * log_inv_delta + 2.0 * np.log(1.0 + t))) ** 2


# env_kind codes for batched_episode / etc_episode
ENV_GAUSS = 0        # X = <theta,a> + sigma * z
ENV_VANISHING = 1    # X = <theta,a> + sqrt(1-<theta,a>^2) * z, z truncated normal
ENV_BERNOULLI = 2    # X = +-1 with P(+1) = (1+<theta,a>)/2
ENV_JC = 3           # Jaynes-Cummings battery round, X = +-1 on up/other

# beta_mode codes
BETA_CONST = 0       # constant beta (MoM)
BETA_WEIGHTED = 1    # growing log-det beta, weighted updates
BETA_CIRCLE = 2      # unweighted updates, beta = (1+sqrt(2log(1/d)+2log(1+t)))^2


@njit
def batched_episode(theta, lam0, k, n_batches, beta_mode, beta_const,
                    omega_scale, log_inv_delta, env_kind, sigma, regret_scale,
                    draws, c0, jc_omega, jc_n0):
    """Run one batched eigenvalue-controlled episode (VVN / VN / LinUCB-S1).

    theta   : (d,) unit environment vector
    omega_scale : multiplier on the omega(V) update weight; 1.0 keeps the
              worst-case constant, larger values only rescale the (scale-free)
              eigenvalue balance
    draws   : (n_batches, d-1, 2, k) uniforms (Bernoulli/JC) or standard
              (truncated) normals (Gaussian kinds), consumed one per round
    c0      : (d,) random initial unit estimator
    regret_scale : per-round regret = regret_scale * (1 - <theta, a>)

    Returns per-round actions, rewards (linear +-1 / Gaussian scale), regret,
    estimator infidelity, work and dissipation (zeros unless ENV_JC), plus
    per-batch lambda_min, lambda_max and coverage flags of the updated design
    matrix.  Coverage is tested against the mode's own beta.
    """
    d = theta.shape[0]
    per_batch = 2 * (d - 1) * k
    t_total = n_batches * per_batch
    v = lam0 * np.eye(d)
    logdet0 = d * np.log(lam0)
    moments = np.zeros((k, d))
    c = c0.copy()

    actions = np.empty((t_total, d))
    xs = np.empty(t_total)
    regret = np.empty(t_total)
    infid = np.empty(t_total)
    work = np.zeros(t_total)
    diss = np.zeros(t_total)
    lmin = np.empty(n_batches)
    lmax = np.empty(n_batches)
    cover = np.empty(n_batches, dtype=np.int64)

    n_level = jc_n0
    dirs = np.empty((d - 1, 2, d))
    estimates = np.empty((k, d))
    dtheta = np.empty(d)

    t = 0
    for tb in range(n_batches):
        w, vecs = jacobi_eig(v)
        lam_min_prev = w[0]
        lam_max_prev = w[d - 1]
        if beta_mode == BETA_CIRCLE:
            wt = 1.0
        elif tb == 0:
            wt = 1.0
        else:
            if beta_mode == BETA_CONST:
                beta_prev = beta_const
            else:
                beta_prev = beta_logdet(log_inv_delta, sum_log(w),
                                        logdet0, lam0)
            wt = omega_scale * omega_weight(lam_max_prev, d, beta_prev)

        ec_directions(c, vecs, lam_min_prev, dirs)
        t_batch0 = t
        for i in range(d - 1):
            for s in range(2):
                a = dirs[i, s]
                mean = dot_(theta, a)
                for j in range(k):
                    u = draws[tb, i, s, j]
                    if env_kind == ENV_GAUSS:
                        x = mean + sigma * u
                    elif env_kind == ENV_VANISHING:
                        var = 1.0 - mean * mean
                        if var < 0.0:
                            var = 0.0
                        x = mean + np.sqrt(var) * u
                    elif env_kind == ENV_BERNOULLI:
                        x = 1.0 if u < 0.5 * (1.0 + mean) else -1.0
                    else:
                        # JC battery: up with prob p, else split stay/down by
                        # cos^2/sin^2; level 0 never goes down
                        p = 0.5 * (1.0 + mean)
                        st = np.sin((np.pi / 2.0)
                                    * np.sqrt(n_level / (n_level + 1.0)))
                        s2 = st * st
                        if u < p:
                            n_level += 1
                            x = 1.0
                            work[t] = jc_omega
                        elif u < p + (1.0 - p) * (1.0 - s2):
                            x = -1.0
                        else:
                            n_level -= 1
                            x = -1.0
                            work[t] = -jc_omega
                        diss[t] = jc_omega * (1.0 + s2) * (1.0 - p)
                    for c_i in range(d):
                        actions[t, c_i] = a[c_i]
                    add_moment(moments[j], a, wt, x)
                    xs[t] = x
                    regret[t] = regret_scale * (1.0 - mean)
                    t += 1
                add_outer(v, a, wt)

        w2, vecs2 = jacobi_eig(v)
        lmin[tb] = w2[0]
        lmax[tb] = w2[d - 1]
        for j in range(k):
            est = eig_solve(w2, vecs2, moments[j])
            for c_i in range(d):
                estimates[j, c_i] = est[c_i]
        pick = mom_pick(estimates, v)
        est_norm = norm_(estimates[pick])
        if est_norm > 0.0:
            for c_i in range(d):
                c[c_i] = estimates[pick, c_i] / est_norm

        if beta_mode == BETA_CONST:
            beta_now = beta_const
        elif beta_mode == BETA_WEIGHTED:
            beta_now = beta_logdet(log_inv_delta, sum_log(w2), logdet0, lam0)
        else:
            beta_now = beta_circle_t(log_inv_delta, tb + 1.0)
        for c_i in range(d):
            dtheta[c_i] = theta[c_i] - estimates[pick, c_i]
        cover[tb] = 1 if qform_(dtheta, v) <= beta_now else 0

        fid_gap = 0.5 * (1.0 - dot_(theta, c))
        for tt in range(t_batch0, t):
            infid[tt] = fid_gap

    return actions, xs, regret, infid, work, diss, lmin, lmax, cover


@njit
def etc_episode(theta, t_total, draws, env_kind, jc_omega, jc_n0, regret_scale):
    """Explore-then-commit (Bandit PLS) on a pure-state environment.

    ceil(sqrt(T)) exploration rounds split across the three Bloch axes, Bloch
    estimate from outcome frequencies, commit to its normalization.  A zero
    estimate buys one extra round per axis.  env_kind selects plain Bernoulli
    rewards or Jaynes-Cummings battery rounds.
    """
    d = theta.shape[0]
    actions = np.empty((t_total, d))
    xs = np.empty(t_total)
    regret = np.empty(t_total)
    work = np.zeros(t_total)
    diss = np.zeros(t_total)

    n_level = jc_n0
    m = int(np.ceil(np.sqrt(t_total)))
    if m > t_total:
        m = t_total
    ones = np.zeros(d)
    counts = np.zeros(d)
    a = np.zeros(d)
    r_hat = np.zeros(d)
    t = 0
    committed = False
    while t < t_total:
        if not committed:
            axis = 0
            # fill the least-sampled axis, lowest index first
            for i in range(1, d):
                if counts[i] < counts[axis]:
                    axis = i
            for c_i in range(d):
                a[c_i] = 1.0 if c_i == axis else 0.0
        mean = dot_(theta, a)
        p = 0.5 * (1.0 + mean)
        u = draws[t]
        if env_kind == ENV_JC:
            st = np.sin((np.pi / 2.0) * np.sqrt(n_level / (n_level + 1.0)))
            s2 = st * st
            if u < p:
                n_level += 1
                x = 1.0
                work[t] = jc_omega
            elif u < p + (1.0 - p) * (1.0 - s2):
                x = -1.0
            else:
                n_level -= 1
                x = -1.0
                work[t] = -jc_omega
            diss[t] = jc_omega * (1.0 + s2) * (1.0 - p)
        else:
            x = 1.0 if u < p else -1.0
        for c_i in range(d):
            actions[t, c_i] = a[c_i]
        xs[t] = x
        regret[t] = regret_scale * (1.0 - mean)
        if not committed:
            counts[axis] += 1.0
            if x > 0.0:
                ones[axis] += 1.0
        t += 1
        if not committed and t >= m and counts[d - 1] >= counts[0]:
            # budget exhausted and axes balanced: try to commit
            nrm = 0.0
            for i in range(d):
                r_hat[i] = 2.0 * ones[i] / counts[i] - 1.0
                nrm += r_hat[i] * r_hat[i]
            nrm = np.sqrt(nrm)
            if nrm > 0.0:
                for i in range(d):
                    a[i] = r_hat[i] / nrm
                committed = True
            else:
                m += d  # one extra exploration round per axis
    return actions, xs, regret, work, diss


@njit
def linucb_finite_episode(arms, theta, lam, eta, log_inv_delta, big_l, draws,
                          env_kind, sigma):
    """Finite-arm LinUCB with the book-style beta, unit update weights.

    arms: (n_arms, d).  Returns chosen indices, rewards, per-round regret and
    per-round coverage flags of theta in the post-update confidence region.
    """
    n_arms, d = arms.shape
    t_total = draws.shape[0]
    v = lam * np.eye(d)
    moment = np.zeros(d)
    idx = np.empty(t_total, dtype=np.int64)
    xs = np.empty(t_total)
    regret = np.empty(t_total)
    cover = np.empty(t_total, dtype=np.int64)
    lmin = np.empty(t_total)
    lmax = np.empty(t_total)

    best_mean = -1e300
    for j in range(n_arms):
        mj = dot_(theta, arms[j])
        if mj > best_mean:
            best_mean = mj
    dtheta = np.empty(d)

    for t in range(t_total):
        w, vecs = jacobi_eig(v)
        theta_hat = eig_solve(w, vecs, moment)
        # beta_{t-1,delta} built from the t-1 samples collected so far
        beta = (eta * np.sqrt(2.0 * log_inv_delta
                              + d * np.log((d * lam + t * big_l * big_l)
                                           / (d * lam)))
                + eta * np.sqrt(lam)) ** 2
        sq_beta = np.sqrt(beta)
        best = 0
        best_val = -1e300
        for j in range(n_arms):
            mu = dot_(theta_hat, arms[j])
            x_v = eig_solve(w, vecs, arms[j])
            width = np.sqrt(dot_(arms[j], x_v))
            val = mu + sq_beta * width
            if val > best_val:
                best_val = val
                best = j
        a = arms[best]
        mean = dot_(theta, a)
        if env_kind == ENV_GAUSS:
            x = mean + sigma * draws[t]
        elif env_kind == ENV_VANISHING:
            var = 1.0 - mean * mean
            if var < 0.0:
                var = 0.0
            x = mean + np.sqrt(var) * draws[t]
        else:
            x = 1.0 if draws[t] < 0.5 * (1.0 + mean) else -1.0
        idx[t] = best
        xs[t] = x
        regret[t] = best_mean - mean
        for c_i in range(d):
            moment[c_i] += x * a[c_i]
            for c_j in range(d):
                v[c_i, c_j] += a[c_i] * a[c_j]
        w2, vecs2 = jacobi_eig(v)
        lmin[t] = w2[0]
        lmax[t] = w2[d - 1]
        theta_hat2 = eig_solve(w2, vecs2, moment)
        beta_t = (eta * np.sqrt(2.0 * log_inv_delta
                                + d * np.log((d * lam + (t + 1.0) * big_l * big_l)
                                             / (d * lam)))
                  + eta * np.sqrt(lam)) ** 2
        for c_i in range(d):
            dtheta[c_i] = theta[c_i] - theta_hat2[c_i]
        cover[t] = 1 if qform_(dtheta, v) <= beta_t else 0
    return idx, xs, regret, cover, lmin, lmax


@njit
def linucb_sphere_episode(theta, c0, lam, eta, log_inv_delta, big_l, draws,
                          env_kind, sigma):
    """LinUCB over the whole unit sphere, one action per round.

    The optimistic point is taken from the extremal pair around the
    normalized estimate along the weakest design direction, with the full
    confidence radius: a = normalize(c +- sqrt(beta/lam_min) v_min), keeping
    whichever scores higher.  c0 seeds the first round, where the estimate
    is still zero.
    """
    d = theta.shape[0]
    t_total = draws.shape[0]
    v = lam * np.eye(d)
    moment = np.zeros(d)
    acts = np.empty((t_total, d))
    xs = np.empty(t_total)
    regret = np.empty(t_total)
    cover = np.empty(t_total, dtype=np.int64)
    lmin = np.empty(t_total)
    lmax = np.empty(t_total)

    c = np.empty(d)
    a_plus = np.empty(d)
    a_minus = np.empty(d)
    dtheta = np.empty(d)

    for t in range(t_total):
        w, vecs = jacobi_eig(v)
        theta_hat = eig_solve(w, vecs, moment)
        nrm = norm_(theta_hat)
        if nrm > 0.0:
            for i in range(d):
                c[i] = theta_hat[i] / nrm
        else:
            for i in range(d):
                c[i] = c0[i]
        beta = (eta * np.sqrt(2.0 * log_inv_delta
                              + d * np.log((d * lam + t * big_l * big_l)
                                           / (d * lam)))
                + eta * np.sqrt(lam)) ** 2
        sq_beta = np.sqrt(beta)
        spread = np.sqrt(beta / w[0])
        for i in range(d):
            a_plus[i] = c[i] + spread * vecs[i, 0]
            a_minus[i] = c[i] - spread * vecs[i, 0]
        np_ = norm_(a_plus)
        nm_ = norm_(a_minus)
        best_val = -1e300
        for s in range(2):
            if s == 0:
                cand, nn = a_plus, np_
            else:
                cand, nn = a_minus, nm_
            if nn == 0.0:
                continue
            mu = dot_(theta_hat, cand) / nn
            x_v = eig_solve(w, vecs, cand)
            width = np.sqrt(dot_(cand, x_v)) / nn
            val = mu + sq_beta * width
            if val > best_val:
                best_val = val
                for i in range(d):
                    acts[t, i] = cand[i] / nn
        a = acts[t]
        mean = dot_(theta, a)
        if env_kind == ENV_GAUSS:
            x = mean + sigma * draws[t]
        elif env_kind == ENV_VANISHING:
            var = 1.0 - mean * mean
            if var < 0.0:
                var = 0.0
            x = mean + np.sqrt(var) * draws[t]
        else:
            x = 1.0 if draws[t] < 0.5 * (1.0 + mean) else -1.0
        xs[t] = x
        regret[t] = 1.0 - mean
        for c_i in range(d):
            moment[c_i] += x * a[c_i]
            for c_j in range(d):
                v[c_i, c_j] += a[c_i] * a[c_j]
        w2, vecs2 = jacobi_eig(v)
        lmin[t] = w2[0]
        lmax[t] = w2[d - 1]
        theta_hat2 = eig_solve(w2, vecs2, moment)
        beta_t = (eta * np.sqrt(2.0 * log_inv_delta
                                + d * np.log((d * lam + (t + 1.0) * big_l * big_l)
                                             / (d * lam)))
                  + eta * np.sqrt(lam)) ** 2
        for c_i in range(d):
            dtheta[c_i] = theta[c_i] - theta_hat2[c_i]
        cover[t] = 1 if qform_(dtheta, v) <= beta_t else 0
    return acts, xs, regret, cover, lmin, lmax


@njit
def ucb_episode(outcome_hi, outcome_lo, p_hi, t_total, eta, log_inv_delta,
                draws):
    """Index-based UCB on a finite set of two-outcome observables.

    Arm a pays outcome_hi[a] with probability p_hi[a], else outcome_lo[a].
    Unvisited arms carry an infinite index, ties go to the lowest arm.
    """
    n_arms = outcome_hi.shape[0]
    counts = np.zeros(n_arms)
    sums = np.zeros(n_arms)
    means = np.empty(n_arms)
    for a in range(n_arms):
        means[a] = p_hi[a] * outcome_hi[a] + (1.0 - p_hi[a]) * outcome_lo[a]
    best_mean = means[0]
    for a in range(1, n_arms):
        if means[a] > best_mean:
            best_mean = means[a]
    idx = np.empty(t_total, dtype=np.int64)
    xs = np.empty(t_total)
    regret = np.empty(t_total)
    for t in range(t_total):
        chosen = -1
        for a in range(n_arms):
            if counts[a] == 0.0:
                chosen = a
                break
        if chosen < 0:
            best_val = -1e300
            for a in range(n_arms):
                val = (sums[a] / counts[a]
                       + np.sqrt(2.0 * eta * eta * log_inv_delta / counts[a]))
                if val > best_val:
                    best_val = val
                    chosen = a
        x = outcome_hi[chosen] if draws[t] < p_hi[chosen] else outcome_lo[chosen]
        counts[chosen] += 1.0
        sums[chosen] += x
        idx[t] = chosen
        xs[t] = x
        regret[t] = best_mean - means[chosen]
    return idx, xs, regret


@njit
def elliptical_lhs(acts, lam):
    """Sum of min(1, ||a_t||^2 in the inverse design metric) along a sequence."""
    t_total, d = acts.shape
    v = lam * np.eye(d)
    total = 0.0
    for t in range(t_total):
        w, vecs = jacobi_eig(v)
        x_v = eig_solve(w, vecs, acts[t])
        val = dot_(acts[t], x_v)
        if val > 1.0:
            val = 1.0
        total += val
        for i in range(d):
            for j in range(d):
                v[i, j] += acts[t, i] * acts[t, j]
    return total
