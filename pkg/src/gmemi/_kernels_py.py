"""Pure-numpy implementations of the hot proximal kernels.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and semantics. ``gmemi._backend`` picks one at import time.
"""

import numpy as np

__all__ = [
    "perspective_prox",
    "perspective_latent_prox",
    "cubic_positive_root",
    "project_l1_ball_sort",
    "project_l1_ball_pivot",
    "group_shrink",
    "soft_threshold",
]

NAME = "python"


def cubic_positive_root(a, sigma, gamma):
    """Positive root t of ``t**3 + (2*sigma/gamma + 1)*t - 2*a/gamma = 0``.

    ``a`` is ``|u|`` and must be strictly positive. Cardano's formula is used
    on both branches, followed by one Newton step to clean up cancellation.
    """
    a = np.asarray(a, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    p = 2.0 * sigma / gamma + 1.0
    q2 = a / gamma
    delta = q2 * q2 + p * p * p / 27.0
    t = np.empty(np.broadcast(a, sigma).shape)
    pos = delta >= 0.0
    sq = np.sqrt(np.where(pos, delta, 0.0))
    t_card = np.cbrt(q2 + sq) + np.cbrt(q2 - sq)
    neg_d = np.where(pos, 0.0, -delta)
    # p < 0 whenever delta < 0, so the square root below is real there
    t_trig = 2.0 * np.sqrt(np.where(pos, 0.0, -p / 3.0)) * np.cos(
        np.arctan(gamma * np.sqrt(neg_d) / np.where(a > 0, a, 1.0)) / 3.0
    )
    t[...] = np.where(pos, t_card, t_trig)
    # Newton polish; derivative 3t^2 + p is positive at the positive root
    fp = 3.0 * t * t + p
    ok = fp > 0
    t = np.where(ok, t - (t * t * t + p * t - 2.0 * q2) / np.where(ok, fp, 1.0), t)
    return t


def perspective_prox(u, sigma, gamma):
    """Separable prox of ``gamma * h`` with h the perspective of ``u**2/2 + 1/2``."""
    u = np.asarray(u, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    au = np.abs(u)
    u_out = np.zeros_like(u)
    s_out = np.zeros_like(sigma)

    zero = 2.0 * gamma * sigma + u * u <= gamma * gamma
    axis = (~zero) & (u == 0.0)
    rest = ~(zero | axis)

    s_out[axis] = sigma[axis] - 0.5 * gamma
    if np.any(rest):
        t = cubic_positive_root(au[rest], sigma[rest], gamma)
        u_out[rest] = u[rest] - gamma * t * np.sign(u[rest])
        s_out[rest] = sigma[rest] + 0.5 * gamma * (t * t - 1.0)
    return u_out, s_out


def _latent_start(s0, c, rhs):
    # the cubic exceeds 2 t^3, 2 s0^2 t and c s^2 at s = s0 + t
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.cbrt(0.5 * rhs)
        t = np.minimum(t, np.where(s0 > 0, 0.5 * rhs / (s0 * s0), np.inf))
        t = np.minimum(t, np.where(c > 0, np.sqrt(rhs / c), np.inf))
    return s0 + t


def perspective_latent_prox(u, a, gamma):
    """Prox of ``s -> gamma * sum_i h(u_i, s_i)`` at ``a`` with ``u`` fixed.

    Solves ``2 s^3 + (gamma - 2 a) s^2 = gamma u^2`` for the root above
    ``max(a - gamma/2, 0)`` by monotone Newton from an upper bound.
    """
    u = np.asarray(u, dtype=float)
    a = np.asarray(a, dtype=float)
    c = gamma - 2.0 * a
    s0 = np.maximum(-0.5 * c, 0.0)
    rhs = gamma * u * u
    nz = rhs > 0
    out = s0.copy()
    if not np.any(nz):
        return out
    s0n, cn, rn = s0[nz], c[nz], rhs[nz]
    s = _latent_start(s0n, cn, rn)
    for _ in range(200):
        der = 2.0 * s * (3.0 * s + cn)
        step = (s * s * (2.0 * s + cn) - rn) / np.where(der > 0, der, np.inf)
        s_new = np.maximum(s - step, s0n)
        done = np.all(np.abs(s_new - s) <= 4e-16 * s_new)
        s = s_new
        if done:
            break
    out[nz] = s
    return out


def project_l1_ball_sort(x, alpha):
    """Euclidean projection onto ``{z : ||z||_1 <= alpha}`` by sort and scan."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if ax.sum() <= alpha:
        return x.copy()
    if alpha <= 0.0:
        return np.zeros_like(x)
    mu = np.sort(ax)[::-1]
    cs = np.cumsum(mu) - alpha
    j = np.arange(1, mu.size + 1)
    rho = np.nonzero(mu * j > cs)[0][-1]
    theta = cs[rho] / (rho + 1.0)
    return np.sign(x) * np.maximum(ax - theta, 0.0)


def project_l1_ball_pivot(x, alpha):
    """Same projection via Condat's pivot method (expected linear time)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if ax.sum() <= alpha:
        return x.copy()
    if alpha <= 0.0:
        return np.zeros_like(x)
    y = ax.tolist()
    v = [y[0]]
    vt = []
    rho = y[0] - alpha
    for yn in y[1:]:
        if yn > rho:
            rho += (yn - rho) / (len(v) + 1)
            if rho > yn - alpha:
                v.append(yn)
            else:
                vt.extend(v)
                v = [yn]
                rho = yn - alpha
    for yn in vt:
        if yn > rho:
            v.append(yn)
            rho += (yn - rho) / len(v)
    while True:
        keep = [yn for yn in v if yn > rho]
        if len(keep) == len(v):
            break
        v = keep
        rho = (sum(v) - alpha) / len(v)
    return np.sign(x) * np.maximum(ax - rho, 0.0)


def soft_threshold(w, thresh):
    """Coordinatewise shrinkage ``sign(w) * max(|w| - thresh, 0)``."""
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - thresh, 0.0)


def group_shrink(w, indptr, indices, thresh):
    """Block shrinkage ``(1 - k/max(k, ||w_g||)) w_g`` for CSR-encoded groups."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    for g in range(len(indptr) - 1):
        idx = indices[indptr[g]:indptr[g + 1]]
        blk = w[idx]
        nrm = np.sqrt(np.dot(blk, blk))
        k = thresh[g]
        scale = 1.0 - k / max(k, nrm) if (k > 0.0 or nrm > 0.0) else 1.0
        out[idx] = scale * blk
    return out
