"""Independent numerical oracles used by the tests.

None of these call into the package; they minimize the defining objectives
directly or use textbook formulas from numpy/scipy.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def perspective(a, b):
    if b > 0:
        return a * a / (2.0 * b) + 0.5 * b
    return 0.0 if (a == 0 and b == 0) else np.inf


def prox_perspective_grid(u, sigma, gamma, grid=81):
    """Prox of ``gamma * h`` at ``(u, sigma)`` by 2-D grid search then 1-D refinement.

    Refinement profiles out ``a`` (for fixed ``b > 0`` the best ``a`` is
    ``u b / (b + gamma)``) and runs a bounded scalar search on the convex
    profile in ``b`` over the whole range, which extends continuously to
    ``b = 0``. A one-cell bracket around the grid minimizer is not enough
    when the minimizer is far below the grid spacing.
    """
    def obj(a, b):
        return gamma * perspective(a, b) + 0.5 * ((a - u) ** 2 + (b - sigma) ** 2)

    bmax = abs(sigma) + abs(u) + gamma + 1.0
    A = np.linspace(-abs(u) - 1, abs(u) + 1, grid)
    B = np.linspace(0.0, bmax, grid)
    vals = np.array([[obj(a, b) for b in B] for a in A])
    j = np.unravel_index(np.argmin(vals), vals.shape)[1]

    def profile(b):
        if b <= 0:
            return 0.5 * (u * u + sigma * sigma)
        a = u * b / (b + gamma)
        return obj(a, b)

    # the profile is convex, so a bounded search over the whole range is safe;
    # the grid cell is kept as an extra candidate
    lo, hi = 0.0, bmax
    res = minimize_scalar(profile, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    b = float(res.x)
    cand = [(profile(b), b), (profile(0.0), 0.0), (profile(B[j]), B[j])]
    _, b = min(cand)
    a = u * b / (b + gamma) if b > 0 else 0.0
    return a, b


def prox_latent_scalar(u, a, gamma):
    """``argmin_{s >= 0} gamma h(u, s) + (s - a)^2 / 2`` by bounded scalar search."""
    hi = abs(a) + abs(u) + gamma + 1.0

    def obj(s):
        return gamma * perspective(u, s) + 0.5 * (s - a) ** 2

    res = minimize_scalar(obj, bounds=(1e-300 if u != 0 else 0.0, hi), method="bounded",
                          options={"xatol": 1e-14})
    return float(res.x)


def project_l1_ball_bisection(x, alpha, iters=200):
    """l1-ball projection by bisection on the soft-threshold level."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if ax.sum() <= alpha:
        return x.copy()
    lo, hi = 0.0, float(ax.max())
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(ax - mid, 0.0).sum() > alpha:
            lo = mid
        else:
            hi = mid
    # finish with the exact level on the identified support
    tau = 0.5 * (lo + hi)
    supp = ax > tau
    tau = (ax[supp].sum() - alpha) / supp.sum()
    return np.sign(x) * np.maximum(ax - tau, 0.0)


def project_l1_ball_sort(x, alpha):
    """Sort-and-scan projection written from the textbook description."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if ax.sum() <= alpha:
        return x.copy()
    mu = sorted(ax, reverse=True)
    csum = 0.0
    tau = 0.0
    for k, m in enumerate(mu, start=1):
        csum += m
        t = (csum - alpha) / k
        if m > t:
            tau = t
    return np.sign(x) * np.maximum(ax - tau, 0.0)


def block_minimax(t, gamma, b):
    """``rho_{gamma,b}(t)``: ``sqrt(b) t - t^2/(2 gamma)`` up to ``gamma sqrt(b)``, then ``gamma b / 2``."""
    if t <= gamma * np.sqrt(b):
        return np.sqrt(b) * t - t * t / (2.0 * gamma)
    return gamma * b / 2.0


def _tgv_chain_t(m):
    D = np.eye(m + 1)[1:] - np.eye(m + 1)[:-1]
    return D.T


def projected_subgradient(model, A, y, lam, alpha, lo=None, hi=None, iters=100_000, step0=None):
    """Convex baseline minimizer by projected subgradient with ``1/sqrt(k)`` steps.

    Supports ``l1``, ``l21`` (contiguous groups of length ``alpha``), ``tv``
    and ``tgv``. For ``tgv`` the latent field is optimized jointly with ``x``
    (the cost is jointly convex), which needs only norm subgradients.
    Returns the best iterate by cost.
    """
    A = np.asarray(A, dtype=float)
    d, n = A.shape
    D = np.eye(n)[1:] - np.eye(n)[:-1]

    if model == "l21":
        k = int(round(alpha))
        groups = [np.arange(s, min(s + k, n)) for s in range(0, n, k)]

    def cost_grad(z):
        x = z[:n]
        r = A @ x - y
        val = 0.5 * r @ r
        g = np.zeros_like(z)
        g[:n] = A.T @ r
        if model == "l1":
            val += lam * np.abs(x).sum()
            g[:n] += lam * np.sign(x)
        elif model == "l21":
            for idx in groups:
                nrm = np.linalg.norm(x[idx])
                val += lam * np.sqrt(idx.size) * nrm
                if nrm > 0:
                    g[idx] += lam * np.sqrt(idx.size) * x[idx] / nrm
        elif model == "tv":
            u = D @ x
            val += lam * np.abs(u).sum()
            g[:n] += lam * D.T @ np.sign(u)
        elif model == "tgv":
            s = z[n:]
            Mt = _tgv_chain_t(n - 1)
            w = D @ x - s
            q = Mt @ s
            val += lam * (alpha * np.abs(w).sum() + (1 - alpha) * np.abs(q).sum())
            g[:n] += lam * alpha * D.T @ np.sign(w)
            g[n:] += -lam * alpha * np.sign(w) + lam * (1 - alpha) * Mt.T @ np.sign(q)
        else:
            raise ValueError(model)
        return val, g

    size = n + (n - 1 if model == "tgv" else 0)
    z = np.zeros(size)
    step0 = 1.0 / np.linalg.norm(A, 2) ** 2 if step0 is None else step0
    best = (np.inf, z.copy())
    for k in range(1, iters + 1):
        val, g = cost_grad(z)
        if val < best[0]:
            best = (val, z.copy())
        z = z - (step0 / np.sqrt(k)) * g
        if lo is not None:
            z[:n] = np.clip(z[:n], lo, hi)
    val, _ = cost_grad(z)
    if val < best[0]:
        best = (val, z.copy())
    return best[1][:n]
