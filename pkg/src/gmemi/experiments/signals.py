"""Test signals, Gaussian measurements and the NMSE metric."""

import re

import numpy as np

__all__ = [
    "gen_block_sparse",
    "gen_piecewise_linear",
    "gen_measurements",
    "nmse",
    "empirical_snr_db",
]


def _split_lengths(total, parts, rng):
    """Dirichlet-distributed positive integer lengths summing to ``total``."""
    w = rng.dirichlet(np.ones(parts))
    spare = total - parts  # every block gets at least one entry
    raw = w * spare
    lengths = np.floor(raw).astype(int)
    short = spare - lengths.sum()
    # largest remainders get the leftover units
    order = np.argsort(-(raw - lengths), kind="stable")
    lengths[order[:short]] += 1
    return lengths + 1


def gen_block_sparse(n, blocks, nonzeros, rng, max_attempts=1000):
    """Signal of length ``n`` with ``nonzeros`` N(0, 1) entries in ``blocks`` runs.

    Block lengths come from a symmetric Dirichlet split of ``nonzeros``
    (each at least 1). Start positions are drawn uniformly and rejected
    until the runs are pairwise separated by at least one zero, so the
    support has exactly ``blocks`` maximal runs.

    Raises
    ------
    ValueError
        On infeasible counts, or when no valid placement was found within
        ``max_attempts`` draws.
    """
    if not 1 <= blocks <= nonzeros <= n:
        raise ValueError("need 1 <= blocks <= nonzeros <= n")
    if nonzeros + blocks - 1 > n:
        raise ValueError("blocks cannot be separated inside n entries")
    for _ in range(max_attempts):
        lengths = _split_lengths(nonzeros, blocks, rng)
        starts = np.array([rng.integers(0, n - ln + 1) for ln in lengths])
        order = np.argsort(starts)
        s, ln = starts[order], lengths[order]
        ends = s + ln
        if np.all(s[1:] > ends[:-1]):
            x = np.zeros(n)
            for a, b in zip(s, ends):
                x[a:b] = rng.standard_normal(b - a)
            return x
    raise ValueError(f"no separated placement found in {max_attempts} attempts")


_FIG2 = re.compile(r"^fig2\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)$")


def gen_piecewise_linear(n, profile="default", s=None, r=None):
    """Piecewise-linear test signal.

    Profiles
    --------
    ``"fig2(s, r)"`` (or ``"fig2"`` with keyword ``s`` and ``r``)
        ``x_i = 0`` for ``i <= k`` and ``x_i = s (i - k - 1) + r`` after,
        1-based, with ``k = n // 2``. For ``n = 50`` the break is at 25.
    ``"default"``
        A fixed signal in ``[-0.7, 0.6]`` on ``t_i = i / (n - 1)``: a rising
        ramp, a falling ramp, a jump to a flat segment, and a final rising
        ramp, i.e. three slope changes and one jump.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    match = _FIG2.match(profile.replace(" ", "")) if isinstance(profile, str) else None
    if match:
        s, r = float(match.group(1)), float(match.group(2))
        profile = "fig2"
    if profile == "fig2":
        if s is None or r is None:
            raise ValueError("fig2 profile needs s and r")
        k = n // 2
        i = np.arange(1, n + 1)
        return np.where(i <= k, 0.0, s * (i - k - 1) + r)
    if profile == "default":
        t = np.arange(n) / (n - 1)
        return np.select(
            [t < 0.25, t < 0.5, t < 0.75],
            [0.2 + 1.6 * t, 0.6 - 2.4 * (t - 0.25), np.full(n, -0.7)],
            -0.7 + 2.8 * (t - 0.75),
        )
    raise ValueError(f"unknown profile {profile!r}")


def gen_measurements(x_org, d, snr_db, rng):
    """Gaussian sensing matrix and noisy observation ``y = A x_org + e``.

    ``A`` has i.i.d. N(0, 1) entries. The noise is white Gaussian rescaled so
    that ``||A x_org||^2 / ||e||^2`` equals ``10^(snr_db/10)`` exactly for
    this draw (its per-entry variance is then ``||A x_org||^2 / (d 10^(snr_db/10))``
    on average). ``snr_db = inf`` gives noiseless data.
    """
    x_org = np.asarray(x_org, dtype=float)
    if d < 1:
        raise ValueError("d must be positive")
    if np.isnan(snr_db) or snr_db == -np.inf:
        raise ValueError("snr_db must be a number or +inf")
    A = rng.standard_normal((d, x_org.size))
    Ax = A @ x_org
    e = rng.standard_normal(d)
    if snr_db == np.inf:
        return A, Ax
    pa = float(Ax @ Ax)
    pe = float(e @ e)
    if pa == 0.0 or pe == 0.0:
        return A, Ax
    e *= np.sqrt(pa / (pe * 10.0 ** (snr_db / 10.0)))
    return A, Ax + e


def empirical_snr_db(A, x_org, y):
    Ax = A @ x_org
    e = y - Ax
    return 10.0 * np.log10(float(Ax @ Ax) / float(e @ e))


def nmse(x_org, x_hat):
    """``||x_org - x_hat||^2 / ||x_org||^2``."""
    x_org = np.asarray(x_org, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    den = float(x_org @ x_org)
    if den == 0.0:
        raise ValueError("x_org must be nonzero")
    diff = x_org - x_hat
    return float(diff @ diff) / den
