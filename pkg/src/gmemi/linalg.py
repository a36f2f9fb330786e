"""Dense linear-algebra helpers: operator norms and symmetric eigenvalue checks."""

import numpy as np

__all__ = [
    "as_matrix",
    "as_vector",
    "operator_norm",
    "min_eigenvalue_symmetric",
    "is_symmetric",
]


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-D float array, raising ``ValueError`` otherwise."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def as_vector(x, name="vector"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def is_symmetric(S, atol=1e-12):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    return bool(np.all(np.abs(S - S.T) <= atol * scale))


def operator_norm(M, tol=1e-10, max_iter=100000, rng=None):
    """Spectral norm ``max ||Mx||`` over the unit ball, by power iteration.

    The iteration runs on the smaller of ``M^T M`` and ``M M^T`` and tracks the
    Rayleigh quotient. It is run from the normalized all-ones vector and from
    a seeded random vector, and the larger estimate is returned. If an iterate
    collapses to zero (start vector in the null space) that run restarts from
    a fresh random vector.

    Parameters
    ----------
    M : array_like, shape (p, q)
    tol : float
        Relative accuracy target for the returned norm.
    max_iter : int
    rng : numpy.random.Generator, optional
        Source of the random start and restarts. Defaults to ``default_rng(0)``.

    Returns
    -------
    float
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("operator_norm expects a 2-D array")
    if M.size == 0 or not np.any(M):
        return 0.0
    if M.shape[0] < M.shape[1]:
        G = M @ M.T
    else:
        G = M.T @ M
    dim = G.shape[0]
    rng = np.random.default_rng(0) if rng is None else rng
    # the all-ones start can be orthogonal to the top singular vector (e.g.
    # the alternating mode of a chain difference), so a seeded random start
    # is always run as well; both estimates are lower bounds
    ones = np.full(dim, 1.0 / np.sqrt(dim))
    rand = rng.standard_normal(dim)
    rand /= np.linalg.norm(rand)
    est = max(_power(G, ones, tol, max_iter, rng), _power(G, rand, tol, max_iter, rng))
    return float(np.sqrt(est))


def _power(G, x, tol, max_iter, rng):
    """Largest eigenvalue of the PSD matrix ``G`` by power iteration from ``x``."""
    est = 0.0
    restarts = 0
    for _ in range(max_iter):
        y = G @ x
        rq = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0 or rq <= 0.0:
            if restarts > 10:
                return 0.0
            restarts += 1
            x = rng.standard_normal(x.size)
            x /= np.linalg.norm(x)
            continue
        x = y / ny
        # Rayleigh quotient is a lower bound that increases monotonically
        if abs(rq - est) <= max(1e-2 * tol, 1e-15) * rq:
            return rq
        est = rq
    return est


def min_eigenvalue_symmetric(S, tol=1e-12):
    """Smallest eigenvalue of a symmetric matrix.

    Raises
    ------
    ValueError
        If ``S`` is not square and symmetric to within ``1e-12`` (relative to
        its largest entry); the message contains ``"not symmetric"``.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("matrix is not symmetric (not square)")
    if not is_symmetric(S, 1e-12):
        raise ValueError("matrix is not symmetric")
    if S.shape[0] == 0:
        return float("inf")
    # LAPACK symmetric solver; tol is met to machine precision
    return float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])
