"""Proximity operators used by the GME-MI solver.

All operators are exact (closed form or finite procedures). Conjugate proxes
are obtained from primal ones through the Moreau decomposition
``prox_{g f*}(x) = x - g * prox_{f/g}(x/g)``.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels

__all__ = [
    "GroupPartition",
    "perspective_value",
    "prox_perspective_quad",
    "prox_perspective_quad_vec",
    "prox_perspective_latent",
    "project_l1_ball",
    "prox_group_l21",
    "group_l21_norm",
    "prox_tgv_f",
    "prox_conjugate",
    "project_box",
]


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint groups covering ``{0, ..., m-1}`` with positive weights.

    The weighted mixed norm is ``sum_k weights[k] * ||w[groups[k]]||_2``. The
    default weight of a group is the square root of its size.
    """

    groups: tuple
    weights: np.ndarray
    size: int
    indptr: np.ndarray
    indices: np.ndarray
    singletons: bool

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]], size=None, weights=None):
        groups = tuple(tuple(int(i) for i in g) for g in groups)
        if any(len(g) == 0 for g in groups):
            raise ValueError("groups must be nonempty")
        flat = [i for g in groups for i in g]
        size = len(flat) if size is None else int(size)
        if sorted(flat) != list(range(size)):
            raise ValueError("groups must be disjoint and cover 0..size-1")
        if weights is None:
            weights = np.sqrt([len(g) for g in groups])
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(groups),) or np.any(weights <= 0):
            raise ValueError("need one positive weight per group")
        indptr = np.zeros(len(groups) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(g) for g in groups])
        indices = np.asarray(flat, dtype=np.int64)
        singletons = all(len(g) == 1 for g in groups) and bool(np.all(weights == 1.0))
        return cls(groups, weights, size, indptr, indices, singletons)

    @classmethod
    def singleton(cls, size):
        return cls.from_groups([[i] for i in range(size)], size=size)

    @classmethod
    def contiguous(cls, size, block):
        """Consecutive blocks of length ``block`` (the last one may be shorter)."""
        if block < 1:
            raise ValueError("block must be >= 1")
        return cls.from_groups(
            [list(range(s, min(s + block, size))) for s in range(0, size, block)], size=size
        )

    def __len__(self):
        return len(self.groups)


def perspective_value(u, sigma):
    """Sum of the perspective ``h(u, s)`` of ``u**2/2 + 1/2``; may be ``inf``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    pos = sigma > 0
    if np.any(~pos & ((u != 0) | (sigma != 0))):
        return np.inf
    up, sp = u[pos], sigma[pos]
    return float(np.sum(up * up / (2.0 * sp) + 0.5 * sp))


def prox_perspective_quad(u, sigma, gamma):
    """Prox of ``gamma * h`` at the scalar pair ``(u, sigma)``.

    Returns
    -------
    (float, float)
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    uo, so = kernels.perspective_prox(np.array([u], float), np.array([sigma], float), float(gamma))
    return float(uo[0]), float(so[0])


def prox_perspective_quad_vec(u, sigma, gamma):
    """Coordinatewise version of :func:`prox_perspective_quad`."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return kernels.perspective_prox(u, sigma, float(gamma))


def prox_perspective_latent(u, a, gamma):
    """Prox of ``s -> gamma * sum_i h(u_i, s_i)`` at ``a`` with ``u`` held fixed.

    For ``u_i != 0`` the minimizer is the unique root above
    ``s0 = max(a_i - gamma/2, 0)`` of ``2 s^3 + (gamma - 2 a_i) s^2 = gamma u_i^2``.
    The cubic is increasing and convex there, so Newton started from an upper
    bound decreases monotonically onto the root. For ``u_i = 0`` the answer
    is ``s0``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return kernels.perspective_latent_prox(u, a, float(gamma))


def project_l1_ball(xi, alpha, method="sort"):
    """Project onto ``{z : ||z||_1 <= alpha}``.

    ``method="sort"`` is the deterministic sort-and-scan projection;
    ``method="pivot"`` uses Condat's expected-linear-time pivot search.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if method == "sort":
        return kernels.project_l1_ball_sort(xi, float(alpha))
    if method == "pivot":
        return kernels.project_l1_ball_pivot(xi, float(alpha))
    raise ValueError(f"unknown method {method!r}")


def group_l21_norm(w, part: GroupPartition):
    w = np.asarray(w, dtype=float)
    if part.singletons:
        return float(np.sum(np.abs(w)))
    norms = np.sqrt(np.add.reduceat(w[part.indices] ** 2, part.indptr[:-1]))
    return float(np.dot(part.weights, norms))


def prox_group_l21(w, part: GroupPartition, kappa):
    """Prox of ``kappa * ||.||_{2,1}`` with the partition's weights folded in."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    w = np.asarray(w, dtype=float)
    if w.shape != (part.size,):
        raise ValueError("partition does not cover w")
    if kappa == 0:
        return w.copy()
    if part.singletons:
        return kernels.soft_threshold(w, float(kappa))
    return kernels.group_shrink(w, part.indptr, part.indices, kappa * part.weights)


def prox_tgv_f(u, sigma, gamma, alpha, g1: GroupPartition):
    """Prox of ``gamma * alpha * ||u - sigma||_{2,1}`` in the pair ``(u, sigma)``.

    Uses ``U = [I, -I]`` with ``U U^T = 2I``, so only one group shrinkage on
    ``u - sigma`` is needed.
    """
    u = np.asarray(u, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if u.shape != sigma.shape:
        raise ValueError("u and sigma must have the same shape")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    s = prox_group_l21(u - sigma, g1, 2.0 * gamma * alpha)
    c = u + sigma
    return 0.5 * (c + s), 0.5 * (c - s)


def prox_conjugate(prox_of_f: Callable, gamma, x):
    """``prox_{gamma f*}(x)`` from ``prox_of_f(point, step) = prox_{step f}(point)``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    return x - gamma * prox_of_f(x / gamma, 1.0 / gamma)


def project_box(x, lo, hi):
    if lo > hi:
        raise ValueError("need lo <= hi")
    return np.clip(np.asarray(x, dtype=float), lo, hi)
