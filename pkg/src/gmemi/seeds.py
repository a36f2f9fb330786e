"""Seed functions ``phi(u, s) = f(u, s) + g(M s)`` and their induced penalties.

A seed defines the minimization-induced penalty ``psi(u) = min_s phi(u, s)``.
This module ships the LOP-l2/l1 seed (block sparsity with a latent partition),
the 1-D second-order TGV seed, and a degenerate seed without latent variable
(plain weighted l2/l1 norm, l1 when all groups are singletons). It also
evaluates ``psi`` and the enhanced penalty
``Psi_B(u) = psi(u) - min_v [psi(v) + 1/2 ||B(u - v)||^2]`` numerically; the
solver never needs these values, they exist for diagnostics and tests.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linalg import as_vector, operator_norm
from .prox import (
    GroupPartition,
    group_l21_norm,
    perspective_value,
    project_l1_ball,
    prox_conjugate,
    prox_group_l21,
    prox_perspective_latent,
    prox_perspective_quad_vec,
    prox_tgv_f,
)

__all__ = [
    "SeedFunction",
    "NeighborGraph",
    "InnerResult",
    "InnerSolveError",
    "make_lop_seed",
    "make_tgv_seed",
    "make_plain_seed",
    "difference_matrix_1d",
    "cumsum_matrix",
    "eval_mi_penalty",
    "eval_gme_mi_penalty",
    "minimize_seed",
]


class InnerSolveError(RuntimeError):
    """The inner primal-dual iteration hit its cap before reaching ``tol``."""

    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class SeedFunction:
    """Seed ``phi(u, s) = f(u, s) + g(M s)`` with ``u`` in R^m, ``s`` in R^l.

    ``prox_f(u, s, gamma)`` returns ``prox_{gamma f}(u, s)`` as a pair and
    ``prox_g(xi, gamma)`` returns ``prox_{gamma g}(xi)``. ``apply_M`` and
    ``apply_Mt`` are optional matrix-free products; they must agree with the
    dense ``M``. ``prox_f_latent(u, a, gamma)``, when present, is the prox of
    ``s -> gamma f(u, s)`` at ``a`` with ``u`` held fixed; the evaluation of
    ``psi`` uses it to avoid a slowly converging equality constraint on ``u``.
    ``eval_g(xi, slack)`` accepts a feasibility slack for indicator parts.
    ``restore_latent(s)``, when present, maps a nearly feasible latent vector
    to a feasible one at distance proportional to the violation.

    ``symmetry`` is ``"even"`` when ``phi(-u, s) = phi(u, s)`` and ``"odd"``
    when ``phi(-u, s) = phi(u, -s)``.
    """

    name: str
    m: int
    l: int
    p: int
    M: np.ndarray
    prox_f: Callable
    prox_g: Callable
    eval_f: Callable
    eval_g: Callable
    symmetry: str = "even"
    apply_M: Optional[Callable] = None
    apply_Mt: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    prox_f_latent: Optional[Callable] = None
    restore_latent: Optional[Callable] = None

    def __post_init__(self):
        if self.M.shape != (self.p, self.l):
            raise ValueError(f"M has shape {self.M.shape}, expected {(self.p, self.l)}")
        if self.symmetry not in ("even", "odd"):
            raise ValueError("symmetry must be 'even' or 'odd'")

    def Mv(self, s):
        if self.p == 0:
            return np.zeros(0)
        return self.apply_M(s) if self.apply_M is not None else self.M @ s

    def Mtv(self, xi):
        if self.l == 0:
            return np.zeros(0)
        return self.apply_Mt(xi) if self.apply_Mt is not None else self.M.T @ xi

    @property
    def norm_M(self):
        # cached lazily; frozen dataclass so go through __dict__
        val = self.__dict__.get("_norm_M")
        if val is None:
            val = operator_norm(self.M) if self.M.size else 0.0
            object.__setattr__(self, "_norm_M", val)
        return val

    def phi(self, u, s, slack=0.0):
        """Seed value ``f(u, s) + g(M s)`` (``g`` is skipped when ``p == 0``).

        ``slack`` relaxes indicator constraints inside ``g`` by that amount.
        """
        val = self.eval_f(u, s)
        if self.p:
            val = val + self.eval_g(self.Mv(s), slack)
        return float(val)

    # stacked-vector forms used with prox_conjugate

    def prox_f_stacked(self, z, gamma):
        u, s = self.prox_f(z[: self.m], z[self.m:], gamma)
        return np.concatenate([u, s])

    def prox_f_conj(self, r, eta, gamma=1.0):
        """``prox_{gamma f*}(r, eta)`` via the Moreau decomposition."""
        out = prox_conjugate(self.prox_f_stacked, gamma, np.concatenate([r, eta]))
        return out[: self.m], out[self.m:]

    def prox_g_conj(self, xi, gamma=1.0):
        if self.p == 0:
            return np.zeros(0)
        return prox_conjugate(self.prox_g, gamma, xi)


@dataclass(frozen=True)
class NeighborGraph:
    """Ordered index pairs ``(i, j)``; the difference operator maps s to ``s_i - s_j``."""

    pairs: tuple
    size: int

    def __post_init__(self):
        seen = set()
        for i, j in self.pairs:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j})")
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise ValueError(f"pair ({i}, {j}) out of range for size {self.size}")
            if (i, j) in seen:
                raise ValueError(f"duplicate pair ({i}, {j})")
            seen.add((i, j))

    @classmethod
    def chain(cls, size):
        return cls(tuple((i, i + 1) for i in range(size - 1)), size)

    @property
    def is_chain(self):
        return self.pairs == tuple((i, i + 1) for i in range(self.size - 1))

    def matrix(self):
        D = np.zeros((len(self.pairs), self.size))
        for k, (i, j) in enumerate(self.pairs):
            D[k, i] = 1.0
            D[k, j] = -1.0
        return D


def difference_matrix_1d(n):
    """``(n-1) x n`` forward difference, ``(Dx)_i = x_{i+1} - x_i``."""
    if n < 2:
        raise ValueError("difference_matrix_1d needs n >= 2")
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0
    D[idx, idx + 1] = 1.0
    return D


def cumsum_matrix(n):
    """Lower-triangular ones; ``S @ x`` is the running sum of ``x``."""
    if n < 1:
        raise ValueError("cumsum_matrix needs n >= 1")
    return np.tril(np.ones((n, n)))


def _chain_diff(s):
    return s[:-1] - s[1:]


def _chain_diff_t(xi):
    out = np.zeros(xi.size + 1)
    out[:-1] += xi
    out[1:] -= xi
    return out


def make_lop_seed(m, alpha, graph: Optional[NeighborGraph] = None):
    """Latent optimally partitioned l2/l1 seed.

    ``f(u, s) = sum_i h(u_i, s_i)`` with ``h`` the perspective of
    ``u**2/2 + 1/2``, ``g`` the indicator of the l1 ball of radius ``alpha``,
    and ``M`` the difference operator of ``graph`` (a chain by default).
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    graph = NeighborGraph.chain(m) if graph is None else graph
    if graph.size != m:
        raise ValueError(f"graph has size {graph.size}, seed needs {m}")
    D = graph.matrix()
    alpha = float(alpha)

    def prox_f(u, s, gamma):
        return prox_perspective_quad_vec(u, s, gamma)

    def prox_g(xi, gamma):
        return project_l1_ball(xi, alpha)

    def eval_g(xi, slack=0.0):
        # relative slack absorbs round-off in M s for feasible s
        return 0.0 if np.sum(np.abs(xi)) <= alpha * (1 + 1e-12) + 1e-12 + slack else np.inf

    def restore(s):
        # D 1 = 0, so shrinking towards the mean scales D s and keeps s >= 0
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        tv = float(np.sum(np.abs(D @ s)))
        if tv <= alpha:
            return s
        c = s.mean()
        return c + (alpha / tv) * (s - c)

    fast = graph.is_chain and m > 1
    return SeedFunction(
        name="lop",
        m=m,
        l=m,
        p=D.shape[0],
        M=D,
        prox_f=prox_f,
        prox_g=prox_g,
        eval_f=perspective_value,
        eval_g=eval_g,
        symmetry="even",
        apply_M=_chain_diff if fast else None,
        apply_Mt=_chain_diff_t if fast else None,
        params={"alpha": alpha},
        prox_f_latent=prox_perspective_latent,
        restore_latent=restore,
    )


def _tgv_M(s):
    return -np.diff(np.concatenate(([0.0], s, [0.0])))


def make_tgv_seed(m, alpha, g1: Optional[GroupPartition] = None, g2: Optional[GroupPartition] = None):
    """Second-order TGV seed for 1-D signals with ``u = D_1d x`` in R^m.

    ``f(u, s) = alpha ||u - s||_{2,1}^{g1}``, ``g = (1 - alpha) ||.||_{2,1}^{g2}``
    and ``M = D_1d^T`` of shape ``(m+1) x m``. Singleton partitions (the
    anisotropic case) are the default.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    alpha = float(alpha)
    M = difference_matrix_1d(m + 1).T
    g1 = GroupPartition.singleton(m) if g1 is None else g1
    g2 = GroupPartition.singleton(m + 1) if g2 is None else g2
    if g1.size != m or g2.size != m + 1:
        raise ValueError("partition sizes do not match the seed dimensions")

    def prox_f(u, s, gamma):
        return prox_tgv_f(u, s, gamma, alpha, g1)

    def prox_g(xi, gamma):
        return prox_group_l21(xi, g2, gamma * (1.0 - alpha))

    def prox_latent(u, a, gamma):
        # f(u, .) is a shifted weighted norm of s - u
        return u + prox_group_l21(a - u, g1, gamma * alpha)

    return SeedFunction(
        name="tgv",
        m=m,
        l=m,
        p=m + 1,
        M=M,
        prox_f=prox_f,
        prox_g=prox_g,
        eval_f=lambda u, s: alpha * group_l21_norm(np.asarray(u) - np.asarray(s), g1),
        eval_g=lambda xi, slack=0.0: (1.0 - alpha) * group_l21_norm(xi, g2),
        symmetry="odd",
        apply_M=_tgv_M,
        apply_Mt=np.diff,
        params={"alpha": alpha},
        prox_f_latent=prox_latent,
    )


def make_plain_seed(m, part: Optional[GroupPartition] = None):
    """Seed without latent variable: ``psi(u) = ||u||_{2,1}^{part}``.

    With singleton groups this is the l1 norm, and the enhanced model reduces
    to GMC (``L = I``) or GME-TV (``L = D_1d``).
    """
    part = GroupPartition.singleton(m) if part is None else part
    if part.size != m:
        raise ValueError("partition does not cover the seed dimension")
    empty = np.zeros(0)

    def prox_f(u, s, gamma):
        return prox_group_l21(u, part, gamma), empty

    return SeedFunction(
        name="l1" if part.singletons else "l21",
        m=m,
        l=0,
        p=0,
        M=np.zeros((0, 0)),
        prox_f=prox_f,
        prox_g=lambda xi, gamma: empty,
        eval_f=lambda u, s=None: group_l21_norm(u, part),
        eval_g=lambda xi, slack=0.0: 0.0,
        symmetry="even",
        params={"partition": part},
    )


# -- numerical evaluation of psi and Psi_B -----------------------------------


@dataclass
class InnerResult:
    value: float
    w: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    iterations: int
    residual: float


def minimize_seed(seed: SeedFunction, u, BtB=None, tol=1e-7, max_iter=100000, x0=None,
                  dual_scale=10.0, adapt_updates=500):
    """Minimize the seed over its latent variable, with ``u`` pinned or coupled.

    With ``BtB=None`` this computes ``psi(u) = min_s f(u, s) + g(M s)``.
    Otherwise it computes the envelope term
    ``min_{v, s} f(v, s) + g(M s) + 1/2 (v - u)^T BtB (v - u)``.

    Both are solved by a Condat-Vu primal-dual iteration over ``(w, s, xi)``
    with the linear constraints ``w = u`` (pinned case only) and ``xi = M s``.
    When the seed provides ``prox_f_latent`` the pinned case drops ``w`` and
    works on ``(s, xi)`` directly; the ``w = u`` multiplier otherwise creeps
    at a rate proportional to ``|u_i|`` for tiny nonzero entries.

    The product of the primal and dual steps is fixed by the convergence
    condition; their ratio starts at ``dual_scale`` and is re-balanced every
    50 iterations towards the observed ratio of dual to primal movement
    (the primal-weight heuristic of restarted PDHG). This removes the long
    stalls where the primal sits on a kink while a multiplier drifts. After
    ``adapt_updates`` re-balancings the steps stay fixed, so the usual
    fixed-step convergence guarantee applies from then on.

    The primal iterates come out of ``prox_f`` and ``prox_g``, so ``f`` and
    ``g`` stay finite along the way; the reported value is the Lagrangian at
    the final pair, which agrees with the optimum to first order in the
    constraint residual.

    Raises
    ------
    InnerSolveError
        If the primal-dual residual is still above ``tol`` after ``max_iter``.
    """
    u = as_vector(u, "u")
    if u.shape != (seed.m,):
        raise ValueError(f"u has length {u.size}, seed expects {seed.m}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, l, p = seed.m, seed.l, seed.p
    pinned = BtB is None
    if not pinned:
        BtB = np.asarray(BtB, dtype=float)
        if BtB.shape != (m, m):
            raise ValueError("BtB must be m x m")
        beta = operator_norm(BtB) if np.any(BtB) else 0.0
    else:
        beta = 0.0

    if l == 0 and pinned:
        val = float(seed.eval_f(u, np.zeros(0)))
        return InnerResult(val, u.copy(), np.zeros(0), np.zeros(0), 0, 0.0)

    if l == 0 and not pinned:
        return _envelope_no_latent(seed, u, BtB, beta, tol, max_iter)

    nK2 = seed.norm_M ** 2 + 1.0  # K = [[I, 0, 0], [0, M, -I]]
    nK = np.sqrt(nK2)
    latent = pinned and seed.prox_f_latent is not None

    def steps(weight):
        # Condat-Vu step rule: 1/tau - s ||K||^2 >= beta / 2
        s_step = weight / nK
        return s_step, 1.0 / (s_step * nK2 / 0.99 + 0.5 * beta)

    weight = float(dual_scale)
    s_step, tau = steps(weight)

    if x0 is None:
        w = u.copy()
        sig = np.zeros(l)
        xi = np.zeros(p)
    else:
        w, sig, xi = (np.array(a, dtype=float) for a in x0)
    ya = np.zeros(m)
    yb = np.zeros(p)
    window = 50
    updates = 0
    anchor = (w.copy(), sig.copy(), xi.copy(), ya.copy(), yb.copy())

    res = np.inf
    for it in range(1, max_iter + 1):
        if latent:
            w_n = w
            s_n = seed.prox_f_latent(u, sig - tau * seed.Mtv(yb), tau)
        else:
            gw = ya if pinned else BtB @ (w - u)
            w_n, s_n = seed.prox_f(w - tau * gw, sig - tau * seed.Mtv(yb), tau)
        xi_n = seed.prox_g(xi + tau * yb, tau)
        yb_n = yb + s_step * (seed.Mv(2.0 * s_n - sig) - (2.0 * xi_n - xi))
        if pinned and not latent:
            ya_n = ya + s_step * (2.0 * w_n - w - u)
        else:
            ya_n = ya

        check = it % 10 == 0 or it == max_iter
        if check:
            dx = np.sqrt(np.sum((w - w_n) ** 2) + np.sum((sig - s_n) ** 2) + np.sum((xi - xi_n) ** 2))
            dy = np.sqrt(np.sum((ya - ya_n) ** 2) + np.sum((yb - yb_n) ** 2))
            res = dx / tau + dy / s_step
            con = np.linalg.norm(seed.Mv(s_n) - xi_n)
            if pinned and not latent:
                con += np.linalg.norm(w_n - u)
        w, sig, xi, ya, yb = w_n, s_n, xi_n, ya_n, yb_n
        if check and res <= tol and con <= tol:
            break

        if it % window == 0 and updates < adapt_updates:
            aw, asig, axi, aya, ayb = anchor
            mx = np.sqrt(np.sum((w - aw) ** 2) + np.sum((sig - asig) ** 2) + np.sum((xi - axi) ** 2))
            my = np.sqrt(np.sum((ya - aya) ** 2) + np.sum((yb - ayb) ** 2))
            if mx > 1e-14 and my > 1e-14:
                # geometric smoothing towards the movement ratio
                weight = float(np.clip(np.sqrt(weight * my / mx), 1e-3, 1e6))
                s_step, tau = steps(weight)
                updates += 1
            anchor = (w.copy(), sig.copy(), xi.copy(), ya.copy(), yb.copy())
    else:
        raise InnerSolveError("inner primal-dual iteration did not converge", res)

    val = seed.eval_f(w, sig) + seed.eval_g(xi) + float(yb @ (seed.Mv(sig) - xi))
    if pinned:
        val += float(ya @ (w - u))
    else:
        val += 0.5 * float((w - u) @ BtB @ (w - u))
    return InnerResult(float(val), w, sig, xi, it, float(res))


def _envelope_no_latent(seed, u, BtB, beta, tol, max_iter):
    """``min_v f(v) + 1/2 (v-u)^T BtB (v-u)`` for seeds with ``l = 0``."""
    empty = np.zeros(0)
    if beta == 0.0:
        # f attains its minimum 0 at the origin for the shipped seeds
        v = np.zeros_like(u)
        return InnerResult(float(seed.eval_f(v, empty)), v, empty, empty, 0, 0.0)
    diag = np.diag(BtB)
    if np.allclose(BtB, np.diag(diag), rtol=0, atol=1e-14 * beta) and np.allclose(diag, diag[0]):
        # BtB = c I: the envelope is the Moreau envelope of f with parameter 1/c
        c = diag[0]
        v, _ = seed.prox_f(u, empty, 1.0 / c)
        val = seed.eval_f(v, empty) + 0.5 * c * float((v - u) @ (v - u))
        return InnerResult(float(val), v, empty, empty, 0, 0.0)
    # FISTA with adaptive restart on the smooth-plus-prox split
    step = 1.0 / beta
    v = u.copy()
    z = v.copy()
    t = 1.0
    res = np.inf
    for it in range(1, max_iter + 1):
        v_n, _ = seed.prox_f(z - step * (BtB @ (z - u)), empty, step)
        if float((z - v_n) @ (v_n - v)) > 0.0:
            # gradient-based adaptive restart of the momentum
            t = 1.0
        t_n = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = v_n + ((t - 1.0) / t_n) * (v_n - v)
        res = np.linalg.norm(v_n - v) / step
        v, t = v_n, t_n
        if res <= tol:
            break
    else:
        raise InnerSolveError("envelope iteration did not converge", res)
    val = seed.eval_f(v, empty) + 0.5 * float((v - u) @ BtB @ (v - u))
    return InnerResult(float(val), v, empty, empty, it, float(res))


def eval_mi_penalty(seed: SeedFunction, u, tol=1e-7, max_iter=100000):
    """``psi(u) = min_s phi(u, s)``, accurate to roughly ``tol``."""
    return minimize_seed(seed, u, None, tol, max_iter).value


def eval_gme_mi_penalty(seed: SeedFunction, BtB, u, tol=1e-7, max_iter=100000):
    """``Psi_B(u) = psi(u) - min_v [psi(v) + 1/2 ||B(u - v)||^2]``."""
    psi = eval_mi_penalty(seed, u, tol, max_iter)
    env = minimize_seed(seed, u, BtB, tol, max_iter).value
    return psi - env
