"""Design of ``B^T B``, the convexity check on ``Q`` and the solver's step parameters.

Only ``B^T B`` is ever used downstream, so the constructions return it
directly (``design_B_identity_L`` also hands back the factor since it is free).
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, min_eigenvalue_symmetric, operator_norm
from .seeds import cumsum_matrix

__all__ = [
    "StepParams",
    "StepConditionError",
    "PMetric",
    "design_B_identity_L",
    "design_BtB_difference_L",
    "assemble_Q",
    "verify_overall_convexity",
    "step_condition_margins",
    "select_step_params",
    "build_p_metric",
]

DEFAULT_KAPPA = 2.0
DEFAULT_DELTA = 1e-2


class StepConditionError(ValueError):
    def __init__(self, index, margin):
        super().__init__(f"step condition {index} violated (margin {margin:.3e})")
        self.index = index
        self.margin = margin


@dataclass(frozen=True)
class StepParams:
    kappa: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    delta: float = DEFAULT_DELTA

    @property
    def averaging(self):
        """Averagedness constant ``kappa / (2 kappa - 1)`` of the solver operator."""
        return self.kappa / (2.0 * self.kappa - 1.0)


def design_B_identity_L(A, lam, theta):
    """``B = sqrt(theta/lam) A`` for ``L = I``; then ``Q = (1 - theta) A^T A``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    A = as_matrix(A, "A")
    return np.sqrt(theta / lam) * A


def design_BtB_difference_L(A, lam, theta, rel_tol=1e-12):
    """``B^T B`` for ``L = D_1d`` with any ``theta`` in ``[0, 1]``.

    With ``[h, H] = A S_1d`` (``S_1d`` the cumulative-sum matrix) this returns
    ``(theta/lam) H^T (I - h h^+) H`` where ``h^+ = h^T/||h||^2``, or zero when
    ``h`` vanishes (judged relative to ``||A||_op``).
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    A = as_matrix(A, "A")
    n = A.shape[1]
    if n < 2:
        raise ValueError("need at least two columns")
    AS = A @ cumsum_matrix(n)
    h, H = AS[:, 0], AS[:, 1:]
    hn2 = float(h @ h)
    if np.sqrt(hn2) <= rel_tol * max(operator_norm(A), 1e-300):
        G = H.T @ H
    else:
        Hh = H.T @ h
        G = H.T @ H - np.outer(Hh, Hh) / hn2
    G = (theta / lam) * G
    return 0.5 * (G + G.T)


def assemble_Q(A, L, BtB, lam):
    """``Q = A^T A - lam L^T (B^T B) L``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    A = as_matrix(A, "A")
    L = as_matrix(L, "L")
    BtB = as_matrix(BtB, "BtB")
    if L.shape[1] != A.shape[1] or BtB.shape != (L.shape[0], L.shape[0]):
        raise ValueError(f"shape mismatch: A {A.shape}, L {L.shape}, BtB {BtB.shape}")
    Q = A.T @ A - lam * (L.T @ BtB @ L)
    return 0.5 * (Q + Q.T)


def verify_overall_convexity(Q, tol=1e-9):
    """Return ``(lambda_min(Q) >= -tol, lambda_min(Q))``."""
    lmin = min_eigenvalue_symmetric(Q)
    return lmin >= -tol, lmin


def step_condition_margins(A, L, M, BtB, lam, params: StepParams):
    """Margins of the four step conditions (positive means satisfied).

    1. ``lambda_min((1/g1) I - (k/2) A^T A - lam L^T L)``
    2. ``lambda_min((1/g2 - 1) I - M^T M)``
    3. ``1/g3 - (k/2 + 2/k) ||B||_op^2``
    4. ``lambda_min((1/g4) I - g3 M M^T)``

    Conditions 1, 2 and 4 are strict and condition 3 is not, so a
    nonnegative margin counts as satisfied for condition 3.
    """
    k = params.kappa
    n = A.shape[1]
    c1 = min_eigenvalue_symmetric(np.eye(n) / params.gamma1 - 0.5 * k * (A.T @ A) - lam * (L.T @ L))
    p, l = M.shape
    # empty latent blocks: conditions 2 and 4 reduce to their scalar parts
    if l:
        c2 = min_eigenvalue_symmetric((1.0 / params.gamma2 - 1.0) * np.eye(l) - M.T @ M)
    else:
        c2 = 1.0 / params.gamma2 - 1.0
    c3 = 1.0 / params.gamma3 - (0.5 * k + 2.0 / k) * (operator_norm(BtB) if np.any(BtB) else 0.0)
    if p:
        c4 = min_eigenvalue_symmetric(np.eye(p) / params.gamma4 - params.gamma3 * (M @ M.T))
    else:
        c4 = 1.0 / params.gamma4
    return np.array([c1, c2, c3, c4])


def select_step_params(A, L, M, BtB, lam, kappa=DEFAULT_KAPPA, delta=DEFAULT_DELTA):
    """Closed-form step parameters that satisfy the four step conditions.

    Uses ``g1 = 1/(||(k/2) A^T A + lam L^T L||_op + delta)``,
    ``g2 = 1/(||M||^2 + 1 + delta)``, ``g3 = 1/((k/2 + 2/k) ||B||^2 + delta)``
    and ``g4 = 1/(g3 ||M||^2 + delta)``, where ``||B||^2 = ||B^T B||_op``.
    The result is re-verified with eigenvalue checks.

    Raises
    ------
    StepConditionError
        Carrying the index (1-4) of a violated condition.
    """
    if not kappa > 1:
        raise ValueError("kappa must exceed 1")
    if not delta > 0:
        raise ValueError("delta must be positive")
    A = as_matrix(A, "A")
    L = as_matrix(L, "L")
    M = np.asarray(M, dtype=float).reshape(np.shape(M))
    BtB = as_matrix(BtB, "BtB")
    nB2 = operator_norm(BtB) if np.any(BtB) else 0.0
    nM2 = operator_norm(M) ** 2 if M.size else 0.0
    g1 = 1.0 / (operator_norm(0.5 * kappa * (A.T @ A) + lam * (L.T @ L)) + delta)
    g2 = 1.0 / (nM2 + 1.0 + delta)
    g3 = 1.0 / ((0.5 * kappa + 2.0 / kappa) * nB2 + delta)
    g4 = 1.0 / (g3 * nM2 + delta)
    params = StepParams(kappa, g1, g2, g3, g4, delta)
    margins = step_condition_margins(A, L, M, BtB, lam, params)
    for i, mg in enumerate(margins, start=1):
        if (mg < 0) if i == 3 else (mg <= 0):
            raise StepConditionError(i, mg)
    return params


@dataclass(frozen=True)
class PMetric:
    """The metric ``P`` under which the solver operator is averaged.

    ``P`` acts on stacked states ``z = (x, s, v, t, r, eta, xi, zeta)`` with
    block sizes ``(n, l, m, l, m, l, p, p)``. Reordering to
    ``(x, v, r | s, eta, xi | t, zeta)`` makes it block diagonal with
    blocks ``P1``, ``P2``, ``P3``.
    """

    P: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    P3: np.ndarray
    sizes: tuple

    def p_inner(self, z1, z2):
        return float(np.asarray(z1) @ (self.P @ np.asarray(z2)))

    def p_norm(self, z):
        return float(np.sqrt(max(self.p_inner(z, z), 0.0)))

    def min_eigenvalues(self):
        return tuple(min_eigenvalue_symmetric(B) if B.size else np.inf for B in (self.P1, self.P2, self.P3))


def _blocks(rows):
    return np.block(rows) if rows else np.zeros((0, 0))


def build_p_metric(L, M, BtB, params: StepParams, lam):
    """Assemble ``P`` and its diagonal blocks after permutation."""
    L = np.asarray(L, dtype=float)
    M = np.asarray(M, dtype=float)
    BtB = np.asarray(BtB, dtype=float)
    m, n = L.shape
    p, l = M.shape
    g1, g2, g3, g4 = params.gamma1, params.gamma2, params.gamma3, params.gamma4
    LtBtB = L.T @ BtB

    P1 = np.block([
        [np.eye(n) / g1, -lam * LtBtB, -lam * L.T],
        [-lam * LtBtB.T, (lam / g3) * np.eye(m), np.zeros((m, m))],
        [-lam * L, np.zeros((m, m)), lam * np.eye(m)],
    ])
    Il, Ip = np.eye(l), np.eye(p)
    P2 = lam * np.block([
        [Il / g2, -Il, -M.T],
        [-Il, Il, np.zeros((l, p))],
        [-M, np.zeros((p, l)), Ip],
    ])
    P3 = lam * np.block([
        [Il / g3, -M.T],
        [-M, Ip / g4],
    ])

    sizes = (n, l, m, l, m, l, p, p)
    offs = np.concatenate([[0], np.cumsum(sizes)])
    blk = lambda i: np.arange(offs[i], offs[i + 1])
    # order of original blocks in the permuted layout
    perm = np.concatenate([blk(i) for i in (0, 2, 4, 1, 5, 6, 3, 7)])
    D = np.zeros((offs[-1], offs[-1]))
    a, b = P1.shape[0], P2.shape[0]
    D[:a, :a] = P1
    D[a:a + b, a:a + b] = P2
    D[a + b:, a + b:] = P3
    P = np.zeros_like(D)
    P[np.ix_(perm, perm)] = D
    return PMetric(P, P1, P2, P3, sizes)
