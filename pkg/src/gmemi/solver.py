"""Fixed-point solver for the GME-MI regularized least-squares model.

The model is ``min_{x in C} 1/2 ||y - A x||^2 + lam * Psi_B(L x)`` where
``Psi_B`` is the seed's induced penalty minus its generalized Moreau
envelope. Under ``Q = A^T A - lam L^T B^T B L >= 0`` the cost is convex, and
iterating the averaged operator below converges to a global minimizer.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .design import (
    PMetric,
    StepParams,
    assemble_Q,
    build_p_metric,
    select_step_params,
    verify_overall_convexity,
)
from .linalg import as_matrix, as_vector, operator_norm
from .prox import project_box
from .seeds import SeedFunction, eval_gme_mi_penalty, eval_mi_penalty

__all__ = [
    "Constraint",
    "ProblemSpec",
    "ConvexityError",
    "SolverState",
    "Solution",
    "GMEMIOperator",
    "apply_T",
    "solve",
    "evaluate_objective",
    "certify_inner_optimality",
    "averagedness_check",
    "AveragednessReport",
]


class ConvexityError(ValueError):
    """``Q`` has a negative eigenvalue, so the model is not overall convex."""


@dataclass(frozen=True)
class Constraint:
    """Closed convex set with a projection: whole space, a box, or custom."""

    kind: str = "whole"
    lo: float = -np.inf
    hi: float = np.inf
    projector: Optional[Callable] = None
    membership: Optional[Callable] = None

    @classmethod
    def whole_space(cls):
        return cls("whole")

    @classmethod
    def box(cls, lo, hi):
        if lo > hi:
            raise ValueError("need lo <= hi")
        return cls("box", float(lo), float(hi))

    @classmethod
    def custom(cls, projector, membership=None):
        return cls("custom", projector=projector, membership=membership)

    def project(self, x):
        if self.kind == "whole":
            return x
        if self.kind == "box":
            return project_box(x, self.lo, self.hi)
        return np.asarray(self.projector(x), dtype=float)

    def contains(self, x, tol=1e-12):
        if self.kind == "whole":
            return True
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        if self.membership is not None:
            return bool(self.membership(x, tol))
        return bool(np.linalg.norm(self.project(x) - x) <= tol)


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the GME-MI model.

    ``BtB`` must keep ``Q = A^T A - lam L^T BtB L`` positive semidefinite;
    construction raises :class:`ConvexityError` otherwise (pass
    ``check_convexity=False`` to build deliberately invalid instances).
    """

    A: np.ndarray
    y: np.ndarray
    L: np.ndarray
    lam: float
    seed: SeedFunction
    BtB: np.ndarray
    constraint: Constraint = field(default_factory=Constraint.whole_space)
    check_convexity: bool = True

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        y = as_vector(self.y, "y")
        L = as_matrix(self.L, "L")
        BtB = as_matrix(self.BtB, "BtB")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "BtB", BtB)
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        d, n = A.shape
        if y.shape != (d,):
            raise ValueError("y must have one entry per row of A")
        if L.shape[1] != n:
            raise ValueError("L must have as many columns as A")
        if L.shape[0] != self.seed.m:
            raise ValueError(f"L has {L.shape[0]} rows, seed expects m={self.seed.m}")
        if BtB.shape != (L.shape[0], L.shape[0]):
            raise ValueError("BtB must be m x m")
        if self.check_convexity:
            ok, lmin = verify_overall_convexity(self.Q, tol=1e-8 * max(1.0, np.abs(A).max() ** 2 * n))
            if not ok:
                raise ConvexityError(f"Q is not positive semidefinite (min eigenvalue {lmin:.3e})")

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def Q(self):
        Q = self.__dict__.get("_Q")
        if Q is None:
            Q = assemble_Q(self.A, self.L, self.BtB, self.lam)
            object.__setattr__(self, "_Q", Q)
        return Q

    @property
    def L_is_identity(self):
        L = self.L
        return L.shape[0] == L.shape[1] and np.array_equal(L, np.eye(L.shape[0]))

    def default_step_params(self, kappa=2.0, delta=1e-2):
        return select_step_params(self.A, self.L, self.seed.M, self.BtB, self.lam, kappa, delta)

    def p_metric(self, params: StepParams) -> PMetric:
        return build_p_metric(self.L, self.seed.M, self.BtB, params, self.lam)


BLOCKS = ("x", "sigma", "v", "tau", "r", "eta", "xi", "zeta")


@dataclass
class SolverState:
    """The eight-block iterate ``(x, sigma, v, tau, r, eta, xi, zeta)``."""

    x: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    tau: np.ndarray
    r: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    zeta: np.ndarray

    @classmethod
    def sizes_for(cls, spec: ProblemSpec):
        s = spec.seed
        return (spec.n, s.l, s.m, s.l, s.m, s.l, s.p, s.p)

    @classmethod
    def zeros(cls, spec: ProblemSpec):
        return cls(*(np.zeros(k) for k in cls.sizes_for(spec)))

    @classmethod
    def from_vector(cls, z, spec: ProblemSpec):
        sizes = cls.sizes_for(spec)
        z = np.asarray(z, dtype=float)
        if z.size != sum(sizes):
            raise ValueError("state vector has the wrong length")
        parts = np.split(z, np.cumsum(sizes)[:-1])
        return cls(*(p.copy() for p in parts))

    @classmethod
    def random(cls, spec: ProblemSpec, rng, scale=1.0):
        return cls.from_vector(scale * rng.standard_normal(sum(cls.sizes_for(spec))), spec)

    def to_vector(self):
        return np.concatenate([getattr(self, b) for b in BLOCKS])

    def copy(self):
        return SolverState(*(getattr(self, b).copy() for b in BLOCKS))


@dataclass
class Solution:
    x_star: np.ndarray
    iterations: int
    converged: bool
    final_residual: float
    state: SolverState
    history: Optional[list] = None
    wall_time: float = 0.0


class GMEMIOperator:
    """The averaged operator ``T``; calling it performs one update of all blocks.

    Everything that does not depend on the iterate (``Q``, ``A^T y``, ``L``
    products) is prepared once here.
    """

    def __init__(self, spec: ProblemSpec, params: StepParams, Q=None):
        self.spec = spec
        self.params = params
        self.Q = spec.Q if Q is None else np.asarray(Q, dtype=float)
        self.Aty = spec.A.T @ spec.y
        self.lam = spec.lam
        self.seed = spec.seed
        self.BtB = spec.BtB
        self.has_B = bool(np.any(spec.BtB))
        if spec.L_is_identity:
            self.Lv = lambda x: x
            self.Ltv = lambda r: r
        else:
            L = spec.L
            LT = np.ascontiguousarray(L.T)
            self.Lv = lambda x: L @ x
            self.Ltv = lambda r: LT @ r

    def __call__(self, z: SolverState) -> SolverState:
        g1, g2, g3, g4 = (self.params.gamma1, self.params.gamma2,
                          self.params.gamma3, self.params.gamma4)
        seed, lam = self.seed, self.lam
        x, sigma, v, tau, r, eta, xi, zeta = (z.x, z.sigma, z.v, z.tau, z.r, z.eta, z.xi, z.zeta)

        Bv = self.BtB @ v if self.has_B else 0.0
        grad = self.Q @ x - self.Aty + lam * self.Ltv(Bv + r)
        x_n = self.spec.constraint.project(x - g1 * grad)

        sigma_n = sigma - g2 * (eta + seed.Mtv(xi))

        u = self.Lv(2.0 * x_n - x)
        Bdiff = self.BtB @ (u - v) if self.has_B else 0.0
        v_n, tau_n = seed.prox_f(v + g3 * Bdiff, tau - g3 * seed.Mtv(zeta), g3)

        r_n, eta_n = seed.prox_f_conj(r + u, eta + 2.0 * sigma_n - sigma, 1.0)

        xi_n = seed.prox_g_conj(xi + seed.Mv(2.0 * sigma_n - sigma), 1.0)
        zeta_n = seed.prox_g_conj(zeta + g4 * seed.Mv(2.0 * tau_n - tau), g4)
        return SolverState(x_n, sigma_n, v_n, tau_n, r_n, eta_n, xi_n, zeta_n)


def apply_T(state: SolverState, spec: ProblemSpec, params: StepParams, Q=None) -> SolverState:
    """One application of the solver operator to ``state``."""
    return GMEMIOperator(spec, params, Q)(state)


def solve(
    spec: ProblemSpec,
    params: Optional[StepParams] = None,
    threshold=1e-4,
    max_iters=10000,
    x0: Optional[SolverState] = None,
    relaxation=1.0,
    record_history=False,
    stop_blocks="all",
) -> Solution:
    """Iterate ``z <- (1 - mu) z + mu T(z)`` until successive iterates are close.

    Parameters
    ----------
    spec : ProblemSpec
    params : StepParams, optional
        Defaults to :meth:`ProblemSpec.default_step_params`.
    threshold : float
        Stop once the Euclidean norm of ``z_{k+1} - z_k`` falls below this.
    max_iters : int
    x0 : SolverState, optional
        Initial point; all zeros by default.
    relaxation : float
        Krasnosel'skii-Mann parameter ``mu`` in ``(0, 1]``.
    record_history : bool
        Keep the per-iteration residuals in ``Solution.history``.
    stop_blocks : {"all", "x"}
        Which blocks enter the stopping norm.

    Returns
    -------
    Solution
        ``converged`` is False when ``max_iters`` was reached first.
    """
    if not 0 < relaxation <= 1:
        raise ValueError("relaxation must lie in (0, 1]")
    if stop_blocks not in ("all", "x"):
        raise ValueError("stop_blocks must be 'all' or 'x'")
    params = spec.default_step_params() if params is None else params
    T = GMEMIOperator(spec, params)
    z = SolverState.zeros(spec) if x0 is None else x0.copy()
    history = [] if record_history else None
    t0 = time.perf_counter()
    res = np.inf
    converged = False
    k = 0
    for k in range(1, max_iters + 1):
        zn = T(z)
        if relaxation != 1.0:
            zn = SolverState(*((1.0 - relaxation) * getattr(z, b) + relaxation * getattr(zn, b)
                               for b in BLOCKS))
        if stop_blocks == "all":
            res = np.sqrt(sum(float(np.sum((getattr(zn, b) - getattr(z, b)) ** 2)) for b in BLOCKS))
        else:
            res = float(np.linalg.norm(zn.x - z.x))
        z = zn
        if history is not None:
            history.append(res)
        if res < threshold:
            converged = True
            break
    return Solution(z.x.copy(), k, converged, res, z, history, time.perf_counter() - t0)


def evaluate_objective(spec: ProblemSpec, x, tol=1e-7, max_iter=100000):
    """``J(x) = 1/2 ||y - A x||^2 + lam Psi_B(L x)``, or ``inf`` outside ``C``.

    ``tol`` and ``max_iter`` go to the inner penalty evaluation.
    """
    x = as_vector(x, "x")
    if x.shape != (spec.n,):
        raise ValueError("x has the wrong length")
    if not spec.constraint.contains(x, 1e-12):
        return np.inf
    res = spec.y - spec.A @ x
    u = spec.L @ x
    if np.any(spec.BtB):
        pen = eval_gme_mi_penalty(spec.seed, spec.BtB, u, tol, max_iter)
    else:
        pen = eval_mi_penalty(spec.seed, u, tol, max_iter)
    return 0.5 * float(res @ res) + spec.lam * pen


def certify_inner_optimality(spec: ProblemSpec, solution: Solution, tol=1e-7, sigma=None):
    """Gap ``phi(u*, sigma*) - psi(u*)`` between the solver's latent block and the inner minimum.

    ``(u*, sigma*)`` is the pair ``prox_f(r + L x, eta + sigma)`` read off the
    final state. At a fixed point this equals ``(L x*, sigma*)`` exactly,
    and unlike the raw iterate it always lies in the domain of ``f``: the
    perspective in the LOP seed blows up along ``s ~ u^2`` near the origin,
    so the raw pair of an approximate solution is not a usable witness.
    Near a fixed point ``M sigma*`` can sit slightly outside an indicator
    constraint in ``g``; seeds with ``restore_latent`` first move ``sigma*``
    back into the domain. Pass ``sigma`` to certify another latent vector
    (e.g. a perturbed one) at the same ``u*``; it is used as given.
    Indicator constraints inside ``g`` are relaxed by ``tol``.

    Returns
    -------
    float
        Zero for seeds without latent variable.
    """
    seed = spec.seed
    if seed.l == 0:
        return 0.0
    st = solution.state
    u, sig = seed.prox_f(st.r + spec.L @ st.x, st.eta + st.sigma, 1.0)
    if sigma is not None:
        sig = np.asarray(sigma, dtype=float)
    elif seed.restore_latent is not None:
        sig = seed.restore_latent(sig)
    return seed.phi(u, sig, slack=tol) - eval_mi_penalty(seed, u, tol)


@dataclass
class AveragednessReport:
    trials: int
    alpha: float
    failures: int
    worst_margin: float
    nonexpansive_failures: int
    worst_ratio: float
    margins: list = field(default_factory=list)

    @property
    def passed(self):
        return self.failures == 0 and self.nonexpansive_failures == 0


def averagedness_check(spec: ProblemSpec, params: StepParams, trials=100, rng=None,
                       rel_slack=1e-8, scale=1.0, metric: Optional[PMetric] = None):
    """Empirically test that ``T`` is ``kappa/(2 kappa - 1)``-averaged in the ``P`` norm.

    For random pairs ``z1, z2`` checks
    ``||T z1 - T z2||_P^2 <= ||z1 - z2||_P^2 - ((1-a)/a) ||(I-T) z1 - (I-T) z2||_P^2``
    and plain nonexpansiveness. Violations are counted and reported, never raised.
    The margin is normalized by ``||z1 - z2||_P^2``; ``worst_margin < -rel_slack``
    counts as a failure.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    metric = spec.p_metric(params) if metric is None else metric
    T = GMEMIOperator(spec, params)
    a = params.averaging
    coef = (1.0 - a) / a
    failures = 0
    ne_fail = 0
    worst = np.inf
    worst_ratio = 0.0
    margins = []
    for _ in range(trials):
        z1 = SolverState.random(spec, rng, scale)
        z2 = SolverState.random(spec, rng, scale * rng.uniform(0.01, 1.0))
        v1, v2 = z1.to_vector(), z2.to_vector()
        t1, t2 = T(z1).to_vector(), T(z2).to_vector()
        dz = metric.p_norm(v1 - v2) ** 2
        if dz == 0.0:
            margins.append(0.0)
            continue
        dt = metric.p_norm(t1 - t2) ** 2
        dr = metric.p_norm((v1 - t1) - (v2 - t2)) ** 2
        margin = (dz - coef * dr - dt) / dz
        margins.append(margin)
        worst = min(worst, margin)
        ratio = np.sqrt(dt / dz)
        worst_ratio = max(worst_ratio, ratio)
        if margin < -rel_slack:
            failures += 1
        if ratio > 1.0 + 1e-9:
            ne_fail += 1
    return AveragednessReport(trials, a, failures, float(worst if worst < np.inf else 0.0),
                              ne_fail, float(worst_ratio), margins)
