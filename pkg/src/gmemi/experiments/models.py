"""The model roster: which seed, ``L`` and ``B^T B`` each named model uses."""

from dataclasses import dataclass

import numpy as np

from ..design import design_B_identity_L, design_BtB_difference_L
from ..prox import GroupPartition
from ..seeds import difference_matrix_1d, make_lop_seed, make_plain_seed, make_tgv_seed
from ..solver import Constraint, ProblemSpec

__all__ = ["MODELS", "ModelInfo", "model_info", "build_problem", "parse_constraint"]


@dataclass(frozen=True)
class ModelInfo:
    name: str
    family: str  # lop, l21, l1, tgv, tv
    enhanced: bool  # GME variant (uses theta) or its convex counterpart
    difference: bool  # L = D_1d instead of I


MODELS = {}
for _fam, _diff in (("lop", False), ("l21", False), ("l1", False), ("tgv", True), ("tv", True)):
    MODELS[f"gme-{_fam}"] = ModelInfo(f"gme-{_fam}", _fam, True, _diff)
    MODELS[_fam] = ModelInfo(_fam, _fam, False, _diff)


def model_info(name) -> ModelInfo:
    try:
        return MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


def parse_constraint(text):
    """``"whole"``, ``"box"`` (``[-1, 1]``) or ``"box(lo, hi)"``."""
    if isinstance(text, Constraint):
        return text
    t = str(text).strip().lower().replace(" ", "")
    if t in ("whole", "none", "r^n", "rn"):
        return Constraint.whole_space()
    if t == "box":
        return Constraint.box(-1.0, 1.0)
    if t.startswith("box(") and t.endswith(")"):
        parts = t[4:-1].split(",")
        if len(parts) == 2:
            return Constraint.box(float(parts[0]), float(parts[1]))
    raise ValueError(f"cannot parse constraint {text!r}")


def build_problem(model, A, y, lam, alpha, theta, constraint=None) -> ProblemSpec:
    """Assemble the :class:`ProblemSpec` of a named model.

    * ``gme-lop`` / ``lop``: LOP seed with l1-ball radius ``alpha``, ``L = I``.
    * ``gme-l21`` / ``l21``: weighted l2/l1 norm on consecutive groups of
      length ``round(alpha)``, ``L = I``.
    * ``gme-l1`` / ``l1``: l1 norm, ``L = I`` (GMC for the enhanced one).
    * ``gme-tgv`` / ``tgv``: TGV seed with weight ``alpha``, ``L = D_1d``.
    * ``gme-tv`` / ``tv``: l1 norm of ``D_1d x`` (total variation).

    Enhanced models use ``B^T B = (theta/lam) A^T A`` for ``L = I`` and the
    difference-operator construction for ``L = D_1d``; the convex ones
    ignore ``theta`` and use ``B^T B = 0``.
    """
    info = model_info(model)
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    theta = float(theta) if info.enhanced else 0.0
    if info.difference:
        L = difference_matrix_1d(n)
        m = n - 1
        BtB = design_BtB_difference_L(A, lam, theta) if theta > 0 else np.zeros((m, m))
    else:
        L = np.eye(n)
        m = n
        if theta > 0:
            B = design_B_identity_L(A, lam, theta)
            BtB = B.T @ B
        else:
            BtB = np.zeros((m, m))

    if info.family == "lop":
        seed = make_lop_seed(m, alpha)
    elif info.family == "l21":
        block = int(round(alpha))
        if block < 1:
            raise ValueError("l21 models read alpha as the group length (>= 1)")
        seed = make_plain_seed(m, GroupPartition.contiguous(m, block))
    elif info.family == "tgv":
        seed = make_tgv_seed(m, alpha)
    else:
        seed = make_plain_seed(m)
    if constraint is None:
        constraint = Constraint.whole_space()
    return ProblemSpec(A, y, L, lam, seed, BtB, parse_constraint(constraint))
