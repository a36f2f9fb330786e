"""TGV versus GME-TGV penalty values along the step-plus-ramp signal family."""

import csv
import math

import numpy as np

from ..linalg import as_matrix
from ..seeds import InnerSolveError, difference_matrix_1d, eval_gme_mi_penalty, eval_mi_penalty, make_tgv_seed
from .signals import gen_piecewise_linear

__all__ = ["CURVE_FIELDS", "penalty_curve", "write_curve_csv"]

CURVE_FIELDS = ("r", "s", "alpha", "tgv", "gme_tgv")


def penalty_curve(alpha=0.2, BtB="identity", r_grid=None, s=0.0, n=50, tol=1e-8):
    """Rows ``(r, s, alpha, tgv, gme_tgv)`` over ``r`` for the signal ``fig2(s, r)``.

    ``tgv`` is the TGV penalty of ``D_1d x`` and ``gme_tgv`` its enhanced
    version with the given ``B^T B`` (``"identity"`` or an explicit matrix).
    A row whose inner evaluation fails carries NaN in both value columns.
    """
    if r_grid is None:
        r_grid = np.linspace(0.0, 5.0, 51)
    m = n - 1
    seed = make_tgv_seed(m, alpha)
    if isinstance(BtB, str):
        if BtB != "identity":
            raise ValueError("BtB must be 'identity' or a matrix")
        BtB = np.eye(m)
    BtB = as_matrix(BtB, "BtB")
    D = difference_matrix_1d(n)
    rows = []
    for r in r_grid:
        u = D @ gen_piecewise_linear(n, "fig2", s=s, r=float(r))
        try:
            tgv = eval_mi_penalty(seed, u, tol)
            gme = eval_gme_mi_penalty(seed, BtB, u, tol)
        except InnerSolveError:
            tgv = gme = math.nan
        rows.append((float(r), float(s), float(alpha), float(tgv), float(gme)))
    return rows


def write_curve_csv(rows, out):
    """Write curve rows to a path or an open text file."""
    close = isinstance(out, str)
    fh = open(out, "w", newline="", encoding="utf-8") if close else out
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CURVE_FIELDS)
    for row in rows:
        w.writerow([repr(v) for v in row])
    if close:
        fh.close()
