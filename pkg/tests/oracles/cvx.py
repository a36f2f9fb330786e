"""Conic-solver oracles for the latent minimizations (cvxpy + Clarabel)."""

import cvxpy as cp
import numpy as np


def _chain(m):
    return np.eye(m)[:-1] - np.eye(m)[1:]  # rows e_i - e_{i+1}


def _diff_t(m):
    # D_1d^T of shape (m+1) x m
    D = np.eye(m + 1)[1:] - np.eye(m + 1)[:-1]
    return D.T


def _lop_terms(v, s, alpha):
    m = s.shape[0]
    f = sum(0.5 * cp.quad_over_lin(v[i], s[i]) for i in range(m)) + 0.5 * cp.sum(s)
    return f, [cp.norm1(_chain(m) @ s) <= alpha]


def _tgv_terms(v, s, alpha):
    m = s.shape[0]
    return alpha * cp.norm1(v - s) + (1 - alpha) * cp.norm1(_diff_t(m) @ s), []


_TERMS = {"lop": _lop_terms, "tgv": _tgv_terms}


def psi(kind, u, alpha):
    """``min_s phi(u, s)`` for the LOP or TGV seed."""
    u = np.asarray(u, dtype=float)
    s = cp.Variable(u.size)
    obj, cons = _TERMS[kind](u, s, alpha)
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return float(prob.value)


def envelope(kind, u, alpha, BtB):
    """``min_{v, s} phi(v, s) + 1/2 (u - v)^T BtB (u - v)``."""
    u = np.asarray(u, dtype=float)
    v = cp.Variable(u.size)
    s = cp.Variable(u.size)
    obj, cons = _TERMS[kind](v, s, alpha)
    w, V = np.linalg.eigh(0.5 * (BtB + BtB.T))
    F = (V * np.sqrt(np.maximum(w, 0.0))).T  # F^T F = BtB
    prob = cp.Problem(cp.Minimize(obj + 0.5 * cp.sum_squares(F @ (u - v))), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return float(prob.value)


def lop_regression(A, y, lam, alpha):
    """``argmin_x 1/2 ||y - A x||^2 + lam psi_LOP(x)`` by a joint conic solve over ``(x, s)``."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    x = cp.Variable(n)
    s = cp.Variable(n)
    pen, cons = _lop_terms(x, s, alpha)
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(y - A @ x) + lam * pen), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return np.asarray(x.value)
