# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled proximal kernels. Mirrors ``_kernels_py`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cbrt, cos, atan, fabs

cnp.import_array()

NAME = "cython"


cdef inline double _root(double a, double sigma, double gamma) noexcept nogil:
    cdef double p = 2.0 * sigma / gamma + 1.0
    cdef double q2 = a / gamma
    cdef double delta = q2 * q2 + p * p * p / 27.0
    cdef double t, sq, fp
    if delta >= 0.0:
        sq = sqrt(delta)
        t = cbrt(q2 + sq) + cbrt(q2 - sq)
    else:
        t = 2.0 * sqrt(-p / 3.0) * cos(atan(gamma * sqrt(-delta) / a) / 3.0)
    fp = 3.0 * t * t + p
    if fp > 0.0:
        t = t - (t * t * t + p * t - 2.0 * q2) / fp
    return t


def cubic_positive_root(a, sigma, double gamma):
    cdef cnp.ndarray[double, ndim=1] av = np.ascontiguousarray(np.atleast_1d(a), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] sv = np.ascontiguousarray(
        np.broadcast_to(np.atleast_1d(sigma), (av.shape[0],)), dtype=np.float64)
    cdef Py_ssize_t i, n = av.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    for i in range(n):
        out[i] = _root(av[i], sv[i], gamma)
    if np.ndim(a) == 0:
        return out[0]
    return out


def perspective_prox(u, sigma, double gamma):
    cdef cnp.ndarray[double, ndim=1] uv = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    cdef cnp.ndarray[double, ndim=1] sv = np.ascontiguousarray(sigma, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef cnp.ndarray[double, ndim=1] uo = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] so = np.empty(n)
    cdef double ui, si, t
    with nogil:
        for i in range(n):
            ui = uv[i]
            si = sv[i]
            if 2.0 * gamma * si + ui * ui <= gamma * gamma:
                uo[i] = 0.0
                so[i] = 0.0
            elif ui == 0.0:
                uo[i] = 0.0
                so[i] = si - 0.5 * gamma
            else:
                t = _root(fabs(ui), si, gamma)
                if ui > 0.0:
                    uo[i] = ui - gamma * t
                else:
                    uo[i] = ui + gamma * t
                so[i] = si + 0.5 * gamma * (t * t - 1.0)
    return uo, so


cdef inline double _latent(double u, double a, double gamma) noexcept nogil:
    cdef double c = gamma - 2.0 * a
    cdef double s0 = -0.5 * c if c < 0.0 else 0.0
    cdef double rhs = gamma * u * u
    cdef double t, s, s_new, der
    cdef int k
    if rhs <= 0.0:
        return s0
    t = cbrt(0.5 * rhs)
    if s0 > 0.0 and 0.5 * rhs / (s0 * s0) < t:
        t = 0.5 * rhs / (s0 * s0)
    if c > 0.0 and sqrt(rhs / c) < t:
        t = sqrt(rhs / c)
    s = s0 + t
    for k in range(200):
        der = 2.0 * s * (3.0 * s + c)
        if der <= 0.0:
            break
        s_new = s - (s * s * (2.0 * s + c) - rhs) / der
        if s_new < s0:
            s_new = s0
        if fabs(s_new - s) <= 4e-16 * s_new:
            return s_new
        s = s_new
    return s


def perspective_latent_prox(u, a, double gamma):
    cdef cnp.ndarray[double, ndim=1] uv = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    cdef cnp.ndarray[double, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    with nogil:
        for i in range(n):
            out[i] = _latent(uv[i], av[i], gamma)
    return out


def project_l1_ball_sort(x, double alpha):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = xv.shape[0], rho = 0
    cdef double total = 0.0, cs = 0.0, theta = 0.0, a
    for i in range(n):
        total += fabs(xv[i])
    if total <= alpha:
        return xv.copy()
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n)
    if alpha <= 0.0:
        return out
    cdef cnp.ndarray[double, ndim=1] mu = np.sort(np.abs(xv))[::-1].copy()
    for i in range(n):
        cs += mu[i]
        if mu[i] * (i + 1) > cs - alpha:
            rho = i
            theta = (cs - alpha) / (i + 1.0)
    for i in range(n):
        a = fabs(xv[i]) - theta
        if a > 0.0:
            out[i] = a if xv[i] > 0.0 else -a
    return out


def project_l1_ball_pivot(x, double alpha):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t i, j, nv, nvt, k
    cdef double total = 0.0, rho, yn, a
    for i in range(n):
        total += fabs(xv[i])
    if total <= alpha:
        return xv.copy()
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n)
    if alpha <= 0.0:
        return out
    cdef cnp.ndarray[double, ndim=1] v = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] vt = np.empty(n)
    v[0] = fabs(xv[0])
    nv = 1
    nvt = 0
    rho = v[0] - alpha
    for i in range(1, n):
        yn = fabs(xv[i])
        if yn > rho:
            rho += (yn - rho) / (nv + 1)
            if rho > yn - alpha:
                v[nv] = yn
                nv += 1
            else:
                for j in range(nv):
                    vt[nvt] = v[j]
                    nvt += 1
                v[0] = yn
                nv = 1
                rho = yn - alpha
    for j in range(nvt):
        yn = vt[j]
        if yn > rho:
            v[nv] = yn
            nv += 1
            rho += (yn - rho) / nv
    while True:
        k = 0
        total = 0.0
        for j in range(nv):
            if v[j] > rho:
                v[k] = v[j]
                total += v[j]
                k += 1
        if k == nv:
            break
        nv = k
        rho = (total - alpha) / nv
    for i in range(n):
        a = fabs(xv[i]) - rho
        if a > 0.0:
            out[i] = a if xv[i] > 0.0 else -a
    return out


def soft_threshold(w, double thresh):
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t i, n = wv.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double a
    for i in range(n):
        a = fabs(wv[i]) - thresh
        if a > 0.0:
            out[i] = a if wv[i] > 0.0 else -a
        else:
            out[i] = 0.0
    return out


def group_shrink(w, indptr, indices, thresh):
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64).reshape(-1)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] th = np.ascontiguousarray(thresh, dtype=np.float64)
    cdef Py_ssize_t g, j, ng = ptr.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(wv.shape[0])
    cdef double nrm, k, scale
    for g in range(ng):
        nrm = 0.0
        for j in range(ptr[g], ptr[g + 1]):
            nrm += wv[idx[j]] * wv[idx[j]]
        nrm = sqrt(nrm)
        k = th[g]
        if k > 0.0 or nrm > 0.0:
            scale = 1.0 - k / (k if k > nrm else nrm)
        else:
            scale = 1.0
        for j in range(ptr[g], ptr[g + 1]):
            out[idx[j]] = scale * wv[idx[j]]
    return out
