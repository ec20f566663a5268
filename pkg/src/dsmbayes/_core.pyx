# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Bessel J_n on arrays and the pCN chain loop.

Algorithms match ``_fallback.py``; see that module for the reference code.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, fabs, ceil

cnp.import_array()

cdef double SERIES_CUTOFF = 12.0
cdef int SERIES_TERMS = 48
cdef double RESCALE = 1e200


cdef double _series(int n, double y) nogil:
    cdef double h = 0.5 * y
    cdef double t = 1.0
    cdef double total, h2
    cdef int i, k
    for i in range(1, n + 1):
        t = t * (h / i)
    total = t
    h2 = h * h
    for k in range(1, SERIES_TERMS):
        t = -t * h2 / (k * (k + n))
        total += t
    return total


cdef double _miller(int n, double y, int top) nogil:
    cdef int m = 2 * ((top + 20 + <int>sqrt(40.0 * top)) // 2)
    cdef double tox = 2.0 / y
    cdef double bjp = 0.0, bj = 1.0, bjm, ans = 0.0, acc = 0.0
    cdef bint add = False
    cdef int j
    for j in range(m, 0, -1):
        bjm = j * tox * bj - bjp
        bjp = bj
        bj = bjm
        if fabs(bj) > RESCALE:
            bj /= RESCALE
            bjp /= RESCALE
            ans /= RESCALE
            acc /= RESCALE
        if add:
            acc += bj
        add = not add
        if j == n:
            ans = bjp
    if n == 0:
        ans = bj
    return ans / (2.0 * acc - bj)


def bessel_j_array(int n, y):
    """J_n evaluated elementwise on a float64 array (no argument checks)."""
    cdef cnp.ndarray[double, ndim=1] flat = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t size = flat.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(size, dtype=np.float64)
    cdef double ymax = 0.0, ay, v
    cdef Py_ssize_t i
    cdef int top
    for i in range(size):
        ay = fabs(flat[i])
        if ay > SERIES_CUTOFF and ay > ymax:
            ymax = ay
    # same start order for every large argument, as the fallback does
    top = n if n > <int>ceil(ymax) else <int>ceil(ymax)
    with nogil:
        for i in range(size):
            ay = fabs(flat[i])
            if ay <= SERIES_CUTOFF:
                v = _series(n, ay)
            else:
                v = _miller(n, ay, top)
            if n % 2 == 1 and flat[i] < 0:
                v = -v
            out[i] = v
    return out.reshape(np.shape(y))


def pcn_segment(double[:, ::1] gram, double[::1] rhs, double data_sq,
                double inv_two_sigma2, double[::1] state, double misfit,
                double beta, double[::1] scale, double[:, ::1] normals,
                double[::1] uniforms, long step0, long burn_in, long thin,
                double[:, ::1] out, long n_out):
    """Advance a pCN chain over one block of pre-drawn random numbers.

    ``state`` is updated in place.  Retained samples are written to
    ``out[n_out:]``.  Returns ``(accepted, misfit, n_out)``.
    """
    cdef Py_ssize_t d = state.shape[0]
    cdef Py_ssize_t nsteps = normals.shape[0]
    cdef double rho = sqrt(1.0 - beta * beta)
    cdef double[::1] prop = np.empty(d, dtype=np.float64)
    cdef double[::1] hp = np.empty(d, dtype=np.float64)
    cdef double g_new, lin, quad, s
    cdef long accepted = 0, step
    cdef Py_ssize_t t, i, j
    with nogil:
        for t in range(nsteps):
            for i in range(d):
                prop[i] = rho * state[i] + (beta * scale[i]) * normals[t, i]
            lin = 0.0
            for i in range(d):
                lin += rhs[i] * prop[i]
            for i in range(d):
                s = 0.0
                for j in range(d):
                    s += gram[i, j] * prop[j]
                hp[i] = s
            quad = 0.0
            for i in range(d):
                quad += prop[i] * hp[i]
            g_new = inv_two_sigma2 * (data_sq - 2.0 * lin + quad)
            if g_new <= misfit or uniforms[t] <= exp(misfit - g_new):
                for i in range(d):
                    state[i] = prop[i]
                misfit = g_new
                accepted += 1
            step = step0 + t + 1
            if step > burn_in and (step - burn_in) % thin == 0:
                for i in range(d):
                    out[n_out, i] = state[i]
                n_out += 1
    return accepted, misfit, n_out
