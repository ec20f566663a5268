"""Pure numpy implementations of the hot kernels.

These mirror ``_core.pyx`` operation for operation and are used when the
compiled extension is unavailable (or when ``DSMBAYES_PURE_PYTHON=1``).
"""

import math

import numpy as np

SERIES_CUTOFF = 12.0
_SERIES_TERMS = 48
_RESCALE = 1e200


def _series(n, y):
    h = 0.5 * y
    t = np.ones_like(y)
    for i in range(1, n + 1):
        t = t * (h / i)
    total = t.copy()
    h2 = h * h
    for k in range(1, _SERIES_TERMS):
        t = -t * h2 / (k * (k + n))
        total += t
    return total


def _miller(n, y):
    # backward recurrence, normalised by J0 + 2*sum(J_2k) = 1
    top = max(n, int(math.ceil(float(y.max()))))
    m = 2 * ((top + 20 + int(math.sqrt(40.0 * top))) // 2)
    tox = 2.0 / y
    bjp = np.zeros_like(y)
    bj = np.ones_like(y)
    ans = np.zeros_like(y)
    acc = np.zeros_like(y)
    add = False
    for j in range(m, 0, -1):
        bjm = j * tox * bj - bjp
        bjp = bj
        bj = bjm
        big = np.abs(bj) > _RESCALE
        if big.any():
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            bj = bj * s
            bjp = bjp * s
            ans = ans * s
            acc = acc * s
        if add:
            acc += bj
        add = not add
        if j == n:
            ans = bjp.copy()
    if n == 0:
        ans = bj
    return ans / (2.0 * acc - bj)


def bessel_j_array(n, y):
    """J_n evaluated elementwise on a float64 array (no argument checks)."""
    y = np.asarray(y, dtype=np.float64)
    ay = np.abs(y)
    out = np.empty_like(ay)
    small = ay <= SERIES_CUTOFF
    if small.any():
        out[small] = _series(n, ay[small])
    if (~small).any():
        out[~small] = _miller(n, ay[~small])
    if n % 2 == 1:
        out = np.where(y < 0, -out, out)
    return out


def pcn_segment(gram, rhs, data_sq, inv_two_sigma2, state, misfit, beta,
                scale, normals, uniforms, step0, burn_in, thin, out, n_out):
    """Advance a pCN chain over one block of pre-drawn random numbers.

    ``state`` is updated in place.  Retained samples are written to
    ``out[n_out:]``.  Returns ``(accepted, misfit, n_out)``.
    """
    rho = math.sqrt(1.0 - beta * beta)
    step_scale = beta * scale
    accepted = 0
    for t in range(normals.shape[0]):
        prop = rho * state + step_scale * normals[t]
        g_new = inv_two_sigma2 * (data_sq - 2.0 * rhs.dot(prop) + prop.dot(gram.dot(prop)))
        if g_new <= misfit or uniforms[t] <= math.exp(misfit - g_new):
            state[:] = prop
            misfit = g_new
            accepted += 1
        step = step0 + t + 1
        if step > burn_in and (step - burn_in) % thin == 0:
            out[n_out] = state
            n_out += 1
    return accepted, misfit, n_out
