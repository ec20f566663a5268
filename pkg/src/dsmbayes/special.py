"""Bessel functions of the first kind, their zeros, and disc Dirichlet eigenfunctions."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import DomainError
from .geometry import Disc

MAX_ORDER = 64
MAX_ARGUMENT = 200.0
MAX_ZERO_INDEX = 32
MAX_ZERO_ORDER = 32

_SCAN_STEP = np.pi / 4
_BISECT_TOL = 1e-13


def bessel_j(n, y):
    """Bessel function of the first kind ``J_n(y)`` for integer ``n``.

    Power series for ``|y| <= 12`` and Miller backward recurrence beyond.
    Accepts a scalar or an array ``y``; returns the same shape.

    Raises
    ------
    DomainError
        If ``n`` is not an integer in ``[0, 64]``, or ``y`` is non-finite or
        larger than 200 in magnitude.
    """
    if int(n) != n or not 0 <= n <= MAX_ORDER:
        raise DomainError(f"order n must be an integer in [0, {MAX_ORDER}], got {n}")
    arr = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("bessel_j argument must be finite")
    if arr.size and np.abs(arr).max() > MAX_ARGUMENT:
        raise DomainError(f"|y| must be <= {MAX_ARGUMENT}")
    out = _backend.bessel_j_array(int(n), np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@lru_cache(maxsize=None)
def _zeros_of_order(n, count=MAX_ZERO_INDEX):
    # sign-change scan on a pi/4 grid, then vectorised bisection
    hi = (count + n / 2.0 + 2.0) * np.pi + n + 1.0
    grid = np.arange(n + 1.0, hi, _SCAN_STEP)
    vals = bessel_j(n, grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size < count:
        raise RuntimeError(f"bracketing failed for J_{n}: found {idx.size} of {count} zeros")
    idx = idx[:count]
    a, b = grid[idx], grid[idx + 1]
    fa = vals[idx]
    while np.max(b - a) > _BISECT_TOL:
        mid = 0.5 * (a + b)
        if np.all((mid == a) | (mid == b)):
            break
        fm = bessel_j(n, mid)
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
    fa_abs = np.abs(bessel_j(n, a))
    fb_abs = np.abs(bessel_j(n, b))
    roots = np.where(fa_abs <= fb_abs, a, b)
    roots.setflags(write=False)
    return roots


def bessel_zero(m, n):
    """The ``m``-th positive zero ``q_mn`` of ``J_n`` (``1 <= m <= 32``, ``0 <= n <= 32``)."""
    if int(m) != m or not 1 <= m <= MAX_ZERO_INDEX:
        raise DomainError(f"zero index m must be in [1, {MAX_ZERO_INDEX}], got {m}")
    if int(n) != n or not 0 <= n <= MAX_ZERO_ORDER:
        raise DomainError(f"order n must be in [0, {MAX_ZERO_ORDER}], got {n}")
    return float(_zeros_of_order(int(n))[int(m) - 1])


@dataclass(frozen=True)
class BesselZeroTable:
    """Immutable table of ``q_mn`` for ``1 <= m <= max_m``, ``0 <= n <= max_n``."""

    max_m: int
    max_n: int
    entries: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.entries is None:
            table = {(m, n): bessel_zero(m, n)
                     for n in range(self.max_n + 1)
                     for m in range(1, self.max_m + 1)}
            object.__setattr__(self, "entries", table)

    def __getitem__(self, key):
        return self.entries[key]


COSINE = "cos"
SINE = "sin"


@dataclass(frozen=True)
class DiscEigenfunction:
    """Normalised Dirichlet eigenfunction of a disc.

    ``J_n(q_mn r / R) cos(n theta)`` (``parity="cos"``) or ``... sin(n theta)``
    (``parity="sin"``, requires ``n >= 1``), with polar coordinates taken
    about the disc center.  The factor is ``sqrt(eps_n / pi) / (R J_{n+1}(q_mn))``
    with ``eps_0 = 1`` and ``eps_n = 2`` otherwise, which gives unit L2 norm.
    The signed ``J_{n+1}`` is kept, so individual basis functions may come
    out with either sign.
    """

    m: int
    n: int
    parity: str
    disc: Disc

    def __post_init__(self):
        if self.parity not in (COSINE, SINE):
            raise DomainError(f"parity must be 'cos' or 'sin', got {self.parity!r}")
        if self.parity == SINE and self.n < 1:
            raise DomainError("sine eigenfunctions need n >= 1")
        if self.m < 1 or self.n < 0:
            raise DomainError(f"invalid indices m={self.m}, n={self.n}")

    @property
    def zero(self):
        return bessel_zero(self.m, self.n)

    @property
    def wavenumber(self):
        return self.zero / self.disc.radius

    @property
    def normalization(self):
        eps = 1.0 if self.n == 0 else 2.0
        return np.sqrt(eps / np.pi) / (self.disc.radius * bessel_j(self.n + 1, self.zero))

    def __call__(self, points):
        return eigenfunction_eval(self, points)


def eigenfunction_eval(e, x):
    """Evaluate ``e`` at point(s) ``x`` (shape ``(..., 2)``); zero outside the disc."""
    r, theta = e.disc.local_polar(x)
    inside = r <= e.disc.radius
    arg = np.where(inside, r, 0.0) * (e.zero / e.disc.radius)
    radial = bessel_j(e.n, arg)
    angular = np.cos(e.n * theta) if e.parity == COSINE else np.sin(e.n * theta)
    out = np.where(inside, e.normalization * radial * angular, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out
