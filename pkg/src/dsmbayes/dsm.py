"""Direct sampling: multi-frequency indicator over a sampling grid and disc estimation."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, ThresholdError
from .geometry import Disc

ORIGIN = "origin"
CENTROID = "centroid"

COHERENT = "coherent"
INCOHERENT = "incoherent"

_CHUNK = 1024


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform ``count x count`` lattice on ``[lo, hi]^2``, endpoints included."""

    lo: float = -4.0
    hi: float = 4.0
    count: int = 81

    def __post_init__(self):
        if not self.hi > self.lo or self.count < 2:
            raise DomainError("sampling grid needs hi > lo and count >= 2")

    @property
    def axis(self):
        return np.linspace(self.lo, self.hi, self.count)

    @property
    def spacing(self):
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def points(self):
        """``(count, count, 2)`` array; ``points[a, b] = (axis[a], axis[b])``."""
        gx, gy = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([gx, gy], axis=-1)


@dataclass(frozen=True)
class IndicatorField:
    """Indicator values on a grid.

    ``values`` are divided by ``raw_max`` when the field was built with
    ``normalize=True`` (the default), so the maximum is exactly 1.
    """

    grid: SamplingGrid
    values: np.ndarray
    raw_max: float = None


def _indicator_many(points, data, form=COHERENT):
    u = data.values
    dirs = data.aperture.directions
    u_norm = np.sqrt(np.sum(np.abs(u) ** 2, axis=0))
    if not np.any(u_norm > 0):
        raise DomainError("indicator undefined: far-field data is zero at every wavenumber")
    if form not in (COHERENT, INCOHERENT):
        raise ConfigError(f"unknown indicator form {form!r}")
    phase = points @ dirs.T
    coherent = np.zeros(len(points), dtype=np.complex128)
    incoherent = np.zeros(len(points))
    den = np.zeros(len(points))
    for j, k in enumerate(data.wavenumbers):
        if u_norm[j] == 0:
            continue
        phi = np.exp(-1j * k * phase)
        corr = np.conj(phi) @ u[:, j]
        coherent += corr
        incoherent += np.abs(corr)
        den += u_norm[j] * np.sqrt(np.sum(np.abs(phi) ** 2, axis=1))
    num = np.abs(coherent) if form == COHERENT else incoherent
    # Cauchy-Schwarz gives <= 1; rounding can overshoot by an ulp in the equality case
    return np.minimum(num / den, 1.0)


def indicator(x_p, data, form=COHERENT):
    """Normalised correlation of the data with the point-source far field at ``x_p``.

    ``coherent`` takes the modulus of the correlation summed over
    wavenumbers; ``incoherent`` sums the per-wavenumber moduli.  Either way
    the value lies in ``[0, 1]`` by Cauchy-Schwarz.
    """
    pts = np.asarray(x_p, dtype=np.float64).reshape(1, 2)
    return float(_indicator_many(pts, data, form)[0])


def indicator_field(grid, data, form=COHERENT, normalize=True, threads=1):
    """Indicator at every grid point, divided by its maximum when ``normalize``."""
    pts = grid.points.reshape(-1, 2)
    starts = range(0, len(pts), _CHUNK)

    def run(lo):
        return _indicator_many(pts[lo:lo + _CHUNK], data, form)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(lo) for lo in starts]
    values = np.concatenate(parts).reshape(grid.count, grid.count)
    raw_max = float(values.max())
    if normalize and raw_max > 0:
        values = values / raw_max
    return IndicatorField(grid, values, raw_max)


def _superlevel(field, gamma, mode):
    vals = field.values
    mask = vals >= gamma
    if not mask.any():
        raise ThresholdError(f"no sampling point has I >= {gamma}; field max is {vals.max():.6g}")
    pts = field.grid.points[mask]
    if mode == ORIGIN:
        center = np.zeros(2)
    elif mode == CENTROID:
        w = vals[mask]
        center = (w[:, None] * pts).sum(axis=0) / w.sum()
    else:
        raise ConfigError(f"unknown disc mode {mode!r}")
    return center, float(np.max(np.hypot(*(pts - center).T)))


def estimate_disc(field, gamma, mode=ORIGIN):
    """Disc covering the super-level set ``{I >= gamma}``.

    ``origin`` mode centres the disc at the origin with radius
    ``max ||x_p||``; ``centroid`` mode centres it at the indicator-weighted
    centroid of the super-level set.
    """
    center, radius = _superlevel(field, gamma, mode)
    return Disc(tuple(center), radius)


def gamma_sweep(field, gammas, mode=ORIGIN):
    """``[(gamma, radius)]`` for each cutoff, sorted by gamma; ``None`` radius when empty.

    Radii may be zero here (a single point at the centre), unlike a :class:`Disc`.
    """
    rows = []
    for g in sorted(gammas):
        try:
            rows.append((g, _superlevel(field, g, mode)[1]))
        except ThresholdError:
            rows.append((g, None))
    return rows


def save_indicator(field, path):
    pts = field.grid.points.reshape(-1, 2)
    table = np.column_stack([pts, field.values.ravel()])
    np.savetxt(path, table, fmt="%.17g", delimiter=", ", header="x, y, I", comments="")


def save_disc_summary(disc, gamma, path):
    with Path(path).open("w") as fh:
        fh.write("gamma, center_x, center_y, radius\n")
        fh.write(f"{float(gamma)!r}, {disc.center[0]!r}, {disc.center[1]!r}, {disc.radius!r}\n")


def load_indicator(path):
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    count = int(round(np.sqrt(len(table))))
    if count * count != len(table):
        raise ValueError(f"{path}: indicator table is not a square grid")
    axis = table[::count, 0]
    grid = SamplingGrid(axis[0], axis[-1], count)
    return IndicatorField(grid, table[:, 2].reshape(count, count))
