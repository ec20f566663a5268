"""Far-field data: synthetic generation by midpoint quadrature, noise, and file I/O."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, StateError
from .sources import build_mesh, source_values_on

CLEAN = "clean"
PERTURBED = "perturbed"

DETERMINISTIC = "deterministic"
RANDOM_UNIFORM = "random-uniform"

DEFAULT_H = 0.01
_CHUNK = 2048


@dataclass(frozen=True)
class Aperture:
    angles: np.ndarray
    name: str = None

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64).ravel()
        if a.size == 0:
            raise DomainError("aperture needs at least one direction")
        if np.any(np.diff(a) <= 0) or a[0] < 0 or a[-1] >= 2 * np.pi:
            raise DomainError("aperture angles must be strictly increasing in [0, 2*pi)")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self):
        return len(self.angles)

    @property
    def directions(self):
        return np.column_stack([np.cos(self.angles), np.sin(self.angles)])


_APERTURE_COUNTS = {"G1": 52, "G2": 26, "G3": 13}


def aperture(name):
    """Built-in apertures ``G1`` (full), ``G2`` (half), ``G3`` (quarter), step pi/26."""
    key = name.upper().replace("Γ", "G")
    if key not in _APERTURE_COUNTS:
        raise ConfigError(f"unknown aperture {name!r}; expected G1, G2 or G3")
    return Aperture(np.arange(_APERTURE_COUNTS[key]) * np.pi / 26, key)


def wavenumber_range(start, stop, step=1.0):
    """Inclusive ``start:step:stop`` grid."""
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n, dtype=np.float64)


@dataclass(frozen=True)
class FarFieldData:
    """Far-field samples ``values[i, j] = u_inf(x_i, k_j)``."""

    values: np.ndarray
    aperture: Aperture
    wavenumbers: np.ndarray
    noise_tag: str = CLEAN

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        k = np.asarray(self.wavenumbers, dtype=np.float64).ravel()
        if v.shape != (len(self.aperture), len(k)):
            raise DomainError(f"data shape {v.shape} does not match "
                              f"{len(self.aperture)} directions x {len(k)} wavenumbers")
        if not np.all(np.isfinite(v)):
            raise DomainError("far-field data contains non-finite entries")
        if self.noise_tag not in (CLEAN, PERTURBED):
            raise DomainError(f"unknown noise tag {self.noise_tag!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "wavenumbers", k)

    @property
    def shape(self):
        return self.values.shape

    def vector(self):
        """Wavenumber-major flattening: entry ``j * I + i``."""
        return self.values.T.ravel()

    def select(self, wavenumbers):
        """Columns for the given wavenumbers (each must be present)."""
        idx = []
        for k in np.atleast_1d(wavenumbers):
            hit = np.nonzero(np.isclose(self.wavenumbers, k, rtol=0, atol=1e-12))[0]
            if hit.size == 0:
                raise ConfigError(f"wavenumber {k} not present in data")
            idx.append(hit[0])
        return replace(self, values=self.values[:, idx], wavenumbers=self.wavenumbers[idx])


def far_field_sums(points, weights, angles, wavenumbers, threads=1):
    """``out[j, i, c] = sum_T exp(-i k_j x_i . y_T) weights[T, c]``.

    Triangles are processed in fixed-size chunks whose partial sums are
    reduced in chunk order, so the result does not depend on ``threads``.
    """
    points = np.asarray(points, dtype=np.float64)
    w = np.asarray(weights)
    if w.ndim == 1:
        w = w[:, None]
    ks = np.asarray(wavenumbers, dtype=np.float64)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    starts = list(range(0, len(points), _CHUNK))

    def partial(lo):
        phase = points[lo:lo + _CHUNK] @ dirs.T
        wc = w[lo:lo + _CHUNK]
        block = np.empty((len(ks), len(dirs), w.shape[1]), dtype=np.complex128)
        for j, k in enumerate(ks):
            block[j] = np.exp(-1j * k * phase).T @ wc
        return block

    if threads and threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(partial, starts))
    else:
        parts = [partial(lo) for lo in starts]
    out = np.zeros((len(ks), len(dirs), w.shape[1]), dtype=np.complex128)
    for p in parts:
        out += p
    return out


def far_field(mesh, source, k, theta):
    """Single far-field value ``sum_T exp(-i k x.y_T) f(y_T) |T|`` for direction ``theta``."""
    if not k > 0:
        raise DomainError(f"wavenumber must be positive, got {k}")
    f = source_values_on(source, mesh)
    xhat = np.array([np.cos(theta), np.sin(theta)])
    return complex(np.sum(np.exp(-1j * k * (mesh.centroids @ xhat)) * f * mesh.areas))


def source_mesh(source, h=DEFAULT_H):
    """Mesh used for synthetic data: the source's own mesh, or one of its data region."""
    if source.mesh is not None and source.samples is not None:
        return source.mesh
    if source.data_region is None:
        raise ConfigError("source has no support region to mesh")
    return build_mesh(source.data_region, h)


def generate_dataset(source, aperture, wavenumbers, h=DEFAULT_H, mesh=None, threads=1):
    """Clean far-field data for every (direction, wavenumber) pair."""
    ks = np.asarray(wavenumbers, dtype=np.float64).ravel()
    if ks.size == 0:
        raise DomainError("wavenumber list is empty")
    if np.any(ks <= 0):
        raise DomainError("wavenumbers must be positive")
    if mesh is None:
        mesh = source_mesh(source, h)
    weights = source_values_on(source, mesh) * mesh.areas
    sums = far_field_sums(mesh.centroids, weights, aperture.angles, ks, threads)
    return FarFieldData(sums[:, :, 0].T.copy(), aperture, ks, CLEAN)


def perturb(data, level=0.03, mode=DETERMINISTIC, rng=None):
    """Add ``level * (max Re u + i max Im u)`` per wavenumber to every direction.

    The maxima are taken over directions at each wavenumber.  In
    ``random-uniform`` mode the shift is multiplied entrywise by independent
    Uniform(-1, 1) draws from ``rng`` (a ``numpy.random.Generator`` or seed).
    """
    if data.noise_tag != CLEAN:
        raise StateError("data is already perturbed")
    u = data.values
    shift = level * (u.real.max(axis=0) + 1j * u.imag.max(axis=0))
    if mode == DETERMINISTIC:
        noisy = u + shift[None, :]
    elif mode == RANDOM_UNIFORM:
        rng = np.random.default_rng(rng)
        noisy = u + shift[None, :] * rng.uniform(-1.0, 1.0, size=u.shape)
    else:
        raise ConfigError(f"unknown noise mode {mode!r}")
    return replace(data, values=noisy, noise_tag=PERTURBED)


def save_farfield(data, path):
    """``# farfield v1 I=.. J=.. noise=..`` then ``k theta re im`` lines, k-major."""
    i_count, j_count = data.shape
    kk, tt = np.meshgrid(data.wavenumbers, data.aperture.angles, indexing="ij")
    vals = data.values.T
    table = np.column_stack([kk.ravel(), tt.ravel(), vals.real.ravel(), vals.imag.ravel()])
    with Path(path).open("w") as fh:
        fh.write(f"# farfield v1 I={i_count} J={j_count} noise={data.noise_tag}\n")
        np.savetxt(fh, table, fmt="%.17g")


def load_farfield(path, name=None):
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        body = fh.read()
    if len(header) != 6 or header[:3] != ["#", "farfield", "v1"]:
        raise ValueError(f"{path}: not a farfield v1 file")
    fields = dict(item.split("=", 1) for item in header[3:])
    i_count, j_count = int(fields["I"]), int(fields["J"])
    rows = np.array([ln.split() for ln in body.splitlines() if ln.strip()], dtype=np.float64)
    if rows.shape != (i_count * j_count, 4):
        raise ValueError(f"{path}: expected {i_count * j_count} rows of 4 columns, "
                         f"found shape {rows.shape}")
    grid = rows.reshape(j_count, i_count, 4)
    ks = grid[:, 0, 0]
    angles = grid[0, :, 1]
    if not (np.all(grid[:, :, 0] == ks[:, None]) and np.all(grid[:, :, 1] == angles[None, :])):
        raise ValueError(f"{path}: rows do not form a k-major (k, theta) grid")
    values = (grid[:, :, 2] + 1j * grid[:, :, 3]).T
    return FarFieldData(values, Aperture(angles, name), ks, fields["noise"])
