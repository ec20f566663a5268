"""Ground-truth sources, triangle meshes of their supports, and midpoint quadrature."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import Disc, Ellipse, Square
from .special import COSINE, DiscEigenfunction, eigenfunction_eval

# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    centroids: np.ndarray = field(init=False, repr=False)
    areas: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64)
        t = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 2 or t.ndim != 2 or t.shape[1] != 3:
            raise DomainError("mesh needs (V, 2) vertices and (T, 3) triangles")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise DomainError("triangle index out of range")
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        cross = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) \
            - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
        for name, value in (("vertices", v), ("triangles", t),
                            ("centroids", (p0 + p1 + p2) / 3.0),
                            ("areas", 0.5 * np.abs(cross))):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def __len__(self):
        return len(self.triangles)

    @property
    def h(self):
        """Longest edge length."""
        v, t = self.vertices, self.triangles
        edges = [v[t[:, i]] - v[t[:, (i + 1) % 3]] for i in range(3)]
        return float(max(np.hypot(e[:, 0], e[:, 1]).max() for e in edges))

    @property
    def area(self):
        return float(self.areas.sum())


def _stitch(inner, outer):
    """Triangulate the annulus between two closed rings of vertex indices.

    Both rings start at angle 0 with evenly spaced vertices, so angular order
    can be compared exactly through integer cross-multiplication.
    """
    na, nb = len(inner), len(outer)
    keys = np.concatenate([np.arange(1, na + 1) * nb, np.arange(1, nb + 1) * na])
    is_outer = np.concatenate([np.zeros(na, bool), np.ones(nb, bool)])
    order = np.lexsort((is_outer, keys))
    is_outer = is_outer[order]
    pos = np.concatenate([np.arange(1, na + 1), np.arange(1, nb + 1)])[order]
    # pointer into the other ring at the time of each event
    outer_done = np.cumsum(is_outer) - is_outer
    inner_done = np.cumsum(~is_outer) - ~is_outer
    tris = np.empty((na + nb, 3), dtype=np.int64)
    a = ~is_outer
    tris[a, 0] = inner[(pos[a] - 1) % na]
    tris[a, 1] = inner[pos[a] % na]
    tris[a, 2] = outer[outer_done[a] % nb]
    b = is_outer
    tris[b, 0] = outer[(pos[b] - 1) % nb]
    tris[b, 1] = outer[pos[b] % nb]
    tris[b, 2] = inner[inner_done[b] % na]
    return tris


def _unit_disc_mesh(h):
    """Concentric-ring triangulation of the unit disc with spacing about ``h``."""
    # 0.95 keeps the longest (diagonal) edge below 1.5 h
    rings = max(1, int(np.ceil(1.0 / (0.95 * h))))
    dr = 1.0 / rings
    verts = [np.zeros((1, 2))]
    ring_index = [np.array([0])]
    start = 1
    for level in range(1, rings + 1):
        r = level * dr
        count = max(6, int(np.ceil(2 * np.pi * r / dr)))
        ang = 2 * np.pi * np.arange(count) / count
        verts.append(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))
        ring_index.append(np.arange(start, start + count))
        start += count
    tris = []
    first = ring_index[1]
    tris.append(np.column_stack([np.zeros(len(first), np.int64), first, np.roll(first, -1)]))
    for lo, hi in zip(ring_index[1:-1], ring_index[2:]):
        tris.append(_stitch(lo, hi))
    return np.vstack(verts), np.vstack(tris)


def build_mesh(region, h_target):
    """Triangulate a ``Disc``, ``Ellipse`` or ``Square`` with edges near ``h_target``."""
    if not h_target > 0:
        raise DomainError(f"h_target must be positive, got {h_target}")
    if isinstance(region, Disc):
        v, t = _unit_disc_mesh(h_target / region.radius)
        v = v * region.radius + np.asarray(region.center)
    elif isinstance(region, Ellipse):
        v, t = _unit_disc_mesh(h_target / max(region.a, region.b))
        v = v * np.array([region.a, region.b]) + np.asarray(region.center, dtype=float)
    elif isinstance(region, Square):
        n = max(1, int(np.ceil((region.hi - region.lo) / h_target)))
        x = np.linspace(region.lo, region.hi, n + 1)
        gx, gy = np.meshgrid(x, x, indexing="ij")
        v = np.column_stack([gx.ravel(), gy.ravel()])
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        p = (i * (n + 1) + j).ravel()
        t = np.vstack([np.column_stack([p, p + n + 1, p + n + 2]),
                       np.column_stack([p, p + n + 2, p + 1])])
    else:
        raise DomainError(f"cannot mesh region of type {type(region).__name__}")
    return TriangleMesh(v, t)


def quadrature(mesh, g):
    """Midpoint rule ``sum_T g(y_T) |T|``.

    ``g`` is a callable on an ``(T, 2)`` array of centroids, or an array of
    centroid values.
    """
    values = g(mesh.centroids) if callable(g) else np.asarray(g)
    return np.sum(values * mesh.areas)


def save_mesh(mesh, path):
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{len(mesh.vertices)} {len(mesh.triangles)}\n")
        np.savetxt(fh, mesh.vertices, fmt="%.17g")
        np.savetxt(fh, mesh.triangles, fmt="%d")


def load_mesh(path):
    with Path(path).open() as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad mesh header")
        nv, nt = int(header[0]), int(header[1])
        lines = fh.read().split("\n")
    rows = [ln.split() for ln in lines if ln.strip()]
    if len(rows) != nv + nt:
        raise ValueError(f"{path}: expected {nv + nt} data lines, found {len(rows)}")
    verts = np.array(rows[:nv], dtype=np.float64).reshape(nv, 2)
    tris = np.array(rows[nv:], dtype=np.int64).reshape(nt, 3)
    return TriangleMesh(verts, tris)


# ---------------------------------------------------------------------------
# sources

EIGENMODE = "eigenmode"
PARABOLOID = "paraboloid"
GAUSSIAN = "gaussian"
ELLIPTIC_QUARTIC = "elliptic_quartic"
UNIT_DISC = "unit_disc"
CUSTOM = "custom"

KINDS = (EIGENMODE, PARABOLOID, GAUSSIAN, ELLIPTIC_QUARTIC, UNIT_DISC, CUSTOM)


@dataclass(frozen=True)
class SourceSpec:
    """Declarative description of a source ``f``.

    ``support`` is the region outside which ``f`` vanishes (or is negligible);
    ``data_region`` is the region meshed for synthetic data.  Custom sources
    carry either ``func`` (a callable on ``(..., 2)`` arrays) or a ``mesh``
    plus per-triangle ``samples``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    support: object = None
    data_region: object = None
    func: object = field(default=None, compare=False)
    mesh: object = field(default=None, compare=False, repr=False)
    samples: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if self.data_region is None:
            object.__setattr__(self, "data_region", self.support)

    def __call__(self, x):
        return evaluate_source(self, x)


def example_source(number):
    """One of the five built-in sources (``number`` in 1..5)."""
    b09 = Disc((0.0, 0.0), 0.9)
    if number == 1:
        return SourceSpec(EIGENMODE, {"amplitude": 3.0, "m": 1, "n": 1, "radius": 0.9}, b09)
    if number == 2:
        return SourceSpec(PARABOLOID, {}, b09)
    if number == 3:
        return SourceSpec(GAUSSIAN, {}, Disc((0.0, 0.0), 0.7471), Disc((0.0, 0.0), 1.5))
    if number == 4:
        return SourceSpec(ELLIPTIC_QUARTIC, {}, Ellipse((0.0, 0.0), 0.9, 1.08))
    if number == 5:
        return SourceSpec(UNIT_DISC, {}, b09)
    raise ConfigError(f"example must be 1..5, got {number}")


def custom_source(func=None, *, mesh=None, samples=None, support=None):
    if func is None and (mesh is None or samples is None):
        raise ConfigError("custom source needs a callable or mesh samples")
    if func is None:
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape != (len(mesh),):
            raise ConfigError(f"expected {len(mesh)} samples, got shape {samples.shape}")
    return SourceSpec(CUSTOM, {}, support, func=func, mesh=mesh, samples=samples)


def evaluate_source(s, x):
    """Evaluate source ``s`` at point(s) ``x`` of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=np.float64)
    x1, x2 = x[..., 0], x[..., 1]
    rr = x1 * x1 + x2 * x2
    if s.kind == EIGENMODE:
        p = s.params
        e = DiscEigenfunction(p["m"], p["n"], p.get("parity", COSINE), Disc((0.0, 0.0), p["radius"]))
        out = p["amplitude"] * np.asarray(eigenfunction_eval(e, x))
    elif s.kind == PARABOLOID:
        out = np.where(rr <= 0.81, 2.0 * (0.81 - rr), 0.0)
    elif s.kind == GAUSSIAN:
        out = 5.0 * np.exp(-45.0 * x1 * x1 - 30.0 * x2 * x2)
    elif s.kind == ELLIPTIC_QUARTIC:
        ee = x1 * x1 + (x2 / 1.2) ** 2
        out = np.where(ee <= 0.81, 15.0 * x1 * x2 * (0.81 - ee), 0.0)
    elif s.kind == UNIT_DISC:
        out = np.where(rr <= 0.81, 1.0, 0.0)
    elif s.func is not None:
        out = np.asarray(s.func(x), dtype=np.float64)
    elif s.samples is not None:
        out = _nearest_sample(s, x)
    else:
        raise ConfigError("custom source has no callable or sample payload")
    if out.ndim == 0:
        return float(out)
    return out


def _nearest_sample(s, x):
    # piecewise constant on the sample mesh; zero farther than h from any centroid
    pts = x.reshape(-1, 2)
    cent = s.mesh.centroids
    h = s.mesh.h
    out = np.empty(len(pts))
    for lo in range(0, len(pts), 256):
        chunk = pts[lo:lo + 256]
        d2 = ((chunk[:, None, :] - cent[None, :, :]) ** 2).sum(-1)
        k = d2.argmin(axis=1)
        near = d2[np.arange(len(chunk)), k] <= h * h
        out[lo:lo + 256] = np.where(near, s.samples[k], 0.0)
    return out.reshape(x.shape[:-1])


def source_values_on(s, mesh):
    """Source values at the centroids of ``mesh`` (exact samples for mesh-backed sources)."""
    if s.kind == CUSTOM and s.func is None and s.mesh is mesh:
        return np.asarray(s.samples)
    return np.asarray(evaluate_source(s, mesh.centroids))
