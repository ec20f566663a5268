"""Truncated Fourier-Bessel expansion on a disc and the linear forward operator."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, DomainError
from .forward import DEFAULT_H, far_field_sums
from .geometry import Disc
from .sources import build_mesh, source_values_on
from .special import COSINE, SINE, DiscEigenfunction, bessel_j, bessel_zero

# operator meshes are rotated against data meshes so the two never coincide
OPERATOR_MESH_ROTATION = 0.5


@dataclass(frozen=True)
class BasisIndex:
    """Ordered ``(m, n, parity)`` triples of the truncated basis.

    All cosine terms come first (``m = 1..M`` outer, ``n = 0..N`` inner),
    then all sine terms (``m = 1..M`` outer, ``n = 1..N`` inner), giving
    ``(2N + 1) M`` entries.
    """

    M: int = 5
    N: int = 2

    def __post_init__(self):
        if self.M < 1 or self.N < 0:
            raise DomainError(f"basis needs M >= 1 and N >= 0, got M={self.M}, N={self.N}")

    @property
    def terms(self):
        cos = [(m, n, COSINE) for m in range(1, self.M + 1) for n in range(0, self.N + 1)]
        sin = [(m, n, SINE) for m in range(1, self.M + 1) for n in range(1, self.N + 1)]
        return cos + sin

    def __len__(self):
        return (2 * self.N + 1) * self.M

    def position(self, m, n, parity=COSINE):
        return self.terms.index((m, n, parity))

    def eigenfunctions(self, disc):
        return [DiscEigenfunction(m, n, p, disc) for m, n, p in self.terms]


@dataclass(frozen=True)
class CoefficientVector:
    values: np.ndarray
    basis: BasisIndex
    disc: Disc

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if len(v) != len(self.basis):
            raise ContractError(f"{len(v)} coefficients for a basis of {len(self.basis)}")
        object.__setattr__(self, "values", v)

    def __getitem__(self, key):
        return self.values[self.basis.position(*key)]


def basis_matrix(basis, disc, points):
    """``out[p, c] = Q_c(points[p])``; rows for points outside the disc are zero."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    r, theta = disc.local_polar(pts)
    inside = r <= disc.radius
    rho = np.where(inside, r / disc.radius, 0.0)
    out = np.zeros((len(pts), len(basis)))
    radial = {}
    for c, (m, n, parity) in enumerate(basis.terms):
        if (m, n) not in radial:
            q = bessel_zero(m, n)
            eps = 1.0 if n == 0 else 2.0
            norm = np.sqrt(eps / np.pi) / (disc.radius * bessel_j(n + 1, q))
            radial[m, n] = norm * bessel_j(n, q * rho)
        ang = np.cos(n * theta) if parity == COSINE else np.sin(n * theta)
        out[:, c] = np.where(inside, radial[m, n] * ang, 0.0)
    return out


def eval_f_be(coeffs, x):
    """``f_BE(x) = sum_c A_c Q_c(x)``, zero outside the disc."""
    x = np.asarray(x, dtype=np.float64)
    vals = basis_matrix(coeffs.basis, coeffs.disc, x) @ coeffs.values
    if x.ndim == 1:
        return float(vals[0])
    return vals.reshape(x.shape[:-1])


def operator_mesh(disc, h=DEFAULT_H):
    mesh = build_mesh(disc, h)
    c, s = np.cos(OPERATOR_MESH_ROTATION), np.sin(OPERATOR_MESH_ROTATION)
    centre = np.asarray(disc.center)
    v = (mesh.vertices - centre) @ np.array([[c, s], [-s, c]]) + centre
    return type(mesh)(v, mesh.triangles)


def project(source, basis, disc, mesh=None):
    """Fourier coefficients ``A_c = integral over the disc of f Q_c`` by midpoint quadrature."""
    if mesh is None:
        mesh = operator_mesh(disc)
    f = source_values_on(source, mesh)
    q = basis_matrix(basis, disc, mesh.centroids)
    return CoefficientVector((f * mesh.areas) @ q, basis, disc)


@dataclass(frozen=True)
class ForwardOperator:
    """Dense far-field operator; row ``j * I + i`` is direction ``i`` at wavenumber ``j``."""

    matrix: np.ndarray
    basis: BasisIndex
    disc: Disc
    angles: np.ndarray
    wavenumbers: np.ndarray

    def apply(self, coeffs):
        a = coeffs.values if isinstance(coeffs, CoefficientVector) else np.asarray(coeffs)
        if a.shape != (self.matrix.shape[1],):
            raise ContractError(f"coefficient length {a.shape} != {self.matrix.shape[1]}")
        return self.matrix @ a

    __call__ = apply


def assemble_forward_operator(basis, disc, angles, wavenumbers, mesh=None, threads=1):
    """Far field of every basis function at every (direction, wavenumber) pair."""
    if mesh is None:
        mesh = operator_mesh(disc)
    angles = np.asarray(getattr(angles, "angles", angles), dtype=np.float64)
    ks = np.asarray(wavenumbers, dtype=np.float64)
    weights = basis_matrix(basis, disc, mesh.centroids) * mesh.areas[:, None]
    sums = far_field_sums(mesh.centroids, weights, angles, ks, threads)
    matrix = sums.reshape(len(ks) * len(angles), len(basis))
    return ForwardOperator(matrix, basis, disc, angles, ks)


def save_coefficients(coeffs, path):
    b, d = coeffs.basis, coeffs.disc
    with Path(path).open("w") as fh:
        fh.write(f"# coefficients v1 M={b.M} N={b.N} center_x={d.center[0]!r} "
                 f"center_y={d.center[1]!r} radius={d.radius!r}\n")
        for (m, n, p), v in zip(b.terms, coeffs.values):
            fh.write(f"{m} {n} {p} {float(v)!r}\n")


def load_coefficients(path):
    with Path(path).open() as fh:
        header = fh.readline().split()
        rows = [ln.split() for ln in fh if ln.strip()]
    if header[:3] != ["#", "coefficients", "v1"]:
        raise ValueError(f"{path}: not a coefficients v1 file")
    fields = dict(item.split("=", 1) for item in header[3:])
    basis = BasisIndex(int(fields["M"]), int(fields["N"]))
    disc = Disc((float(fields["center_x"]), float(fields["center_y"])), float(fields["radius"]))
    lookup = {(int(m), int(n), p): float(v) for m, n, p, v in rows}
    if sorted(lookup) != sorted(basis.terms):
        raise ValueError(f"{path}: coefficient indices do not match M={basis.M}, N={basis.N}")
    return CoefficientVector([lookup[t] for t in basis.terms], basis, disc)
