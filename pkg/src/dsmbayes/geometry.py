from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Disc:
    """Closed disc ``B(center, radius)`` in the plane."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise DomainError(f"disc radius must be positive, got {self.radius}")
        cx, cy = (float(c) for c in self.center)
        object.__setattr__(self, "center", (cx, cy))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def area(self):
        return np.pi * self.radius**2

    def local_polar(self, points):
        """Polar coordinates ``(r, theta)`` of ``points`` relative to the center."""
        pts = np.asarray(points, dtype=np.float64)
        dx = pts[..., 0] - self.center[0]
        dy = pts[..., 1] - self.center[1]
        return np.hypot(dx, dy), np.arctan2(dy, dx)


@dataclass(frozen=True)
class Ellipse:
    """Axis-aligned ellipse with semi-axes ``a`` (along x1) and ``b`` (along x2)."""

    center: tuple = (0.0, 0.0)
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"ellipse semi-axes must be positive, got {self.a}, {self.b}")

    @property
    def area(self):
        return np.pi * self.a * self.b


@dataclass(frozen=True)
class Square:
    """Axis-aligned square ``[lo, hi]^2``."""

    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"square needs hi > lo, got [{self.lo}, {self.hi}]")

    @property
    def area(self):
        return (self.hi - self.lo) ** 2
