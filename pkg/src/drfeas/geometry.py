"""Half-space and hyperplane geometry: distances, projectors, reflectors.

Points are 1-D numpy arrays of finite floats.  Normals are normalized at
construction so the closed-form formulas

    P_L(x) = x - (<a,x> - b) a        R_L(x) = x - 2 (<a,x> - b) a

apply directly; the half-space versions are the piecewise variants that
fix interior points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "HalfSpace",
    "Hyperplane",
    "as_point",
    "dist_halfspace",
    "dist_hyperplane",
    "project_halfspace",
    "project_hyperplane",
    "reflect_halfspace",
    "reflect_hyperplane",
]

# Default absolute tolerance for half-space membership tests.  Runs override
# it through SolverConfig.eps_h; it drives the stopping rule so it is kept
# explicit rather than buried in comparisons.
DEFAULT_MEMBERSHIP_TOL = 1e-9

# A nonzero normal shorter than this is treated as zero and rejected.
_ZERO_NORMAL_TOL = 1e-300


class DimensionMismatchError(ValueError):
    """Operands live in different ambient dimensions."""


def as_point(coords, dim: int | None = None) -> np.ndarray:
    """Validate and return coords as a 1-D float array.

    Rejects empty input, non-finite coordinates, and (when ``dim`` is
    given) dimension mismatch.
    """
    p = np.asarray(coords, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise ValueError(f"point must be 1-D, got shape {p.shape}")
    if p.size == 0:
        raise ValueError("point must have dimension >= 1")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and p.size != dim:
        raise DimensionMismatchError(
            f"expected dimension {dim}, got {p.size}"
        )
    return p


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-space {x : <a,x> <= b} with unit normal a.

    Any nonzero input normal is normalized and b is rescaled by the same
    factor, so (t*a, t*b) for t > 0 describes the same object.
    """

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = as_point(self.a)
        norm = float(np.linalg.norm(a))
        if norm < _ZERO_NORMAL_TOL:
            raise ValueError("half-space normal must be nonzero")
        a = a / norm
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b) / norm)

    @property
    def dim(self) -> int:
        return self.a.size

    def value(self, x: np.ndarray) -> float:
        """Signed offset <a,x> - b (positive outside)."""
        x = as_point(x, self.dim)
        return float(self.a @ x - self.b)

    def distance(self, x: np.ndarray) -> float:
        return max(0.0, self.value(x))

    def contains(self, x: np.ndarray, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
        return self.value(x) <= tol

    def project(self, x: np.ndarray) -> np.ndarray:
        v = self.value(x)
        if v <= 0.0:
            return np.array(x, dtype=float)
        return as_point(x) - v * self.a

    def reflect(self, x: np.ndarray) -> np.ndarray:
        v = self.value(x)
        if v <= 0.0:
            return np.array(x, dtype=float)
        return as_point(x) - 2.0 * v * self.a

    def boundary(self) -> "Hyperplane":
        return Hyperplane(self.a, self.b)

    def key(self) -> tuple:
        return ("HalfSpace", self.a.tobytes(), self.b)


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane {x : <a,x> = b} with unit normal a."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = as_point(self.a)
        norm = float(np.linalg.norm(a))
        if norm < _ZERO_NORMAL_TOL:
            raise ValueError("hyperplane normal must be nonzero")
        a = a / norm
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b) / norm)

    @property
    def dim(self) -> int:
        return self.a.size

    def value(self, x: np.ndarray) -> float:
        x = as_point(x, self.dim)
        return float(self.a @ x - self.b)

    def distance(self, x: np.ndarray) -> float:
        return abs(self.value(x))

    def contains(self, x: np.ndarray, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
        return abs(self.value(x)) <= tol

    def project(self, x: np.ndarray) -> np.ndarray:
        return as_point(x, self.dim) - self.value(x) * self.a

    def reflect(self, x: np.ndarray) -> np.ndarray:
        return as_point(x, self.dim) - 2.0 * self.value(x) * self.a

    def key(self) -> tuple:
        return ("Hyperplane", self.a.tobytes(), self.b)


def dist_halfspace(x, hs: HalfSpace) -> float:
    """Distance max(0, <a,x> - b) from x to the half-space."""
    return hs.distance(as_point(x))


def dist_hyperplane(x, hp: Hyperplane) -> float:
    """Distance |<a,x> - b| from x to the hyperplane."""
    return hp.distance(as_point(x))


def project_halfspace(x, hs: HalfSpace) -> np.ndarray:
    return hs.project(as_point(x, hs.dim))


def project_hyperplane(x, hp: Hyperplane) -> np.ndarray:
    return hp.project(as_point(x, hp.dim))


def reflect_halfspace(x, hs: HalfSpace) -> np.ndarray:
    return hs.reflect(as_point(x, hs.dim))


def reflect_hyperplane(x, hp: Hyperplane) -> np.ndarray:
    return hp.reflect(as_point(x, hp.dim))
