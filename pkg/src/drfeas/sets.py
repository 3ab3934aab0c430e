"""Projectable sets Q and single-valued reflectable constraints.

Projectable sets may have multi-valued nearest-point maps; ``project_all``
returns every minimizer (within the tie tolerance) in a deterministic
order.  Reflectable constraints are convex with a single-valued projector,
used in place of the half-space in the cycling counter-examples.
"""

from __future__ import annotations

import abc
import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import HalfSpace, Hyperplane, as_point

__all__ = [
    "BinaryKnapsackSet",
    "CapExceededError",
    "DegenerateProjectionError",
    "DiagonalSet",
    "EmptySetError",
    "FinitePointSet",
    "PlanarCone",
    "ProductSet",
    "ProjectableSet",
    "ReflectableConstraint",
    "Slab",
    "Sphere",
    "TIE_TOL",
]

# Absolute tie tolerance on squared distances: exact ties in the symmetric
# examples must be reported, float noise must not create spurious ones.
TIE_TOL = 1e-12


class DegenerateProjectionError(Exception):
    """The nearest-point map is the whole set (e.g. center of a sphere)."""


class EmptySetError(ValueError):
    """The set has no members."""


class CapExceededError(ValueError):
    """Instance size exceeds the brute-force enumeration cap."""


class ProjectableSet(abc.ABC):
    """A closed set with a (possibly multi-valued) nearest-point map."""

    @property
    @abc.abstractmethod
    def dim(self) -> int: ...

    @abc.abstractmethod
    def project_all(self, x) -> list[np.ndarray]:
        """All nearest points to x, in a deterministic order."""

    def distance(self, x) -> float:
        p = self.project_all(x)[0]
        return float(np.linalg.norm(as_point(x, self.dim) - p))

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.distance(x) <= tol

    @abc.abstractmethod
    def key(self) -> tuple:
        """Hashable description used for trace fingerprints."""


class ReflectableConstraint(abc.ABC):
    """A convex set with single-valued projector and reflector."""

    @property
    @abc.abstractmethod
    def dim(self) -> int: ...

    @abc.abstractmethod
    def project(self, x) -> np.ndarray: ...

    def reflect(self, x) -> np.ndarray:
        x = as_point(x, self.dim)
        return 2.0 * self.project(x) - x

    def distance(self, x) -> float:
        x = as_point(x, self.dim)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.distance(x) <= tol

    @abc.abstractmethod
    def key(self) -> tuple: ...


# HalfSpace and Hyperplane already implement the full constraint surface.
ReflectableConstraint.register(HalfSpace)
ReflectableConstraint.register(Hyperplane)


def _tie_filter(candidates: np.ndarray, d2: np.ndarray) -> list[np.ndarray]:
    """Rows of ``candidates`` whose squared distance is minimal within TIE_TOL."""
    best = float(d2.min())
    idx = np.flatnonzero(d2 <= best + TIE_TOL)
    return [candidates[i].copy() for i in idx]


class FinitePointSet(ProjectableSet):
    """An explicit finite set of points; projection by exhaustive comparison."""

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            raise EmptySetError("finite set must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("finite set has non-finite coordinates")
        # Deduplicate exact repeats, keeping first occurrence order.
        seen: set[bytes] = set()
        keep = []
        for i, row in enumerate(pts):
            k = row.tobytes()
            if k not in seen:
                seen.add(k)
                keep.append(i)
        self.points = pts[keep]
        self.points.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def project_all(self, x) -> list[np.ndarray]:
        x = as_point(x, self.dim)
        d2 = np.sum((self.points - x) ** 2, axis=1)
        return _tie_filter(self.points, d2)

    def distance(self, x) -> float:
        x = as_point(x, self.dim)
        d2 = np.sum((self.points - x) ** 2, axis=1)
        return float(np.sqrt(d2.min()))

    def key(self) -> tuple:
        return ("FinitePointSet", self.points.tobytes(), self.points.shape)

    def __repr__(self):
        return f"FinitePointSet({self.points.tolist()})"


class Sphere(ProjectableSet):
    """The sphere of given center and radius (the shell, not the ball)."""

    def __init__(self, center, radius: float):
        self.center = as_point(center)
        self.center.setflags(write=False)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size

    def project_all(self, x) -> list[np.ndarray]:
        x = as_point(x, self.dim)
        w = x - self.center
        r = float(np.linalg.norm(w))
        if r <= 1e-12:
            raise DegenerateProjectionError(
                "projection of the center onto a sphere is the whole sphere"
            )
        return [self.center + (self.radius / r) * w]

    def distance(self, x) -> float:
        x = as_point(x, self.dim)
        return abs(float(np.linalg.norm(x - self.center)) - self.radius)

    def key(self) -> tuple:
        return ("Sphere", self.center.tobytes(), self.radius)

    def __repr__(self):
        return f"Sphere(center={self.center.tolist()}, radius={self.radius})"


class BinaryKnapsackSet(ProjectableSet):
    """{y in {0,1}^m : <c,y> >= threshold}, projected by exact enumeration.

    Desk-scale exactness over scalability: m is capped (default 24) and
    every one of the 2^m corners is examined in chunks.  Ties are returned
    in increasing order of the corner read as a bit-string (first
    coordinate most significant).
    """

    def __init__(self, c, threshold: float, cap: int = 24):
        self.c = as_point(c)
        self.c.setflags(write=False)
        if np.any(self.c < 0):
            raise ValueError("knapsack weights must be nonnegative")
        self.threshold = float(threshold)
        if self.threshold < 0:
            raise ValueError("knapsack threshold must be nonnegative")
        self.cap = int(cap)
        if self.dim > self.cap:
            raise CapExceededError(
                f"knapsack dimension {self.dim} exceeds cap {self.cap}"
            )
        if float(self.c.sum()) < self.threshold:
            raise EmptySetError("no binary point reaches the threshold")

    @property
    def dim(self) -> int:
        return self.c.size

    def _corners(self, start: int, stop: int) -> np.ndarray:
        m = self.dim
        idx = np.arange(start, stop, dtype=np.int64)
        shifts = m - 1 - np.arange(m)
        return ((idx[:, None] >> shifts) & 1).astype(float)

    def project_all(self, x) -> list[np.ndarray]:
        x = as_point(x, self.dim)
        m = self.dim
        best = np.inf
        ties: list[np.ndarray] = []
        chunk = 1 << min(m, 18)
        for start in range(0, 1 << m, chunk):
            corners = self._corners(start, min(start + chunk, 1 << m))
            feasible = corners @ self.c >= self.threshold
            if not feasible.any():
                continue
            corners = corners[feasible]
            d2 = np.sum((corners - x) ** 2, axis=1)
            lo = float(d2.min())
            if lo < best - TIE_TOL:
                best = lo
                ties = _tie_filter(corners, d2)
            elif lo <= best + TIE_TOL:
                best = min(best, lo)
                keep = np.flatnonzero(d2 <= best + TIE_TOL)
                ties.extend(corners[i].copy() for i in keep)
        return ties

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = as_point(x, self.dim)
        y = np.round(x)
        if np.any(np.abs(x - y) > tol) or np.any((y != 0) & (y != 1)):
            return False
        return float(self.c @ y) >= self.threshold

    def key(self) -> tuple:
        return ("BinaryKnapsackSet", self.c.tobytes(), self.threshold)

    def __repr__(self):
        return (
            f"BinaryKnapsackSet(c={self.c.tolist()}, "
            f"threshold={self.threshold})"
        )


class TriadicSet(ProjectableSet):
    """The 1-D set {2/3^k : 0 <= k <= depth} together with 0.

    The infinite tail is truncated at ``depth``; 2/3^60 is already below
    double-precision relevance for the first few dozen iterates.
    """

    def __init__(self, depth: int = 60):
        self.depth = int(depth)
        if self.depth < 1:
            raise ValueError("depth must be positive")
        vals = [0.0] + [2.0 / 3.0**k for k in range(self.depth, -1, -1)]
        self.values = np.asarray(vals)
        self.values.setflags(write=False)

    @property
    def dim(self) -> int:
        return 1

    def project_all(self, x) -> list[np.ndarray]:
        x = as_point(x, 1)
        t = float(x[0])
        pos = int(np.searchsorted(self.values, t))
        cand = self.values[max(0, pos - 1): pos + 1]
        d2 = (cand - t) ** 2
        return _tie_filter(cand[:, None], d2)

    def distance(self, x) -> float:
        x = as_point(x, 1)
        return float(np.min(np.abs(self.values - x[0])))

    def key(self) -> tuple:
        return ("TriadicSet", self.depth)

    def __repr__(self):
        return f"TriadicSet(depth={self.depth})"


@dataclass(frozen=True)
class Slab(ReflectableConstraint):
    """{x : lower <= <a,x> <= upper} for a unit normal a."""

    a: np.ndarray
    lower: float
    upper: float

    def __post_init__(self):
        a = as_point(self.a)
        norm = float(np.linalg.norm(a))
        if norm <= 0.0:
            raise ValueError("slab normal must be nonzero")
        a = a / norm
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "lower", float(self.lower) / norm)
        object.__setattr__(self, "upper", float(self.upper) / norm)
        if not self.lower < self.upper:
            raise ValueError("slab requires lower < upper")

    @property
    def dim(self) -> int:
        return self.a.size

    def project(self, x) -> np.ndarray:
        x = as_point(x, self.dim)
        t = float(self.a @ x)
        clamped = min(max(t, self.lower), self.upper)
        return x + (clamped - t) * self.a

    def key(self) -> tuple:
        return ("Slab", self.a.tobytes(), self.lower, self.upper)


class PlanarCone(ReflectableConstraint):
    """A 2-D convex cone {apex + s*u + t*v : s, t >= 0}.

    u, v are independent unit boundary directions, so the wedge angle is
    below pi and the set is convex.  Projection is the nearest of x itself
    (when inside) or the clamped feet on the two boundary rays.
    """

    def __init__(self, apex, u, v):
        self.apex = as_point(apex, 2)
        u = as_point(u, 2)
        v = as_point(v, 2)
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu <= 0 or nv <= 0:
            raise ValueError("cone directions must be nonzero")
        self.u = u / nu
        self.v = v / nv
        det = self.u[0] * self.v[1] - self.u[1] * self.v[0]
        if abs(det) < 1e-12:
            raise ValueError("cone directions must be linearly independent")
        self._basis_inv = np.linalg.inv(np.column_stack([self.u, self.v]))
        for arr in (self.apex, self.u, self.v):
            arr.setflags(write=False)

    @classmethod
    def from_boundary_points(cls, apex, p1, p2) -> "PlanarCone":
        apex = as_point(apex, 2)
        return cls(apex, as_point(p1, 2) - apex, as_point(p2, 2) - apex)

    @property
    def dim(self) -> int:
        return 2

    def _coords(self, x: np.ndarray) -> np.ndarray:
        return self._basis_inv @ (x - self.apex)

    def contains(self, x, tol: float = 1e-9) -> bool:
        s, t = self._coords(as_point(x, 2))
        return s >= -tol and t >= -tol

    def project(self, x) -> np.ndarray:
        x = as_point(x, 2)
        s, t = self._coords(x)
        if s >= 0.0 and t >= 0.0:
            return x.copy()
        w = x - self.apex
        foot_u = self.apex + max(0.0, float(w @ self.u)) * self.u
        foot_v = self.apex + max(0.0, float(w @ self.v)) * self.v
        if np.linalg.norm(x - foot_u) <= np.linalg.norm(x - foot_v):
            return foot_u
        return foot_v

    def key(self) -> tuple:
        return ("PlanarCone", self.apex.tobytes(), self.u.tobytes(), self.v.tobytes())

    def __repr__(self):
        return (
            f"PlanarCone(apex={self.apex.tolist()}, "
            f"u={self.u.tolist()}, v={self.v.tolist()})"
        )


@dataclass(frozen=True)
class DiagonalSet(ReflectableConstraint):
    """{(x, y) : x = y} for stacked point pairs of equal block dimension."""

    block_dim: int

    def __post_init__(self):
        if self.block_dim < 1:
            raise ValueError("block dimension must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.block_dim

    def project(self, x) -> np.ndarray:
        x = as_point(x, self.dim)
        n = self.block_dim
        mean = 0.5 * (x[:n] + x[n:])
        return np.concatenate([mean, mean])

    def reflect(self, x) -> np.ndarray:
        # 2 P_D - I swaps the two blocks; do it exactly.
        x = as_point(x, self.dim)
        n = self.block_dim
        return np.concatenate([x[n:], x[:n]])

    def key(self) -> tuple:
        return ("DiagonalSet", self.block_dim)


class ProductSet(ProjectableSet):
    """Cartesian product of component sets, projected blockwise.

    Components may be projectable sets or reflectable constraints (the
    latter contribute a single nearest point).  Tie sets multiply: the
    result is the cartesian product of component tie sets, in component
    order.
    """

    def __init__(self, components):
        if not components:
            raise ValueError("product needs at least one component")
        self.components = list(components)
        dims = [c.dim for c in self.components]
        self._offsets = np.concatenate([[0], np.cumsum(dims)])

    @property
    def dim(self) -> int:
        return int(self._offsets[-1])

    def _blocks(self, x: np.ndarray) -> list[np.ndarray]:
        return [
            x[self._offsets[i]: self._offsets[i + 1]]
            for i in range(len(self.components))
        ]

    def project_all(self, x) -> list[np.ndarray]:
        x = as_point(x, self.dim)
        per_block = []
        for comp, blk in zip(self.components, self._blocks(x)):
            if hasattr(comp, "project_all"):
                per_block.append(comp.project_all(blk))
            else:
                per_block.append([comp.project(blk)])
        return [np.concatenate(combo) for combo in itertools.product(*per_block)]

    def distance(self, x) -> float:
        x = as_point(x, self.dim)
        return float(
            np.sqrt(
                sum(
                    comp.distance(blk) ** 2
                    for comp, blk in zip(self.components, self._blocks(x))
                )
            )
        )

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = as_point(x, self.dim)
        return all(
            comp.contains(blk, tol)
            for comp, blk in zip(self.components, self._blocks(x))
        )

    def key(self) -> tuple:
        return ("ProductSet",) + tuple(c.key() for c in self.components)

    def __repr__(self):
        return f"ProductSet({self.components!r})"
