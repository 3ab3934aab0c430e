"""Problem-file schema: JSON descriptions of an instance plus overrides.

A problem file pairs one constraint, one projectable set, a start point,
and optional solver-configuration overrides.  Validation is strict:
unknown fields are rejected at every level and block dimensions must be
consistent, because these files are user-supplied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .engine import SolverConfig
from .geometry import HalfSpace, Hyperplane
from .sets import (
    BinaryKnapsackSet,
    DiagonalSet,
    FinitePointSet,
    PlanarCone,
    ProductSet,
    Slab,
    Sphere,
    TriadicSet,
)

__all__ = ["ProblemFile", "ProblemFormatError", "load_problem"]


class ProblemFormatError(ValueError):
    """The problem description violates the schema."""


CONSTRAINT_FIELDS = {
    "halfspace": {"a", "b"},
    "hyperplane": {"a", "b"},
    "slab": {"a", "lower", "upper"},
    "cone": {"apex", "p1", "p2"},
    "diagonal": {"block_dim"},
}

SET_FIELDS = {
    "finite": {"points"},
    "sphere": {"center", "radius"},
    "knapsack": {"c", "threshold"},
    "triadic": {"depth"},
    "product": {"components"},
}

CONFIG_FIELDS = {
    "max_iter", "tol", "cycle_tol", "window",
    "tie_rule", "reflect_order", "seed",
}


def _require_fields(spec: dict, allowed: set, context: str) -> None:
    extra = set(spec) - allowed - {"type"}
    if extra:
        raise ProblemFormatError(
            f"{context}: unknown field(s) {sorted(extra)}"
        )
    missing = {f for f in allowed if f not in spec and f != "depth"}
    if missing:
        raise ProblemFormatError(
            f"{context}: missing field(s) {sorted(missing)}"
        )


def _build_constraint(spec: dict):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ProblemFormatError("constraint must be an object with a type")
    kind = spec["type"]
    if kind not in CONSTRAINT_FIELDS:
        raise ProblemFormatError(f"unknown constraint type {kind!r}")
    _require_fields(spec, CONSTRAINT_FIELDS[kind], f"constraint {kind}")
    try:
        if kind == "halfspace":
            return HalfSpace(np.asarray(spec["a"], float), float(spec["b"]))
        if kind == "hyperplane":
            return Hyperplane(np.asarray(spec["a"], float), float(spec["b"]))
        if kind == "slab":
            return Slab(np.asarray(spec["a"], float),
                        float(spec["lower"]), float(spec["upper"]))
        if kind == "cone":
            return PlanarCone.from_boundary_points(
                spec["apex"], spec["p1"], spec["p2"]
            )
        return DiagonalSet(int(spec["block_dim"]))
    except ProblemFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"constraint {kind}: {exc}") from exc


def _build_set(spec: dict):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ProblemFormatError("set must be an object with a type")
    kind = spec["type"]
    if kind not in SET_FIELDS:
        raise ProblemFormatError(f"unknown set type {kind!r}")
    _require_fields(spec, SET_FIELDS[kind], f"set {kind}")
    try:
        if kind == "finite":
            return FinitePointSet(spec["points"])
        if kind == "sphere":
            return Sphere(spec["center"], float(spec["radius"]))
        if kind == "knapsack":
            return BinaryKnapsackSet(np.asarray(spec["c"], float),
                                     float(spec["threshold"]))
        if kind == "triadic":
            return TriadicSet(int(spec.get("depth", 60)))
        components = spec["components"]
        if not isinstance(components, list) or not components:
            raise ProblemFormatError("product components must be a nonempty list")
        built = []
        for comp in components:
            if isinstance(comp, dict) and comp.get("type") in CONSTRAINT_FIELDS:
                built.append(_build_constraint(comp))
            else:
                built.append(_build_set(comp))
        return ProductSet(built)
    except ProblemFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"set {kind}: {exc}") from exc


def _build_config(spec: dict) -> SolverConfig:
    if not isinstance(spec, dict):
        raise ProblemFormatError("config must be an object")
    extra = set(spec) - CONFIG_FIELDS
    if extra:
        raise ProblemFormatError(f"config: unknown field(s) {sorted(extra)}")
    kwargs = {}
    if "max_iter" in spec:
        kwargs["max_iter"] = int(spec["max_iter"])
    if "tol" in spec:
        kwargs["eps_h"] = float(spec["tol"])
    if "cycle_tol" in spec:
        kwargs["eps_cycle"] = float(spec["cycle_tol"])
    if "window" in spec:
        kwargs["window"] = int(spec["window"])
    if "tie_rule" in spec:
        kwargs["tie_rule"] = str(spec["tie_rule"])
    if "reflect_order" in spec:
        kwargs["reflect_order"] = str(spec["reflect_order"])
    if "seed" in spec:
        kwargs["seed"] = int(spec["seed"])
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise ProblemFormatError(f"config: {exc}") from exc


@dataclass
class ProblemFile:
    """Parsed problem description; ``build()`` materializes the objects."""

    constraint: dict
    set: dict
    x0: list
    config: dict = field(default_factory=dict)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProblemFile":
        if not isinstance(data, dict):
            raise ProblemFormatError("problem file must be a JSON object")
        extra = set(data) - {"constraint", "set", "x0", "config"}
        if extra:
            raise ProblemFormatError(f"unknown top-level field(s) {sorted(extra)}")
        for need in ("constraint", "set", "x0"):
            if need not in data:
                raise ProblemFormatError(f"missing top-level field {need!r}")
        pf = cls(
            constraint=data["constraint"],
            set=data["set"],
            x0=data["x0"],
            config=data.get("config", {}),
        )
        pf.build()  # validate eagerly
        return pf

    def to_json_dict(self) -> dict:
        out = {"constraint": self.constraint, "set": self.set, "x0": self.x0}
        if self.config:
            out["config"] = self.config
        return out

    def build(self):
        constraint = _build_constraint(self.constraint)
        proj_set = _build_set(self.set)
        if not isinstance(self.x0, (list, tuple)) or not self.x0:
            raise ProblemFormatError("x0 must be a nonempty coordinate list")
        try:
            x0 = np.asarray(self.x0, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ProblemFormatError(f"x0: {exc}") from exc
        if x0.ndim != 1 or not np.all(np.isfinite(x0)):
            raise ProblemFormatError("x0 must be a flat list of finite numbers")
        if constraint.dim != proj_set.dim:
            raise ProblemFormatError(
                f"dimension mismatch: constraint is {constraint.dim}-D, "
                f"set is {proj_set.dim}-D"
            )
        if x0.size != constraint.dim:
            raise ProblemFormatError(
                f"dimension mismatch: x0 is {x0.size}-D, "
                f"problem is {constraint.dim}-D"
            )
        return constraint, proj_set, x0, _build_config(self.config)


def load_problem(path: str) -> ProblemFile:
    """Read and validate a problem file; JSON errors carry line/column."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    try:
        return ProblemFile.from_json_dict(data)
    except ProblemFormatError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc
