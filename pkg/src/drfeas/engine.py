"""Douglas-Rachford and alternating-projection iteration drivers.

The specialized driver handles the half-space problem with the case-split
operator; the generic driver handles an arbitrary single-valued constraint
paired with a projectable set.  Both record a full trace and run cycle
detection; the half-space driver additionally watches for the structural
linear-divergence pattern (constant infeasible auxiliary point, iterates
marching along the inward normal by a fixed increment).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .geometry import HalfSpace, Hyperplane, as_point
from .sets import DegenerateProjectionError, ProjectableSet

__all__ = [
    "CycleDetected",
    "DegenerateProjection",
    "Diverging",
    "DivergenceCertificate",
    "IterateRecord",
    "MaxIterations",
    "RunOutcome",
    "Solved",
    "SolverConfig",
    "Trace",
    "detect_cycle",
    "detect_linear_divergence",
    "dr_step",
    "dr_step_generic",
    "run_ap",
    "run_dr",
    "run_dr_generic",
]

TIE_RULES = ("first", "rotate", "random")
REFLECT_ORDERS = ("set-first", "constraint-first")


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters; all runs are deterministic given (inputs, config)."""

    max_iter: int = 10000
    eps_h: float = 1e-9          # membership tolerance for the stopping rule
    eps_cycle: float = 1e-9      # state quantization grid for cycle detection
    window: int = 25             # steps of evidence before a divergence certificate
    reflect_order: str = "set-first"
    tie_rule: str = "first"
    seed: int = 0
    norm_cap: float = 1e12       # fallback bailout when no certificate forms

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.eps_h <= 0 or self.eps_cycle <= 0 or self.norm_cap <= 0:
            raise ValueError("tolerances must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.reflect_order not in REFLECT_ORDERS:
            raise ValueError(f"reflect_order must be one of {REFLECT_ORDERS}")
        if self.tie_rule not in TIE_RULES:
            raise ValueError(f"tie_rule must be one of {TIE_RULES}")

    def key(self) -> tuple:
        return (
            self.max_iter, self.eps_h, self.eps_cycle, self.window,
            self.reflect_order, self.tie_rule, self.seed, self.norm_cap,
        )


@dataclass(frozen=True)
class IterateRecord:
    """One step: iterate x_k, selected projection q_k, and their distances."""

    k: int
    x: np.ndarray
    q: np.ndarray
    d_xH: float
    d_qH: float
    d_xL: float
    d_qL: float


@dataclass(frozen=True)
class Trace:
    records: tuple[IterateRecord, ...]
    fingerprint: str

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def xs(self) -> np.ndarray:
        return np.array([r.x for r in self.records])

    def qs(self) -> np.ndarray:
        return np.array([r.q for r in self.records])


@dataclass(frozen=True)
class DivergenceCertificate:
    """Observed pattern x_{k+1} - x_k = -increment * a with constant q.

    ``offsets`` holds the cumulative displacement lambda_k along the
    normal, one entry per certified step starting at ``start_index``
    (x_{k+1} = q_fixed - lambda_k * a).
    """

    q_fixed: np.ndarray
    increment: float
    start_index: int
    offsets: tuple[float, ...]


@dataclass(frozen=True)
class Solved:
    q: np.ndarray
    iterations: int


@dataclass(frozen=True)
class Diverging:
    certificate: DivergenceCertificate
    beta_estimate: float


@dataclass(frozen=True)
class CycleDetected:
    period: int
    first_index: int


@dataclass(frozen=True)
class MaxIterations:
    final_dist: float
    beta_estimate: float
    norm_capped: bool = False


@dataclass(frozen=True)
class DegenerateProjection:
    at_index: int


RunOutcome = Union[Solved, Diverging, CycleDetected, MaxIterations, DegenerateProjection]


def dr_step(x, q, hs: HalfSpace, eps_h: float = 1e-9) -> np.ndarray:
    """One Douglas-Rachford step for a half-space given the selected q.

    Case split: q when <a, 2q - x> <= b (+ eps_h), otherwise
    q + (<a,x> + b - 2<a,q>) a, which equals (x + R_H(2q - x)) / 2.
    """
    x = as_point(x, hs.dim)
    q = as_point(q, hs.dim)
    a, b = hs.a, hs.b
    if float(a @ (2.0 * q - x)) <= b + eps_h:
        return q.copy()
    return q + (float(a @ x) + b - 2.0 * float(a @ q)) * a


def dr_step_generic(x, constraint, proj_set: ProjectableSet,
                    cfg: SolverConfig, k: int = 0,
                    rng: Optional[np.random.Generator] = None):
    """One generic two-set step; returns (next iterate, q used).

    set-first reflects the projectable set before the constraint,
    x' = (x + R_A(2q - x)) / 2 with q the tie-selected nearest point of x;
    constraint-first swaps the roles and selects q from the nearest points
    of R_A(x).
    """
    x = as_point(x, constraint.dim)
    if cfg.reflect_order == "set-first":
        q = _select(proj_set.project_all(x), k, cfg.tie_rule, rng)
        nxt = 0.5 * (x + constraint.reflect(2.0 * q - x))
    else:
        r = constraint.reflect(x)
        q = _select(proj_set.project_all(r), k, cfg.tie_rule, rng)
        nxt = 0.5 * (x + 2.0 * q - r)
    return nxt, q


def _select(ties: list[np.ndarray], k: int, rule: str,
            rng: Optional[np.random.Generator]) -> np.ndarray:
    if len(ties) == 1 or rule == "first":
        return ties[0]
    if rule == "rotate":
        return ties[k % len(ties)]
    if rng is None:
        raise ValueError("random tie rule needs a generator")
    return ties[int(rng.integers(len(ties)))]


class _CycleDetector:
    """Hash of quantized states; reports (period, first_index) on recurrence.

    The table keeps the most recent occurrence of each quantized state, so
    a match closes the shortest loop through that state.  With
    ``confirm=True`` a candidate recurrence is only reported after the
    orbit repeats for one further full period, which rejects grid-cell
    near-misses produced by orbits still drifting toward a limit cycle.
    """

    def __init__(self, eps: float, confirm: bool = False):
        self.eps = eps
        self.confirm = confirm
        self.seen: dict[tuple, int] = {}
        self.keys: list[tuple] = []
        self.pending: Optional[tuple[int, int, int]] = None  # (first, period, done)

    def add(self, state: np.ndarray, index: int,
            tag: str = "") -> Optional[tuple[int, int]]:
        key = (tag,) + tuple(np.round(state / self.eps).tolist())
        self.keys.append(key)
        if self.pending is not None:
            first, period, done = self.pending
            if key == self.keys[index - period]:
                done += 1
                if done >= period:
                    return period, first
                self.pending = (first, period, done)
                return None
            self.pending = None  # near-miss, resume normal scanning
        prev = self.seen.get(key)
        self.seen[key] = index
        if prev is not None:
            if not self.confirm:
                return index - prev, prev
            self.pending = (prev, index - prev, 0)
        return None


def detect_cycle(states, eps_cycle: float = 1e-9,
                 confirm: bool = False) -> Optional[tuple[int, int]]:
    """First recurrence of a state after quantizing to the eps_cycle grid.

    Returns (period, first_index) or None.  ``confirm=True`` demands the
    recurrence hold for one extra full period before reporting (the
    drivers use this to avoid flagging slowly drifting orbits).
    """
    det = _CycleDetector(eps_cycle, confirm=confirm)
    for i, s in enumerate(states):
        hit = det.add(np.asarray(s, dtype=float), i)
        if hit is not None:
            return hit
    return None


class _DivergenceDetector:
    """Watches for the constant-q, fixed-increment march out of the half-space."""

    def __init__(self, hs: HalfSpace, cfg: SolverConfig):
        self.hs = hs
        self.cfg = cfg
        self.streak: list[IterateRecord] = []
        self.blocked_q: Optional[np.ndarray] = None

    def block(self, q: np.ndarray) -> None:
        """Suppress further certificates while the auxiliary point equals q."""
        self.blocked_q = q.copy()

    def _extends(self, rec: IterateRecord) -> bool:
        if rec.d_xH > self.cfg.eps_h or rec.d_qH <= self.cfg.eps_h:
            return False
        if not self.streak:
            return True
        last = self.streak[-1]
        if not np.all(np.abs(rec.q - last.q) <= self.cfg.eps_cycle):
            return False
        inc = rec.d_qL
        step = rec.x - last.x
        return bool(np.all(np.abs(step + inc * self.hs.a) <= self.cfg.eps_cycle))

    def push(self, rec: IterateRecord) -> Optional[DivergenceCertificate]:
        if self._extends(rec):
            self.streak.append(rec)
        elif rec.d_xH <= self.cfg.eps_h and rec.d_qH > self.cfg.eps_h:
            self.streak = [rec]
        else:
            self.streak = []
        if len(self.streak) <= self.cfg.window:
            return None
        q = self.streak[-1].q
        if (self.blocked_q is not None
                and np.all(np.abs(q - self.blocked_q) <= self.cfg.eps_cycle)):
            return None
        a = self.hs.a
        start = self.streak[0].k
        offsets = tuple(
            float(a @ (q - r.x)) for r in self.streak[1:]
        )
        return DivergenceCertificate(
            q_fixed=q.copy(),
            increment=self.streak[-1].d_qL,
            start_index=start,
            offsets=offsets,
        )


def detect_linear_divergence(records, hs: HalfSpace,
                             window: int = 25,
                             eps_h: float = 1e-9,
                             eps_cycle: float = 1e-9) -> Optional[DivergenceCertificate]:
    """Scan a recorded trace for the linear-divergence pattern."""
    cfg = SolverConfig(window=window, eps_h=eps_h, eps_cycle=eps_cycle)
    det = _DivergenceDetector(hs, cfg)
    for rec in records:
        cert = det.push(rec)
        if cert is not None:
            return cert
    return None


def _ray_stable(proj_set: ProjectableSet, q: np.ndarray, hs: HalfSpace,
                factor: float = 1e7) -> bool:
    """Whether q stays a nearest point arbitrarily far down the inward ray.

    The fixed-increment march is only genuine divergence if the constant
    auxiliary point never loses a nearest-point comparison; a far probe
    along the ray distinguishes that from a transient march that would
    eventually hand over to another point of the set.
    """
    scale = 1.0 + float(np.linalg.norm(q))
    probe = q - factor * scale * hs.a
    try:
        ties = proj_set.project_all(probe)
    except DegenerateProjectionError:
        return False
    return any(float(np.linalg.norm(p - q)) <= 1e-9 * scale for p in ties)


def _fingerprint(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def _halfspace_record(k: int, x: np.ndarray, q: np.ndarray, hs: HalfSpace) -> IterateRecord:
    vx = hs.value(x)
    vq = hs.value(q)
    return IterateRecord(
        k=k, x=x.copy(), q=q.copy(),
        d_xH=max(0.0, vx), d_qH=max(0.0, vq),
        d_xL=abs(vx), d_qL=abs(vq),
    )


def _generic_record(k: int, x: np.ndarray, q: np.ndarray, constraint) -> IterateRecord:
    if isinstance(constraint, HalfSpace):
        return _halfspace_record(k, x, q, constraint)
    if isinstance(constraint, Hyperplane):
        dx, dq = constraint.distance(x), constraint.distance(q)
        return IterateRecord(k, x.copy(), q.copy(), dx, dq, dx, dq)
    dx, dq = constraint.distance(x), constraint.distance(q)
    return IterateRecord(k, x.copy(), q.copy(), dx, dq, dx, dq)


def _beta_estimate(records, window: int) -> float:
    tail = records[-window:]
    return min(r.d_qH for r in tail)


def run_dr(proj_set: ProjectableSet, hs: HalfSpace, x0,
           cfg: SolverConfig = SolverConfig()) -> tuple[Trace, RunOutcome]:
    """Iterate the half-space case-split operator until q_k enters H.

    Stops Solved as soon as the selected projection is within eps_h of
    membership; otherwise runs the divergence and cycle detectors each
    step, falling back to MaxIterations.
    """
    x = as_point(x0, hs.dim)
    rng = np.random.default_rng(cfg.seed)
    records: list[IterateRecord] = []
    cyc = _CycleDetector(cfg.eps_cycle, confirm=True)
    div = _DivergenceDetector(hs, cfg)
    fp = _fingerprint("dr", proj_set.key(), hs.key(), x.tobytes(), cfg.key())
    outcome: RunOutcome
    k = 0
    while True:
        try:
            ties = proj_set.project_all(x)
        except DegenerateProjectionError:
            outcome = DegenerateProjection(at_index=k)
            break
        q = _select(ties, k, cfg.tie_rule, rng)
        rec = _halfspace_record(k, x, q, hs)
        records.append(rec)
        if rec.d_qH <= cfg.eps_h:
            outcome = Solved(q=q.copy(), iterations=k)
            break
        cert = div.push(rec)
        if cert is not None:
            if _ray_stable(proj_set, cert.q_fixed, hs):
                outcome = Diverging(cert, _beta_estimate(records, cfg.window))
                break
            div.block(cert.q_fixed)
        hit = cyc.add(x, k)
        if hit is not None:
            outcome = CycleDetected(period=hit[0], first_index=hit[1])
            break
        if k >= cfg.max_iter:
            outcome = MaxIterations(rec.d_qH, _beta_estimate(records, cfg.window))
            break
        if float(np.linalg.norm(x)) > cfg.norm_cap:
            outcome = MaxIterations(
                rec.d_qH, _beta_estimate(records, cfg.window), norm_capped=True
            )
            break
        x = dr_step(x, q, hs, cfg.eps_h)
        k += 1
    return Trace(tuple(records), fp), outcome


def run_dr_generic(constraint, proj_set: ProjectableSet, x0,
                   cfg: SolverConfig = SolverConfig()) -> tuple[Trace, RunOutcome]:
    """Two-set Douglas-Rachford for an arbitrary reflectable constraint.

    With a half-space constraint and the default set-first order this is
    exactly ``run_dr`` (same code path, identical traces).  Solved requires
    the tie-selected q to lie in both sets within eps_h.
    """
    if isinstance(constraint, HalfSpace) and cfg.reflect_order == "set-first":
        return run_dr(proj_set, constraint, x0, cfg)
    x = as_point(x0, constraint.dim)
    rng = np.random.default_rng(cfg.seed)
    records: list[IterateRecord] = []
    cyc = _CycleDetector(cfg.eps_cycle, confirm=True)
    fp = _fingerprint(
        "dr-generic", proj_set.key(), constraint.key(), x.tobytes(), cfg.key()
    )
    outcome: RunOutcome
    k = 0
    while True:
        try:
            nxt, q = dr_step_generic(x, constraint, proj_set, cfg, k, rng)
        except DegenerateProjectionError:
            outcome = DegenerateProjection(at_index=k)
            break
        rec = _generic_record(k, x, q, constraint)
        records.append(rec)
        if rec.d_qH <= cfg.eps_h:
            outcome = Solved(q=q.copy(), iterations=k)
            break
        hit = cyc.add(x, k)
        if hit is not None:
            outcome = CycleDetected(period=hit[0], first_index=hit[1])
            break
        if k >= cfg.max_iter:
            outcome = MaxIterations(rec.d_qH, _beta_estimate(records, cfg.window))
            break
        if float(np.linalg.norm(x)) > cfg.norm_cap:
            outcome = MaxIterations(
                rec.d_qH, _beta_estimate(records, cfg.window), norm_capped=True
            )
            break
        x = nxt
        k += 1
    return Trace(tuple(records), fp), outcome


def run_ap(proj_set: ProjectableSet, constraint, x0,
           cfg: SolverConfig = SolverConfig()) -> tuple[Trace, RunOutcome]:
    """Alternating projections x_{k+1} in P_A(P_Q(x_k)).

    Cycle detection runs over the half-step sequence x_0, q_0, x_1, q_1,
    ... so the classic two-point bounce between a set point and its
    constraint projection is reported with period 2 (period and
    first_index are counted in half-steps).
    """
    x = as_point(x0, constraint.dim)
    rng = np.random.default_rng(cfg.seed)
    records: list[IterateRecord] = []
    cyc = _CycleDetector(cfg.eps_cycle, confirm=True)
    fp = _fingerprint(
        "ap", proj_set.key(), constraint.key(), x.tobytes(), cfg.key()
    )
    outcome: RunOutcome
    k = 0
    while True:
        try:
            ties = proj_set.project_all(x)
        except DegenerateProjectionError:
            outcome = DegenerateProjection(at_index=k)
            break
        q = _select(ties, k, cfg.tie_rule, rng)
        rec = _generic_record(k, x, q, constraint)
        records.append(rec)
        if rec.d_qH <= cfg.eps_h:
            outcome = Solved(q=q.copy(), iterations=k)
            break
        hit = cyc.add(x, 2 * k, tag="x")
        if hit is None:
            hit = cyc.add(q, 2 * k + 1, tag="q")
        if hit is not None:
            outcome = CycleDetected(period=hit[0], first_index=hit[1])
            break
        if k >= cfg.max_iter:
            outcome = MaxIterations(rec.d_qH, _beta_estimate(records, cfg.window))
            break
        x = constraint.project(q)
        k += 1
    return Trace(tuple(records), fp), outcome
