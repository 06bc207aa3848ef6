"""Optimal flow through a series chain of segments.

Node potentials ``x0 <= x1 <= ... <= xn`` are chosen so that every
segment carries the same flow ``(x_i - x_{i-1}) * K_i(x_i)`` and that
common flow is as large as possible.  At the optimum at least one segment
(the bottleneck) runs at its own capacity.

Two solvers are provided:

* :func:`two_segment_solve` follows the stem/leaf algorithm: maximise the
  first segment alone, and if the second cannot carry that flow, solve the
  bottleneck system after eliminating ``x1`` through the leaf's
  stationarity condition.
* :func:`multi_segment_solve` bisects on the flow value, using
  :func:`is_feasible` (left-to-right propagation with smallest roots) as a
  monotone predicate.  It handles any ``n >= 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .curves import VulnerabilityCurve, evaluate, require_valid, upper_support
from .errors import (
    ConfigError,
    InfeasibleTarget,
    NoPositiveFlow,
    NoRootFound,
    NoStationarySegment,
)
from .flow import SegmentCapacity, capacity, flow, solve_rising
from .roots import bisect_bracket

_TIE_RTOL = 1e-9


class SolutionCase(str, enum.Enum):
    NON_BOTTLENECK = "non_bottleneck"
    BOTTLENECK = "bottleneck"


@dataclass(frozen=True)
class Segment:
    name: str
    curve: VulnerabilityCurve


@dataclass(frozen=True)
class PlantChain:
    """Soil potential plus the ordered segments from roots to leaves.

    Construction checks only the structural invariants.  Whether each curve
    supports a well-posed problem is checked by :meth:`check_solvable`, which
    every solver calls, so that ill-posed chains can still be loaded and
    diagnosed.
    """

    soil_potential: float
    segments: tuple[Segment, ...]

    def __post_init__(self):
        try:
            x0 = float(self.soil_potential)
        except (TypeError, ValueError):
            raise ConfigError(f"soil_potential must be a number, got {self.soil_potential!r}")
        if not (math.isfinite(x0) and x0 >= 0.0):
            raise ConfigError(f"soil_potential must be finite and >= 0, got {x0!r}")
        object.__setattr__(self, "soil_potential", x0)
        segments = tuple(self.segments)
        if len(segments) < 1:
            raise ConfigError("n >= 1 required: a chain needs at least one segment")
        object.__setattr__(self, "segments", segments)

    @classmethod
    def from_curves(
        cls, soil_potential: float, curves: Sequence[VulnerabilityCurve], names=None
    ) -> "PlantChain":
        if names is None:
            names = [f"segment{i + 1}" for i in range(len(curves))]
        return cls(soil_potential, tuple(Segment(n, c) for n, c in zip(names, curves)))

    @property
    def n(self) -> int:
        return len(self.segments)

    @property
    def curves(self) -> tuple[VulnerabilityCurve, ...]:
        return tuple(s.curve for s in self.segments)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.segments)

    def check_solvable(self) -> None:
        for i, seg in enumerate(self.segments, start=1):
            require_valid(seg.curve)
            if evaluate(seg.curve, self.soil_potential) <= 0.0:
                raise NoPositiveFlow(
                    f"segment {i} ({seg.name}): K(x0) = 0 at soil potential "
                    f"{self.soil_potential:g} MPa"
                )

    def with_soil_potential(self, x0: float) -> "PlantChain":
        return replace(self, soil_potential=x0)

    def scaled(self, factor: float) -> "PlantChain":
        """Same chain with every ``k_max`` multiplied by ``factor``."""
        return replace(
            self, segments=tuple(Segment(s.name, s.curve.scaled(factor)) for s in self.segments)
        )


@dataclass(frozen=True)
class OptimalSolution:
    potentials: tuple[float, ...]
    flow: float
    case: SolutionCase
    bottleneck_index: int
    capacities: tuple[SegmentCapacity, ...]
    isolated_first_capacity: float

    def segment_flows(self, chain: PlantChain) -> list[float]:
        bases = (chain.soil_potential,) + self.potentials[:-1]
        return [flow(c, b, x) for c, b, x in zip(chain.curves, bases, self.potentials)]


class Feasibility(NamedTuple):
    feasible: bool
    potentials: tuple[float, ...]
    failed_segment: int | None = None


def is_feasible(chain: PlantChain, phi: float, cfg: SolverConfig = DEFAULT_CONFIG) -> Feasibility:
    """Can the chain carry flow ``phi``?

    Potentials are propagated from the soil upwards, each node placed at the
    smallest potential giving its segment the flow ``phi``.  On failure
    ``failed_segment`` holds the 1-based index of the segment that could
    not carry the flow and ``potentials`` the nodes placed so far.
    """
    x = chain.soil_potential
    if phi == 0.0:
        return Feasibility(True, (x,) * chain.n)
    placed: list[float] = []
    for i, curve in enumerate(chain.curves, start=1):
        if evaluate(curve, x) <= 0.0:
            return Feasibility(False, tuple(placed), i)
        try:
            x = solve_rising(curve, x, phi, cfg)
        except InfeasibleTarget:
            return Feasibility(False, tuple(placed), i)
        placed.append(x)
    return Feasibility(True, tuple(placed))


def _capacities(chain: PlantChain, potentials: Sequence[float], cfg: SolverConfig):
    bases = (chain.soil_potential,) + tuple(potentials[:-1])
    return tuple(capacity(c, b, cfg) for c, b in zip(chain.curves, bases))


def detect_bottleneck(
    solution: OptimalSolution, chain: PlantChain, cfg: SolverConfig = DEFAULT_CONFIG
) -> tuple[SolutionCase, int]:
    """First segment whose capacity from its realised base equals the flow."""
    caps = _capacities(chain, solution.potentials, cfg)
    return _classify(caps, solution.flow, cfg)


def _classify(caps, phi: float, cfg: SolverConfig) -> tuple[SolutionCase, int]:
    for i, cap in enumerate(caps, start=1):
        if abs(cap.max_flow - phi) <= cfg.stationary_rtol * max(phi, cap.max_flow):
            case = SolutionCase.NON_BOTTLENECK if i == 1 else SolutionCase.BOTTLENECK
            return case, i
    raise NoStationarySegment(
        f"no segment runs at capacity for flow {phi:.12g} "
        f"(capacities {[c.max_flow for c in caps]})"
    )


def _solution(chain, potentials, phi, cfg, case=None, index=None) -> OptimalSolution:
    potentials = tuple(float(x) for x in potentials)
    caps = _capacities(chain, potentials, cfg)
    if case is None:
        case, index = _classify(caps, phi, cfg)
    return OptimalSolution(potentials, float(phi), case, index, caps, caps[0].max_flow)


def two_segment_solve(chain: PlantChain, cfg: SolverConfig = DEFAULT_CONFIG) -> OptimalSolution:
    """Stem/leaf solver.

    1. maximise the stem alone from ``x0`` to get ``x1~``;
    2. maximise the leaf from ``x1~`` to get ``x2~``;
    3. if the leaf can carry the stem's peak flow, keep ``x1~`` and place
       ``x2`` at the smallest root of the leaf flow;
    4. otherwise the leaf is the bottleneck: with
       ``x1(x2) = x2 + g(x2) / g'(x2)`` the constraint
       ``F(x1(x2)) = G(x1(x2), x2)`` is scanned on ``[x0, x2~]`` for sign
       changes, every bracket is bisected, and the largest flow (smallest
       ``x2`` among ties) wins.
    """
    if chain.n != 2:
        raise ConfigError(f"two_segment_solve needs exactly 2 segments, got {chain.n}")
    chain.check_solvable()
    x0 = chain.soil_potential
    stem, leaf = chain.curves

    stem_cap = capacity(stem, x0, cfg)
    x1_peak, stem_peak = stem_cap.argmax_potential, stem_cap.max_flow
    if leaf.value(x1_peak) > 0.0:
        leaf_cap = capacity(leaf, x1_peak, cfg)
        if stem_peak <= leaf_cap.max_flow:
            x2 = solve_rising(leaf, x1_peak, stem_peak, cfg, cap=leaf_cap)
            return _solution(chain, (x1_peak, x2), stem_peak, cfg, SolutionCase.NON_BOTTLENECK, 1)
        x2_peak = leaf_cap.argmax_potential
    else:
        # leaf already dead at the stem peak: scan up to where the leaf vanishes
        x2_peak = upper_support(leaf, cfg.flow_floor)

    def stem_node(x2: float) -> float:
        # x1 placing the leaf at its own peak; clamped at x0 for continuity
        h = leaf.hazard(x2)
        x1 = x2 - 1.0 / h if h > 0.0 else -math.inf
        return max(x1, x0)

    def residual(x2: float) -> float:
        x1 = stem_node(x2)
        return (x1 - x0) * stem.value(x1) - (x2 - x1) * leaf.value(x2)

    grid = np.linspace(x0 + cfg.tol_x, x2_peak, cfg.grid_points)
    values = [residual(x) for x in grid]
    candidates = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa < 0.0 <= fb or fa > 0.0 >= fb:
            lo, hi = bisect_bracket(residual, a, b, max_iter=cfg.max_iter, f_lo=fa, f_hi=fb)
            x2 = 0.5 * (lo + hi)
            x1 = stem_node(x2)
            if x1 > x0:
                candidates.append((flow(leaf, x1, x2), x1, x2))
    if not candidates:
        raise NoRootFound(
            f"bottleneck residual has no sign change on [{x0:g}, {x2_peak:g}] MPa"
        )
    best = max(c[0] for c in candidates)
    phi, x1, x2 = min(
        (c for c in candidates if c[0] >= best * (1.0 - _TIE_RTOL)), key=lambda c: c[2]
    )
    return _solution(chain, (x1, x2), phi, cfg, SolutionCase.BOTTLENECK, 2)


def multi_segment_solve(chain: PlantChain, cfg: SolverConfig = DEFAULT_CONFIG) -> OptimalSolution:
    """Flow-value bisection for a chain of any length.

    Feasibility of a flow ``phi`` is monotone: a smaller flow places every
    node lower, which never reduces what later segments can carry.  The
    largest feasible flow is bracketed in ``[0, capacity of segment 1]``.
    Once the bracket is tight, the segment that failed at the upper end is
    placed exactly at its peak so the stationarity condition holds to
    solver precision.
    """
    chain.check_solvable()
    x0 = chain.soil_potential
    first = capacity(chain.curves[0], x0, cfg)
    top = first.max_flow

    at_top = is_feasible(chain, top, cfg)
    if at_top.feasible:
        return _solution(chain, at_top.potentials, top, cfg)

    lo, hi = 0.0, top
    best = is_feasible(chain, 0.0, cfg)
    failed = at_top.failed_segment
    for _ in range(cfg.max_iter):
        if hi - lo <= cfg.tol_f * top:
            break
        mid = 0.5 * (lo + hi)
        trial = is_feasible(chain, mid, cfg)
        if trial.feasible:
            lo, best = mid, trial
        else:
            hi, failed = mid, trial.failed_segment

    phi = lo
    potentials = _pin_bottleneck(chain, best.potentials, failed, phi, cfg)
    return _solution(chain, potentials, phi, cfg)


def _pin_bottleneck(chain, potentials, k, phi, cfg) -> tuple[float, ...]:
    """Move node ``k`` onto its segment's peak and re-place the nodes above it."""
    nodes = list(potentials)
    base = chain.soil_potential if k == 1 else nodes[k - 2]
    try:
        x = capacity(chain.curves[k - 1], base, cfg).argmax_potential
        pinned = nodes[: k - 1] + [x]
        for curve in chain.curves[k:]:
            x = solve_rising(curve, x, phi, cfg)
            pinned.append(x)
    except (InfeasibleTarget, NoPositiveFlow):
        # a downstream segment is equally tight; the unpinned nodes are feasible
        return tuple(nodes)
    return tuple(pinned)


def solve(chain: PlantChain, cfg: SolverConfig = DEFAULT_CONFIG, method: str = "algebraic"):
    """Dispatch: the two-segment algorithm for ``n == 2`` unless bisection is requested."""
    if method == "algebraic" and chain.n == 2:
        return two_segment_solve(chain, cfg)
    if method in ("algebraic", "bisection"):
        return multi_segment_solve(chain, cfg)
    raise ValueError(f"unknown method {method!r}")


def max_relative_deviation(a: OptimalSolution, b: OptimalSolution) -> float:
    """Largest relative difference between the flows and node potentials of two solutions."""
    devs = [abs(a.flow - b.flow) / max(abs(a.flow), abs(b.flow))]
    for xa, xb in zip(a.potentials, b.potentials):
        devs.append(abs(xa - xb) / max(abs(xa), abs(xb), 1e-12))
    return max(devs)
