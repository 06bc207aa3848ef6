"""Single-segment flow functions.

The flow through a segment whose lower node sits at ``x_base`` and upper
node at ``x`` is the area of the rectangle ``(x - x_base) * K(x)`` fitted
under the vulnerability curve.  For curves that pass
:func:`plantflow.curves.validate` this is unimodal in ``x``; the helpers
here find its peak (the segment capacity) and invert its rising branch.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import DEFAULT_CONFIG, SolverConfig
from .curves import (
    Linear,
    VulnerabilityCurve,
    Weibull,
    evaluate,
    require_valid,
    upper_support,
    zero_base_flow_argmax,
)
from .errors import DomainError, InfeasibleTarget, NoPositiveFlow
from .roots import bisect, bisect_bracket, expand_upper


@dataclass(frozen=True)
class SegmentCapacity:
    argmax_potential: float
    max_flow: float
    base_potential: float


def flow(curve: VulnerabilityCurve, x_base: float, x: float) -> float:
    """Rectangle area ``(x - x_base) * K(x)``; negative when ``x < x_base``."""
    if not x_base >= 0.0:
        raise DomainError(f"base potential must be >= 0, got {x_base!r}")
    return (x - x_base) * evaluate(curve, x)


def _stationarity(curve: VulnerabilityCurve, x_base: float):
    # (x - b) * (-K'/K) - 1: -1 at x = b, increasing under log-convexity
    def residual(x: float) -> float:
        return (x - x_base) * curve.hazard(x) - 1.0

    return residual


def capacity(
    curve: VulnerabilityCurve,
    x_base: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
    *,
    closed_form: bool = True,
) -> SegmentCapacity:
    """Peak of ``flow(curve, x_base, .)`` on ``[x_base, inf)``.

    Closed forms are used for linear curves and for Weibull curves with a
    zero base; otherwise the stationarity condition
    ``(x - x_base) * (-K'(x) / K(x)) = 1`` is bisected.  Pass
    ``closed_form=False`` to force the bisection path.
    """
    require_valid(curve)
    k_base = evaluate(curve, x_base)
    if k_base <= 0.0:
        raise NoPositiveFlow(
            f"conductance is zero at base potential {x_base:g} MPa; segment carries no flow"
        )
    if closed_form and isinstance(curve, Linear):
        x_star = 0.5 * (curve.p + x_base)
    elif closed_form and isinstance(curve, Weibull) and x_base == 0.0:
        x_star = zero_base_flow_argmax(curve)
    else:
        residual = _stationarity(curve, x_base)
        hi = max(upper_support(curve, cfg.flow_floor), x_base + zero_base_flow_argmax(curve))
        if residual(hi) <= 0.0:
            hi = expand_upper(residual, x_base, hi)
        x_star = bisect(
            residual, x_base, hi, xtol=cfg.tol_x, max_iter=cfg.max_iter, f_lo=-1.0
        )
    return SegmentCapacity(x_star, flow(curve, x_base, x_star), x_base)


def solve_rising(
    curve: VulnerabilityCurve,
    x_base: float,
    target: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
    cap: SegmentCapacity | None = None,
) -> float:
    """Smallest ``x >= x_base`` at which the segment carries ``target``.

    Raises :class:`InfeasibleTarget` when ``target`` exceeds the segment
    capacity by more than ``cfg.tol_f`` (relative).
    """
    if not target >= 0.0:
        raise DomainError(f"target flow must be >= 0, got {target!r}")
    if target == 0.0:
        return x_base
    if cap is None:
        cap = capacity(curve, x_base, cfg)
    if target > cap.max_flow * (1.0 + cfg.tol_f):
        raise InfeasibleTarget(
            f"target flow {target:.6g} exceeds segment capacity {cap.max_flow:.6g}",
            max_flow=cap.max_flow,
        )
    if target >= cap.max_flow:
        return cap.argmax_potential

    def excess(x: float) -> float:
        return (x - x_base) * curve.value(x) - target

    lo, hi = bisect_bracket(
        excess,
        x_base,
        cap.argmax_potential,
        ftol=cfg.tol_f * target,
        max_iter=cfg.max_iter,
        f_lo=-target,
        f_hi=cap.max_flow - target,
    )
    return 0.5 * (lo + hi)
