"""Bracketing root finders used throughout the solvers.

Only sign information is used, so every routine here is robust to the
badly scaled residuals that appear near the tails of Weibull curves.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import BracketError


def bisect_bracket(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 0.0,
    ftol: float = 0.0,
    max_iter: int = 200,
    f_lo: float | None = None,
    f_hi: float | None = None,
) -> tuple[float, float]:
    """Shrink a sign-change bracket ``[lo, hi]`` of ``fn``.

    Iteration stops when the bracket is narrower than ``xtol``, when the
    midpoint residual is within ``ftol`` of zero (the bracket then collapses
    onto the midpoint), when floating point can no longer split the bracket,
    or after ``max_iter`` halvings.  The returned pair keeps the sign
    orientation of the input: ``fn(lo)`` and ``fn(hi)`` still differ in sign.
    """
    if f_lo is None:
        f_lo = fn(lo)
    if f_hi is None:
        f_hi = fn(hi)
    if f_lo == 0.0:
        return lo, lo
    if f_hi == 0.0:
        return hi, hi
    if (f_lo < 0.0) == (f_hi < 0.0):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]")
    lo_negative = f_lo < 0.0
    for _ in range(max_iter):
        if abs(hi - lo) <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = fn(mid)
        if abs(f_mid) <= ftol or f_mid == 0.0:
            return mid, mid
        if (f_mid < 0.0) == lo_negative:
            lo = mid
        else:
            hi = mid
    return lo, hi


def bisect(fn: Callable[[float], float], lo: float, hi: float, **kwargs) -> float:
    """Midpoint of the final bracket from :func:`bisect_bracket`."""
    a, b = bisect_bracket(fn, lo, hi, **kwargs)
    return 0.5 * (a + b)


def expand_upper(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    max_doublings: int = 200,
) -> float:
    """Grow ``hi`` away from ``lo`` until ``fn(hi)`` is positive.

    ``fn`` is assumed negative at ``lo``; the distance ``hi - lo`` doubles on
    every step.
    """
    width = hi - lo
    if width <= 0.0:
        width = 1.0
    x = lo + width
    for _ in range(max_doublings):
        v = fn(x)
        if v > 0.0:
            return x
        width *= 2.0
        x = lo + width
        if not math.isfinite(x):
            break
    raise BracketError(f"could not bracket a root above {lo!r}")
