"""Vulnerability curves: conductance as a function of water potential.

Two families are supported:

* ``Weibull(k_max, p, nu)``: ``K(psi) = k_max * exp(-(psi / p) ** nu)``
* ``Linear(k_max, p)``: ``K(psi) = k_max * (1 - psi / p)`` on ``[0, p)``,
  clamped to zero beyond ``p``.

Potentials are in MPa with the sign convention that larger values mean
drier tissue.  Values are plain Python floats; :func:`evaluate` also
accepts numpy arrays for plotting and grid searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import CurveValidityError, DomainError, SingularityError
from .roots import bisect, expand_upper

DEFAULT_FLOW_FLOOR = 1e-9


def _check_param(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


def _power(base: float, exponent: float) -> float:
    try:
        return base**exponent
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Weibull:
    k_max: float
    p: float
    nu: float

    kind = "weibull"

    def __post_init__(self):
        object.__setattr__(self, "k_max", _check_param("k_max", self.k_max))
        object.__setattr__(self, "p", _check_param("p", self.p))
        object.__setattr__(self, "nu", _check_param("nu", self.nu))

    def value(self, psi: float) -> float:
        return self.k_max * math.exp(-_power(psi / self.p, self.nu))

    def values(self, psi: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.k_max * np.exp(-((psi / self.p) ** self.nu))

    def slope(self, psi: float) -> float:
        if psi == 0.0:
            if self.nu > 1.0:
                return 0.0
            if self.nu == 1.0:
                return -self.k_max / self.p
            raise SingularityError("Weibull derivative is singular at 0 for nu < 1")
        return -self.value(psi) * self.hazard(psi)

    def hazard(self, psi: float) -> float:
        """Logarithmic decay rate ``-K'(psi) / K(psi)``."""
        if psi == 0.0:
            if self.nu > 1.0:
                return 0.0
            if self.nu == 1.0:
                return 1.0 / self.p
            return math.inf
        return (self.nu / self.p) * _power(psi / self.p, self.nu - 1.0)

    def scaled(self, factor: float) -> "Weibull":
        return replace(self, k_max=self.k_max * factor)

    def params(self) -> dict:
        return {"type": self.kind, "k_max": self.k_max, "p": self.p, "nu": self.nu}


@dataclass(frozen=True)
class Linear:
    k_max: float
    p: float

    kind = "linear"

    def __post_init__(self):
        object.__setattr__(self, "k_max", _check_param("k_max", self.k_max))
        object.__setattr__(self, "p", _check_param("p", self.p))

    def value(self, psi: float) -> float:
        return max(0.0, self.k_max * (1.0 - psi / self.p))

    def values(self, psi: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, self.k_max * (1.0 - psi / self.p))

    def slope(self, psi: float) -> float:
        return -self.k_max / self.p if psi < self.p else 0.0

    def hazard(self, psi: float) -> float:
        if psi >= self.p:
            return math.inf
        return 1.0 / (self.p - psi)

    def scaled(self, factor: float) -> "Linear":
        return replace(self, k_max=self.k_max * factor)

    def params(self) -> dict:
        return {"type": self.kind, "k_max": self.k_max, "p": self.p}


VulnerabilityCurve = Union[Weibull, Linear]


@dataclass(frozen=True)
class CurveValidity:
    is_positive_decreasing: bool
    tail_vanishes: bool
    log_reciprocal_convex: bool
    messages: tuple[str, ...] = field(default=())

    @property
    def overall_valid(self) -> bool:
        return self.is_positive_decreasing and self.tail_vanishes and self.log_reciprocal_convex


def _check_psi(psi) -> None:
    if np.ndim(psi) == 0:
        if not psi >= 0.0:
            raise DomainError(f"potential must be >= 0, got {psi!r}")
    elif np.any(~(np.asarray(psi) >= 0.0)):
        raise DomainError("potentials must be >= 0")


def evaluate(curve: VulnerabilityCurve, psi):
    """Conductance ``K(psi)``; ``psi`` may be a float or an array."""
    _check_psi(psi)
    if np.ndim(psi) == 0:
        return curve.value(float(psi))
    return curve.values(np.asarray(psi, dtype=float))


def derivative(curve: VulnerabilityCurve, psi: float) -> float:
    """Analytic ``dK/dpsi``.

    Raises :class:`SingularityError` for a Weibull curve with ``nu < 1`` at
    ``psi = 0`` where the slope is unbounded.
    """
    _check_psi(psi)
    return curve.slope(float(psi))


@lru_cache(maxsize=1024)
def validate(curve: VulnerabilityCurve) -> CurveValidity:
    """Check the conditions under which every flow function is unimodal.

    A curve must be strictly positive and decreasing on its support, its
    flow ``psi * K(psi)`` must vanish in the tail, and ``ln(1/K)`` must be
    convex so that the stationarity equation has a single root.
    """
    messages = []
    if isinstance(curve, Weibull):
        convex = curve.nu >= 1.0
        if not convex:
            messages.append(
                f"log-convexity fails: Weibull nu = {curve.nu:g} < 1 makes ln(1/K) concave"
            )
        return CurveValidity(True, True, convex, tuple(messages))
    if isinstance(curve, Linear):
        return CurveValidity(True, True, True, ())
    raise TypeError(f"unsupported curve type {type(curve).__name__}")


def require_valid(curve: VulnerabilityCurve) -> None:
    check = validate(curve)
    if not check.overall_valid:
        raise CurveValidityError("; ".join(check.messages) or f"invalid curve {curve!r}")


def zero_base_flow_argmax(curve: VulnerabilityCurve) -> float:
    """Maximiser of ``psi * K(psi)``, available in closed form for both families."""
    if isinstance(curve, Weibull):
        return curve.p * curve.nu ** (-1.0 / curve.nu)
    return 0.5 * curve.p


def upper_support(curve: VulnerabilityCurve, flow_floor: float = DEFAULT_FLOW_FLOOR) -> float:
    """Potential beyond which ``psi * K(psi)`` stays below ``flow_floor`` times its peak.

    Used as the right end of search intervals.  Linear curves return their
    cutoff ``p``.
    """
    if not 0.0 < flow_floor < 1.0:
        raise DomainError(f"flow_floor must lie in (0, 1), got {flow_floor!r}")
    if isinstance(curve, Linear):
        return curve.p
    peak = zero_base_flow_argmax(curve)
    # log of psi*K(psi) relative to floor * peak flow; decreasing beyond the peak
    offset = math.log(flow_floor) + math.log(peak) - 1.0 / curve.nu

    def excess(psi: float) -> float:
        return -(math.log(psi) - _power(psi / curve.p, curve.nu) - offset)

    hi = expand_upper(excess, peak, 2.0 * peak)
    return bisect(excess, peak, hi, xtol=1e-12 * hi)
