"""Brute-force grid oracle for cross-checking the chain solvers.

The recursion

    best(i, base) = max over x >= base of min(flow_i(base, x), best(i+1, x))

with ``best(n+1, .) = inf`` is evaluated on a grid of candidate potentials
for every node (a layered dynamic program, ``O(n m^2)`` for ``m`` points
per layer).  The search is then repeated on narrow windows around the
previous optimum.  Nothing here uses the root finders or the closed forms
of :mod:`plantflow.flow`, so it is independent of the solvers it checks.
"""

from __future__ import annotations

import numpy as np

from .chain import OptimalSolution, PlantChain, SolutionCase
from .config import DEFAULT_CONFIG, SolverConfig
from .curves import upper_support
from .errors import NoStationarySegment, UnsupportedSize
from .flow import SegmentCapacity

MAX_SEGMENTS = 4
_ROW_CHUNK = 256
_WINDOW_STEPS = 2.0
_TIE_RTOL = 1e-12


def _layer_values(curve, bases: np.ndarray, xs: np.ndarray, downstream: np.ndarray):
    """min(own flow, downstream best) for every (base, x) pair, -inf where x < base."""
    k = curve.values(xs)
    out = np.empty((bases.size, xs.size))
    for start in range(0, bases.size, _ROW_CHUNK):
        b = bases[start : start + _ROW_CHUNK, None]
        width = xs[None, :] - b
        block = np.minimum(width * k[None, :], downstream[None, :])
        block[width < 0.0] = -np.inf
        out[start : start + _ROW_CHUNK] = block
    return out


def _best_tables(x0: float, curves, layers):
    """Backward pass: ``tables[i][j]`` is the best flow of segments i.. given node i-1 at layer[i-1][j]."""
    n = len(curves)
    downstream = np.full(layers[-1].size, np.inf)
    tables = [None] * (n + 1)
    tables[n] = downstream
    for i in reversed(range(n)):
        bases = layers[i - 1] if i > 0 else np.array([x0])
        best = np.empty(bases.size)
        for start in range(0, bases.size, _ROW_CHUNK):
            chunk = bases[start : start + _ROW_CHUNK]
            best[start : start + chunk.size] = _layer_values(
                curves[i], chunk, layers[i], tables[i + 1]
            ).max(axis=1)
        tables[i] = best
    return tables


def _reach_tables(x0: float, curves, layers):
    """Forward pass: ``reach[i][j]`` is the best flow of segments ..i with node i at layer[i][j]."""
    reach = []
    prev_x, prev_best = np.array([x0]), np.array([np.inf])
    for curve, xs in zip(curves, layers):
        k = curve.values(xs)
        best = np.full(xs.size, -np.inf)
        for start in range(0, prev_x.size, _ROW_CHUNK):
            b = prev_x[start : start + _ROW_CHUNK, None]
            width = xs[None, :] - b
            block = np.minimum(width * k[None, :], prev_best[start : start + _ROW_CHUNK, None])
            block[width < 0.0] = -np.inf
            best = np.maximum(best, block.max(axis=0))
        reach.append(best)
        prev_x, prev_best = xs, best
    return reach


def _forward_path(x0: float, curves, layers, tables):
    """Smallest potentials that still achieve the optimal grid flow."""
    phi = tables[0][0]
    base = x0
    path = []
    for i, curve in enumerate(curves):
        xs = layers[i]
        vals = _layer_values(curve, np.array([base]), xs, tables[i + 1])[0]
        ok = np.flatnonzero(vals >= phi * (1.0 - _TIE_RTOL))
        j = int(ok[0]) if ok.size else int(np.argmax(vals))
        base = float(xs[j])
        path.append(base)
    return phi, path


def _grid_capacity(curve, base: float, upper: float, m: int, passes: int) -> SegmentCapacity:
    lo, hi = base, max(upper, base)
    x = base
    for _ in range(passes + 1):
        xs = np.linspace(lo, hi, m)
        f = (xs - base) * curve.values(xs)
        j = int(np.argmax(f))
        x = float(xs[j])
        step = (hi - lo) / (m - 1)
        lo, hi = max(base, x - _WINDOW_STEPS * step), x + _WINDOW_STEPS * step
    return SegmentCapacity(x, float((x - base) * curve.value(x)), base)


def oracle_grid(
    chain: PlantChain,
    cfg: SolverConfig = DEFAULT_CONFIG,
    *,
    refine: int = 3,
    bottleneck_rtol: float = 1e-6,
) -> OptimalSolution:
    """Approximate optimum by exhaustive search, with ``refine`` zoom passes.

    ``refine=0`` gives the plain grid answer on ``cfg.grid_points`` points
    per node spanning ``[x0, upper_support]``.  The bottleneck is the first
    segment whose grid capacity from its realised base is within
    ``bottleneck_rtol`` of the flow, widened to the grid resolution when
    that is coarser.
    """
    n = chain.n
    if n > MAX_SEGMENTS:
        raise UnsupportedSize(f"oracle_grid handles at most {MAX_SEGMENTS} segments, got {n}")
    chain.check_solvable()
    x0 = chain.soil_potential
    m = cfg.grid_points
    curves = chain.curves
    uppers = [max(upper_support(c, cfg.flow_floor), x0) for c in curves]

    layers = [np.linspace(x0, u, m) for u in uppers]
    phi, path = None, None
    for _ in range(refine + 1):
        tables = _best_tables(x0, curves, layers)
        phi, path = _forward_path(x0, curves, layers, tables)
        # flow change caused by moving one node a single grid step
        steps = [(xs[-1] - xs[0]) / (m - 1) for xs in layers]
        tops = [c.value(x) for c, x in zip(curves, path)]
        shifts = [h * (k + (tops[i + 1] if i + 1 < n else 0.0)) for i, (h, k) in enumerate(zip(steps, tops))]
        resolution = max(shifts)
        band = 2.0 * sum(shifts)
        # next pass: every node value lying on some near-optimal grid path
        reach = _reach_tables(x0, curves, layers)
        new_layers = []
        for i, (xs, h) in enumerate(zip(layers, steps)):
            through = np.minimum(reach[i], tables[i + 1])
            near = np.flatnonzero(through >= phi - band)
            lo, hi = xs[near[0]], xs[near[-1]]
            new_layers.append(
                np.linspace(max(xs[0], lo - _WINDOW_STEPS * h), min(xs[-1], hi + _WINDOW_STEPS * h), m)
            )
        layers = new_layers

    bases = [x0] + path[:-1]
    caps = tuple(
        _grid_capacity(c, b, max(u, b), m, refine) for c, b, u in zip(curves, bases, uppers)
    )
    rtol = max(bottleneck_rtol, 2.0 * resolution / phi)
    for i, cap in enumerate(caps, start=1):
        if cap.max_flow <= phi * (1.0 + rtol):
            case = SolutionCase.NON_BOTTLENECK if i == 1 else SolutionCase.BOTTLENECK
            break
    else:
        raise NoStationarySegment(f"grid oracle found no segment at capacity for flow {phi:.6g}")
    return OptimalSolution(tuple(path), float(phi), case, i, caps, caps[0].max_flow)
