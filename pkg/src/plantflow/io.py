"""Chain configuration files, bundled species data and result export.

Chain config (JSON)::

    {"soil_potential": 0.0,
     "segments": [{"name": "stem",
                   "curve": {"type": "weibull", "k_max": 25.29, "p": 4.22, "nu": 4.67}},
                  {"name": "leaf",
                   "curve": {"type": "linear", "k_max": 0.4, "p": 1.64}}]}

Solution (JSON)::

    {"potentials": [...], "flow": ..., "case": "bottleneck" | "non_bottleneck",
     "bottleneck_index": k, "capacities": [{"argmax": ..., "max_flow": ...}, ...],
     "isolated_first_capacity": ...}

Rectangle export (CSV) has the header ``segment,psi,K,kind``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass

import numpy as np

from .chain import OptimalSolution, PlantChain, Segment, SolutionCase
from .curves import Linear, VulnerabilityCurve, Weibull, upper_support
from .errors import ConfigError, DomainError
from .flow import SegmentCapacity

CURVE_FIELDS = {"weibull": ("k_max", "p", "nu"), "linear": ("k_max", "p")}
_CURVE_TYPES = {"weibull": Weibull, "linear": Linear}

TREE_UNITS = "mmol m-2 s-1 MPa-1 (normalised by total leaf area)"
BULK_UNITS = "mmol s-1 MPa-1 (bulk, not normalised)"


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_curve(doc, where: str) -> VulnerabilityCurve:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = doc.get("type")
    if kind not in CURVE_FIELDS:
        raise ConfigError(
            f"{where}.type: unknown curve type {kind!r} (expected one of {sorted(CURVE_FIELDS)})"
        )
    fields = CURVE_FIELDS[kind]
    extra = set(doc) - set(fields) - {"type"}
    if extra:
        raise ConfigError(f"{where}: unexpected field(s) {sorted(extra)} for a {kind} curve")
    params = {}
    for name in fields:
        if name not in doc:
            raise ConfigError(f"{where}.{name}: missing")
        params[name] = _number(doc[name], f"{where}.{name}")
    try:
        return _CURVE_TYPES[kind](**params)
    except DomainError as exc:
        field = str(exc).split(" ", 1)[0]
        raise ConfigError(f"{where}.{field}: {exc}") from None


def chain_from_dict(doc) -> PlantChain:
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    if "soil_potential" not in doc:
        raise ConfigError("soil_potential: missing")
    x0 = _number(doc["soil_potential"], "soil_potential")
    if not (math.isfinite(x0) and x0 >= 0.0):
        raise ConfigError(f"soil_potential: must be finite and >= 0, got {x0!r}")
    raw = doc.get("segments")
    if not isinstance(raw, list):
        raise ConfigError("segments: expected a list")
    if not raw:
        raise ConfigError("segments: n >= 1 required")
    segments = []
    for i, seg in enumerate(raw):
        where = f"segments[{i}]"
        if not isinstance(seg, dict):
            raise ConfigError(f"{where}: expected an object")
        name = seg.get("name", f"segment{i + 1}")
        if not isinstance(name, str) or not name:
            raise ConfigError(f"{where}.name: expected a non-empty string")
        segments.append(Segment(name, _parse_curve(seg.get("curve"), f"{where}.curve")))
    return PlantChain(x0, tuple(segments))


def parse_chain_config(document: str) -> PlantChain:
    """Parse and range-check a chain config document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return chain_from_dict(doc)


def chain_to_dict(chain: PlantChain) -> dict:
    return {
        "soil_potential": chain.soil_potential,
        "segments": [{"name": s.name, "curve": s.curve.params()} for s in chain.segments],
    }


def chain_to_config(chain: PlantChain) -> str:
    return json.dumps(chain_to_dict(chain), indent=2) + "\n"


@dataclass(frozen=True)
class SpeciesRecord:
    key: str
    display_name: str
    chain: PlantChain
    units_note: str
    reference_midday: tuple[float, float] | None = None


def _tree(key, name, stem, leaf, midday) -> SpeciesRecord:
    chain = PlantChain(0.0, (Segment("stem", stem), Segment("leaf", leaf)))
    return SpeciesRecord(key, name, chain, TREE_UNITS, midday)


def bundled_species() -> list[SpeciesRecord]:
    """Stem and leaf curves for four species, soil potential 0.

    The three trees carry measured midday (stem, leaf) potentials in MPa.
    """
    return [
        SpeciesRecord(
            "h_annuus",
            "Helianthus annuus",
            PlantChain(
                0.0,
                (Segment("stem", Weibull(11.9, 3.34, 1.69)), Segment("leaf", Linear(0.4, 1.64))),
            ),
            BULK_UNITS,
            None,
        ),
        _tree(
            "a_rubrum", "Acer rubrum", Weibull(25.29, 4.22, 4.67), Weibull(29.2, 1.76, 10.24),
            (0.73, 1.53),
        ),
        _tree(
            "l_tulipifera", "Liriodendron tulipifera", Weibull(4.27, 3.26, 4.46),
            Weibull(9.8, 1.29, 4.91), (0.65, 1.17),
        ),
        _tree(
            "p_virginiana", "Pinus virginiana", Weibull(1.07, 4.59, 4.11),
            Weibull(32.8, 0.95, 2.15), (0.98, 1.56),
        ),
    ]


def species(key: str) -> SpeciesRecord:
    for rec in bundled_species():
        if rec.key == key:
            return rec
    raise KeyError(f"unknown species {key!r}")


def solution_to_dict(solution: OptimalSolution) -> dict:
    return {
        "potentials": list(solution.potentials),
        "flow": solution.flow,
        "case": solution.case.value,
        "bottleneck_index": solution.bottleneck_index,
        "capacities": [
            {"argmax": c.argmax_potential, "max_flow": c.max_flow} for c in solution.capacities
        ],
        "isolated_first_capacity": solution.isolated_first_capacity,
    }


def serialize_solution(solution: OptimalSolution, chain: PlantChain) -> str:
    if len(solution.potentials) != chain.n:
        raise ValueError(f"solution has {len(solution.potentials)} potentials for {chain.n} segments")
    return json.dumps(solution_to_dict(solution), indent=2) + "\n"


def solution_from_dict(doc: dict, chain: PlantChain) -> OptimalSolution:
    try:
        potentials = tuple(float(x) for x in doc["potentials"])
        caps_raw = doc["capacities"]
        if len(potentials) != chain.n or len(caps_raw) != chain.n:
            raise ConfigError(f"solution does not match a chain of {chain.n} segments")
        bases = (chain.soil_potential,) + potentials[:-1]
        caps = tuple(
            SegmentCapacity(float(c["argmax"]), float(c["max_flow"]), b)
            for c, b in zip(caps_raw, bases)
        )
        return OptimalSolution(
            potentials,
            float(doc["flow"]),
            SolutionCase(doc["case"]),
            int(doc["bottleneck_index"]),
            caps,
            float(doc["isolated_first_capacity"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed solution document: {exc}") from None


def parse_solution(document: str, chain: PlantChain) -> OptimalSolution:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return solution_from_dict(doc, chain)


@dataclass(frozen=True)
class RectangleExport:
    """Curve traces and optimal flow rectangles, one entry per segment."""

    names: tuple[str, ...]
    samples: tuple[tuple[tuple[float, float], ...], ...]
    rectangles: tuple[tuple[tuple[float, float], ...], ...]

    def areas(self) -> list[float]:
        return [(r[1][0] - r[0][0]) * r[2][1] for r in self.rectangles]

    def to_csv(self) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["segment", "psi", "K", "kind"])
        for name, trace, rect in zip(self.names, self.samples, self.rectangles):
            for psi, k in trace:
                writer.writerow([name, repr(psi), repr(k), "curve"])
            for psi, k in rect:
                writer.writerow([name, repr(psi), repr(k), "rectangle"])
        return buf.getvalue()


def rectangle_export(chain: PlantChain, solution: OptimalSolution, samples: int) -> RectangleExport:
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    top = max(
        [1.1 * solution.potentials[-1]] + [upper_support(c, 1e-3) for c in chain.curves]
    )
    grid = np.linspace(0.0, top, samples)
    bases = (chain.soil_potential,) + tuple(solution.potentials[:-1])
    traces, rects = [], []
    for curve, lo, hi in zip(chain.curves, bases, solution.potentials):
        ks = curve.values(grid)
        traces.append(tuple((float(x), float(k)) for x, k in zip(grid, ks)))
        height = curve.value(hi)
        rects.append(((lo, 0.0), (hi, 0.0), (hi, height), (lo, height)))
    return RectangleExport(chain.names, tuple(traces), tuple(rects))


def export_rectangles(chain: PlantChain, solution: OptimalSolution, samples: int) -> str:
    """CSV text with curve samples and the four corners of each flow rectangle."""
    return rectangle_export(chain, solution, samples).to_csv()


def parse_rectangles(text: str) -> dict[str, dict[str, list[tuple[float, float]]]]:
    """Read an export back into ``{segment: {"curve": [...], "rectangle": [...]}}``."""
    out: dict[str, dict[str, list[tuple[float, float]]]] = {}
    reader = csv.DictReader(_io.StringIO(text))
    for row in reader:
        entry = out.setdefault(row["segment"], {"curve": [], "rectangle": []})
        entry[row["kind"]].append((float(row["psi"]), float(row["K"])))
    return out
