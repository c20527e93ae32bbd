"""Qubit counts for mixed quantum/semiclassical (MQS) versus fully quantum encodings.

Two encodings are covered:

* many-body particles on a position grid, where a semiclassical particle needs
  twice the register of a quantum one (KvN doubles the Hilbert space) but the
  grid is coarse-grained by the action ratio S_q/S_c;
* second-quantized fields, with one occupation register per grid point.

All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ResourceQuery:
    action_ratio: float
    n_grid_quant: float
    n_particles_q: int = 1
    n_particles_c: int = 1
    field_occupancy_q: int = 2
    field_occupancy_c: int = 2

    def __post_init__(self):
        if not self.action_ratio > 0:
            raise ValueError("action_ratio must be positive")
        if not self.n_grid_quant > 1:
            raise ValueError("n_grid_quant must exceed 1")
        if self.n_particles_q < 0 or self.n_particles_c < 0:
            raise ValueError("particle counts must be non-negative")
        if self.field_occupancy_q < 2 or self.field_occupancy_c < 2:
            raise ValueError("field occupancies must be at least 2")
        # tolerate round-off in e.g. 1e-3 * 1e3
        if self.action_ratio * self.n_grid_quant < 1 - 1e-12:
            raise ValueError("action_ratio * n_grid_quant must be >= 1 "
                             "(semiclassical grid needs at least one point)")

    @property
    def n_grid_semi(self) -> float:
        return max(self.action_ratio * self.n_grid_quant, 1.0)


@dataclass(frozen=True)
class Preset:
    name: str
    query: ResourceQuery
    note: str


PRESETS = {
    "proton-electron": Preset(
        "proton-electron",
        ResourceQuery(action_ratio=1e-3, n_grid_quant=1e6),
        "S_q/S_c ~ 1e-3 for a proton-electron system on a 1e6-point grid. The printed "
        "particle-ratio formula gives 0.75 here; the accompanying text quotes R ~ 0.6.",
    ),
    "gravity-scalar": Preset(
        "gravity-scalar",
        ResourceQuery(action_ratio=4e-18, n_grid_quant=1e18),
        "S_q/S_c ~ 4e-18 between a scalar matter field and gravity (G = 1/M_P, "
        "M_P = 1.22e19 GeV). Grid size 1e18 is a placeholder; field ratios do not depend on it.",
    ),
}


def preset_query(name: str, **overrides) -> ResourceQuery:
    try:
        q = PRESETS[name].query
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(q, **overrides) if overrides else q


def _mode(mode: str):
    if mode not in ("mqs", "fully_quantum"):
        raise ValueError("mode must be 'mqs' or 'fully_quantum'")


def particle_qubits(q: ResourceQuery, mode: str = "mqs") -> float:
    _mode(mode)
    if mode == "mqs":
        return (2 * q.n_particles_c + q.n_particles_q) * math.log2(q.n_grid_semi)
    return (q.n_particles_c + q.n_particles_q) * math.log2(q.n_grid_quant)


def particle_ratio(q: ResourceQuery) -> float:
    """(3/2) log_N(S_q/S_c N); assumes equal particle counts."""
    if q.n_particles_q != q.n_particles_c:
        raise ValueError("particle ratio assumes n_particles_q == n_particles_c")
    return 1.5 * math.log(q.n_grid_semi) / math.log(q.n_grid_quant)


def field_qubits(q: ResourceQuery, mode: str = "mqs") -> float:
    _mode(mode)
    if mode == "mqs":
        return ((math.log2(q.field_occupancy_q) + 2 * math.log2(q.field_occupancy_c))
                * q.action_ratio * q.n_grid_quant)
    return 2 * math.log2(q.field_occupancy_q) * q.n_grid_quant


def field_ratio(q: ResourceQuery) -> float:
    """(3/2) S_q/S_c; assumes equal field occupancies."""
    if q.field_occupancy_q != q.field_occupancy_c:
        raise ValueError("field ratio assumes field_occupancy_q == field_occupancy_c")
    return 1.5 * q.action_ratio


def ceil_qubits(value: float) -> int:
    """Round a raw qubit count up, ignoring float noise just above an integer."""
    r = round(value)
    if abs(value - r) <= 1e-9 * max(1.0, abs(value)):
        return int(r)
    return math.ceil(value)


def report(q: ResourceQuery) -> dict:
    out = {"query": {k: getattr(q, k) for k in q.__dataclass_fields__}}
    for kind, fn in (("particle", particle_qubits), ("field", field_qubits)):
        for mode in ("mqs", "fully_quantum"):
            raw = fn(q, mode)
            out[f"{kind}_qubits_{mode}"] = raw
            out[f"{kind}_qubits_{mode}_ceil"] = ceil_qubits(raw)
    out["particle_ratio"] = particle_ratio(q) if q.n_particles_q == q.n_particles_c else None
    out["field_ratio"] = field_ratio(q) if q.field_occupancy_q == q.field_occupancy_c else None
    return out
