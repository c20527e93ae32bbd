"""Two spins coupled through a harmonic mediator: quantum and KvN variants.

Both Hamiltonians are written in the dimensionless oscillator coordinates
``Pi = q sqrt(m w / hbar)`` and ``xi = p / sqrt(hbar m w)`` with hbar = 1, so
every phase table is in rad/s.  sigma^z eigenvalues are +1 / -1.

Quantum model (one grid axis, xi realized spectrally)::

    w_a sz_a + w_b sz_b + (w/2)(Pi^2 + xi^2) + sqrt(2)(g_a sz_a + g_b sz_b) Pi

KvN model (two grid axes, ghost momenta realized spectrally)::

    w_a sz_a + w_b sz_b + c (xi lambda_Pi - Pi lambda_xi)
        - sqrt(2)(g_a sz_a + g_b sz_b) lambda_xi

with ``c`` either ``w`` (generic KvN construction) or ``w/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kvn import (
    ClassicalHamiltonianSpec,
    EvolutionFactor,
    HamiltonianFactors,
    build_kvn_generator,
    coordinate_mesh,
    spin_eigenvalues,
    wavenumber_mesh,
)
from .state import PI_LABEL, XI_LABEL, FactorLayout, GridAxis

HBAR = 1.054571817e-34  # J s

PREFACTORS = ("omega", "omega_over_2")
MODEL_KINDS = ("quantum", "kvn")

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters; frequencies and couplings in rad/s."""

    omega: float
    omega_a: float = 0.0
    omega_b: float = 0.0
    g_a: float = 0.0
    g_b: float = 0.0
    mass: float = 1.0
    hbar: float = HBAR

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        for name in ("omega", "omega_a", "omega_b", "g_a", "g_b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def period(self) -> float:
        """Mediator period 2 pi / omega in seconds."""
        return TWO_PI / self.omega

    @classmethod
    def from_hz(cls, omega_hz, omega_a_hz=0.0, omega_b_hz=0.0, g_a_hz=0.0, g_b_hz=0.0,
                **kwargs) -> "ModelParams":
        return cls(TWO_PI * omega_hz, TWO_PI * omega_a_hz, TWO_PI * omega_b_hz,
                   TWO_PI * g_a_hz, TWO_PI * g_b_hz, **kwargs)


def table1_params() -> ModelParams:
    """Frequencies and couplings of the two-spin gravitational toy model."""
    return ModelParams.from_hz(
        omega_hz=1.59,
        g_a_hz=1.59,
        g_b_hz=2.23,
        omega_a_hz=7.0e-6,
        omega_b_hz=3.34e-4,
    )


def nondimensionalize(q: float, p: float, params: ModelParams) -> tuple[float, float]:
    m, w, hbar = params.mass, params.omega, params.hbar
    if not (m > 0 and w > 0):
        raise ValueError("mass and omega must be positive")
    return q * math.sqrt(m * w / hbar), p / math.sqrt(hbar * m * w)


def dimensionalize(Pi: float, xi: float, params: ModelParams) -> tuple[float, float]:
    m, w, hbar = params.mass, params.omega, params.hbar
    if not (m > 0 and w > 0):
        raise ValueError("mass and omega must be positive")
    return Pi * math.sqrt(hbar / (m * w)), xi * math.sqrt(hbar * m * w)


def quantum_layout(n_points: int, half_width: float) -> FactorLayout:
    return FactorLayout(2, (GridAxis(n_points, half_width, PI_LABEL),))


def kvn_layout(n_points: int, half_width: float) -> FactorLayout:
    return FactorLayout(2, (GridAxis(n_points, half_width, PI_LABEL),
                            GridAxis(n_points, half_width, XI_LABEL)))


def spin_coupling(params: ModelParams, sz: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """sqrt(2) (g_a sz_a + g_b sz_b)."""
    return math.sqrt(2.0) * (params.g_a * sz[0] + params.g_b * sz[1])


def spin_energy(params: ModelParams, sz: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    return params.omega_a * sz[0] + params.omega_b * sz[1]


def oscillator_rate(params: ModelParams, prefactor: str = "omega") -> float:
    if prefactor == "omega":
        return params.omega
    if prefactor == "omega_over_2":
        return params.omega / 2.0
    raise ValueError(f"oscillator prefactor must be one of {PREFACTORS}, got {prefactor!r}")


def _check_quantum_layout(layout: FactorLayout):
    if layout.spin_count != 2 or layout.labels() != (PI_LABEL,):
        raise ValueError("quantum model needs 2 spins and a single 'Pi' axis")


def _check_kvn_layout(layout: FactorLayout):
    if layout.spin_count != 2 or sorted(layout.labels()) != sorted((PI_LABEL, XI_LABEL)):
        raise ValueError("KvN model needs 2 spins and axes 'Pi', 'Xi'")


def build_quantum_model(params: ModelParams, layout: FactorLayout,
                        splitting_order: str = "strang") -> HamiltonianFactors:
    _check_quantum_layout(layout)
    sz = spin_eigenvalues(layout)
    Pi = coordinate_mesh(layout, 0)
    k = wavenumber_mesh(layout, 0)
    potential = (spin_energy(params, sz) + 0.5 * params.omega * Pi ** 2
                 + spin_coupling(params, sz) * Pi)
    kinetic = 0.5 * params.omega * k ** 2
    factors = (
        EvolutionFactor((False,), np.broadcast_to(potential, layout.shape).copy(), name="potential"),
        EvolutionFactor((True,), kinetic, name="kinetic"),
    )
    return HamiltonianFactors(factors, layout, splitting_order)


def kvn_classical_spec(params: ModelParams, prefactor: str = "omega") -> ClassicalHamiltonianSpec:
    c = oscillator_rate(params, prefactor)
    return ClassicalHamiltonianSpec(
        dH_dPi=lambda Pi, Xi, sz: c * Pi + spin_coupling(params, sz),
        dH_dXi=lambda Pi, Xi, sz: c * Xi,
    )


def build_kvn_model(params: ModelParams, layout: FactorLayout, oscillator_prefactor: str = "omega",
                    splitting_order: str = "strang") -> HamiltonianFactors:
    _check_kvn_layout(layout)
    gen = build_kvn_generator(kvn_classical_spec(params, oscillator_prefactor), layout,
                              splitting_order)
    sz = spin_eigenvalues(layout)
    factors = list(gen.factors)
    spins = spin_energy(params, sz)
    coord = [f for f in factors if f.is_coordinate_diagonal]
    if coord:
        f = coord[0]
        factors[factors.index(f)] = EvolutionFactor(f.wavenumber_axes, f.phase_table + spins, f.name)
    else:
        factors.append(EvolutionFactor((False, False), np.asarray(spins, dtype=float), name="spin"))
    return HamiltonianFactors(tuple(factors), layout, splitting_order)


def build_model(kind: str, params: ModelParams, layout: FactorLayout,
                oscillator_prefactor: str = "omega", splitting_order: str = "strang"):
    if kind == "quantum":
        return build_quantum_model(params, layout, splitting_order)
    if kind == "kvn":
        return build_kvn_model(params, layout, oscillator_prefactor, splitting_order)
    raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")


def classical_energy(params: ModelParams, layout: FactorLayout, prefactor: str = "omega") -> np.ndarray:
    """Spin-conditioned classical oscillator energy c/2 (Pi^2 + xi^2) + coupling * Pi."""
    _check_kvn_layout(layout)
    sz = spin_eigenvalues(layout)
    c = oscillator_rate(params, prefactor)
    Pi = coordinate_mesh(layout, layout.axis_by_label(PI_LABEL))
    Xi = coordinate_mesh(layout, layout.axis_by_label(XI_LABEL))
    return 0.5 * c * (Pi ** 2 + Xi ** 2) + spin_coupling(params, sz) * Pi
