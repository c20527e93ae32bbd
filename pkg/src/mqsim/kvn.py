"""Koopman-von Neumann generators for separable classical Hamiltonians.

For a classical Hamiltonian H(Pi, xi) the KvN generator is

    H_KvN = (dH/dxi) lambda_Pi - (dH/dPi) lambda_xi (+ W)

where ``lambda`` are the ghost momenta, realized spectrally as wavenumber
multipliers on the periodic grid.  When dH/dxi depends only on xi (and spin)
and dH/dPi only on Pi (and spin), each term is diagonal in a mixed
coordinate/wavenumber representation and can be exponentiated exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .state import (
    PI_LABEL,
    XI_LABEL,
    FactorLayout,
    MqsState,
    dft_tensor,
    make_state,
)

GridFunction = Callable[..., np.ndarray]
GridInput = Union[GridFunction, np.ndarray, float]

SPLITTING_ORDERS = ("first", "strang")


@dataclass(frozen=True, eq=False)
class EvolutionFactor:
    """One additive generator term, diagonal in its own representation.

    ``wavenumber_axes[i]`` is True when grid axis ``i`` is held in its
    wavenumber representation while applying this factor.  ``phase_table``
    holds generator eigenvalues in rad/s and broadcasts to ``layout.shape``.
    """

    wavenumber_axes: tuple[bool, ...]
    phase_table: np.ndarray
    name: str = ""

    def phases(self, dt: float) -> np.ndarray:
        return np.exp(-1j * dt * self.phase_table)

    def apply_tensor(self, tensor: np.ndarray, spin_count: int, dt: float,
                     phases: Optional[np.ndarray] = None) -> np.ndarray:
        k_axes = tuple(spin_count + i for i, w in enumerate(self.wavenumber_axes) if w)
        if phases is None:
            phases = self.phases(dt)
        out = dft_tensor(tensor, k_axes)
        out = out * phases
        return dft_tensor(out, k_axes, inverse=True)

    def apply(self, state: MqsState, dt: float) -> MqsState:
        out = self.apply_tensor(state.tensor, state.layout.spin_count, dt)
        return MqsState(state.layout, out.ravel())

    @property
    def is_coordinate_diagonal(self) -> bool:
        return not any(self.wavenumber_axes)


@dataclass(frozen=True, eq=False)
class HamiltonianFactors:
    factors: tuple[EvolutionFactor, ...]
    layout: FactorLayout
    splitting_order: str = "strang"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("HamiltonianFactors needs at least one factor")
        if self.splitting_order not in SPLITTING_ORDERS:
            raise ValueError(f"splitting_order must be one of {SPLITTING_ORDERS}")
        n_axes = len(self.layout.axes)
        for f in self.factors:
            if len(f.wavenumber_axes) != n_axes:
                raise ValueError(f"factor {f.name!r} declares {len(f.wavenumber_axes)} axes, layout has {n_axes}")
            np.broadcast_shapes(np.shape(f.phase_table), self.layout.shape)

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __getitem__(self, i) -> EvolutionFactor:
        return self.factors[i]


@dataclass(frozen=True)
class ClassicalHamiltonianSpec:
    """Partial derivatives of a classical Hamiltonian on the phase-space grid.

    Each entry is either an array broadcastable to the layout shape or a
    callable ``f(Pi, xi, sz)`` where ``Pi`` and ``xi`` are broadcastable
    coordinate meshes and ``sz`` is a tuple of sigma^z eigenvalue meshes
    (``+1`` for spin index 0, ``-1`` for index 1).  Units are rad/s.
    """

    dH_dPi: GridInput
    dH_dXi: GridInput
    phase_W: Optional[GridInput] = None


def spin_eigenvalues(layout: FactorLayout) -> tuple[np.ndarray, ...]:
    """sigma^z eigenvalue meshes, one per spin, broadcastable to ``layout.shape``."""
    ndim = len(layout.shape)
    out = []
    for s in range(layout.spin_count):
        shape = [1] * ndim
        shape[s] = 2
        out.append(np.array([1.0, -1.0]).reshape(shape))
    return tuple(out)


def coordinate_mesh(layout: FactorLayout, axis_index: int) -> np.ndarray:
    ndim = len(layout.shape)
    ax = layout.axes[axis_index]
    shape = [1] * ndim
    shape[layout.tensor_axis(axis_index)] = ax.n_points
    return ax.points.reshape(shape)


def wavenumber_mesh(layout: FactorLayout, axis_index: int) -> np.ndarray:
    ndim = len(layout.shape)
    ax = layout.axes[axis_index]
    shape = [1] * ndim
    shape[layout.tensor_axis(axis_index)] = ax.n_points
    return ax.wavenumbers.reshape(shape)


def _evaluate(fn: GridInput, Pi, Xi, sz, shape) -> np.ndarray:
    if callable(fn):
        val = fn(Pi, Xi, sz)
    else:
        val = fn
    val = np.asarray(val)
    if np.iscomplexobj(val):
        if np.max(np.abs(val.imag), initial=0.0) > 0:
            raise ValueError("classical Hamiltonian derivatives must be real-valued")
        val = val.real
    return np.broadcast_to(val.astype(float), shape)


def _varies_along(arr: np.ndarray, axis: int) -> bool:
    spread = np.max(np.ptp(arr, axis=axis))
    scale = max(np.max(np.abs(arr)), 1.0)
    return spread > 1e-12 * scale


def _pi_xi_axes(layout: FactorLayout) -> tuple[int, int]:
    if len(layout.axes) != 2:
        raise ValueError("KvN generator needs exactly two grid axes (Pi, Xi)")
    try:
        return layout.axis_by_label(PI_LABEL), layout.axis_by_label(XI_LABEL)
    except KeyError as exc:
        raise ValueError("KvN layout axes must be labelled 'Pi' and 'Xi'") from exc


def build_kvn_generator(spec: ClassicalHamiltonianSpec, layout: FactorLayout,
                        splitting_order: str = "strang") -> HamiltonianFactors:
    """Two-factor KvN generator (plus a coordinate factor when W is given).

    Factor A, ``(dH/dxi) lambda_Pi``, is diagonal in (xi, k_Pi, spin);
    factor B, ``-(dH/dPi) lambda_xi``, is diagonal in (Pi, k_xi, spin).
    """
    i_pi, i_xi = _pi_xi_axes(layout)
    shape = layout.shape
    Pi = coordinate_mesh(layout, i_pi)
    Xi = coordinate_mesh(layout, i_xi)
    sz = spin_eigenvalues(layout)

    d_xi = _evaluate(spec.dH_dXi, Pi, Xi, sz, shape)
    d_pi = _evaluate(spec.dH_dPi, Pi, Xi, sz, shape)
    if _varies_along(d_xi, layout.tensor_axis(i_pi)):
        raise ValueError("non-separable spec: dH/dxi depends on Pi")
    if _varies_along(d_pi, layout.tensor_axis(i_xi)):
        raise ValueError("non-separable spec: dH/dPi depends on xi")

    # collapse the constant direction so the table stays broadcastable
    t_pi, t_xi = layout.tensor_axis(i_pi), layout.tensor_axis(i_xi)
    d_xi = np.take(d_xi, [0], axis=t_pi)
    d_pi = np.take(d_pi, [0], axis=t_xi)

    k_pi = wavenumber_mesh(layout, i_pi)
    k_xi = wavenumber_mesh(layout, i_xi)

    rep_a = tuple(i == i_pi for i in range(2))
    rep_b = tuple(i == i_xi for i in range(2))
    factors = [
        EvolutionFactor(rep_a, d_xi * k_pi, name="dH/dxi * lambda_Pi"),
        EvolutionFactor(rep_b, -d_pi * k_xi, name="-dH/dPi * lambda_xi"),
    ]
    if spec.phase_W is not None:
        w = _evaluate(spec.phase_W, Pi, Xi, sz, shape)
        factors.append(EvolutionFactor((False, False), np.array(w), name="W"))
    return HamiltonianFactors(tuple(factors), layout, splitting_order)


def apply_coordinate(state: MqsState, axis_index: int) -> MqsState:
    """Multiply by the grid coordinate of ``axis_index``."""
    x = coordinate_mesh(state.layout, axis_index)
    return MqsState(state.layout, (state.tensor * x).ravel())


def apply_wavenumber(state: MqsState, axis_index: int) -> MqsState:
    """Apply the spectral ghost momentum ``-i d/dx`` along ``axis_index``."""
    t_ax = state.layout.tensor_axis(axis_index)
    k = wavenumber_mesh(state.layout, axis_index)
    out = dft_tensor(dft_tensor(state.tensor, (t_ax,)) * k, (t_ax,), inverse=True)
    return MqsState(state.layout, out.ravel())


def _commutator_expectation(psi: MqsState, op1, op2) -> complex:
    a = op1(op2(psi))
    b = op2(op1(psi))
    return complex(np.vdot(psi.amplitudes, a.amplitudes - b.amplitudes))


def kvn_commutator_check(layout: FactorLayout, n_states: int = 4, seed: int = 0,
                         tol: float = 1e-6) -> dict:
    """Check the canonical KvN commutators on random localized states.

    States are superpositions of a few Gaussians placed within the central
    third of the grid, so boundary support is negligible.
    """
    i_pi, i_xi = _pi_xi_axes(layout)
    rng = np.random.default_rng(seed)
    Pi = coordinate_mesh(layout, i_pi)
    Xi = coordinate_mesh(layout, i_xi)
    L_pi = layout.axes[i_pi].half_width
    L_xi = layout.axes[i_xi].half_width

    X_pi = lambda s: apply_coordinate(s, i_pi)  # noqa: E731
    X_xi = lambda s: apply_coordinate(s, i_xi)  # noqa: E731
    K_pi = lambda s: apply_wavenumber(s, i_pi)  # noqa: E731
    K_xi = lambda s: apply_wavenumber(s, i_xi)  # noqa: E731

    worst = {"Pi_xi": 0.0, "Pi_lambdaPi": 0.0, "xi_lambdaxi": 0.0,
             "Pi_lambdaxi": 0.0, "xi_lambdaPi": 0.0}
    spin_shape = (2,) * layout.spin_count
    for _ in range(n_states):
        psi = np.zeros(layout.shape, dtype=complex)
        for _ in range(3):
            c_pi = rng.uniform(-L_pi / 3, L_pi / 3)
            c_xi = rng.uniform(-L_xi / 3, L_xi / 3)
            amp = rng.normal(size=spin_shape + (1, 1)) + 1j * rng.normal(size=spin_shape + (1, 1))
            psi = psi + amp * np.exp(-((Pi - c_pi) ** 2 + (Xi - c_xi) ** 2) / 2
                                     + 1j * rng.normal() * Pi)
        st = make_state(layout, psi)
        # both coordinate-diagonal: compose the multipliers directly
        comm = (Pi * Xi - Xi * Pi) * st.tensor
        worst["Pi_xi"] = max(worst["Pi_xi"], float(np.max(np.abs(comm))))
        worst["Pi_lambdaPi"] = max(worst["Pi_lambdaPi"],
                                   abs(_commutator_expectation(st, X_pi, K_pi) - 1j))
        worst["xi_lambdaxi"] = max(worst["xi_lambdaxi"],
                                   abs(_commutator_expectation(st, X_xi, K_xi) - 1j))
        worst["Pi_lambdaxi"] = max(worst["Pi_lambdaxi"], abs(_commutator_expectation(st, X_pi, K_xi)))
        worst["xi_lambdaPi"] = max(worst["xi_lambdaPi"], abs(_commutator_expectation(st, X_xi, K_pi)))
    return {
        "max_errors": worst,
        "coordinates_commute": worst["Pi_xi"] == 0.0,
        "passed": worst["Pi_xi"] == 0.0 and all(v <= tol for v in worst.values()),
        "tolerance": tol,
    }
