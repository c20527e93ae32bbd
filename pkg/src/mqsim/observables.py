"""Reduced density matrices, purity, log-negativity and phase-space means."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .kvn import coordinate_mesh, wavenumber_mesh
from .state import PI_LABEL, XI_LABEL, MqsState, dft_tensor

REDUCED_DIM_CAP = 4096
# log-negativities at or below this are reported as zero in summaries
NEGATIVITY_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def check(self, tol: float = 1e-10) -> None:
        rho = self.entries
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            raise ValueError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
        if np.linalg.eigvalsh(rho).min() < -1e-9:
            raise ValueError("density matrix has negative eigenvalues")


def _split(state: MqsState, keep: Iterable[int]):
    """Matrix psi[kept, discarded] for the selected tensor factors."""
    keep = sorted(set(int(k) for k in keep))
    n = state.layout.n_factors
    if not keep or len(keep) >= n:
        raise ValueError("selector must be a nonempty proper subset of the factors")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"factor index out of range (state has {n} factors)")
    rest = [i for i in range(n) if i not in keep]
    t = np.transpose(state.tensor, keep + rest)
    shape = state.layout.shape
    d_keep = int(np.prod([shape[i] for i in keep]))
    return t.reshape(d_keep, -1)


def reduced_density(state: MqsState, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace keeping tensor factors ``keep`` (spins first, then axes)."""
    m = _split(state, keep)
    if m.shape[0] > REDUCED_DIM_CAP:
        raise ValueError(f"kept dimension {m.shape[0]} exceeds cap {REDUCED_DIM_CAP}")
    rho = m @ m.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def purity(rho: DensityMatrix) -> float:
    r = rho.entries
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(r) ** 2))


def subsystem_purity(state: MqsState, keep: Iterable[int]) -> float:
    """Purity of the reduction onto ``keep``, computed on the smaller side."""
    m = _split(state, keep)
    m = m / np.linalg.norm(m)
    small = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.conj().T @ m
    return float(np.sum(np.abs(small) ** 2))


def partial_transpose(rho: DensityMatrix, side: str = "b") -> np.ndarray:
    if rho.dim != 4:
        raise ValueError("partial transpose implemented for two qubits (dim 4)")
    r = rho.entries.reshape(2, 2, 2, 2)  # a, b, a', b'
    if side == "a":
        r = r.transpose(2, 1, 0, 3)
    elif side == "b":
        r = r.transpose(0, 3, 2, 1)
    else:
        raise ValueError("transpose side must be 'a' or 'b'")
    return r.reshape(4, 4)


def log_negativity(rho_ab: DensityMatrix, transpose_side: str = "b") -> float:
    """log2 of the trace norm of the partial transpose of a two-qubit state."""
    pt = partial_transpose(rho_ab, transpose_side)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    val = float(np.log2(np.sum(np.abs(ev))))
    return max(val, 0.0) if val > -1e-9 else val


def summary_negativity(value: float) -> float:
    return 0.0 if value <= NEGATIVITY_FLOOR else value


def phase_space_means(state: MqsState) -> tuple[float, float, float]:
    """<Pi>, <xi> and the norm of ``state``.

    With a single 'Pi' axis, xi is the spectral momentum; with 'Pi' and 'Xi'
    axes both are grid coordinates.
    """
    layout = state.layout
    labels = layout.labels()
    nrm2 = float(np.sum(state.probabilities()))
    if labels.count(PI_LABEL) != 1 or len(labels) not in (1, 2):
        raise ValueError("state needs one 'Pi' axis and optionally one 'Xi' axis")
    i_pi = layout.axis_by_label(PI_LABEL)
    p = state.probabilities()
    mean_pi = float(np.sum(p * coordinate_mesh(layout, i_pi))) / nrm2
    if XI_LABEL in labels:
        mean_xi = float(np.sum(p * coordinate_mesh(layout, layout.axis_by_label(XI_LABEL)))) / nrm2
    else:
        if len(labels) != 1:
            raise ValueError("state layout has an unexpected axis")
        t_ax = layout.tensor_axis(i_pi)
        pk = np.abs(dft_tensor(state.tensor, (t_ax,))) ** 2
        mean_xi = float(np.sum(pk * wavenumber_mesh(layout, i_pi))) / nrm2
    return mean_pi, mean_xi, float(np.sqrt(nrm2))


def spin_observables(state: MqsState) -> dict:
    """Purities and spin-spin log-negativity for a 2-spin (x) mediator state."""
    if state.layout.spin_count != 2:
        raise ValueError("expected a state with two spins")
    rho_pair = reduced_density(state, [0, 1])
    r = rho_pair.entries.reshape(2, 2, 2, 2)
    rho_a = DensityMatrix(np.einsum("ijkj->ik", r))
    rho_b = DensityMatrix(np.einsum("ijil->jl", r))
    p_pair = purity(rho_pair)
    mediator = list(range(2, state.layout.n_factors))
    return {
        "purity_spin_a": purity(rho_a),
        "purity_spin_b": purity(rho_b),
        "purity_spin_pair": p_pair,
        "purity_mediator": subsystem_purity(state, mediator),
        "log_negativity_spins": log_negativity(rho_pair),
    }
