"""Split-step spectral propagation and a dense matrix-exponential oracle."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .kvn import EvolutionFactor, HamiltonianFactors
from .state import FactorLayout, MqsState, dft_tensor

DENSE_DIM_CAP = 4096

Observer = Callable[[float, MqsState], Any]


@dataclass(frozen=True)
class EvolveSettings:
    dt: float
    n_steps: int
    splitting_order: str = "strang"
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.splitting_order not in ("first", "strang"):
            raise ValueError("splitting_order must be 'first' or 'strang'")


@dataclass
class TimeSeries:
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    records: list = field(default_factory=list)
    complete: bool = True
    error: Optional[str] = None
    exception: Optional[BaseException] = None
    final_state: Optional[MqsState] = None

    def column(self, key):
        return np.array([r[key] for r in self.records])


def _grid_constant(f: EvolutionFactor, layout: FactorLayout) -> bool:
    shape = np.shape(f.phase_table)
    grid_dims = shape[len(shape) - len(layout.axes):] if len(shape) >= len(layout.axes) else ()
    return all(d == 1 for d in grid_dims)


class SplitStepper:
    """Precomputed phase multipliers for repeated split steps at fixed ``dt``.

    Factors that are constant over the grid (spin-only terms) commute with
    everything, so they are folded into the first grid-dependent factor.
    """

    def __init__(self, h: HamiltonianFactors, dt: float, order: Optional[str] = None):
        self.layout = h.layout
        self.dt = float(dt)
        self.order = order or h.splitting_order
        if self.order not in ("first", "strang"):
            raise ValueError("splitting order must be 'first' or 'strang'")
        shape = self.layout.shape
        spin_only = [f for f in h.factors if _grid_constant(f, self.layout)]
        rest = [f for f in h.factors if not _grid_constant(f, self.layout)]
        if not rest:
            rest, spin_only = [spin_only[0]], spin_only[1:]
        tables = [np.broadcast_to(f.phase_table, shape).astype(float) for f in rest]
        for f in spin_only:
            tables[0] = tables[0] + f.phase_table
        s = self.layout.spin_count
        self._axes = [tuple(s + i for i, w in enumerate(f.wavenumber_axes) if w) for f in rest]
        self._tables = tables
        self._full = [np.exp(-1j * self.dt * t) for t in tables]
        self._half = [np.exp(-0.5j * self.dt * t) for t in tables]

    def _apply(self, psi, i, phases):
        ax = self._axes[i]
        return dft_tensor(dft_tensor(psi, ax) * phases, ax, inverse=True)

    def _sequence(self, n_steps: int):
        """(factor index, multiplier) sequence for ``n_steps`` consecutive steps."""
        n = len(self._tables)
        if self.order == "first" or n == 1:
            return [(i, self._full[i]) for _ in range(n_steps) for i in range(n)]
        inner = [(i, self._half[i]) for i in range(n - 1)]
        middle = [(n - 1, self._full[n - 1])]
        one = inner + middle + inner[::-1]
        seq = []
        for _ in range(n_steps):
            if seq and seq[-1][0] == one[0][0]:
                # merge the trailing half step with the next leading half step
                seq[-1] = (one[0][0], self._full[one[0][0]])
                seq.extend(one[1:])
            else:
                seq.extend(one)
        return seq

    def run(self, tensor: np.ndarray, n_steps: int = 1) -> np.ndarray:
        psi = tensor
        for i, ph in self._sequence(n_steps):
            psi = self._apply(psi, i, ph)
        return psi

    def step(self, state: MqsState, n_steps: int = 1) -> MqsState:
        if state.layout != self.layout:
            raise ValueError("state layout does not match Hamiltonian layout")
        out = self.run(state.tensor, n_steps)
        return MqsState(self.layout, np.ascontiguousarray(out).ravel())


def strang_step(state: MqsState, h: HamiltonianFactors, dt: float,
                order: Optional[str] = None) -> MqsState:
    """One split step: A/2 B A/2 for ``strang``, A B for ``first``."""
    return SplitStepper(h, dt, order).step(state)


def evolve(state: MqsState, h: HamiltonianFactors, s: EvolveSettings,
           observers: Sequence[Observer] = ()) -> TimeSeries:
    """Propagate ``s.n_steps`` split steps, recording every ``s.record_every``.

    Each observer is called as ``obs(t, state)`` and may return a mapping
    (merged into the record) or a scalar (stored under the observer's name).
    Records are taken at step 0, every ``record_every`` steps and the final step.
    """
    stepper = SplitStepper(h, s.dt, s.splitting_order)
    series = TimeSeries()
    record_steps = sorted(set(range(0, s.n_steps + 1, s.record_every)) | {s.n_steps})
    current = state
    done = 0
    for target in record_steps:
        if target > done:
            current = stepper.step(current, target - done)
            done = target
        t = done * s.dt
        rec = {}
        try:
            for obs in observers:
                val = obs(t, current)
                if isinstance(val, dict):
                    rec.update(val)
                else:
                    rec[getattr(obs, "__name__", f"observer{len(rec)}")] = val
        except Exception as exc:  # noqa: BLE001 - any observer error ends the run
            series.complete = False
            series.error = f"observer failed at step {done}: {exc!r}"
            series.exception = exc
            break
        series.steps.append(done)
        series.times.append(t)
        series.records.append(rec)
    series.final_state = current
    return series


def _grid_operator(tables_and_axes, grid_shape) -> np.ndarray:
    """Dense grid matrix of sum_f F_f^dag diag(p_f) F_f for one spin sector."""
    g = int(np.prod(grid_shape))
    eye = np.eye(g, dtype=complex).reshape((g,) + tuple(grid_shape))
    out = np.zeros((g,) + tuple(grid_shape), dtype=complex)
    for table, axes in tables_and_axes:
        shifted = tuple(a + 1 for a in axes)
        out += dft_tensor(dft_tensor(eye, shifted) * table, shifted, inverse=True)
    # out[j] is the image of basis vector j -> column j
    return out.reshape(g, g).T


def dense_generator(h: HamiltonianFactors, layout: Optional[FactorLayout] = None) -> np.ndarray:
    """Full Hermitian generator matrix that the split-step method approximates."""
    layout = layout or h.layout
    if layout != h.layout:
        raise ValueError("layout does not match Hamiltonian layout")
    dim = layout.dim
    if dim > DENSE_DIM_CAP:
        raise ValueError(f"dense generator limited to dimension {DENSE_DIM_CAP}, got {dim}")
    s = layout.spin_count
    shape = layout.shape
    grid_shape = shape[s:]
    g = int(np.prod(grid_shape, dtype=np.int64))
    G = np.zeros((dim, dim), dtype=complex)
    for idx, sector in enumerate(itertools.product(range(2), repeat=s)):
        items = []
        for f in h.factors:
            table = np.broadcast_to(f.phase_table, shape)[sector]
            axes = tuple(i for i, w in enumerate(f.wavenumber_axes) if w)
            items.append((table, axes))
        block = _grid_operator(items, grid_shape)
        G[idx * g:(idx + 1) * g, idx * g:(idx + 1) * g] = block
    # symmetrize away FFT round-off
    return 0.5 * (G + G.conj().T)


class DenseExponential:
    """Eigendecomposition of a Hermitian generator, split into decoupled blocks."""

    def __init__(self, G: np.ndarray, hermitian_tol: float = 1e-9):
        G = np.asarray(G, dtype=complex)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("generator must be a square matrix")
        asym = np.max(np.abs(G - G.conj().T)) if G.size else 0.0
        if asym > hermitian_tol:
            raise ValueError(f"generator is not Hermitian (asymmetry {asym:.3g})")
        self.dim = G.shape[0]
        n_blocks, labels = connected_components(np.abs(G) > 0, directed=False)
        self.blocks = []
        for b in range(n_blocks):
            idx = np.flatnonzero(labels == b)
            sub = G[np.ix_(idx, idx)]
            w, v = np.linalg.eigh(0.5 * (sub + sub.conj().T))
            self.blocks.append((idx, w, v))

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex).ravel()
        if psi.size != self.dim:
            raise ValueError("state dimension does not match generator")
        out = np.empty_like(psi)
        for idx, w, v in self.blocks:
            out[idx] = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi[idx]))
        return out


def expm_evolve(state: MqsState, G, t: float) -> MqsState:
    """Apply exp(-i G t) exactly via eigendecomposition.

    ``G`` may be a matrix or a prepared :class:`DenseExponential`.
    """
    prop = G if isinstance(G, DenseExponential) else DenseExponential(G)
    return MqsState(state.layout, prop.apply(state.amplitudes, t))
