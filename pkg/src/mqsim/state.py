"""Composite spin (x) phase-space grid states.

Amplitudes are stored as a flat complex vector; ``MqsState.tensor`` gives the
``(2,) * spin_count + (n_0, n_1, ...)`` view. Spins are the slowest-varying
indices, grid axes follow in layout order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PI_LABEL = "Pi"
XI_LABEL = "Xi"


@dataclass(frozen=True)
class GridAxis:
    """Uniform periodic grid on ``[-half_width, half_width)``.

    ``label`` is ``"Pi"`` for the position-like coordinate and ``"Xi"`` for the
    momentum-like one.
    """

    n_points: int
    half_width: float
    label: str = PI_LABEL

    def __post_init__(self):
        n = int(self.n_points)
        if n < 8 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 8, got {self.n_points}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.label not in (PI_LABEL, XI_LABEL):
            raise ValueError(f"label must be 'Pi' or 'Xi', got {self.label!r}")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "half_width", float(self.half_width))

    @classmethod
    def from_qubits(cls, n_qubits: int, half_width: float, label: str = PI_LABEL) -> "GridAxis":
        return cls(2 ** int(n_qubits), half_width, label)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def points(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Conjugate wavenumbers in FFT (wrap-around) order."""
        m = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        return (np.pi / self.half_width) * m


@dataclass(frozen=True)
class FactorLayout:
    spin_count: int = 0
    axes: tuple[GridAxis, ...] = ()

    def __post_init__(self):
        if self.spin_count < 0:
            raise ValueError("spin_count must be >= 0")
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def shape(self) -> tuple[int, ...]:
        return (2,) * self.spin_count + tuple(ax.n_points for ax in self.axes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    @property
    def n_factors(self) -> int:
        return self.spin_count + len(self.axes)

    def tensor_axis(self, axis_index: int) -> int:
        """Tensor dimension holding grid axis ``axis_index``."""
        if not 0 <= axis_index < len(self.axes):
            raise IndexError(f"axis index {axis_index} out of range for {len(self.axes)} axes")
        return self.spin_count + axis_index

    def axis_by_label(self, label: str) -> int:
        for i, ax in enumerate(self.axes):
            if ax.label == label:
                return i
        raise KeyError(f"layout has no axis labelled {label!r}")

    def labels(self) -> tuple[str, ...]:
        return tuple(ax.label for ax in self.axes)


@dataclass(frozen=True, eq=False)
class MqsState:
    layout: FactorLayout
    amplitudes: np.ndarray = field(repr=False)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.shape)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.tensor) ** 2

    def copy(self) -> "MqsState":
        return MqsState(self.layout, self.amplitudes.copy())


def make_state(layout: FactorLayout, amplitudes: Sequence[complex] | np.ndarray) -> MqsState:
    """Normalize ``amplitudes`` (flat or tensor-shaped) into a state on ``layout``."""
    psi = np.array(amplitudes, dtype=complex).ravel()
    if psi.size != layout.dim:
        raise ValueError(f"amplitude length {psi.size} does not match layout dimension {layout.dim}")
    nrm = np.linalg.norm(psi)
    if not nrm > 0:
        raise ValueError("cannot normalize a zero vector")
    return MqsState(layout, psi / nrm)


def _wrap(layout: FactorLayout, tensor: np.ndarray) -> MqsState:
    return MqsState(layout, np.ascontiguousarray(tensor).ravel())


def dft_tensor(tensor: np.ndarray, tensor_axes, inverse: bool = False) -> np.ndarray:
    """Unitary DFT of ``tensor`` over ``tensor_axes`` (no copy of the layout)."""
    if not tensor_axes:
        return tensor
    if inverse:
        return np.fft.ifftn(tensor, axes=tensor_axes, norm="ortho")
    return np.fft.fftn(tensor, axes=tensor_axes, norm="ortho")


def axis_dft(state: MqsState, axis_index: int, direction: str = "forward") -> MqsState:
    """Unitary DFT along one grid axis; output slots follow ``GridAxis.wavenumbers``."""
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    t_ax = state.layout.tensor_axis(axis_index)
    out = dft_tensor(state.tensor, (t_ax,), inverse=direction == "inverse")
    return _wrap(state.layout, out)


def inner(a: MqsState, b: MqsState) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.layout != b.layout:
        raise ValueError("states have different layouts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def boundary_leakage(state: MqsState, cells: int = 2) -> float:
    """Probability within ``cells`` grid cells of any periodic boundary."""
    p = state.probabilities()
    mask = np.zeros(p.shape, dtype=bool)
    for i, ax in enumerate(state.layout.axes):
        t_ax = state.layout.tensor_axis(i)
        edge = np.zeros(ax.n_points, dtype=bool)
        edge[:cells] = True
        edge[-cells:] = True
        shape = [1] * p.ndim
        shape[t_ax] = ax.n_points
        mask |= edge.reshape(shape)
    return float(p[mask].sum())
