"""Initial mediator states and spin (x) mediator products."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .state import FactorLayout, GridAxis, MqsState, make_state

# Gaussian centers must sit this many standard deviations inside the grid.
SAFE_SIGMAS = 4.0


@dataclass(frozen=True)
class CoherentStateSpec:
    alpha_re: float = 1.0
    alpha_im: float = 0.0

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    @property
    def center(self) -> tuple[float, float]:
        """Phase-space center (Pi0, xi0) = sqrt(2) (Re alpha, Im alpha)."""
        return math.sqrt(2.0) * self.alpha_re, math.sqrt(2.0) * self.alpha_im


@dataclass(frozen=True)
class WignerGaussian:
    """Coherent-state Wigner function centered at (Pi0, xi0).

    Normalized as ``exp(-[(Pi-Pi0)^2 + (xi-xi0)^2]) / pi`` so it integrates to 1.
    """

    Pi0: float = 0.0
    xi0: float = 0.0

    @classmethod
    def from_coherent(cls, spec: CoherentStateSpec) -> "WignerGaussian":
        return cls(*spec.center)

    def __call__(self, Pi, xi):
        return np.exp(-((Pi - self.Pi0) ** 2 + (xi - self.xi0) ** 2)) / math.pi


def _check_safe(center: float, axis: GridAxis, sigma: float, what: str):
    if abs(center) + SAFE_SIGMAS * sigma > axis.half_width:
        raise ValueError(
            f"{what} center {center:.4g} is within {SAFE_SIGMAS:g} standard deviations of the "
            f"grid boundary (half_width={axis.half_width:g}); increase grid_halfwidth"
        )


def coherent_wavefunction(spec: CoherentStateSpec, axis: GridAxis) -> MqsState:
    """Minimum-uncertainty Gaussian psi(Pi) ~ exp(-(Pi - Pi0)^2 / 2 + i xi0 Pi)."""
    Pi0, xi0 = spec.center
    # |psi|^2 has standard deviation 1/sqrt(2)
    _check_safe(Pi0, axis, 1 / math.sqrt(2.0), "coherent state")
    x = axis.points
    psi = np.exp(-0.5 * (x - Pi0) ** 2 + 1j * xi0 * x)
    return make_state(FactorLayout(0, (axis,)), psi)


def kvn_state_from_wigner(w: WignerGaussian, axPi: GridAxis, axXi: GridAxis) -> MqsState:
    """Real KvN wavefunction sqrt(W) on the (Pi, xi) grid."""
    sigma = 1 / math.sqrt(2.0)
    _check_safe(w.Pi0, axPi, sigma, "Wigner Pi")
    _check_safe(w.xi0, axXi, sigma, "Wigner xi")
    psi_pi = np.exp(-0.5 * (axPi.points - w.Pi0) ** 2)
    psi_xi = np.exp(-0.5 * (axXi.points - w.xi0) ** 2)
    psi = np.multiply.outer(psi_pi, psi_xi)
    return make_state(FactorLayout(0, (axPi, axXi)), psi)


def wigner_on_grid(w: WignerGaussian, axPi: GridAxis, axXi: GridAxis) -> np.ndarray:
    Pi, Xi = np.meshgrid(axPi.points, axXi.points, indexing="ij")
    return w(Pi, Xi)


def _as_spin(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if v.shape != (2,):
        raise ValueError(f"{name} must be a 2-vector")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError(f"{name} is not normalized (norm {np.linalg.norm(v):.12g})")
    return v


def spin_product_state(spin_a, spin_b, mediator: MqsState) -> MqsState:
    """spin_a (x) spin_b (x) mediator, spins first."""
    a = _as_spin(spin_a, "spin_a")
    b = _as_spin(spin_b, "spin_b")
    if mediator.layout.spin_count:
        raise ValueError("mediator state must not carry spins")
    layout = FactorLayout(2, mediator.layout.axes)
    psi = np.multiply.outer(np.multiply.outer(a, b), mediator.tensor)
    return make_state(layout, psi)


PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)
UP = np.array([1.0, 0.0])
