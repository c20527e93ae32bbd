"""Classical references for the KvN mediator: closed-form flow and Liouville transport.

In a sigma^z eigensector the mediator obeys the linear flow

    dPi/dt = c xi,    dxi/dt = -c Pi + force,    force = -sqrt(2)(g_a s_a + g_b s_b)

i.e. a rotation at rate ``c`` about the fixed point (force / c, 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .initstate import SAFE_SIGMAS, WignerGaussian
from .models import ModelParams
from .state import GridAxis


@dataclass(frozen=True)
class SectorForce:
    s_a: int
    s_b: int
    force: float

    @classmethod
    def from_params(cls, s_a: int, s_b: int, params: ModelParams) -> "SectorForce":
        if s_a not in (1, -1) or s_b not in (1, -1):
            raise ValueError("spin eigenvalues must be +1 or -1")
        return cls(s_a, s_b, -math.sqrt(2.0) * (params.g_a * s_a + params.g_b * s_b))

    @property
    def spin_indices(self) -> tuple[int, int]:
        """Tensor indices of this sector (index 0 <-> +1)."""
        return (0 if self.s_a == 1 else 1, 0 if self.s_b == 1 else 1)


def all_sectors(params: ModelParams) -> list[SectorForce]:
    return [SectorForce.from_params(a, b, params) for a in (1, -1) for b in (1, -1)]


def classical_trajectory(Pi0: float, xi0: float, sector: SectorForce, c: float,
                         t) -> tuple:
    """Closed-form phase-space point at time ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    F = sector.force
    if c == 0:
        # no restoring term: uniform acceleration in xi, Pi frozen
        return Pi0 + 0.0 * t, xi0 + F * t
    center = F / c
    u0 = Pi0 - center
    ct, st = np.cos(c * t), np.sin(c * t)
    Pi = center + u0 * ct + xi0 * st
    xi = -u0 * st + xi0 * ct
    return Pi, xi


def integrate_trajectory(Pi0: float, xi0: float, sector: SectorForce, c: float, t: float,
                         rtol: float = 1e-13, atol: float = 1e-13) -> tuple[float, float]:
    """Same flow by an explicit Runge-Kutta integrator (independent check)."""
    F = sector.force

    def rhs(_, y):
        return [c * y[1], -c * y[0] + F]

    if t == 0:
        return float(Pi0), float(xi0)
    sol = solve_ivp(rhs, (0.0, t), [Pi0, xi0], method="DOP853", rtol=rtol, atol=atol)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def liouville_characteristics_evolve(w: WignerGaussian, sector: SectorForce, c: float, t: float,
                                     axPi: GridAxis, axXi: GridAxis) -> np.ndarray:
    """W(Phi_{-t}(Pi, xi)) on the (Pi, xi) grid, shape (n_Pi, n_xi)."""
    Pi_t, xi_t = classical_trajectory(w.Pi0, w.xi0, sector, c, t)
    sigma = 1 / math.sqrt(2.0)
    if (abs(Pi_t) + SAFE_SIGMAS * sigma > axPi.half_width
            or abs(xi_t) + SAFE_SIGMAS * sigma > axXi.half_width):
        raise ValueError(f"transported Gaussian at ({float(Pi_t):.3g}, {float(xi_t):.3g}) "
                         "leaves the safe grid region")
    Pi, Xi = np.meshgrid(axPi.points, axXi.points, indexing="ij")
    Pi_b, xi_b = classical_trajectory(Pi, Xi, sector, c, -t)
    return w(Pi_b, xi_b)
