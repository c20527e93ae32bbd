"""Experiment orchestration: quantum vs KvN mediator runs and the oracle suite."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig, config_items
from .initstate import (
    CoherentStateSpec,
    WignerGaussian,
    coherent_wavefunction,
    kvn_state_from_wigner,
    spin_product_state,
)
from .kvn import kvn_commutator_check
from .models import build_model, kvn_layout, oscillator_rate, quantum_layout
from .observables import phase_space_means, spin_observables
from .oracles import all_sectors, classical_trajectory, liouville_characteristics_evolve
from .propagator import (
    DenseExponential,
    EvolveSettings,
    SplitStepper,
    dense_generator,
    evolve,
    expm_evolve,
)
from .state import FactorLayout, MqsState, boundary_leakage

log = logging.getLogger(__name__)

COLUMNS = (
    "t_seconds",
    "norm",
    "boundary_leakage",
    "purity_spin_a",
    "purity_spin_b",
    "purity_spin_pair",
    "purity_mediator",
    "log_negativity_spins",
    "mean_Pi",
    "mean_xi",
)

LEAKAGE_ABORT = 1e-4
LEAKAGE_INITIAL = 1e-10


class LeakageError(RuntimeError):
    """Wavefunction support reached the periodic grid boundary."""


def layout_for(cfg: RunConfig, n_points: int | None = None) -> FactorLayout:
    n = n_points or cfg.n_points
    if cfg.model == "quantum":
        return quantum_layout(n, cfg.grid_halfwidth)
    return kvn_layout(n, cfg.grid_halfwidth)


def initial_state(cfg: RunConfig, layout: FactorLayout) -> MqsState:
    spec = CoherentStateSpec(cfg.alpha_re, cfg.alpha_im)
    if len(layout.axes) == 1:
        mediator = coherent_wavefunction(spec, layout.axes[0])
    else:
        mediator = kvn_state_from_wigner(WignerGaussian.from_coherent(spec), *layout.axes)
    return spin_product_state(cfg.spin_a_state, cfg.spin_b_state, mediator)


def record_observer(t: float, state: MqsState) -> dict:
    leak = boundary_leakage(state)
    rec = {"t_seconds": t, "norm": state.norm, "boundary_leakage": leak}
    rec.update(spin_observables(state))
    rec["mean_Pi"], rec["mean_xi"], _ = phase_space_means(state)
    if leak > LEAKAGE_ABORT:
        raise LeakageError(f"boundary leakage {leak:.3g} exceeds {LEAKAGE_ABORT:g} at t={t:.6g} s; "
                           "increase grid_halfwidth")
    return rec


@dataclass
class RunResult:
    path: Path
    rows: list
    complete: bool


def write_series(path, cfg: RunConfig, rows, extra_header=()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for k, v in config_items(cfg):
            fh.write(f"# {k} = {v}\n")
        for k, v in extra_header:
            fh.write(f"# {k} = {v}\n")
        fh.write(",".join(COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(repr(float(r[c])) for c in COLUMNS) + "\n")
    return path


def read_series(path) -> dict:
    """Columns of a time-series file as numpy arrays."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return {h: data[:, i] for i, h in enumerate(header)}


def run_experiment(cfg: RunConfig, output_path=None) -> RunResult:
    """Build, prepare, evolve and write the time series for ``cfg``.

    Raises :class:`LeakageError` when the state approaches the grid boundary.
    """
    params = cfg.params()
    layout = layout_for(cfg)
    h = build_model(cfg.model, params, layout, cfg.kvn_oscillator_prefactor, cfg.splitting_order)
    try:
        psi0 = initial_state(cfg, layout)
    except ValueError as exc:
        raise LeakageError(str(exc)) from exc
    leak0 = boundary_leakage(psi0)
    if leak0 > LEAKAGE_INITIAL:
        raise LeakageError(f"initial boundary leakage {leak0:.3g} exceeds {LEAKAGE_INITIAL:g}; "
                           "increase grid_halfwidth")
    settings = EvolveSettings(cfg.dt, cfg.n_steps, cfg.splitting_order, cfg.record_every)
    log.info("running %s model: %d steps of %.4g s on %d amplitudes",
             cfg.model, settings.n_steps, settings.dt, layout.dim)
    series = evolve(psi0, h, settings, [record_observer])
    if isinstance(series.exception, LeakageError):
        raise series.exception
    if not series.complete:
        raise RuntimeError(series.error)
    path = write_series(output_path or cfg.output_path, cfg, series.records, [
        ("period_seconds", repr(cfg.period)),
        ("dt_seconds", repr(cfg.dt)),
        ("n_steps", str(cfg.n_steps)),
    ])
    return RunResult(path, series.records, series.complete)


# --- oracle suite -----------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    status: str
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "FAIL"

    def line(self) -> str:
        return f"[{self.status}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()


VALIDATE_N = 32
STRANG_TOL = 1e-4
CONVERGENCE_RANGE = (3.0, 5.0)
CHARACTERISTICS_N = 128
CHARACTERISTICS_TOL = 1e-4
COMMUTATOR_TOL = 1e-6


def check_strang_vs_dense(cfg: RunConfig, model: str, n_points: int = VALIDATE_N) -> list[Check]:
    """Split-step error at t = T against the exact exponential, at dt and dt/2."""
    c = cfg.replace(model=model)
    params = c.params()
    layout = layout_for(c, n_points)
    h = build_model(model, params, layout, c.kvn_oscillator_prefactor, "strang")
    psi0 = initial_state(c, layout)
    T = params.period
    exact = expm_evolve(psi0, DenseExponential(dense_generator(h)), T)
    n = max(1, int(round(1.0 / c.dt_fraction)))
    errs = []
    for steps in (n, 2 * n):
        out = SplitStepper(h, T / steps).step(psi0, steps)
        errs.append(float(np.linalg.norm(out.amplitudes - exact.amplitudes)))
    ratio = errs[0] / errs[1] if errs[1] > 0 else math.inf
    lo, hi = CONVERGENCE_RANGE
    err_status = "PASS" if errs[0] <= STRANG_TOL else "DEGRADED"
    return [
        Check(f"strang_vs_dense[{model}]", errs[0], STRANG_TOL, err_status,
              f"dt=T/{n}, n={n_points}"),
        Check(f"strang_convergence[{model}]", ratio, hi,
              "PASS" if lo <= ratio <= hi else "FAIL",
              f"error ratio dt/(dt/2), expected in [{lo:g}, {hi:g}]"),
    ]


def check_kvn_characteristics(cfg: RunConfig, n_points: int = CHARACTERISTICS_N) -> list[Check]:
    """KvN densities vs Liouville transport after one period; means over two periods."""
    c = cfg.replace(model="kvn")
    params = c.params()
    rate = oscillator_rate(params, c.kvn_oscillator_prefactor)
    layout = layout_for(c, n_points)
    h = build_model("kvn", params, layout, c.kvn_oscillator_prefactor, "strang")
    ax_pi, ax_xi = layout.axes
    dA = ax_pi.spacing * ax_xi.spacing
    w = WignerGaussian.from_coherent(CoherentStateSpec(c.alpha_re, c.alpha_im))
    mediator = kvn_state_from_wigner(w, ax_pi, ax_xi)
    # equal-weight superposition populates every sector; sectors never mix
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    psi0 = spin_product_state(plus, plus, mediator)
    T = params.period
    n_period = max(1, int(round(1.0 / c.dt_fraction)))
    sectors = all_sectors(params)

    def means(t, state):
        worst = 0.0
        for sec in sectors:
            block = state.tensor[sec.spin_indices] * 2.0
            sub = MqsState(FactorLayout(0, layout.axes), block.ravel())
            m_pi, m_xi, _ = phase_space_means(sub)
            ref_pi, ref_xi = classical_trajectory(w.Pi0, w.xi0, sec, rate, t)
            worst = max(worst, abs(m_pi - ref_pi), abs(m_xi - ref_xi))
        return {"mean_error": worst}

    stepper = SplitStepper(h, T / n_period)
    state = psi0
    mean_err = means(0.0, state)["mean_error"]
    density_err = math.nan
    for k in range(1, 2 * n_period + 1):
        state = stepper.step(state)
        mean_err = max(mean_err, means(k * T / n_period, state)["mean_error"])
        if k == n_period:
            density_err = 0.0
            for sec in sectors:
                dens = 4.0 * np.abs(state.tensor[sec.spin_indices]) ** 2 / dA
                ref = liouville_characteristics_evolve(w, sec, rate, T, ax_pi, ax_xi)
                density_err = max(density_err, float(np.max(np.abs(dens - ref))))
    return [
        Check("kvn_vs_characteristics_density", density_err, CHARACTERISTICS_TOL,
              "PASS" if density_err <= CHARACTERISTICS_TOL else "FAIL",
              f"n={n_points}, dt=T/{n_period}, t=T"),
        Check("kvn_vs_trajectory_means", mean_err, CHARACTERISTICS_TOL,
              "PASS" if mean_err <= CHARACTERISTICS_TOL else "FAIL", "over 2 periods"),
    ]


def check_commutators(cfg: RunConfig, n_points: int = CHARACTERISTICS_N) -> list[Check]:
    layout = kvn_layout(n_points, cfg.grid_halfwidth)
    rep = kvn_commutator_check(layout, tol=COMMUTATOR_TOL)
    worst = max(rep["max_errors"].values())
    return [Check("kvn_commutators", worst, COMMUTATOR_TOL, "PASS" if rep["passed"] else "FAIL",
                  f"[Pi, xi] = {rep['max_errors']['Pi_xi']:.1e}")]


def check_initial_leakage(cfg: RunConfig) -> list[Check]:
    out = []
    for model in ("quantum", "kvn"):
        c = cfg.replace(model=model)
        try:
            leak = boundary_leakage(initial_state(c, layout_for(c)))
            status = "PASS" if leak <= LEAKAGE_INITIAL else "FAIL"
            detail = f"grid_halfwidth={c.grid_halfwidth:g}"
        except ValueError as exc:
            leak, status, detail = math.inf, "FAIL", str(exc)
        out.append(Check(f"initial_leakage[{model}]", leak, LEAKAGE_INITIAL, status, detail))
    return out


def validate(cfg: RunConfig) -> list[Check]:
    """Run the oracle suite; checks that cannot even be set up are reported as FAIL."""
    checks: list[Check] = []
    suite = [
        ("initial_leakage", lambda: check_initial_leakage(cfg)),
        ("commutators", lambda: check_commutators(cfg)),
        ("strang_vs_dense[quantum]", lambda: check_strang_vs_dense(cfg, "quantum")),
        ("strang_vs_dense[kvn]", lambda: check_strang_vs_dense(cfg, "kvn")),
        ("kvn_vs_characteristics", lambda: check_kvn_characteristics(cfg)),
    ]
    for name, fn in suite:
        try:
            checks.extend(fn())
        except (ValueError, RuntimeError) as exc:
            checks.append(Check(name, math.nan, math.nan, "FAIL", f"could not run: {exc}"))
    return checks
