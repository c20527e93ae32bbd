"""Flat ``key = value`` run configuration.

Lines starting with ``#`` and blank lines are ignored; a ``#`` after a value
starts a comment.  Spin states are two comma-separated complex numbers, e.g.
``spin_a_state = 0.7071067811865476, 0.7071067811865476`` or ``1, 0``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .models import MODEL_KINDS, PREFACTORS, ModelParams

_PLUS = (complex(1 / math.sqrt(2.0)), complex(1 / math.sqrt(2.0)))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: str = "quantum"
    # frequencies in Hz (cycles/s); converted to rad/s for the model
    omega_hz: float = 1.59
    g_a_hz: float = 1.59
    g_b_hz: float = 2.23
    omega_a_hz: float = 7.0e-6
    omega_b_hz: float = 3.34e-4
    mass: float = 1.0
    n_qubits_per_axis: int = 7
    grid_halfwidth: float = 14.0
    alpha_re: float = 1.0
    alpha_im: float = 0.0
    spin_a_state: tuple = _PLUS
    spin_b_state: tuple = _PLUS
    dt_fraction: float = 1e-3
    periods: float = 2.0
    record_every: int = 10
    kvn_oscillator_prefactor: str = "omega"
    splitting_order: str = "strang"
    output_path: str = "mqs_run.csv"

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        if self.kvn_oscillator_prefactor not in PREFACTORS:
            raise ConfigError(f"kvn_oscillator_prefactor must be one of {PREFACTORS}")
        if self.splitting_order not in ("first", "strang"):
            raise ConfigError("splitting_order must be 'first' or 'strang'")
        if not 3 <= self.n_qubits_per_axis <= 12:
            raise ConfigError("n_qubits_per_axis must be between 3 and 12")
        if not self.grid_halfwidth > 0:
            raise ConfigError("grid_halfwidth must be positive")
        if not (0 < self.dt_fraction <= 1):
            raise ConfigError("dt_fraction must be in (0, 1]")
        if not self.periods > 0:
            raise ConfigError("periods must be positive")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")
        if not self.omega_hz > 0:
            raise ConfigError("omega_hz must be positive")
        for name in ("spin_a_state", "spin_b_state"):
            v = tuple(complex(x) for x in getattr(self, name))
            if len(v) != 2:
                raise ConfigError(f"{name} needs two components")
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise ConfigError(f"{name} is not normalized")
            object.__setattr__(self, name, v)

    def params(self) -> ModelParams:
        return ModelParams.from_hz(self.omega_hz, self.omega_a_hz, self.omega_b_hz,
                                   self.g_a_hz, self.g_b_hz, mass=self.mass)

    @property
    def period(self) -> float:
        return 1.0 / self.omega_hz

    @property
    def dt(self) -> float:
        return self.dt_fraction * self.period

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.periods / self.dt_fraction)))

    @property
    def n_points(self) -> int:
        return 2 ** self.n_qubits_per_axis

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_format_complex(c) for c in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _format_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return repr(c).strip("()")


def config_items(cfg: RunConfig) -> list[tuple[str, str]]:
    return [(f.name, _format_value(getattr(cfg, f.name))) for f in fields(cfg)]


def dumps(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config_items(cfg))


def save(cfg: RunConfig, path) -> None:
    Path(path).write_text(dumps(cfg))


def _parse_value(kind, raw: str, key: str):
    try:
        if kind is tuple:
            return tuple(complex(part.strip().replace(" ", "")) for part in raw.split(","))
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def loads(text: str) -> RunConfig:
    types = {f.name: type(f.default) for f in fields(RunConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(types[key], raw, key)
    try:
        return RunConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)
