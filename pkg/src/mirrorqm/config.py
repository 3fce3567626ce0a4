"""Flat ``key = value`` scenario configuration.

Lines starting with ``#`` and blank lines are ignored; trailing ``# ...``
comments are stripped.  Unknown or repeated keys are errors.  ``x_values`` is
a comma-separated list.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .core import Grid1D, PhysicalConstants, make_grid

__all__ = ["ConfigError", "ScenarioConfig", "parse_config", "load_config", "SCENARIOS"]

SCENARIOS = ("arrival", "stationary", "bayes-demo")
BRANCHES = ("plus", "minus", "both")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "arrival"
    hbar: float = 1.0
    mass: float = 1.0
    # momentum spectrum
    p0: float = 5.0
    sigma: float = 0.25
    branch: str = "plus"
    p_start: float = 0.01
    p_stop: float = 10.0
    p_count: int = 2048
    # grids
    t_start: float = -2.0
    t_stop: float = 14.0
    t_count: int = 2001
    x_start: float = -6.0
    x_stop: float = 6.0
    x_count: int = 241
    eps_start: float = -9.0
    eps_stop: float = 11.0
    eps_count: int = 2001
    # stationary model
    energy: float = 1.0
    lam: float = 1.0
    gamma: float = 0.0
    x_values: tuple[float, ...] = (20.0,)
    seed: int = 0
    n_events: int = 100_000
    output: str = ""
    events_output: str = ""

    @classmethod
    def preset(cls, scenario: str) -> ScenarioConfig:
        """Built-in defaults for each command."""
        if scenario == "arrival":
            return cls(scenario="arrival", t_start=-2.0, t_stop=14.0, t_count=2001,
                       x_values=(10.0, 20.0, 40.0))
        if scenario == "stationary":
            return cls(scenario="stationary", lam=1.0, gamma=2.0,
                       eps_start=-29.0, eps_stop=31.0, eps_count=6001)
        if scenario == "bayes-demo":
            return cls(scenario="bayes-demo", lam=1.0, t_start=0.0, t_stop=20.0,
                       t_count=2001, x_start=-6.0, x_stop=6.0, x_count=241, seed=12)
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")

    @property
    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.hbar, self.mass)

    def grid(self, axis: str) -> Grid1D:
        return make_grid(
            getattr(self, f"{axis}_start"),
            getattr(self, f"{axis}_stop"),
            getattr(self, f"{axis}_count"),
        )

    def validate(self) -> ScenarioConfig:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.branch not in BRANCHES:
            raise ConfigError(f"branch must be one of {BRANCHES}, got {self.branch!r}")
        try:
            self.constants
            for axis in ("p", "t", "x", "eps"):
                self.grid(axis)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("p0", "sigma", "lam"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be nonnegative, got {self.gamma}")
        if self.p_start <= 0:
            raise ConfigError(f"p_start must be positive, got {self.p_start}")
        if self.scenario == "arrival" and not self.x_values:
            raise ConfigError("x_values is empty; give at least one evaluation position")
        if self.n_events < 1:
            raise ConfigError(f"n_events must be at least 1, got {self.n_events}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                text = ", ".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}".rstrip())
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _convert(key: str, raw: str):
    kind = _FIELDS[key].type
    try:
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if kind == "int":
            return int(raw)
        if kind == "str":
            return raw
        # tuple of floats
        return tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse config text on top of ``base`` (plain defaults when omitted)."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw)
    if base is None:
        scenario = values.get("scenario")
        base = ScenarioConfig.preset(scenario) if scenario else ScenarioConfig()
    return dataclasses.replace(base, **values)


def load_config(path: str | Path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base)
