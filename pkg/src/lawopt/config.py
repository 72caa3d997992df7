"""Run configuration: flat ``key = value`` text with ``#`` comments."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .alm import AlmConfig
from .functionals import CONSTRAINTS
from .lattice import ConfigurationError, Lattice
from .problems import FULL_GRID


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None,
                 key: str | None = None):
        self.line = line
        self.path = path
        self.key = key
        self.message = message
        where = f"{path or '<config>'}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)


@dataclass
class RunConfig:
    x_min: float = -5.0
    x_max: float = 5.0
    dx: float = 1e-2
    dt: float = 1e-2
    T: float = 1.0
    u_min: float = -2.0
    u_max: float = 2.0
    du: float = 0.2
    sigma: float = 1.0
    problem: str = "variance_cap"
    alpha: float = 0.4
    x0: float = 0.0
    tolerance: float = 1e-5  # eta_star = omega_star
    c0: float = 10.0
    penalty_growth: float = 10.0
    penalty_test: str = "eta"
    omega_floor: bool = True
    max_outer: int = 100
    max_inner: int = 5000
    dtheta: float = 1e-6
    out_dir: str = "out"
    seed: int = 0
    n_paths: int = 0  # Monte-Carlo cross-check of the final feedback; 0 disables it
    demo_paths: int = 100_000
    epsilons: tuple[float, ...] = (0.04, 0.01, 0.0025)
    full_grid: bool = False

    def validate(self) -> None:
        for name in ("dx", "dt", "T", "tolerance", "c0", "penalty_growth", "dtheta"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}", key=name)
        if self.problem not in CONSTRAINTS:
            raise ConfigError(f"unknown problem {self.problem!r}; expected one of {sorted(CONSTRAINTS)}",
                              key="problem")
        if self.penalty_test not in ("omega", "eta"):
            raise ConfigError("penalty_test must be 'omega' or 'eta'", key="penalty_test")
        if self.n_paths < 0:
            raise ConfigError("n_paths must be non-negative", key="n_paths")
        if self.demo_paths < 1:
            raise ConfigError("demo_paths must be positive", key="demo_paths")
        try:
            self.lattice()
        except ConfigurationError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> dict:
        g = dict(x_min=self.x_min, x_max=self.x_max, dx=self.dx, dt=self.dt, T=self.T,
                 u_min=self.u_min, u_max=self.u_max, du=self.du)
        if self.full_grid:
            g.update(dx=FULL_GRID["dx"], du=FULL_GRID["du"])
        return g

    def lattice(self) -> Lattice:
        return Lattice.uniform(**self.grid())

    def alm_config(self) -> AlmConfig:
        return AlmConfig(eta_star=self.tolerance, omega_star=self.tolerance, c0=self.c0,
                         penalty_growth=self.penalty_growth, max_outer=self.max_outer,
                         max_inner=self.max_inner, dtheta=self.dtheta,
                         penalty_test=self.penalty_test, omega_floor=self.omega_floor)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["epsilons"] = list(self.epsilons)
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(name: str, raw: str):
    kind = _FIELDS[name].type
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind.startswith("tuple"):
        return tuple(float(v) for v in raw.replace(",", " ").split())
    return raw


def parse_config(text: str, path: str | None = None) -> RunConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, raw = line.partition("=")
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ConfigError(f"expected 'key = value', got {line!r}", lineno, path)
            key, raw = parts
        key, raw = key.strip(), raw.strip()
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        try:
            values[key] = _convert(key, raw)
            lines[key] = lineno
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, path) from None
    cfg = RunConfig(**values)
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(exc.message, lines.get(exc.key), path, exc.key) from None
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))
