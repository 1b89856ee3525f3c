"""JSON run configuration.

Every section is optional; omitted keys take the defaults below. Unknown
keys are rejected so that typos surface as configuration errors.

.. code-block:: json

    {
      "eos": {"model": "polytropic", "K": 1.0, "gamma": 2.0},
      "c": 0.1,
      "equilibrium": {"rho_e": 1.0, "eta_e": 0.0, "u_e": [0.0, 0.0, 0.0]},
      "dispersion": {"k_min": 0.0, "k_max": 4.0, "n_k": 9, "direction": [1, 0, 0]},
      "grid": {"N": 128, "L": 6.283185307179586, "order": 4, "scheme": "divergence"},
      "time": {"cfl": 0.4, "T": 1.0, "audit_every": 10},
      "output": {"path": null, "format": "csv", "snapshot_every": null},
      "lagrangian": {"gamma": 2.0, "c_L": 0.1, "v_e": 1.0},
      "initial": {"kind": "standing-wave", "amplitude": 0.001, "mode": 1},
      "verify": {"samples": 200},
      "seed": 0
    }

``time`` takes exactly one of ``dt`` or ``cfl``. The van der Waals model
uses ``{"model": "van-der-waals", "a", "b", "R", "cv"}``. ``grid.scheme``
selects the Eulerian momentum discretization (``"divergence"`` or the
energy-conserving ``"conjugate"``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .thermo import EquationOfState, eos_from_dict

INITIAL_KINDS = ("uniform", "standing-wave", "traveling-wave")


@dataclass(frozen=True)
class Equilibrium:
    rho_e: float = 1.0
    eta_e: float = 0.0
    u_e: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class DispersionSweep:
    k_min: float = 0.0
    k_max: float = 4.0
    n_k: int = 9
    direction: tuple = (1.0, 0.0, 0.0)

    def wave_vectors(self) -> np.ndarray:
        d = np.asarray(self.direction, dtype=float)
        d = d / np.linalg.norm(d)
        ks = np.linspace(self.k_min, self.k_max, self.n_k) if self.n_k > 1 else np.array([self.k_min])
        return ks[:, None] * d[None, :]


@dataclass(frozen=True)
class Grid:
    N: int = 128
    L: float = 2.0 * np.pi
    order: int = 4
    scheme: str = "divergence"


@dataclass(frozen=True)
class TimeControl:
    dt: float | None = None
    cfl: float | None = 0.4
    T: float = 1.0
    audit_every: int = 10


@dataclass(frozen=True)
class Output:
    path: str | None = None
    format: str = "csv"
    snapshot_every: int | None = None


@dataclass(frozen=True)
class Lagrangian:
    gamma: float = 2.0
    c_L: float = 0.1
    v_e: float = 1.0


@dataclass(frozen=True)
class Initial:
    kind: str = "standing-wave"
    amplitude: float = 1e-3
    mode: int = 1


@dataclass(frozen=True)
class VerifyOptions:
    samples: int = 200


@dataclass(frozen=True)
class RunConfig:
    eos: dict = field(default_factory=lambda: {"model": "polytropic", "K": 1.0, "gamma": 2.0})
    c: float = 0.1
    equilibrium: Equilibrium = Equilibrium()
    dispersion: DispersionSweep = DispersionSweep()
    grid: Grid = Grid()
    time: TimeControl = TimeControl()
    output: Output = Output()
    lagrangian: Lagrangian = Lagrangian()
    initial: Initial = Initial()
    verify: VerifyOptions = VerifyOptions()
    seed: int = 0

    def build_eos(self) -> EquationOfState:
        try:
            return eos_from_dict(self.eos)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"eos: {exc}") from exc

    def to_dict(self) -> dict:
        def conv(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {f.name: conv(getattr(obj, f.name)) for f in fields(obj)}
            if isinstance(obj, tuple):
                return list(obj)
            return obj

        return conv(self)


def _section(cls, raw, name):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{name}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for f in fields(cls):
        if f.name in raw:
            val = raw[f.name]
            kwargs[f.name] = tuple(val) if isinstance(val, list) else val
    if cls is TimeControl and "dt" in raw and "cfl" not in raw:
        kwargs["cfl"] = None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _validate(cfg: RunConfig) -> None:
    def positive(val, name):
        if not isinstance(val, (int, float)) or not val > 0:
            raise ConfigError(f"{name} must be a positive number, got {val!r}")

    positive(cfg.c, "c")
    positive(cfg.equilibrium.rho_e, "equilibrium.rho_e")
    if len(cfg.equilibrium.u_e) != 3:
        raise ConfigError("equilibrium.u_e must have 3 components")
    d = cfg.dispersion
    if not isinstance(d.n_k, int) or d.n_k < 1:
        raise ConfigError("dispersion.n_k must be an integer >= 1")
    if len(d.direction) != 3 or not np.linalg.norm(np.asarray(d.direction, dtype=float)) > 0:
        raise ConfigError("dispersion.direction must be a nonzero 3-vector")
    if not isinstance(cfg.grid.N, int) or cfg.grid.N < 8:
        raise ConfigError("grid.N must be an integer >= 8")
    positive(cfg.grid.L, "grid.L")
    if cfg.grid.order not in (2, 4, 6):
        raise ConfigError("grid.order must be 2, 4 or 6")
    if cfg.grid.scheme not in ("divergence", "conjugate"):
        raise ConfigError("grid.scheme must be divergence or conjugate")
    t = cfg.time
    if (t.dt is None) == (t.cfl is None):
        raise ConfigError("time: give exactly one of dt or cfl")
    positive(t.dt if t.dt is not None else t.cfl, "time.dt/cfl")
    positive(t.T, "time.T")
    if not isinstance(t.audit_every, int) or t.audit_every < 1:
        raise ConfigError("time.audit_every must be an integer >= 1")
    if cfg.output.format not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")
    se = cfg.output.snapshot_every
    if se is not None and (not isinstance(se, int) or se < 1):
        raise ConfigError("output.snapshot_every must be a positive integer or null")
    positive(cfg.lagrangian.c_L, "lagrangian.c_L")
    positive(cfg.lagrangian.v_e, "lagrangian.v_e")
    if not cfg.lagrangian.gamma > 1:
        raise ConfigError("lagrangian.gamma must exceed 1")
    if cfg.initial.kind not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}")
    if not isinstance(cfg.initial.mode, int) or cfg.initial.mode < 1:
        raise ConfigError("initial.mode must be a positive integer")
    if not isinstance(cfg.verify.samples, int) or cfg.verify.samples < 1:
        raise ConfigError("verify.samples must be a positive integer")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    cfg.build_eos()


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    sections = {
        "equilibrium": Equilibrium,
        "dispersion": DispersionSweep,
        "grid": Grid,
        "time": TimeControl,
        "output": Output,
        "lagrangian": Lagrangian,
        "initial": Initial,
        "verify": VerifyOptions,
    }
    kwargs = {name: _section(cls, raw.get(name), name) for name, cls in sections.items()}
    if "eos" in raw:
        if not isinstance(raw["eos"], dict):
            raise ConfigError("eos: expected an object")
        kwargs["eos"] = dict(raw["eos"])
    for key in ("c", "seed"):
        if key in raw:
            kwargs[key] = raw[key]
    cfg = RunConfig(**kwargs)
    _validate(cfg)
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    """Read and validate a config file; ``None`` gives the defaults.

    Raises:
        ConfigError: unreadable file, malformed JSON (with line and column)
            or invalid values.
    """
    if path is None:
        return config_from_dict({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(raw)
