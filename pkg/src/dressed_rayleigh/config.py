"""Flat key/value run configuration: parsing, validation, serialization.

The format is one ``key = value`` pair per line, UTF-8, ``#`` comments.
Unknown keys are errors.  Defaults (see DEFAULTS and the README table) are
filled for everything except the physical parameters and the scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .jc_core import SystemParams


class ConfigError(ValueError):
    """Malformed or invalid configuration; message carries line/field context."""


REQUIRED_KEYS = ("omega_sm", "omega_tls", "rabi", "gamma0", "scenario")

SCENARIOS = ("single_photon", "placzek", "cascade", "coherent")

#: static defaults; grid extents marked None are derived from the slow
#: scenario rate at parse time
DEFAULTS = {
    "n0": 1,
    "alpha": 0.0 + 0.0j,
    "t_max": None,
    "t_points": 3001,
    "tau_max": None,
    "tau_points": 12001,
    "omega_min": None,
    "omega_max": None,
    "omega_points": 1501,
    "rel_tol": 1e-10,
    "abs_tol": 1e-12,
    "output_dir": "runs",
    "seed": 0,
}

_PARSERS = {
    "omega_sm": float,
    "omega_tls": float,
    "rabi": float,
    "gamma0": float,
    "scenario": str,
    "n0": int,
    "alpha": complex,
    "t_max": float,
    "t_points": int,
    "tau_max": float,
    "tau_points": int,
    "omega_min": float,
    "omega_max": float,
    "omega_points": int,
    "rel_tol": float,
    "abs_tol": float,
    "output_dir": str,
    "seed": int,
}


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    scenario: str
    n0: int
    alpha: complex
    t_max: float
    t_points: int
    tau_max: float
    tau_points: int
    omega_min: float
    omega_max: float
    omega_points: int
    rel_tol: float
    abs_tol: float
    output_dir: str
    seed: int

    def slow_rate(self) -> float:
        """Characteristic narrow-line rate of the configured scenario."""
        p = self.params
        base = p.gamma0 * p.rabi**2 / p.detuning**2
        if self.scenario == "single_photon":
            return base
        if self.scenario in ("placzek", "cascade"):
            return base * self.n0
        return base * max(abs(self.alpha) ** 2, 1.0)


def _split_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        yield lineno, key, value


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document."""
    raw: dict[str, object] = {}
    for lineno, key, value in _split_lines(text):
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            raw[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(
            f"missing required keys: {', '.join(missing)} "
            f"(required: {', '.join(REQUIRED_KEYS)})")
    return _build(raw)


def _build(raw: dict) -> RunConfig:
    try:
        params = SystemParams(raw["omega_sm"], raw["omega_tls"], raw["rabi"], raw["gamma0"])
    except ValueError as exc:
        raise ConfigError(f"invalid physical parameters: {exc}") from exc

    scenario = raw["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"field 'scenario': must be one of {', '.join(SCENARIOS)}")

    values = dict(DEFAULTS)
    for key in DEFAULTS:
        if key in raw:
            values[key] = raw[key]

    if scenario == "coherent" and "alpha" not in raw:
        raise ConfigError("field 'alpha': required for the coherent scenario")
    if scenario == "single_photon":
        if values["n0"] != 1:
            raise ConfigError("field 'n0': single_photon fixes n0 = 1")
    elif scenario in ("placzek", "cascade") and values["n0"] < 1:
        raise ConfigError("field 'n0': must be a positive integer")

    if params.detuning == 0.0:
        raise ConfigError("field 'omega_sm': scenarios require nonzero detuning")

    cfg = RunConfig(
        params=params, scenario=scenario, n0=int(values["n0"]),
        alpha=complex(values["alpha"]),
        t_max=values["t_max"] if values["t_max"] is not None else 30.0 / params.gamma0,
        t_points=int(values["t_points"]),
        tau_max=values["tau_max"] if values["tau_max"] is not None else -1.0,
        tau_points=int(values["tau_points"]),
        omega_min=values["omega_min"] if values["omega_min"] is not None else 0.0,
        omega_max=values["omega_max"] if values["omega_max"] is not None else 0.0,
        omega_points=int(values["omega_points"]),
        rel_tol=float(values["rel_tol"]), abs_tol=float(values["abs_tol"]),
        output_dir=str(values["output_dir"]), seed=int(values["seed"]),
    )
    slow = cfg.slow_rate()
    if values["tau_max"] is None:
        cfg = replace(cfg, tau_max=8.0 / slow)
    if values["omega_min"] is None and values["omega_max"] is None:
        cfg = replace(cfg, omega_min=params.omega_sm - 30.0 * slow,
                      omega_max=params.omega_sm + 30.0 * slow)
    elif values["omega_min"] is None or values["omega_max"] is None:
        raise ConfigError("fields 'omega_min'/'omega_max': set both or neither")
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    for name in ("t_points", "tau_points", "omega_points"):
        if getattr(cfg, name) < 2:
            raise ConfigError(f"field {name!r}: must be at least 2")
    if cfg.t_max <= 0 or cfg.tau_max <= 0:
        raise ConfigError("fields 't_max'/'tau_max': must be positive")
    if not cfg.omega_min < cfg.params.omega_sm < cfg.omega_max:
        raise ConfigError(
            "fields 'omega_min'/'omega_max': window must contain omega_sm")
    for name in ("rel_tol", "abs_tol"):
        if not 0.0 < getattr(cfg, name) <= 1e-2:
            raise ConfigError(f"field {name!r}: must lie in (0, 1e-2]")


def serialize_config(cfg: RunConfig) -> str:
    """Key/value document that parses back to an equal configuration."""
    lines = [
        f"omega_sm = {cfg.params.omega_sm!r}",
        f"omega_tls = {cfg.params.omega_tls!r}",
        f"rabi = {cfg.params.rabi!r}",
        f"gamma0 = {cfg.params.gamma0!r}",
        f"scenario = {cfg.scenario}",
        f"n0 = {cfg.n0}",
        f"alpha = {cfg.alpha!r}".replace("(", "").replace(")", ""),
        f"t_max = {cfg.t_max!r}",
        f"t_points = {cfg.t_points}",
        f"tau_max = {cfg.tau_max!r}",
        f"tau_points = {cfg.tau_points}",
        f"omega_min = {cfg.omega_min!r}",
        f"omega_max = {cfg.omega_max!r}",
        f"omega_points = {cfg.omega_points}",
        f"rel_tol = {cfg.rel_tol!r}",
        f"abs_tol = {cfg.abs_tol!r}",
        f"output_dir = {cfg.output_dir}",
        f"seed = {cfg.seed}",
    ]
    return "\n".join(lines) + "\n"
