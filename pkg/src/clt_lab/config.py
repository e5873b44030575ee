"""Experiment configuration: parsing and validation with field paths."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .diagnostics import DEFAULT_C_GRID, DEFAULT_EPS_GRID
from .exact import SUPPORT_CAP
from .gaussfit import Thresholds
from .montecarlo import DEFAULT_ALPHA, DEFAULT_REPS
from .schemes import Scheme, SchemeError, scheme_from_config

MODES = ("exact", "mc", "auto")
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: Mapping
    n_grid: tuple
    eps_grid: tuple = DEFAULT_EPS_GRID
    C_grid: tuple = DEFAULT_C_GRID
    mode: str = "auto"
    reps: int = DEFAULT_REPS
    seed: int = 0
    alpha: float = DEFAULT_ALPHA
    support_cap: int = SUPPORT_CAP
    verdict: Thresholds = field(default_factory=Thresholds)
    out_dir: str | None = None
    formats: tuple = FORMATS
    dump_pmf: bool = False
    dump_samples: bool = False

    def build_scheme(self) -> Scheme:
        return scheme_from_config(self.scheme)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update({k: v for k, v in kw.items() if v is not None})
        cfg = ExperimentConfig(**data)
        _check_values(cfg)
        return cfg

    def echo(self) -> dict:
        """Normalized form of the configuration, as stored in reports."""
        return {
            "scheme": json.loads(json.dumps(self.scheme)),
            "n_grid": list(self.n_grid),
            "eps_grid": list(self.eps_grid),
            "C_grid": list(self.C_grid),
            "mode": self.mode,
            "reps": self.reps,
            "seed": self.seed,
            "alpha": self.alpha,
            "support_cap": self.support_cap,
            "verdict": asdict(self.verdict),
        }


def _int(value, path, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, "must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _positive(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "must be a number")
    if not value > 0 or value != value or value == float("inf"):
        raise ConfigError(path, "must be positive and finite")
    return float(value)


def _grid(raw, path, conv) -> tuple:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(path, "must be a non-empty list")
    vals = tuple(conv(v, f"{path}[{i}]") for i, v in enumerate(raw))
    for i in range(1, len(vals)):
        if not vals[i] > vals[i - 1]:
            raise ConfigError(f"{path}[{i}]", "grid must be strictly increasing")
    return vals


def _check_values(cfg: ExperimentConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
    _int(cfg.reps, "reps", 1)
    _int(cfg.seed, "seed", 0)
    if cfg.seed >= 2 ** 64:
        raise ConfigError("seed", "must fit in 64 bits")
    try:
        scheme = cfg.build_scheme()
    except SchemeError as exc:
        raise ConfigError("scheme", str(exc)) from exc
    for i, n in enumerate(cfg.n_grid):
        try:
            scheme.row(n)
        except SchemeError as exc:
            raise ConfigError(f"n_grid[{i}]", str(exc)) from exc


KNOWN_KEYS = {"scheme", "n_grid", "eps_grid", "C_grid", "mode", "reps", "seed", "alpha",
              "support_cap", "verdict", "output"}


def parse_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("", "configuration must be a JSON object")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "scheme" not in raw:
        raise ConfigError("scheme", "required")
    if not isinstance(raw["scheme"], Mapping):
        raise ConfigError("scheme", "must be an object")
    if "n_grid" not in raw:
        raise ConfigError("n_grid", "required")
    kw: dict[str, Any] = {"scheme": raw["scheme"]}
    kw["n_grid"] = _grid(raw["n_grid"], "n_grid", lambda v, p: _int(v, p, 1))
    if "eps_grid" in raw:
        kw["eps_grid"] = _grid(raw["eps_grid"], "eps_grid", _positive)
    if "C_grid" in raw:
        kw["C_grid"] = _grid(raw["C_grid"], "C_grid", _positive)
    for key in ("mode",):
        if key in raw:
            kw[key] = raw[key]
    if "reps" in raw:
        kw["reps"] = _int(raw["reps"], "reps", 1)
    if "seed" in raw:
        kw["seed"] = _int(raw["seed"], "seed", 0)
    if "alpha" in raw:
        a = _positive(raw["alpha"], "alpha")
        if a >= 1:
            raise ConfigError("alpha", "must be < 1")
        kw["alpha"] = a
    if "support_cap" in raw:
        kw["support_cap"] = _int(raw["support_cap"], "support_cap", 1)
    if "verdict" in raw:
        v = raw["verdict"]
        if not isinstance(v, Mapping):
            raise ConfigError("verdict", "must be an object")
        allowed = Thresholds.__dataclass_fields__
        for k in v:
            if k not in allowed:
                raise ConfigError(f"verdict.{k}", "unknown threshold")
        kw["verdict"] = Thresholds(**{k: _positive(x, f"verdict.{k}") for k, x in v.items()})
    if "output" in raw:
        o = raw["output"]
        if not isinstance(o, Mapping):
            raise ConfigError("output", "must be an object")
        for k in o:
            if k not in ("dir", "formats", "dump_pmf", "dump_samples"):
                raise ConfigError(f"output.{k}", "unknown key")
        if "dir" in o:
            if not isinstance(o["dir"], str):
                raise ConfigError("output.dir", "must be a string")
            kw["out_dir"] = o["dir"]
        if "formats" in o:
            f = o["formats"]
            if not isinstance(f, list) or not f or any(x not in FORMATS for x in f):
                raise ConfigError("output.formats", f"must be a non-empty list drawn from {FORMATS}")
            kw["formats"] = tuple(f)
        for k in ("dump_pmf", "dump_samples"):
            if k in o:
                if not isinstance(o[k], bool):
                    raise ConfigError(f"output.{k}", "must be true or false")
                kw[k] = o[k]
    cfg = ExperimentConfig(**kw)
    _check_values(cfg)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from exc
    return parse_config(raw)
