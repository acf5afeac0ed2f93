"""Sectioned ``key = value`` run configuration.

Sections are ``[problem]``, ``[grid]``, ``[stepping]`` and ``[experiment]``.
Every key has a default; unknown keys, type errors and constraint
violations are reported with their line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .constants import InitialDataSpec, ProblemParams
from .dynamics import StepControls
from .grid import R_MAX_LIMIT, Frame


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(msg if line is None else f"line {line}: {msg}")


def _floats(text: str) -> tuple[float, ...]:
    items = [x for x in text.replace(",", " ").split() if x]
    if not items:
        raise ValueError("empty list")
    return tuple(float(x) for x in items)


def _fmt_floats(vals) -> str:
    return ", ".join(repr(float(v)) for v in vals)


def _window(text: str):
    if text.strip().lower() == "auto":
        return None
    lo, hi = _floats(text)
    return (lo, hi)


def _fmt_window(w) -> str:
    return "auto" if w is None else _fmt_floats(w)


EXPERIMENTS = ("evolve", "decay", "scan", "negative-entropy", "cross-frame", "wang-audit")

# key -> (section, parser, formatter)
_SCHEMA = {
    "N": ("problem", int, str),
    "p": ("problem", float, repr),
    "lam": ("problem", float, repr),
    "init": ("problem", InitialDataSpec.parse, str),
    "r_max": ("grid", float, repr),
    "M": ("grid", int, str),
    "dt": ("stepping", float, repr),
    "horizon": ("stepping", float, repr),
    "sample_every": ("stepping", int, str),
    "blowup_threshold": ("stepping", float, repr),
    "dt_min": ("stepping", float, repr),
    "decay_threshold": ("stepping", float, repr),
    "frame": ("stepping", Frame, lambda f: f.value),
    "experiment": ("experiment", str, str),
    "q_list": ("experiment", _floats, _fmt_floats),
    "p_list": ("experiment", _floats, _fmt_floats),
    "amp_list": ("experiment", _floats, _fmt_floats),
    "fit_window": ("experiment", _window, _fmt_window),
    "t_max": ("experiment", float, repr),
    "csv_out": ("experiment", str, str),
    "json_out": ("experiment", str, str),
}

# accepted spellings in files -> field name
_ALIASES = {"lambda": "lam", "dim": "N", "nodes": "M", "rmax": "r_max", "s_max": "horizon"}
_FILE_KEY = {"lam": "lambda", "M": "nodes"}

SECTIONS = ("problem", "grid", "stepping", "experiment")


@dataclass(frozen=True)
class RunConfig:
    N: int = 3
    p: float = 5.0
    lam: float = 0.5
    init: InitialDataSpec = InitialDataSpec("gaussian", 0.1, 2.0)
    r_max: float = 16.0
    M: int = 1024
    dt: float = 1e-3
    horizon: float = 8.0
    sample_every: int = 100
    blowup_threshold: float = 1e6
    dt_min: float = 1e-30
    decay_threshold: float = 1e-3
    frame: Frame = Frame.V
    experiment: str = "evolve"
    q_list: tuple = (2.0, 4.0)
    p_list: tuple = (1.5, 5.0 / 3.0, 5.0)
    amp_list: tuple = (0.05, 0.5, 3.0)
    fit_window: tuple | None = None
    t_max: float = 1.0
    csv_out: str = ""
    json_out: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        ProblemParams(self.N, self.p, self.lam, self.init)
        StepControls(self.dt, self.horizon, self.sample_every, self.blowup_threshold,
                     self.dt_min, self.decay_threshold)
        if self.M < 16:
            raise ValueError("nodes must be >= 16")
        if not 0 < self.r_max <= R_MAX_LIMIT:
            raise ValueError(f"r_max must lie in (0, {R_MAX_LIMIT}]")
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
        if any(q < 2 for q in self.q_list if not math.isinf(q)):
            raise ValueError("q_list entries must be >= 2")
        if any(p <= 1 for p in self.p_list):
            raise ValueError("p_list entries must exceed 1")
        if any(a <= 0 for a in self.amp_list):
            raise ValueError("amp_list entries must be positive")
        for axis in (self.p_list, self.amp_list):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError("scan axes must be strictly increasing")
        if self.fit_window is not None and not self.fit_window[0] < self.fit_window[1]:
            raise ValueError("fit_window must be increasing")
        if not 0 <= self.t_max <= 1:
            raise ValueError("t_max must lie in [0, 1] (cross-frame supports stay on-grid)")

    @property
    def params(self) -> ProblemParams:
        return ProblemParams(self.N, self.p, self.lam, self.init)

    @property
    def controls(self) -> StepControls:
        return StepControls(self.dt, self.horizon, self.sample_every, self.blowup_threshold,
                            self.dt_min, self.decay_threshold)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def echo(self) -> str:
        """Render every setting, defaults included, in the file format."""
        lines = []
        for section in SECTIONS:
            lines.append(f"[{section}]")
            for f in fields(self):
                sec, _, fmt = _SCHEMA[f.name]
                if sec == section:
                    lines.append(f"{_FILE_KEY.get(f.name, f.name)} = {fmt(getattr(self, f.name))}")
            lines.append("")
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {_FILE_KEY.get(f.name, f.name): _SCHEMA[f.name][2](getattr(self, f.name))
                for f in fields(self)}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    values: dict = {}
    where: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, val = (x.strip() for x in line.split("=", 1))
        name = _ALIASES.get(key, key)
        if name not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        sec = _SCHEMA[name][0]
        if section is not None and section != sec:
            raise ConfigError(f"key {key!r} belongs in [{sec}], not [{section}]", lineno)
        if name in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[name] = _SCHEMA[name][1](val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
        where[name] = lineno
    try:
        return replace(base or RunConfig(), **values)
    except ValueError as exc:
        line = _blame(str(exc), where)
        raise ConfigError(str(exc), line) from None


def _blame(msg: str, where: dict) -> int | None:
    first = msg.split()[0].lower() if msg.split() else ""
    for name, line in where.items():
        if first in (name.lower(), _FILE_KEY.get(name, name).lower()):
            return line
    return None


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
