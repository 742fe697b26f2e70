"""Scenario configuration: flat ``section.key = value`` text, parsed strictly.

Values are JSON (numbers, booleans, lists, quoted strings); anything that
is not valid JSON is taken as a bare string. ``#`` starts a comment. Unknown
sections or keys are rejected before any computation starts. Example::

    grid.n = 1
    grid.points = 256
    initial.kind = c11_squarewave
    initial.a = 1.05
    run.t_end = 5
    run.cadence = 0.05
    monitors.t0 = 0.01
    tolerances.hessian_bound = 1.7330508075688772
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .grid import Grid, ScalarField
from . import initial as builders


class ConfigError(ValueError):
    pass


@dataclass
class GridSpec:
    n: int = 1
    points: Any = 128  # int or per-axis list
    lengths: Any = 2 * math.pi  # float or per-axis list

    def build(self) -> Grid:
        pts = self.points if isinstance(self.points, list) else [self.points] * self.n
        lens = self.lengths if isinstance(self.lengths, list) else [self.lengths] * self.n
        if len(pts) != self.n or len(lens) != self.n:
            raise ConfigError(f"grid.points/grid.lengths need {self.n} entries")
        if any(not isinstance(p, int) for p in pts):
            raise ConfigError(f"grid.points must be integers, got {pts}")
        try:
            return Grid(tuple(pts), tuple(float(l) for l in lens))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


# builder name -> accepted parameter names (besides ``kind``)
INITIAL_PARAMS = {
    "quadratic": {"background"},
    "trig": {"background", "amplitudes", "wavenumbers", "phases", "hessian_range"},
    "c11_squarewave": {"background", "a"},
    "supercritical": {"c", "eps", "margin"},
    "split": {"axes", "amplitude", "wavenumber"},
}


@dataclass
class InitialSpec:
    kind: str = "quadratic"
    params: dict = field(default_factory=dict)

    def validate(self):
        if self.kind not in INITIAL_PARAMS:
            raise ConfigError(f"unknown initial.kind {self.kind!r}; choose from {sorted(INITIAL_PARAMS)}")
        extra = set(self.params) - INITIAL_PARAMS[self.kind]
        if extra:
            raise ConfigError(f"initial.{sorted(extra)[0]} is not a parameter of {self.kind}")

    def build(self, grid: Grid) -> ScalarField:
        p = dict(self.params)
        n = grid.n
        S = np.asarray(p.pop("background"), dtype=float).reshape(n, n) if "background" in p else None
        try:
            if self.kind == "quadratic":
                return builders.quadratic(grid, np.eye(n) if S is None else S)
            if self.kind == "trig":
                hr = p.pop("hessian_range", None)
                return builders.trig(
                    grid,
                    p.pop("amplitudes"),
                    p.pop("wavenumbers"),
                    p.pop("phases", None),
                    S=S,
                    hessian_range=tuple(hr) if hr is not None else None,
                )
            if self.kind == "c11_squarewave":
                return builders.c11_squarewave(grid, float(p.pop("a")), S=S)
            if self.kind == "supercritical":
                return builders.supercritical(grid, **p)
            return builders.split(grid, **p)
        except KeyError as exc:
            raise ConfigError(f"initial.{exc.args[0]} is required for {self.kind}") from exc


@dataclass
class RunSpec:
    t_end: float = 1.0
    cadence: Any = None
    cfl_safety: float = 0.9
    sample_times: Any = None
    flow: str = "potential"  # or "gmcf"
    snapshots: bool = True


@dataclass
class MonitorSpec:
    max_principle: bool = True
    decay: bool = True
    holder: bool = True
    convexity: bool = False
    split: bool = False
    ty_ii: bool = True
    t0: float = 0.0
    holder_t_cap: float = 0.25
    convex_tol: float = 1e-6


@dataclass
class Tolerances:
    offset: float = 1e-12
    max_principle: float = 1e-6
    convexity: float = 1e-6
    split: float = 1e-8
    hessian_bound: Any = None  # assert |lambda| <= bound when set
    theta_floor: Any = None  # assert theta_min >= floor when set


@dataclass
class PipelineSpec:
    sigma0: float = 0.05
    k: float = 16.0
    eta: float = 0.05


@dataclass
class MollifySpec:
    k: Any = None  # mollify the initial data before evolving when set


@dataclass
class OutputSpec:
    dir: str = "runs/scenario"


SECTIONS = {
    "grid": GridSpec,
    "run": RunSpec,
    "monitors": MonitorSpec,
    "tolerances": Tolerances,
    "pipeline": PipelineSpec,
    "mollify": MollifySpec,
    "output": OutputSpec,
}


@dataclass
class ScenarioConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    run: RunSpec = field(default_factory=RunSpec)
    monitors: MonitorSpec = field(default_factory=MonitorSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    pipeline: PipelineSpec = field(default_factory=PipelineSpec)
    mollify: MollifySpec = field(default_factory=MollifySpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    source: str | None = None

    def validate(self) -> "ScenarioConfig":
        grid = self.grid.build()
        self.initial.validate()
        r = self.run
        if not isinstance(r.t_end, (int, float)) or r.t_end < 0:
            raise ConfigError(f"run.t_end must be a nonnegative number, got {r.t_end!r}")
        if r.cadence is not None and not (isinstance(r.cadence, (int, float)) and r.cadence > 0):
            raise ConfigError(f"run.cadence must be positive, got {r.cadence!r}")
        if not 0.0 < r.cfl_safety <= 1.0:
            raise ConfigError(f"run.cfl_safety must be in (0, 1], got {r.cfl_safety}")
        if r.flow not in ("potential", "gmcf"):
            raise ConfigError(f"run.flow must be 'potential' or 'gmcf', got {r.flow!r}")
        if self.mollify.k is not None and not self.mollify.k > 0:
            raise ConfigError("mollify.k must be positive")
        if self.pipeline.k <= 0:
            raise ConfigError("pipeline.k must be positive")
        if self.monitors.t0 < 0 or self.monitors.holder_t_cap <= 0:
            raise ConfigError("monitors.t0 must be >= 0 and monitors.holder_t_cap > 0")
        if self.initial.kind in ("c11_squarewave",) and grid.n != 1:
            raise ConfigError("c11_squarewave needs grid.n = 1")
        if self.initial.kind in ("supercritical",) and grid.n != 2:
            raise ConfigError("supercritical needs grid.n = 2")
        return self


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config(text: str, source: str | None = None) -> ScenarioConfig:
    cfg = ScenarioConfig(source=source)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        seen.add(key)
        section, _, name = key.partition(".")
        if not name or "." in name:
            raise ConfigError(f"line {lineno}: key {key!r} must look like section.name")
        val = _parse_value(value)
        if section == "initial":
            if name == "kind":
                cfg.initial.kind = str(val)
            else:
                cfg.initial.params[name] = val
            continue
        if section not in SECTIONS:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        obj = getattr(cfg, section)
        if name not in {f.name for f in fields(obj)}:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(obj, name, val)
    try:
        return cfg.validate()
    except TypeError as exc:
        raise ConfigError(f"badly typed value: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))
