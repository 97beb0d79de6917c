"""Scenario configuration, suite execution and convergence sweeps."""
from __future__ import annotations

import copy
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import __version__
from .report import CheckRecord, Condition, Convergence, VerificationReport, fit_order, order_ok
from .scenarios import SCENARIOS, get_scenario

TOP_KEYS = {"scenario", "seed", "group", "polynomial", "beta", "grid", "resolutions", "fmax",
            "amplitude", "tolerances", "params"}
GRID_KEYS = {"sizes", "method"}

BASE_DEFAULTS = {
    "group": "su2",
    "polynomial": "c2_su2",
    "beta": "1",
    "fmax": 3,
    "amplitude": 1.0,
    "tolerances": {},
    "params": {},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int
    sizes: tuple
    method: str
    resolutions: tuple
    group: str = "su2"
    polynomial: str = "c2_su2"
    beta: str = "1"
    fmax: int = 3
    amplitude: float = 1.0
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        unknown = set(raw) - TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "scenario" not in raw:
            raise ConfigError("config needs a 'scenario'")
        if "seed" not in raw:
            raise ConfigError("config needs an integer 'seed'")
        try:
            scen = get_scenario(raw["scenario"])
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        merged = _merge(_merge(BASE_DEFAULTS, scen.defaults), raw)
        seed = merged["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        grid = merged.get("grid", {})
        if set(grid) - GRID_KEYS:
            raise ConfigError(f"unknown grid keys: {sorted(set(grid) - GRID_KEYS)}")
        sizes = tuple(int(n) for n in grid["sizes"])
        method = str(grid.get("method", "fd4"))
        if method not in ("fd4", "spectral"):
            raise ConfigError(f"unknown method {method!r}")
        resolutions = tuple(int(n) for n in merged["resolutions"])
        if sorted(resolutions) != list(resolutions) or len(set(resolutions)) != len(resolutions):
            raise ConfigError("resolutions must be strictly increasing")
        tols = dict(merged["tolerances"])
        ids = set(scen.check_ids())
        for k, v in tols.items():
            if k not in ids:
                raise ConfigError(f"tolerance for unknown check {k!r}")
            v = float(v)
            # zero is allowed so a config can force every nonzero residual to fail
            if not (v >= 0) or math.isinf(v):
                raise ConfigError(f"tolerance for {k!r} must be a finite number >= 0")
            tols[k] = v
        params = dict(merged["params"])
        extra = set(params) - set(scen.defaults.get("params", {}))
        if extra:
            raise ConfigError(f"unknown params for {scen.name}: {sorted(extra)}")
        fmax = int(merged["fmax"])
        if fmax < 1:
            raise ConfigError("fmax must be >= 1")
        return cls(scen.name, seed, sizes, method, resolutions, str(merged["group"]),
                   str(merged["polynomial"]), str(merged["beta"]), fmax, float(merged["amplitude"]),
                   tols, params)

    @classmethod
    def from_yaml(cls, text: str) -> "ScenarioConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML: {exc}") from None
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_yaml(fh.read())

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return ScenarioConfig.from_dict({**self.as_dict(), "seed": int(seed)})

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "group": self.group,
            "polynomial": self.polynomial,
            "beta": self.beta,
            "grid": {"sizes": list(self.sizes), "method": self.method},
            "resolutions": list(self.resolutions),
            "fmax": self.fmax,
            "amplitude": self.amplitude,
            "tolerances": dict(sorted(self.tolerances.items())),
            "params": copy.deepcopy(self.params),
        }


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    """Per-check stream: depends on the seed and the check id only, never on scheduling."""
    return np.random.default_rng([seed, zlib.crc32(check_id.encode())])


def _run_check(cfg: ScenarioConfig, spec) -> CheckRecord:
    tol = cfg.tolerances.get(spec.id, spec.tolerance)
    try:
        out = spec.fn(cfg, check_rng(cfg.seed, spec.id))
    except Exception as exc:  # reported per check, the suite continues
        return CheckRecord(spec.id, spec.criterion, None, None, math.inf, tol,
                           error=f"{type(exc).__name__}: {exc}")
    return CheckRecord(spec.id, spec.criterion, out.value, out.expected, float(out.residual), tol,
                       list(out.conditions), dict(out.details), convergence=list(out.convergence))


def run_check(cfg: ScenarioConfig, check_id: str) -> CheckRecord:
    """Run a single check of ``cfg.scenario`` exactly as :func:`run_suite` would."""
    scen = get_scenario(cfg.scenario)
    for spec in scen.checks:
        if spec.id == check_id:
            return _run_check(cfg, spec)
    raise KeyError(f"scenario {scen.name!r} has no check {check_id!r}")


def _environment(cfg, threads):
    return {"version": __version__, "seed": cfg.seed, "threads": int(threads)}


def run_suite(cfg: ScenarioConfig, threads: int = 1) -> VerificationReport:
    """Run every check of the scenario; results are assembled in declaration order."""
    scen = get_scenario(cfg.scenario)
    threads = max(1, int(threads))
    if threads == 1:
        records = [_run_check(cfg, s) for s in scen.checks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda s: _run_check(cfg, s), scen.checks))
    convergence = [cv for r in records for cv in r.convergence]
    return VerificationReport(scen.name, "verify", cfg.as_dict(), records, convergence,
                              _environment(cfg, threads))


def convergence_sweep(cfg: ScenarioConfig, threads: int = 1) -> VerificationReport:
    """Refinement study of the scenario's sweep quantity over ``cfg.resolutions``."""
    scen = get_scenario(cfg.scenario)
    if scen.sweep is None:
        raise ConfigError(f"scenario {scen.name!r} has no convergence sweep")
    if len(cfg.resolutions) < 3:
        raise ConfigError("a sweep needs at least 3 resolutions")
    Ns = list(cfg.resolutions)
    threads = max(1, int(threads))

    def one(N):
        # the same stream at every N so the sampled field is the same function
        return float(scen.sweep(cfg, N, check_rng(cfg.seed, "sweep")))

    try:
        if threads == 1:
            residuals = [one(N) for N in Ns]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                residuals = list(pool.map(one, Ns))
    except Exception as exc:
        rec = CheckRecord(f"{scen.name}_order", None, None, None, math.inf, scen.sweep_min_order,
                          error=f"{type(exc).__name__}: {exc}")
        return VerificationReport(scen.name, "sweep", cfg.as_dict(), [rec], [], _environment(cfg, threads))
    cv = Convergence(scen.sweep_label or scen.name, Ns, residuals)
    order = cv.order
    rec = CheckRecord(f"{scen.name}_order", None, order, scen.sweep_min_order, 0.0, 0.0,
                      [Condition("fitted_order", order, scen.sweep_min_order, "ge")],
                      {"finest_residual": residuals[-1]})
    return VerificationReport(scen.name, "sweep", cfg.as_dict(), [rec], [cv], _environment(cfg, threads))


def default_config(name: str, seed: int = 0) -> ScenarioConfig:
    return ScenarioConfig.from_dict({"scenario": name, "seed": seed})


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gaugeforms scenario config",
    "type": "object",
    "required": ["scenario", "seed"],
    "additionalProperties": False,
    "properties": {
        "scenario": {"type": "string", "enum": sorted(SCENARIOS)},
        "seed": {"type": "integer", "minimum": 0},
        "group": {"type": "string", "enum": ["u1", "su2", "uk(2)", "uk(3)"]},
        "polynomial": {"type": "string", "enum": ["c1_u1", "c2_su2", "det_su2"]},
        "beta": {"type": "string", "description": "constant form such as '1' or 'dx1^dx2 + dx3^dx4'"},
        "grid": {"type": "object", "additionalProperties": False, "properties": {
            "sizes": {"type": "array", "items": {"type": "integer", "minimum": 8}, "minItems": 1, "maxItems": 4},
            "method": {"type": "string", "enum": ["fd4", "spectral"]}}},
        "resolutions": {"type": "array", "items": {"type": "integer", "minimum": 8}},
        "fmax": {"type": "integer", "minimum": 1},
        "amplitude": {"type": "number"},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "params": {"type": "object", "description": "scenario-specific; see list-scenarios"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gaugeforms verification report",
    "type": "object",
    "required": ["scenario", "mode", "config", "checks", "convergence", "environment", "pass"],
    "properties": {
        "scenario": {"type": "string"},
        "mode": {"type": "string", "enum": ["verify", "sweep"]},
        "config": {"type": "object"},
        "checks": {"type": "array", "items": {"type": "object", "required": [
            "id", "criterion", "value", "expected", "residual", "tolerance", "pass", "conditions", "details", "error"]}},
        "convergence": {"type": "array", "items": {"type": "object", "required": ["label", "resolutions", "residuals"],
                                                   "properties": {"fitted_order": {
                                                       "oneOf": [{"type": "number"}, {"const": "exact"}]}}}},
        "environment": {"type": "object", "required": ["version", "seed", "threads"]},
        "pass": {"type": "boolean"},
    },
}
