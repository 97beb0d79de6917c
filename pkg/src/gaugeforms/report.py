"""Check and convergence records, order fitting and the report document."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# residuals below this (relative) floor at every resolution count as exact
EXACT_FLOOR = 1e-12


def _clean(x):
    """Plain-Python, JSON-stable copy of nested results."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def fit_order(resolutions, residuals, floor: float = EXACT_FLOOR):
    """Least-squares slope of ``log residual`` against ``log h`` (``h = 1/N``).

    Returns ``"exact"`` when every residual is at or below ``floor`` and
    ``None`` for fewer than three resolutions.
    """
    if len(resolutions) != len(residuals):
        raise ValueError("resolutions and residuals differ in length")
    if len(resolutions) < 3:
        return None
    r = np.asarray(residuals, dtype=float)
    if np.all(r <= floor):
        return "exact"
    r = np.maximum(r, np.finfo(float).tiny)
    h = 1.0 / np.asarray(resolutions, dtype=float)
    slope = np.polyfit(np.log(h), np.log(r), 1)[0]
    return float(slope)


def order_ok(order, minimum: float) -> bool:
    return order == "exact" or (order is not None and order >= minimum)


@dataclass
class Condition:
    """Side requirement of a check, e.g. a fitted order or a Richardson agreement."""
    name: str
    value: object
    limit: float
    relation: str = "le"  # value <= limit, or "ge", or "eq"

    @property
    def passed(self) -> bool:
        if self.relation == "le":
            return self.value is not None and self.value <= self.limit
        if self.relation == "ge":
            return order_ok(self.value, self.limit)
        if self.relation == "eq":
            return self.value == self.limit
        raise ValueError(self.relation)

    def as_dict(self):
        return {"name": self.name, "value": self.value, "limit": self.limit,
                "relation": self.relation, "pass": self.passed}


@dataclass
class Convergence:
    label: str
    resolutions: list
    residuals: list

    @property
    def order(self):
        return fit_order(self.resolutions, self.residuals)

    def as_dict(self):
        d = {"label": self.label, "resolutions": list(self.resolutions), "residuals": list(self.residuals)}
        if len(self.resolutions) >= 3:
            d["fitted_order"] = self.order
        return d


@dataclass
class Outcome:
    """What a check function returns before the tolerance is applied."""
    residual: float
    value: object = None
    expected: object = None
    conditions: list = field(default_factory=list)
    convergence: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


@dataclass
class CheckRecord:
    id: str
    criterion: int | None
    value: object
    expected: object
    residual: float
    tolerance: float
    conditions: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    error: str | None = None
    convergence: list = field(default_factory=list)  # surfaced at report level

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        if not (self.residual <= self.tolerance):
            return False
        return all(c.passed for c in self.conditions)

    def as_dict(self):
        return {
            "id": self.id,
            "criterion": self.criterion,
            "value": self.value,
            "expected": self.expected,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "conditions": [c.as_dict() for c in self.conditions],
            "details": self.details,
            "error": self.error,
        }


@dataclass
class VerificationReport:
    scenario: str
    mode: str
    config: dict
    checks: list
    convergence: list
    environment: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self, include_threads: bool = True):
        env = dict(self.environment)
        if not include_threads:
            env.pop("threads", None)
        return _clean({
            "scenario": self.scenario,
            "mode": self.mode,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "convergence": [c.as_dict() for c in self.convergence],
            "environment": env,
            "pass": self.passed,
        })

    def to_json(self, include_threads: bool = True) -> str:
        return json.dumps(self.as_dict(include_threads), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def summary(self) -> str:
        rows = [("check", "crit", "residual", "tol", "result")]
        for c in self.checks:
            res = "ERROR" if c.error else ("PASS" if c.passed else "FAIL")
            rows.append((c.id, "" if c.criterion is None else str(c.criterion),
                         _fmt(c.residual), _fmt(c.tolerance), res))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip() for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        for cv in self.convergence:
            order = cv.order
            o = order if isinstance(order, str) else ("n/a" if order is None else f"{order:.2f}")
            lines.append(f"convergence {cv.label}: N={list(cv.resolutions)} order={o}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _fmt(x):
    if isinstance(x, float) and math.isfinite(x):
        return f"{x:.3e}"
    return str(x)
