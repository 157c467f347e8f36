"""Residual-based predicate results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

from .kernel import Point


class PreconditionError(ValueError):
    """An operation was called on input outside its stated hypotheses."""


@dataclass
class Check:
    """Outcome of a numerical identity check: pass flag, max residual, worst sample."""

    name: str
    passed: bool
    residual: float
    tol: float
    worst: Any = None
    detail: dict = field(default_factory=dict)
    anchor: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)

    def __bool__(self) -> bool:
        return self.passed

    def record(self) -> dict:
        return {
            "check": self.name,
            "anchor": self.anchor,
            "residual": float(f"{self.residual:.3g}") if np.isfinite(self.residual) else str(self.residual),
            "tol": self.tol,
            "worst_point": self.worst,
            "passed": bool(self.passed),
            **({"detail": self.detail} if self.detail else {}),
        }


def scan(name: str, fn: Callable[[Point], Any], points: Iterable[Point], tol: float,
         anchor: str = "") -> Check:
    """Evaluate ``fn`` (returning an array of residual components) at every point."""
    worst_val, worst_p = -1.0, None
    for p in points:
        r = np.abs(np.asarray(fn(p), dtype=float))
        m = float(r.max()) if r.size else 0.0
        if not np.isfinite(m):
            m = float("inf")
        if m > worst_val:
            worst_val, worst_p = m, p
    worst_val = max(worst_val, 0.0)
    return Check(name, worst_val <= tol, worst_val, tol,
                 None if worst_p is None else worst_p.describe(), anchor=anchor)


def combine(name: str, checks: list[Check], anchor: str = "") -> Check:
    worst = max(checks, key=lambda c: c.residual / max(c.tol, 1e-300))
    return Check(name, all(c.passed for c in checks), max(c.residual for c in checks),
                 worst.tol, worst.worst, {c.name: c.record()["residual"] for c in checks}, anchor)
