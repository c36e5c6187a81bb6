"""Scenario configuration and report records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = "1.0"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    parameters: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    target: float | None = None
    relation: str = "abs"

    def to_dict(self) -> dict:
        d = {"name": self.name, "value": to_jsonable(self.value), "tolerance": self.tolerance,
             "relation": self.relation, "passed": bool(self.passed)}
        if self.target is not None:
            d["target"] = to_jsonable(self.target)
        return d


@dataclass
class Curve:
    columns: list[str]
    units: list[str]
    rows: np.ndarray

    def to_dict(self) -> dict:
        return {"columns": self.columns, "units": self.units, "rows": to_jsonable(self.rows)}


class ScenarioReport:
    """Outputs and pass/fail checks of one scenario run.

    ``tol_scale`` multiplies closeness tolerances and upper bounds; entries
    of ``tolerances`` (keyed by check name) replace the default value.
    """

    def __init__(self, name: str, inputs: dict, *, tol_scale: float = 1.0, tolerances: dict | None = None):
        self.name = name
        self.inputs = dict(inputs)
        self.outputs: dict[str, Any] = {}
        self.checks: list[Check] = []
        self.curves: dict[str, Curve] = {}
        self.notes: list[str] = []
        self.tol_scale = float(tol_scale)
        self.overrides = dict(tolerances or {})

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def _tol(self, name: str, tol: float) -> float:
        return float(self.overrides.get(name, tol)) * self.tol_scale

    def check_close(self, name: str, value, target, tol: float) -> Check:
        """Pass when |value - target| <= tol (max over arrays)."""
        tol = self._tol(name, tol)
        v = np.asarray(value)
        dev = float(np.max(np.abs(v - np.asarray(target)))) if v.size else 0.0
        c = Check(name, _scalar(value), tol, dev <= tol, _scalar(target), "abs")
        self.checks.append(c)
        return c

    def check_le(self, name: str, value: float, bound: float) -> Check:
        bound = self._tol(name, bound)
        c = Check(name, float(value), bound, float(value) <= bound, None, "le")
        self.checks.append(c)
        return c

    def check_ge(self, name: str, value: float, bound: float) -> Check:
        # lower bounds are probabilities, not tolerances: only explicit overrides apply
        bound = float(self.overrides.get(name, bound))
        c = Check(name, float(value), bound, float(value) >= bound, None, "ge")
        self.checks.append(c)
        return c

    def check_true(self, name: str, ok: bool, value=None) -> Check:
        c = Check(name, _scalar(ok if value is None else value), 0.0, bool(ok), None, "true")
        self.checks.append(c)
        return c

    def add_curve(self, name: str, columns: list[str], units: list[str], rows) -> None:
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(columns) or len(units) != len(columns):
            raise ValueError("curve rows must match the column list")
        self.curves[name] = Curve(list(columns), list(units), rows)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.name,
            "inputs": to_jsonable(self.inputs),
            "outputs": to_jsonable(self.outputs),
            "checks": [c.to_dict() for c in self.checks],
            "curves": {k: v.to_dict() for k, v in self.curves.items()},
            "notes": list(self.notes),
            "passed": self.passed,
        }


def complex_matrix(obj) -> np.ndarray:
    """Parse a matrix given either as numbers or as rows of [re, im] pairs."""
    a = np.asarray(obj)
    if np.iscomplexobj(a):
        return a.astype(complex)
    a = a.astype(float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == 2:
        return a.astype(complex)
    raise ValueError(f"cannot read a matrix from shape {a.shape}")


def _scalar(v):
    a = np.asarray(v)
    return a.item() if a.ndim == 0 else a


def to_jsonable(obj):
    """Convert numpy values to plain JSON types; complex numbers become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1))
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj
