"""Registry of thought-experiment and no-go scenarios."""

from __future__ import annotations

import inspect
from dataclasses import dataclass
from typing import Callable

from .bell import bell_check, epr_bohm, ghz_mermin
from .communication import no_communication
from .measurement import von_neumann_measurement
from .nogo import kochen_specker, myrvold, pbr
from .report import SCHEMA_VERSION, Check, ScenarioConfig, ScenarioReport, to_jsonable
from .zeno import quantum_zeno

__all__ = ["REGISTRY", "ScenarioEntry", "ScenarioConfig", "ScenarioReport", "Check", "SCHEMA_VERSION",
           "run_scenario", "scenario_names", "to_jsonable"]


@dataclass(frozen=True)
class ScenarioEntry:
    name: str
    func: Callable[..., ScenarioReport]
    description: str
    defaults: dict
    required: tuple[str, ...] = ()


def _defaults(func) -> dict:
    out = {}
    for p in inspect.signature(func).parameters.values():
        if p.kind is p.KEYWORD_ONLY or p.kind is p.VAR_KEYWORD or p.default is p.empty:
            continue
        out[p.name] = to_jsonable(list(p.default) if isinstance(p.default, tuple) else p.default)
    return out


_ENTRIES = [
    ("von_neumann_measurement", von_neumann_measurement,
     "subject, pointer and k-qubit environment; Born weights and decohered off-diagonals", ("alpha", "env_qubits")),
    ("epr_bohm", epr_bohm, "perturbed spin singlet; spin correlation and epistemic states", ("a", "b")),
    ("bell_check", bell_check, "Bell inequality terms for the singlet plus LHV enumeration", ("a", "b")),
    ("ghz_mermin", ghz_mermin, "GHZ eigenvalue relations and local instruction-set search", ()),
    ("myrvold", myrvold, "two-wing qubit+detector state on two slices and local Hadamards", ()),
    ("quantum_zeno", quantum_zeno, "survival under N projective resets and the exponential law", ("beta", "t")),
    ("kochen_specker", kochen_specker, "Mermin-Peres square: commutators, line products, assignments", ()),
    ("pbr", pbr, "PBR entangled measurement basis and Born-weight table", ()),
    ("no_communication", no_communication, "local operations on B leave the reduced state of A unchanged", ()),
]

REGISTRY: dict[str, ScenarioEntry] = {
    name: ScenarioEntry(name, func, desc, _defaults(func), req) for name, func, desc, req in _ENTRIES
}


def scenario_names() -> list[str]:
    return list(REGISTRY)


def run_scenario(name: str, parameters: dict | None = None, *, seed: int = 0, tol_scale: float = 1.0,
                 tolerances: dict | None = None) -> ScenarioReport:
    """Run a registered scenario; unknown parameter names raise ``ValueError``."""
    if name not in REGISTRY:
        raise KeyError(f"unknown scenario {name!r}")
    entry = REGISTRY[name]
    params = dict(parameters or {})
    sig = inspect.signature(entry.func).parameters
    unknown = [k for k in params if k not in sig or sig[k].kind is inspect.Parameter.VAR_KEYWORD]
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {unknown}")
    # scenarios are deterministic constructions; the seed is echoed for reproducibility
    report = entry.func(**params, tol_scale=tol_scale, tolerances=tolerances)
    report.inputs["seed"] = int(seed)
    return report
