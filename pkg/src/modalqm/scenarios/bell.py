"""Spin-singlet correlations, the Bell inequality and the GHZ-Mermin argument."""

from __future__ import annotations

import itertools

import numpy as np

from ..channels import apply, luders_channel
from ..conditional import kinematical_cond_probs
from ..hilbert import (SX, SY, SZ, DensityMatrix, Partition, partial_trace, pure_density,
                       spectral_decompose)
from .report import ScenarioReport

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)
PAIR = Partition(["1", "2"], [2, 2])


def _unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError(f"{name} must be non-zero")
    if abs(n - 1) > 1e-9:
        raise ValueError(f"{name} must be a unit vector (norm {n!r})")
    return v


def spin(n: np.ndarray) -> np.ndarray:
    """n . sigma in units of hbar / 2."""
    return n[0] * SX + n[1] * SY + n[2] * SZ


def perturbed_singlet(eps: float = 0.0) -> np.ndarray:
    """Singlet with degeneracy-breaking pattern e1 = eps, e2 = -eps, e3 = e4 = eps/2, renormalized."""
    e1, e2, e3, e4 = eps, -eps, eps / 2, eps / 2
    psi = ((1 + e1) * np.kron(UP, DOWN) - (1 + e2) * np.kron(DOWN, UP)
           + e3 * np.kron(UP, UP) + e4 * np.kron(DOWN, DOWN)) / np.sqrt(2)
    return psi / np.linalg.norm(psi)


def correlation(rho: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.trace(rho @ np.kron(spin(a), spin(b))).real)


def _epistemic_dict(rho: DensityMatrix) -> dict:
    epi = spectral_decompose(rho)
    return {"probabilities": epi.probabilities, "vectors": epi.vectors}


def epr_bohm(a=(0, 0, 1), b=(0, 0, 1), eps: float = 1e-6, *, tol_scale: float = 1.0,
             tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    a = _unit(a, "a")
    b = _unit(b, "b")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    report = ScenarioReport("epr_bohm", {"a": a, "b": b, "eps": eps}, tol_scale=tol_scale, tolerances=tolerances)
    exact = pure_density(perturbed_singlet(0.0), PAIR).matrix
    rho = pure_density(perturbed_singlet(eps), PAIR)
    c0 = correlation(exact, a, b)
    c = correlation(rho.matrix, a, b)
    report.outputs["correlation_singlet"] = c0
    report.outputs["correlation"] = c
    report.check_close("correlation_singlet", c0, -float(a @ b), 1e-9)
    report.check_close("correlation_perturbed", c, -float(a @ b), 10 * eps + 1e-9)

    before = {"1+2": _epistemic_dict(rho), "1": _epistemic_dict(partial_trace(rho, ["1"])),
              "2": _epistemic_dict(partial_trace(rho, ["2"]))}
    table = kinematical_cond_probs(rho, [["1"], ["2"]])
    # joint p(s1, s2 | Psi) in the z basis; eigenbases of the perturbed reduced states are z-aligned
    z1 = np.argmax(np.abs(spectral_decompose(partial_trace(rho, ["1"])).vectors), axis=0)
    z2 = np.argmax(np.abs(spectral_decompose(partial_trace(rho, ["2"])).vectors), axis=0)
    joint = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            joint[z1[i], z2[j]] = table.values[0, i, j]
    report.outputs["joint_before"] = {"up_up": joint[0, 0], "up_down": joint[0, 1],
                                      "down_up": joint[1, 0], "down_down": joint[1, 1]}
    if eps > 0:
        report.check_close("joint_before_antialigned", [joint[0, 1], joint[1, 0]], [0.5, 0.5], 10 * eps + 1e-9)
        report.check_close("joint_before_aligned", [joint[0, 0], joint[1, 1]], [0.0, 0.0], 10 * eps + 1e-9)
    else:
        report.notes.append("eps = 0: reduced states are exactly degenerate, subsystem bases are tie-broken")

    measured = apply(luders_channel([np.kron(np.outer(UP, UP), np.eye(2)),
                                     np.kron(np.outer(DOWN, DOWN), np.eye(2))]), rho)
    after = {"1+2": _epistemic_dict(measured), "1": _epistemic_dict(partial_trace(measured, ["1"])),
             "2": _epistemic_dict(partial_trace(measured, ["2"]))}
    report.outputs["epistemic_before"] = before
    report.outputs["epistemic_after_z_measurement"] = after
    p_after = np.sort(spectral_decompose(measured).probabilities)[::-1]
    report.check_close("after_measurement_pair_spectrum", p_after, [0.5, 0.5, 0, 0], 10 * eps + 1e-9)
    report.outputs["rho_1_gap"] = float(-np.diff(before["1"]["probabilities"])[0])
    return report


def lhv_strategies():
    """Deterministic anti-correlated strategies: A(n) = +-1 per direction, B = C = -A."""
    for signs in itertools.product((1, -1), repeat=3):
        yield dict(zip("abc", signs))


def bell_terms(a, b, c) -> tuple[float, float]:
    rho = pure_density(perturbed_singlet(0.0), PAIR).matrix
    sab, sac, sbc = correlation(rho, a, b), correlation(rho, a, c), correlation(rho, b, c)
    return abs(sab - sac), 1 + sbc


def bell_check(a=(1, 0, 0), b=(0, 1, 0), c=None, *, scan_points: int = 91, tol_scale: float = 1.0,
               tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    a = _unit(a, "a")
    b = _unit(b, "b")
    c = (a + b) / np.linalg.norm(a + b) if c is None else _unit(c, "c")
    report = ScenarioReport("bell_check", {"a": a, "b": b, "c": c}, tol_scale=tol_scale, tolerances=tolerances)
    lhs, rhs = bell_terms(a, b, c)
    report.outputs["lhs"] = lhs
    report.outputs["rhs"] = rhs
    report.outputs["violated"] = bool(lhs > rhs + 1e-12)

    # particle 2 always gives -A(n): <S_a S_b> = -A(a) A(b)
    ok = 0
    for s in lhv_strategies():
        l = abs(-s["a"] * s["b"] + s["a"] * s["c"])
        r = 1 - s["b"] * s["c"]
        ok += l <= r
    report.outputs["lhv_strategies_satisfying"] = ok
    report.check_true("lhv_enumeration", ok == 8, ok)

    # angle scan: c rotated from a towards b in their plane
    if np.linalg.norm(np.cross(a, b)) > 1e-12:
        perp = b - (a @ b) * a
        perp /= np.linalg.norm(perp)
        rows = []
        for phi in np.linspace(0.0, np.pi, scan_points):
            cc = np.cos(phi) * a + np.sin(phi) * perp
            l, r = bell_terms(a, b, cc)
            rows.append((phi, l, r, l - r))
        report.add_curve("bell_angle_scan", ["phi", "lhs", "rhs", "violation"],
                         ["rad", "hbar^2/4", "hbar^2/4", "hbar^2/4"], rows)
    return report


# ---------------------------------------------------------------------------

def ghz_state() -> np.ndarray:
    up3 = np.kron(np.kron(UP, UP), UP)
    dn3 = np.kron(np.kron(DOWN, DOWN), DOWN)
    return (up3 - dn3) / np.sqrt(2)


def _triple(*ops) -> np.ndarray:
    return np.kron(np.kron(ops[0], ops[1]), ops[2])


GHZ_CONSTRAINTS = (("xyy", 1), ("yxy", 1), ("yyx", 1), ("xxx", -1))


def ghz_mermin(*, tol_scale: float = 1.0, tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    report = ScenarioReport("ghz_mermin", {}, tol_scale=tol_scale, tolerances=tolerances)
    psi = ghz_state()
    pauli = {"x": SX, "y": SY}
    for word, sign in GHZ_CONSTRAINTS:
        op = _triple(*(pauli[ch] for ch in word))
        res = float(np.abs(op @ psi - sign * psi).max())
        report.outputs[f"eigen_residual_{word}"] = res
        report.check_le(f"eigen_{word}", res, 1e-12)

    consistent = 0
    for vals in itertools.product((1, -1), repeat=6):
        m = {"x": vals[:3], "y": vals[3:]}
        if all(np.prod([m[ch][k] for k, ch in enumerate(word)]) == sign for word, sign in GHZ_CONSTRAINTS):
            consistent += 1
    report.outputs["consistent_instruction_sets"] = consistent
    report.outputs["instruction_sets"] = 64
    report.check_true("no_local_instructions", consistent == 0, consistent)
    return report
