"""Myrvold's two-slice example, the Mermin-Peres square and the PBR basis."""

from __future__ import annotations

import itertools

import numpy as np

from ..hilbert import I2, SX, SY, SZ, Partition, partial_trace, pure_density
from .report import ScenarioReport

# Myrvold wing: qubit {+, -} with a detector {empty, "+", "-"}
PLUS, MINUS = 0, 1
EMPTY, REC_PLUS, REC_MINUS = 0, 1, 2
MYRVOLD = Partition(["1", "A", "2", "B"], [2, 3, 2, 3])


def _wing(q: int, d: int) -> np.ndarray:
    v = np.zeros(6, dtype=complex)
    v[q * 3 + d] = 1
    return v


def _myrvold_vector(coeffs: dict) -> np.ndarray:
    """sum c |q1, d1>|q2, d2> with keys ((q1, d1), (q2, d2)); order 1, A, 2, B."""
    psi = np.zeros(36, dtype=complex)
    for (w1, w2), c in coeffs.items():
        psi += c * np.kron(_wing(*w1), _wing(*w2))
    return psi


def myrvold_alpha() -> np.ndarray:
    pp, mm = (PLUS, REC_PLUS), (MINUS, REC_MINUS)
    return _myrvold_vector({(pp, pp): 1 / np.sqrt(12), (pp, mm): -1 / np.sqrt(12),
                            (mm, pp): -1 / np.sqrt(12), (mm, mm): -np.sqrt(9 / 12)})


def myrvold_beta() -> np.ndarray:
    pp, mm = (PLUS, REC_PLUS), (MINUS, REC_MINUS)
    return _myrvold_vector({(pp, pp): -1 / np.sqrt(3), (pp, mm): 1 / np.sqrt(3), (mm, pp): 1 / np.sqrt(3)})


def wing_hadamard(signed: bool = True) -> np.ndarray:
    """Hadamard on span{|+, "+">, |-, "-">}, identity on the rest of the 6-dim wing.

    ``signed=False`` reproduces the map as printed for the second wing, where
    both recorded states go to the same vector (not unitary).
    """
    a, b = PLUS * 3 + REC_PLUS, MINUS * 3 + REC_MINUS
    u = np.eye(6, dtype=complex)
    s = 1 / np.sqrt(2)
    u[a, a], u[b, a] = s, s
    u[a, b], u[b, b] = s, (-s if signed else s)
    return u


def myrvold(*, tol_scale: float = 1.0, tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    report = ScenarioReport("myrvold", {"dims": list(MYRVOLD.dims)}, tol_scale=tol_scale, tolerances=tolerances)
    alpha, beta = myrvold_alpha(), myrvold_beta()
    spectra = {}
    for name, psi in (("alpha", alpha), ("beta", beta)):
        rho12 = partial_trace(pure_density(psi, MYRVOLD), ["1", "2"])
        spectra[name] = np.sort(np.linalg.eigvalsh(rho12.matrix))[::-1]
        report.outputs[f"spectrum_{name}"] = spectra[name]
    report.check_close("spectrum_alpha", spectra["alpha"], [9 / 12, 1 / 12, 1 / 12, 1 / 12], 1e-12)
    report.check_close("spectrum_beta", spectra["beta"], [1 / 3, 1 / 3, 1 / 3, 0], 1e-12)

    u = wing_hadamard(True)
    moved = np.kron(u, u) @ alpha
    res = float(np.linalg.norm(moved - beta))
    report.outputs["transport_residual"] = res
    report.check_le("hadamard_transport", res, 1e-12)

    # the unsigned variant applied to the second wing
    u_printed = np.kron(u, wing_hadamard(False))
    report.outputs["printed_map_unitarity_residual"] = float(np.abs(u_printed.conj().T @ u_printed - np.eye(36)).max())
    report.outputs["printed_map_transport_residual"] = float(np.linalg.norm(u_printed @ alpha - beta))
    report.notes.append("second-wing Hadamard needs a minus sign on its recorded-minus column to be unitary")
    return report


# ---------------------------------------------------------------------------

def _two(a, b) -> np.ndarray:
    return np.kron(a, b)


KS_SQUARE = (
    (("s2z", _two(I2, SZ)), ("s1z", _two(SZ, I2)), ("s1z s2z", _two(SZ, SZ))),
    (("s1x", _two(SX, I2)), ("s2x", _two(I2, SX)), ("s1x s2x", _two(SX, SX))),
    (("s1x s2z", _two(SX, SZ)), ("s1z s2x", _two(SZ, SX)), ("s1y s2y", _two(SY, SY))),
)
ROW_SIGNS = (1, 1, 1)
COLUMN_SIGNS = (1, 1, -1)


def _lines():
    rows = [[op for _, op in r] for r in KS_SQUARE]
    cols = [[KS_SQUARE[r][c][1] for r in range(3)] for c in range(3)]
    return rows, cols


def kochen_specker(*, tol_scale: float = 1.0, tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    report = ScenarioReport("kochen_specker", {"square": [[n for n, _ in r] for r in KS_SQUARE]},
                            tol_scale=tol_scale, tolerances=tolerances)
    rows, cols = _lines()
    eye = np.eye(4)
    worst = 0.0
    for line in rows + cols:
        for x, y in itertools.combinations(line, 2):
            worst = max(worst, float(np.abs(x @ y - y @ x).max()))
    report.outputs["max_commutator"] = worst
    report.check_le("line_commutators", worst, 1e-12)

    for kind, lines, signs in (("row", rows, ROW_SIGNS), ("column", cols, COLUMN_SIGNS)):
        for k, (line, sign) in enumerate(zip(lines, signs)):
            prod = line[0] @ line[1] @ line[2]
            report.outputs[f"{kind}_{k + 1}_product_sign"] = int(np.sign(np.trace(prod).real))
            report.check_close(f"{kind}_{k + 1}_product", prod, sign * eye, 1e-12)

    consistent = 0
    for vals in itertools.product((1, -1), repeat=9):
        v = np.array(vals).reshape(3, 3)
        if all(v[r].prod() == ROW_SIGNS[r] for r in range(3)) and \
                all(v[:, c].prod() == COLUMN_SIGNS[c] for c in range(3)):
            consistent += 1
    report.outputs["consistent_assignments"] = consistent
    report.outputs["assignments"] = 512
    report.check_true("no_noncontextual_assignment", consistent == 0, consistent)

    # projector forms P = (1 - sigma)/2 and their line sums, by direct diagonalization
    proj = [[(eye - op) / 2 for op in r] for r in rows]
    report.outputs["projector_eigenvalues"] = np.round(np.linalg.eigvalsh(proj[0][0]), 12)
    a_sums = [sum(proj[r][c] for r in range(3)) for c in range(3)]
    b_sums = [sum(proj[r][c] for c in range(3)) for r in range(3)]
    eig = {}
    for name, mats in (("A", a_sums), ("B", b_sums)):
        for k, m in enumerate(mats):
            eig[f"{name}{k + 1}"] = np.round(np.sort(np.linalg.eigvalsh(m))[::-1], 12) + 0.0
    report.outputs["line_sum_eigenvalues"] = eig
    listed = {"A1": [2, 2, 0, 0], "A2": [2, 2, 0, 0], "A3": [3, 3, 1, 1],
              "B1": [2, 2, 0, 0], "B2": [2, 2, 0, 0], "B3": [2, 2, 0, 0]}
    report.outputs["line_sum_matches_listed"] = {k: bool(np.allclose(eig[k], v, atol=1e-12)) for k, v in listed.items()}
    report.notes.append("P = (1 - sigma)/2 has eigenvalues 0 and 1; line-sum spectra are reported, not asserted")
    return report


# ---------------------------------------------------------------------------

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KETP = (KET0 + KET1) / np.sqrt(2)
KETM = (KET0 - KET1) / np.sqrt(2)


def pbr_basis() -> np.ndarray:
    s = 1 / np.sqrt(2)
    xi = [
        s * (np.kron(KET0, KET1) + np.kron(KET1, KET0)),
        s * (np.kron(KET0, KETM) + np.kron(KET1, KETP)),
        s * (np.kron(KETP, KET1) + np.kron(KETM, KET0)),
        s * (np.kron(KETP, KETM) + np.kron(KETM, KETP)),
    ]
    return np.stack(xi, axis=1)


PBR_PRODUCTS = (("00", KET0, KET0), ("0+", KET0, KETP), ("+0", KETP, KET0), ("++", KETP, KETP))


def pbr(*, tol_scale: float = 1.0, tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    report = ScenarioReport("pbr", {"products": [p[0] for p in PBR_PRODUCTS]}, tol_scale=tol_scale,
                            tolerances=tolerances)
    xi = pbr_basis()
    gram = xi.conj().T @ xi
    report.outputs["gram_residual"] = float(np.abs(gram - np.eye(4)).max())
    report.check_close("orthonormal", gram, np.eye(4), 1e-12)
    table = np.zeros((4, 4))
    for r, (_, u, v) in enumerate(PBR_PRODUCTS):
        table[r] = np.abs(xi.conj().T @ np.kron(u, v)) ** 2
    for k, (name, _, _) in enumerate(PBR_PRODUCTS):
        amp = abs(np.vdot(xi[:, k], np.kron(PBR_PRODUCTS[k][1], PBR_PRODUCTS[k][2])))
        report.check_le(f"overlap_xi{k + 1}_{name}", amp, 1e-12)
    report.outputs["born_table"] = table
    zeros = (table <= 1e-24).sum(axis=1)
    report.outputs["zero_outcomes_per_product"] = zeros
    report.check_true("one_zero_outcome_each", bool(np.all(zeros == 1)), zeros)
    return report
