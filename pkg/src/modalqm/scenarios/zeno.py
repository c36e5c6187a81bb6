"""Survival under repeated projective resets.

H = beta * sigma_x has energy spread beta in |0>, so one interval of length
dt survives with probability cos^2(beta dt).  Survival after N selective
projections onto |0> is computed by iterating the trace-decreasing map
rho -> P0 U rho U^+ P0, whose trace deficit is the decay probability, and
compared with the closed form cos^2(beta t / N)^N.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from ..channels import KrausChannel
from ..hilbert import SX, basis_state, pure_density
from .report import ScenarioReport

DEFAULT_N = (1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000)


def survival(beta: float, t: float, n: int) -> float:
    """Probability of still being in |0> after n projected intervals, by map iteration."""
    dt = t / n
    p0 = np.diag([1.0, 0.0]).astype(complex)
    step = KrausChannel([p0 @ expm(-1j * beta * dt * SX)], check=False)
    m = pure_density(basis_state(0, 2)).matrix
    for _ in range(n):
        m = step.apply_matrix(m)
    return float(np.trace(m).real)


def quantum_zeno(beta: float = 1.0, t: float = 1.0, N_list=DEFAULT_N, alpha: float = 0.5,
                 linear_N: int = 1000, single_dt: float | None = None, *, tol_scale: float = 1.0,
                 tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    if beta <= 0 or t <= 0:
        raise ValueError("beta and t must be positive")
    n_list = sorted({int(n) for n in N_list})
    if not n_list or n_list[0] < 1:
        raise ValueError("N_list needs positive counts")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    report = ScenarioReport("quantum_zeno", {"beta": beta, "t": t, "N_list": n_list, "alpha": alpha,
                                             "linear_N": linear_N},
                            tol_scale=tol_scale, tolerances=tolerances)

    dt = 0.01 / beta if single_dt is None else float(single_dt)
    psi0 = basis_state(0, 2).amplitudes
    amp = psi0.conj() @ expm(-1j * beta * dt * SX) @ psi0
    single = float(abs(amp) ** 2)
    quad = 1 - (beta * dt) ** 2
    report.outputs["single_interval"] = {"dt": dt, "survival": single, "quadratic": quad}
    report.check_le("single_interval_quadratic", abs(single - quad) / quad, 1e-6)

    rows = []
    for n in n_list:
        p = survival(beta, t, n)
        closed = np.cos(beta * t / n) ** (2 * n)
        rows.append((n, p, closed, np.exp(-alpha * t)))
    rows = np.array(rows)
    report.add_curve("zeno_survival", ["N", "survival", "closed_form", "exponential_law"],
                     ["count", "probability", "probability", "probability"], rows)
    report.check_close("survival_closed_form", rows[:, 1], rows[:, 2], 1e-10)
    if beta * t / n_list[0] <= np.pi / 2:
        report.check_true("monotone_in_N", bool(np.all(np.diff(rows[:, 1]) >= -1e-12)))
    else:
        report.notes.append("first interval beyond the quadratic regime; monotonicity not asserted")
    report.outputs["survival_at_max_N"] = float(rows[-1, 1])

    linear = (1 - alpha * t / linear_N) ** linear_N
    expo = float(np.exp(-alpha * t))
    report.outputs["linear_regime"] = {"N": linear_N, "product": linear, "exponential": expo}
    report.check_le("linear_regime_exponential", abs(linear - expo) / expo, 0.01)
    return report
