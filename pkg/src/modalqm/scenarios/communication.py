"""No-communication check: local operations on B leave rho_A unchanged."""

from __future__ import annotations

import numpy as np

from ..channels import (KrausChannel, LindbladGenerator, dephasing_channel, lindblad_evolve,
                        local_channel, unitary_channel)
from ..hilbert import SX, SZ, DensityMatrix, Partition, partial_trace, pure_density
from .report import ScenarioReport, complex_matrix

BELL_PAIR = Partition(["A", "B"], [2, 2])


def bell_pair() -> DensityMatrix:
    return pure_density(np.array([1, 0, 0, 1]) / np.sqrt(2), BELL_PAIR)


def _as_pair(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        if len(rho.partition.labels) != 2:
            raise ValueError("rho_AB needs exactly two factors")
        return rho.relabel(Partition(["A", "B"], rho.partition.dims))
    m = complex_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("matrix input must be a two-qubit density matrix")
    return DensityMatrix(m, BELL_PAIR)


def local_deviation(rho: DensityMatrix, op, *, t: float = 1.0, step: float = 1e-3) -> float:
    """max |Tr_B rho - Tr_B (1 (x) E_B)[rho]| for a Kraus channel or Lindblad generator on B."""
    dim_b = rho.partition.dims[1]
    before = partial_trace(rho, ["A"]).matrix
    if isinstance(op, KrausChannel):
        if op.dim_in != dim_b or op.dim_out != dim_b:
            raise ValueError("local operation must act on factor B alone")
        after = local_channel(op, ["B"], rho.partition).apply_matrix(rho.matrix)
    elif isinstance(op, LindbladGenerator):
        if op.dim != dim_b:
            raise ValueError("local generator must act on factor B alone")
        gen = LindbladGenerator(np.kron(np.eye(rho.partition.dims[0]), op.hamiltonian),
                                [np.kron(np.eye(rho.partition.dims[0]), a) for a in op.jump_ops],
                                op.rates, rho.partition)
        after = lindblad_evolve(gen, rho, t, step).matrix
    else:
        raise TypeError("local operation must be a KrausChannel or LindbladGenerator")
    after_a = np.einsum("ijkj->ik", after.reshape(rho.partition.dims * 2))
    return float(np.abs(before - after_a).max())


def default_local_ops() -> dict:
    theta = 0.7
    u = np.cos(theta) * np.eye(2) - 1j * np.sin(theta) * (SX + SZ) / np.sqrt(2)
    return {
        "unitary": unitary_channel(u),
        "dephasing": dephasing_channel(0.3),
        "lindblad": LindbladGenerator(0.4 * SX, [SZ], [0.5]),
    }


def no_communication(rho_AB=None, local_op=None, *, t: float = 1.0, step: float = 1e-3,
                     tol_scale: float = 1.0, tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    rho = bell_pair() if rho_AB is None else _as_pair(rho_AB)
    report = ScenarioReport("no_communication", {"dims": list(rho.partition.dims), "t": t, "step": step},
                            tol_scale=tol_scale, tolerances=tolerances)
    dim_b = rho.partition.dims[1]
    defaults = default_local_ops()
    if local_op is None or isinstance(local_op, str):
        if dim_b != 2:
            raise ValueError("default local operations are qubit maps; supply local_op for other dims")
        if local_op is None:
            ops = defaults
        elif local_op in defaults:
            ops = {local_op: defaults[local_op]}
        else:
            raise ValueError(f"unknown local operation {local_op!r}; choose from {sorted(defaults)}")
    else:
        ops = {"supplied": local_op}
    for name, op in ops.items():
        dev = local_deviation(rho, op, t=t, step=step)
        report.outputs[f"deviation_{name}"] = dev
        # the integrator renormalizes every step, so Lindblad runs get an integrator allowance
        report.check_le(f"no_signal_{name}", dev, 1e-8 if isinstance(op, LindbladGenerator) else 1e-12)

    # separable Hamiltonian: joint run reduced to A vs a standalone run of A
    if rho.partition.dims == (2, 2):
        ha, hb = 0.8 * SZ + 0.3 * SX, 0.5 * SX
        joint = LindbladGenerator(np.kron(ha, np.eye(2)) + np.kron(np.eye(2), hb), [], [], rho.partition)
        rho_t = lindblad_evolve(joint, rho, t, step)
        alone = lindblad_evolve(LindbladGenerator(ha), partial_trace(rho, ["A"]), t, step)
        dev = float(np.abs(partial_trace(rho_t, ["A"]).matrix - alone.matrix).max())
        report.outputs["separable_hamiltonian_deviation"] = dev
        report.check_le("separable_hamiltonian", dev, 1e-8)
    return report
