"""Von Neumann measurement with an environment of k qubits.

The subject Q (n outcomes) couples to a pointer A with dimension >= n + 1,
where pointer value 0 is the ready state.  Step one shifts the pointer by
i + 1 when Q is in |i>.  Step two rotates each environment qubit to
cos(i theta)|0> + sin(i theta)|1> when the pointer reads i + 1, so two
distinct records i, j overlap by cos((i - j) theta)^k.

Both steps are permutations or block rotations of the state vector, so
they are applied directly instead of through a dense unitary.
"""

from __future__ import annotations

import numpy as np

from ..channels import KrausChannel
from ..conditional import general_cond_probs, kinematical_cond_probs
from ..config import DEFAULT
from ..hilbert import DensityMatrix, EpistemicState, Partition, spectral_decompose
from .report import ScenarioReport

PRESETS = {
    "schrodinger_cat": {
        "labels": ["atom", "cat", "environment"],
        "alpha": [2 ** -0.5, 2 ** -0.5],
        "env_qubits": 10,
    },
    "wigner_friend": {
        "labels": ["spin", "friend", "environment"],
        "repeat_label": "wigner",
        "alpha": [2 ** -0.5, 2 ** -0.5],
        "env_qubits": 10,
        "repeat": True,
    },
}


def _complex_vector(values) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError("complex amplitudes are written as [re, im]")
            out.append(complex(v[0], v[1]))
        else:
            out.append(complex(v))
    return np.array(out, dtype=complex)


def measurement_state(alpha, pointer_dim: int, env_qubits: int, theta: float,
                      pointers: int = 1) -> np.ndarray:
    """Final state as an array shaped (n, dA, [dA,] 2, ..., 2)."""
    n = alpha.size
    psi = np.zeros((n,) + (pointer_dim,) * pointers + (2,) * env_qubits, dtype=complex)
    for i, a in enumerate(alpha):
        env = np.array([np.cos(i * theta), np.sin(i * theta)])
        record = np.ones(1)
        for _ in range(env_qubits):
            record = np.kron(record, env)
        pointer_idx = ((i + 1) % pointer_dim,) * pointers
        psi[(i,) + pointer_idx] = a * record.reshape((2,) * env_qubits)
    return psi


def _system_density(psi: np.ndarray, n_sys_axes: int) -> np.ndarray:
    sys_dim = int(np.prod(psi.shape[:n_sys_axes]))
    m = psi.reshape(sys_dim, -1)
    return m @ m.conj().T


def _pointer_basis_order(epi: EpistemicState) -> np.ndarray:
    """Computational label carried by each eigenvector (largest component)."""
    return np.argmax(np.abs(epi.vectors), axis=0)


def von_neumann_measurement(alpha=(2 ** -0.5, 2 ** -0.5), env_qubits: int = 10, pointer_dim: int | None = None,
                            theta: float = np.pi / 4, repeat: bool = False, labels=("Q", "A", "E"),
                            repeat_label: str = "A2", preset: str | None = None, *,
                            tol_scale: float = 1.0, tolerances: dict | None = None, **_ignored) -> ScenarioReport:
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        cfg = dict(PRESETS[preset])
        alpha = cfg.get("alpha", alpha)
        env_qubits = cfg.get("env_qubits", env_qubits)
        labels = cfg.get("labels", labels)
        repeat = cfg.get("repeat", repeat)
        repeat_label = cfg.get("repeat_label", repeat_label)
    a = _complex_vector(alpha)
    n = a.size
    if n < 1:
        raise ValueError("alpha needs at least one amplitude")
    if abs(np.vdot(a, a).real - 1) > DEFAULT.norm:
        raise ValueError("subject amplitudes must be normalized")
    k = int(env_qubits)
    if k < 0:
        raise ValueError("env_qubits must be non-negative")
    dA = n + 1 if pointer_dim is None else int(pointer_dim)
    if dA < n + 1:
        raise ValueError("pointer dimension must be at least outcomes + 1")
    pointers = 2 if repeat else 1
    total = n * dA ** pointers * 2 ** k
    if total > DEFAULT.max_vector_dim:
        raise ValueError(f"state dimension {total} exceeds the cap {DEFAULT.max_vector_dim}")
    sys_dim = n * dA ** pointers
    if sys_dim > DEFAULT.max_dim:
        raise ValueError(f"subject+pointer dimension {sys_dim} exceeds the operator cap {DEFAULT.max_dim}")
    q_label, a_label, e_label = labels
    sys_labels = [q_label, a_label] + ([repeat_label] if repeat else [])

    report = ScenarioReport("von_neumann_measurement",
                            {"alpha": a, "env_qubits": k, "pointer_dim": dA, "theta": theta,
                             "repeat": bool(repeat), "labels": list(labels), "preset": preset},
                            tol_scale=tol_scale, tolerances=tolerances)
    born = np.abs(a) ** 2
    psi = measurement_state(a, dA, k, theta, pointers)
    rho_sys = DensityMatrix(_system_density(psi, 1 + pointers),
                            Partition(sys_labels, [n] + [dA] * pointers))
    rho_q = _system_density(psi, 1)
    rho_a = np.einsum("iaj,ibj->ab", psi.reshape(n, dA, -1), psi.reshape(n, dA, -1).conj())

    pointer_probs = np.real(np.diag(rho_a))[1:n + 1]
    report.outputs["born_weights"] = born
    report.outputs["pointer_probabilities"] = pointer_probs
    report.outputs["rho_Q_spectrum"] = np.sort(np.linalg.eigvalsh(rho_q))[::-1]
    report.outputs["rho_A_spectrum"] = np.sort(np.linalg.eigvalsh(rho_a))[::-1]
    report.check_close("pointer_probabilities", pointer_probs, born, 1e-9)
    report.check_close("rho_Q_spectrum", report.outputs["rho_Q_spectrum"], np.sort(born)[::-1], 1e-9)

    # correlated basis |i>_Q |i+1>_A (|i+1>_A2): off-diagonal terms between distinct outcomes
    sys_shape = (n,) + (dA,) * pointers
    corr = [int(np.ravel_multi_index((i,) + ((i + 1) % dA,) * pointers, sys_shape)) for i in range(n)]
    block = rho_sys.matrix[np.ix_(corr, corr)]
    off = float(np.abs(block - np.diag(np.diag(block))).max()) if n > 1 else 0.0
    env_overlap = float(np.abs(np.cos(theta)) ** k) if n > 1 else 0.0
    report.outputs["offdiag_magnitude"] = off
    report.outputs["env_overlap"] = env_overlap
    pair_bound = max((abs(a[i] * np.conj(a[j])) * abs(np.cos((i - j) * theta)) ** k
                      for i in range(n) for j in range(n) if i != j), default=0.0)
    report.check_close("offdiag_matches_env_overlap", off, pair_bound, 1e-12)

    # kinematical conditionals of the pointer-subject pair
    table = kinematical_cond_probs(rho_sys, [[l] for l in sys_labels])
    joint = table.joint()
    q_epi = spectral_decompose(DensityMatrix(rho_q), None)
    q_of = _pointer_basis_order(q_epi)
    a_epi = spectral_decompose(DensityMatrix(rho_a), None)
    a_of = _pointer_basis_order(a_epi)
    joint_qa = joint.sum(axis=2) if pointers == 2 else joint
    cond = []
    for i in range(n):
        if born[i] <= DEFAULT.prob:
            continue
        ai = [m for m in range(dA) if a_of[m] == (i + 1) % dA]
        qi = [m for m in range(n) if q_of[m] == i]
        num = joint_qa[np.ix_(qi, ai)].sum()
        den = joint_qa[:, ai].sum()
        cond.append(num / den if den > 0 else 1.0)
    min_cond = float(min(cond)) if cond else 1.0
    report.outputs["min_correlation_probability"] = min_cond
    report.check_ge("correlation", min_cond, 1 - 10 * off)

    if pointers == 2:
        same = sum(joint[:, x, y].sum() for x in range(dA) for y in range(dA) if a_of[x] == a_of[y])
        report.outputs["repeat_same_outcome_probability"] = float(same)
        report.check_ge("persistence", float(same), 1 - 10 * off)

    # general conditional probabilities through the full unitary, when small enough
    if total <= DEFAULT.max_dim:
        u = _measurement_unitary(n, dA, k, theta, pointers)
        w_part = Partition(sys_labels + [e_label], [n] + [dA] * pointers + [2 ** k])
        psi0 = np.zeros(total, dtype=complex)
        psi0.reshape(n, -1)[:, 0] = a
        parent = EpistemicState([1.0], psi0[:, None], w_part)
        gen = general_cond_probs(KrausChannel([u], w_part), parent, [[q_label], sys_labels[1:] + [e_label]])
        g_q = gen.marginal(0)
        q2 = _pointer_basis_order(spectral_decompose(DensityMatrix(rho_q)))
        born_sorted = born[q2]
        report.outputs["general_cond_probs_Q"] = g_q
        report.check_close("general_cond_probs_born", g_q, born_sorted, max(10 * off, 1e-9))
    else:
        report.notes.append("general conditional probabilities skipped: parent dimension above operator cap")
    report.notes.append("exponential suppression in degree-of-freedom counts is checked only as monotone decrease in k")
    return report


def _measurement_unitary(n: int, dA: int, k: int, theta: float, pointers: int) -> np.ndarray:
    """Dense unitary of the two-step sequence (only for small instances)."""
    dims = (n,) + (dA,) * pointers + (2,) * k
    total = int(np.prod(dims))
    shift = np.zeros((total, total))
    env_dim = 2 ** k
    for idx in np.ndindex(*dims[:1 + pointers]):
        i, ptrs = idx[0], idx[1:]
        new = (i,) + tuple((p + i + 1) % dA for p in ptrs)
        src = np.ravel_multi_index(idx, dims[:1 + pointers]) * env_dim
        dst = np.ravel_multi_index(new, dims[:1 + pointers]) * env_dim
        shift[dst:dst + env_dim, src:src + env_dim] = np.eye(env_dim)
    rot = np.zeros((total, total))
    for idx in np.ndindex(*dims[:1 + pointers]):
        p = idx[1]
        ang = (p - 1) * theta if 1 <= p <= n else 0.0
        r = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        block = np.ones((1, 1))
        for _ in range(k):
            block = np.kron(block, r)
        s = np.ravel_multi_index(idx, dims[:1 + pointers]) * env_dim
        rot[s:s + env_dim, s:s + env_dim] = block
    return rot @ shift
