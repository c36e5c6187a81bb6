"""Quantum conditional probabilities between parent and subsystem ontologies.

Every table here is built from projectors onto density-matrix eigenstates
(never onto arbitrary vectors).  Matrix-valued results follow the
column-stochastic convention ``cond[j, i] = p(j; t' | i; t)``; tables over
several subsystems are indexed ``values[w, i_1, ..., i_n]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channels import ConditionalState, KrausChannel, assignment_map, conditional_state
from .config import Tolerances, resolve
from .hilbert import (DensityMatrix, EpistemicState, Partition, StateVector, partial_trace, psd_power,
                      ptrace, spectral_decompose)

__all__ = [
    "ConditionalProbabilityTable",
    "kinematical_cond_probs",
    "dynamical_cond_probs",
    "general_cond_probs",
    "coarse_grained_cond_probs",
    "coarse_grained_conditional_state",
    "propagate_epistemic",
    "transition_rates",
    "leifer_spekkens_check",
    "leifer_spekkens_deviations",
    "subsystem_inner_product",
    "match_eigenstates",
]

# entries this negative are numerical noise; anything below is an error
CLIP_FLOOR = -1e-12


@dataclass(frozen=True)
class ConditionalProbabilityTable:
    """p(i_1, ..., i_n | w) with ``values`` shaped ``(parent_count, *counts)``."""

    axes: tuple[tuple[tuple[str, ...], int], ...]
    parent_count: int
    values: np.ndarray
    min_raw: float = 0.0
    parent_probabilities: np.ndarray | None = None

    def row_sums(self) -> np.ndarray:
        return self.values.reshape(self.parent_count, -1).sum(axis=1)

    def normalization_residual(self) -> float:
        return float(np.abs(self.row_sums() - 1.0).max())

    def marginal(self, axis: int, weights: np.ndarray | None = None) -> np.ndarray:
        """Sum over every index except subsystem ``axis``, weighting parents by ``weights``."""
        w = self.parent_probabilities if weights is None else np.asarray(weights, dtype=float)
        if w is None:
            raise ValueError("parent weights are required")
        others = tuple(k + 1 for k in range(len(self.axes)) if k != axis)
        per_parent = self.values.sum(axis=others)
        return w @ per_parent

    def joint(self, weights: np.ndarray | None = None) -> np.ndarray:
        """Joint subsystem distribution sum_w p(i_1..i_n | w) p_W(w)."""
        w = self.parent_probabilities if weights is None else np.asarray(weights, dtype=float)
        return np.tensordot(w, self.values, axes=(0, 0))

    def to_dict(self) -> dict:
        return {
            "axes": [{"labels": list(lbl), "count": n} for lbl, n in self.axes],
            "parent_count": self.parent_count,
            "shape": list(self.values.shape),
            "values": self.values.reshape(-1).tolist(),
        }


def _clip_rows(raw: np.ndarray, axis_rows: int = 0) -> tuple[np.ndarray, float]:
    """Clip tiny negatives and renormalize each parent row; larger negatives raise."""
    lo = float(raw.min()) if raw.size else 0.0
    if lo < CLIP_FLOOR:
        raise ValueError(f"conditional probability {lo:.3e} is negative beyond clipping range")
    vals = np.clip(raw, 0.0, None)
    vals = np.moveaxis(vals, axis_rows, 0)
    sums = vals.reshape(vals.shape[0], -1).sum(axis=1)
    shape = (-1,) + (1,) * (vals.ndim - 1)
    vals = np.where(sums.reshape(shape) > 0, vals / np.where(sums == 0, 1, sums).reshape(shape), vals)
    return np.moveaxis(vals, 0, axis_rows), lo


def _ordered_groups(partition: Partition, groups: Sequence[Sequence[str]]) -> list[list[str]]:
    groups = [list(partition.sub(g).labels) for g in groups]
    seen = [l for g in groups for l in g]
    if any(len(g) == 0 for g in groups):
        raise ValueError("subsystem groups must be non-empty")
    if len(seen) != len(set(seen)):
        raise ValueError("subsystem groups overlap")
    if set(seen) != set(partition.labels):
        missing = set(partition.labels) - set(seen)
        raise ValueError(f"subsystem groups do not cover the parent (missing {sorted(missing)})")
    return groups


def _group_amplitudes(vecs: np.ndarray, partition: Partition, groups: list[list[str]],
                      bases: list[np.ndarray]) -> np.ndarray:
    """Amplitudes <psi_{i_1} (x) ... (x) psi_{i_n} | v> for every column v.

    Returns an array shaped ``(n_vectors, d_1, ..., d_n)``.
    """
    order = [partition.index(l) for g in groups for l in g]
    gdims = [partition.dim_of(g) for g in groups]
    n = vecs.shape[1]
    t = vecs.T.reshape([n] + list(partition.dims))
    t = t.transpose([0] + [k + 1 for k in order]).reshape([n] + gdims)
    for k, basis in enumerate(bases):
        t = np.moveaxis(np.tensordot(t, basis.conj(), axes=([k + 1], [0])), -1, k + 1)
    return t


def kinematical_cond_probs(rho_w: DensityMatrix, groups: Sequence[Sequence[str]], *,
                           tol: Tolerances | None = None) -> ConditionalProbabilityTable:
    """p(i_1..i_n | w) = <Psi_w| P_{i_1} (x) ... (x) P_{i_n} |Psi_w>.

    Parent states come from the spectrum of ``rho_w``; each group's projectors
    come from the spectrum of its reduced density matrix.
    """
    groups = _ordered_groups(rho_w.partition, groups)
    parent = spectral_decompose(rho_w, tol)
    subs = [spectral_decompose(partial_trace(rho_w, g), tol) for g in groups]
    amps = _group_amplitudes(parent.vectors, rho_w.partition, groups, [s.vectors for s in subs])
    raw = np.abs(amps) ** 2
    vals, lo = _clip_rows(raw)
    axes = tuple((tuple(g), rho_w.partition.dim_of(g)) for g in groups)
    return ConditionalProbabilityTable(axes, len(parent), vals, lo, parent.probabilities)


def _check_epistemic(expected: np.ndarray, epi: EpistemicState, what: str, tol: float) -> None:
    dev = np.abs(epi.rebuild_matrix() - expected).max()
    if dev > tol:
        raise ValueError(f"{what} is inconsistent with the evolved state (deviation {dev:.3e})")


def dynamical_cond_probs(channel: KrausChannel, epi_t: EpistemicState,
                         epi_t2: EpistemicState | None = None, *, check: bool = True,
                         tol: Tolerances | None = None) -> np.ndarray:
    """cond[j, i] = Tr[P_j(t') E[P_i(t)]] = sum_a |<j'|E_a|i>|^2.

    ``epi_t2`` defaults to the spectrum of the evolved state.  When supplied
    with ``check=True`` it must rebuild the evolved state within tolerance.
    """
    tol = resolve(tol)
    if channel.dim_in != epi_t.vectors.shape[0]:
        raise ValueError("channel and epistemic state dimensions differ")
    evolved = channel.apply_matrix(epi_t.rebuild_matrix())
    if epi_t2 is None:
        epi_t2 = spectral_decompose(DensityMatrix(evolved, channel.partition_out,
                                                  trace_deficit=max(0.0, epi_t.deficit)), tol)
    elif check:
        _check_epistemic(evolved, epi_t2, "final epistemic state", max(tol.recon, 1e-8))
    raw = sum(np.abs(epi_t2.vectors.conj().T @ e @ epi_t.vectors) ** 2 for e in channel.kraus_ops)
    vals, _ = _clip_rows(raw, axis_rows=1)
    return vals


def general_cond_probs(channel: KrausChannel, parent_epi_t: EpistemicState,
                       groups: Sequence[Sequence[str]],
                       subsystem_epis_t2: Sequence[EpistemicState] | None = None, *,
                       tol: Tolerances | None = None) -> ConditionalProbabilityTable:
    """p(i_1..i_n; t' | w; t) = Tr[(P_{i_1}(t') (x) ... ) E_W[P_W(w; t)]].

    Subsystem epistemic states at t' default to the spectra of the partial
    traces of the evolved parent state; when given they are checked against
    those partial traces.
    """
    tol = resolve(tol)
    partition = channel.partition_out
    groups = _ordered_groups(partition, groups)
    rho_t = parent_epi_t.rebuild_matrix()
    evolved = DensityMatrix(channel.apply_matrix(rho_t), partition,
                            trace_deficit=max(0.0, parent_epi_t.deficit))
    reduced = [partial_trace(evolved, g) for g in groups]
    if subsystem_epis_t2 is None:
        subsystem_epis_t2 = [spectral_decompose(r, tol) for r in reduced]
    else:
        if len(subsystem_epis_t2) != len(groups):
            raise ValueError("one epistemic state per subsystem group is required")
        for g, r, e in zip(groups, reduced, subsystem_epis_t2):
            _check_epistemic(r.matrix, e, f"epistemic state of {g}", max(tol.recon, 1e-8))
    bases = [e.vectors for e in subsystem_epis_t2]
    raw = 0.0
    for e in channel.kraus_ops:
        phi = e @ parent_epi_t.vectors
        raw = raw + np.abs(_group_amplitudes(phi, partition, groups, bases)) ** 2
    vals, lo = _clip_rows(raw)
    axes = tuple((tuple(g), partition.dim_of(g)) for g in groups)
    return ConditionalProbabilityTable(axes, len(parent_epi_t), vals, lo, parent_epi_t.probabilities)


def coarse_grained_cond_probs(channel_w: KrausChannel, rho_w: DensityMatrix, q_labels: Sequence[str], *,
                              tol: Tolerances | None = None) -> np.ndarray:
    """cond[j, i] = Tr_W[(P_Q(j; t') (x) 1_E) E_W[A_{Q in W}[P_Q(i; t)]]].

    Requires rho_Q to be full rank: the assignment map is undefined on
    eigenstates outside its support.
    """
    tol = resolve(tol)
    partition = rho_w.partition
    q_labels = list(partition.sub(q_labels).labels)
    epi_q = spectral_decompose(partial_trace(rho_w, q_labels), tol)
    if epi_q.probabilities[-1] <= tol.psd:
        raise ValueError("rho_Q is rank deficient: the assignment map has no full support")
    evolved = DensityMatrix(channel_w.apply_matrix(rho_w.matrix), partition,
                            trace_deficit=rho_w.trace_deficit)
    epi_q2 = spectral_decompose(partial_trace(evolved, q_labels), tol)
    dq = epi_q.vectors.shape[0]
    raw = np.zeros((dq, dq))
    for i in range(dq):
        lifted = channel_w.apply_matrix(assignment_map(rho_w, q_labels, epi_q.projector(i), tol=tol))
        red = ptrace(lifted, partition.dims, partition.indices(q_labels))
        raw[:, i] = np.real(np.einsum("ki,kl,li->i", epi_q2.vectors.conj(), red, epi_q2.vectors))
    vals, _ = _clip_rows(raw, axis_rows=1)
    return vals


def propagate_epistemic(p, cond, *, tol: float = 1e-9) -> np.ndarray:
    """p'_j = sum_i cond[j, i] p_i for a column-stochastic ``cond``."""
    p = np.asarray(p, dtype=float)
    cond = np.asarray(cond, dtype=float)
    if cond.ndim != 2 or cond.shape[1] != p.size:
        raise ValueError("cond must be a matrix with one column per input probability")
    if cond.min() < -tol or np.abs(cond.sum(axis=0) - 1).max() > tol:
        raise ValueError("cond is not column stochastic")
    return cond @ p


def transition_rates(channel_dt: KrausChannel, epi: EpistemicState, dt: float, *,
                     tol: Tolerances | None = None) -> np.ndarray:
    """W(j|i) = (p(j; t+dt | i; t) - delta_ji) / dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    cond = dynamical_cond_probs(channel_dt, epi, tol=tol)
    return (cond - np.eye(*cond.shape)) / dt


def coarse_grained_conditional_state(channel_w: KrausChannel, rho_w: DensityMatrix,
                                     q_labels: Sequence[str], *,
                                     tol: Tolerances | None = None) -> ConditionalState:
    """Subsystem conditional state obtained from the parent's.

    (1 (x) rho_Q^-1/2) Tr_E' Tr_E[(1 (x) rho_W^1/2) cs_W (1 (x) rho_W^1/2)] (1 (x) rho_Q^-1/2)
    """
    tol = resolve(tol)
    partition = rho_w.partition
    q_labels = list(partition.sub(q_labels).labels)
    cs_w = conditional_state(channel_w)
    d = partition.total
    sq = psd_power(rho_w.matrix, 0.5, tol)
    left = np.kron(np.eye(d), sq)
    joint = left @ cs_w.entries @ left
    dims2 = list(partition.dims) * 2
    n = len(partition.dims)
    q_idx = partition.indices(q_labels)
    keep = sorted(q_idx) + [n + k for k in sorted(q_idx)]
    red = ptrace(joint, dims2, keep)
    rho_q = partial_trace(rho_w, q_labels).matrix
    dq = rho_q.shape[0]
    side = np.kron(np.eye(dq), psd_power(rho_q, -0.5, tol))
    out = side @ red @ side
    out.setflags(write=False)
    return ConditionalState(out, dq, dq)


def leifer_spekkens_deviations(channel: KrausChannel, epi_t: EpistemicState,
                               epi_t2: EpistemicState | None = None, *,
                               rho_w: DensityMatrix | None = None,
                               q_labels: Sequence[str] | None = None,
                               channel_w: KrausChannel | None = None,
                               tol: Tolerances | None = None) -> dict[str, float]:
    """Compare conditional probabilities with conditional-state diagonal elements.

    ``diagonal``: |p(j|i) - (<j'| (x) <i|) cs (|j'> (x) |i>)| for ``channel``.
    With a parent state ``rho_w``, subsystem ``q_labels`` and parent channel
    ``channel_w``, also report ``coarse_propagation`` (the subsystem
    conditional state reproduces Tr_E of the evolved parent) and
    ``coarse_diagonal`` (its diagonal matches the coarse-grained table).
    """
    tol = resolve(tol)
    evolved = channel.apply_matrix(epi_t.rebuild_matrix())
    if epi_t2 is None:
        epi_t2 = spectral_decompose(DensityMatrix(evolved, channel.partition_out,
                                                  trace_deficit=max(0.0, epi_t.deficit)), tol)
    table = dynamical_cond_probs(channel, epi_t, epi_t2, tol=tol)
    cs = conditional_state(channel)
    diag = np.array([[cs.element(epi_t2.vectors[:, j], epi_t.vectors[:, i]).real
                      for i in range(len(epi_t))] for j in range(len(epi_t2))])
    out = {"diagonal": float(np.abs(table - diag).max())}
    if rho_w is not None:
        if q_labels is None or channel_w is None:
            raise ValueError("coarse-grained check needs q_labels and channel_w")
        q_labels = list(rho_w.partition.sub(q_labels).labels)
        cgs = coarse_grained_conditional_state(channel_w, rho_w, q_labels, tol=tol)
        rho_q = partial_trace(rho_w, q_labels)
        target = ptrace(channel_w.apply_matrix(rho_w.matrix), rho_w.partition.dims,
                        rho_w.partition.indices(q_labels))
        out["coarse_propagation"] = float(np.abs(cgs.propagate_matrix(rho_q.matrix) - target).max())
        cg_table = coarse_grained_cond_probs(channel_w, rho_w, q_labels, tol=tol)
        epi_q = spectral_decompose(rho_q, tol)
        epi_q2 = spectral_decompose(DensityMatrix(target, rho_q.partition), tol)
        cg_diag = np.array([[cgs.element(epi_q2.vectors[:, j], epi_q.vectors[:, i]).real
                             for i in range(len(epi_q))] for j in range(len(epi_q2))])
        out["coarse_diagonal"] = float(np.abs(cg_table - cg_diag).max())
    return out


def leifer_spekkens_check(channel: KrausChannel, epi_t: EpistemicState,
                          epi_t2: EpistemicState | None = None, **kw) -> float:
    """Maximum deviation reported by :func:`leifer_spekkens_deviations`."""
    return max(leifer_spekkens_deviations(channel, epi_t, epi_t2, **kw).values())


def subsystem_inner_product(rho_w: DensityMatrix, psi, chi, embedding_psi=None, embedding_chi=None) -> complex:
    """h(psi, chi) = Tr_W[rho_W (|psi><psi| (x) 1)(|chi><chi| (x) 1)].

    Each embedding is a unitary on W applied as V (P (x) 1_E) V^dagger, with
    the subsystem factor first before reshuffling; ``None`` is the identity.
    """
    d_w = rho_w.dim

    def lifted(vec, v):
        vec = np.asarray(vec.amplitudes if isinstance(vec, StateVector) else vec, dtype=complex)
        dq = vec.size
        if d_w % dq:
            raise ValueError(f"subsystem dimension {dq} does not divide parent dimension {d_w}")
        p = np.kron(np.outer(vec, vec.conj()), np.eye(d_w // dq))
        if v is None:
            return p
        v = np.asarray(v, dtype=complex)
        if v.shape != (d_w, d_w):
            raise ValueError(f"embedding must be {d_w}x{d_w}, got {v.shape}")
        return v @ p @ v.conj().T

    a = lifted(psi, embedding_psi)
    b = lifted(chi, embedding_chi)
    return complex(np.trace(rho_w.matrix @ a @ b))


def match_eigenstates(vecs_from: np.ndarray, vecs_to: np.ndarray) -> np.ndarray:
    """Permutation ``perm`` with ``vecs_to[:, perm[i]]`` the best match for ``vecs_from[:, i]``.

    Maximizes total |overlap| with a linear-sum assignment.
    """
    overlap = np.abs(np.asarray(vecs_to).conj().T @ np.asarray(vecs_from))
    rows, cols = linear_sum_assignment(-overlap.T)
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    return perm
