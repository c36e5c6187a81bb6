"""Linear CPT dynamical maps.

A channel is stored in Kraus form.  The Choi matrix uses the ordering
``out (x) in``::

    C = sum_ij  E(|i><j|) (x) |i><j|

so ``Tr_out C`` is the identity exactly when the map is trace preserving.
The causal conditional state is the partial transpose of ``C`` on the input
factor and propagates states by ``rho' = Tr_in[cs (1 (x) rho)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .config import Tolerances, resolve
from .hilbert import (I2, SX, SY, SZ, DensityMatrix, Operator, Partition, embed, hermitian_eig,
                      partial_trace, psd_power, ptrace, random_unitary)

__all__ = [
    "KrausChannel",
    "Superoperator",
    "ChoiMatrix",
    "ConditionalState",
    "LindbladGenerator",
    "CPTDiagnostics",
    "apply",
    "verify_cpt",
    "choi",
    "kraus_from_choi",
    "conditional_state",
    "lindblad_evolve",
    "lindblad_rhs",
    "lindblad_superoperator",
    "lindblad_channel",
    "luders_channel",
    "assignment_map",
    "identity_channel",
    "unitary_channel",
    "dephasing_channel",
    "depolarizing_channel",
    "amplitude_damping_channel",
    "random_channel",
    "channel_tensor",
    "local_channel",
]


def _ops(kraus_ops) -> tuple[np.ndarray, ...]:
    ops = []
    for k in kraus_ops:
        k = k.entries if isinstance(k, Operator) else k
        a = np.array(k, dtype=complex)
        a.setflags(write=False)
        ops.append(a)
    return tuple(ops)


class KrausChannel:
    """rho -> sum_a E_a rho E_a^dagger.

    ``check=True`` (default) enforces the completeness relation.  Pass
    ``check=False`` to hold a non-TP set for diagnostics.
    """

    __slots__ = ("kraus_ops", "dim_in", "dim_out", "partition_in", "partition_out")

    def __init__(self, kraus_ops, partition_in=None, partition_out=None, *,
                 check: bool = True, tol: Tolerances | None = None):
        tol = resolve(tol)
        ops = _ops(kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(o.ndim != 2 or o.shape != shape for o in ops):
            raise ValueError("Kraus operators must share one matrix shape")
        dim_out, dim_in = shape
        if max(dim_in, dim_out) > tol.max_dim:
            raise ValueError("channel dimension exceeds desk-scale cap")
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "dim_in", dim_in)
        object.__setattr__(self, "dim_out", dim_out)
        object.__setattr__(self, "partition_in", Partition.coerce(partition_in, dim_in))
        object.__setattr__(self, "partition_out",
                           Partition.coerce(partition_out, dim_out) if partition_out is not None
                           else (self.partition_in if dim_out == dim_in else Partition.single(dim_out)))
        if check:
            res = self.completeness_residual()
            if res > tol.tp:
                raise ValueError(f"Kraus set is not trace preserving (residual {res:.3e})")

    def __setattr__(self, name, value):
        raise AttributeError("KrausChannel is immutable")

    def __repr__(self):
        return f"KrausChannel({len(self.kraus_ops)} ops, {self.dim_in}->{self.dim_out})"

    def completeness_residual(self) -> float:
        s = sum(e.conj().T @ e for e in self.kraus_ops)
        return float(np.abs(s - np.eye(self.dim_in)).max())

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        return sum(e @ m @ e.conj().T for e in self.kraus_ops)

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """Channel ``self o first`` (apply ``first``, then ``self``)."""
        ops = [a @ b for a in self.kraus_ops for b in first.kraus_ops]
        return KrausChannel(ops, first.partition_in, self.partition_out, check=False)


class Superoperator:
    """General linear map given by its action matrix on row-major vectorized operators.

    Used for maps with no Kraus form (e.g. the transpose) so they can still
    be diagnosed by :func:`verify_cpt`.
    """

    __slots__ = ("matrix", "dim_in", "dim_out")

    def __init__(self, matrix, dim_in: int, dim_out: int | None = None):
        dim_out = dim_in if dim_out is None else dim_out
        m = np.array(matrix, dtype=complex)
        if m.shape != (dim_out * dim_out, dim_in * dim_in):
            raise ValueError("superoperator shape does not match dimensions")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim_in", dim_in)
        object.__setattr__(self, "dim_out", dim_out)

    def __setattr__(self, name, value):
        raise AttributeError("Superoperator is immutable")

    @classmethod
    def from_function(cls, fn, dim_in: int, dim_out: int | None = None) -> "Superoperator":
        dim_out = dim_in if dim_out is None else dim_out
        cols = []
        for k in range(dim_in * dim_in):
            e = np.zeros(dim_in * dim_in, dtype=complex)
            e[k] = 1.0
            cols.append(np.asarray(fn(e.reshape(dim_in, dim_in)), dtype=complex).reshape(-1))
        return cls(np.array(cols).T, dim_in, dim_out)

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.asarray(m, dtype=complex).reshape(-1)).reshape(self.dim_out, self.dim_out)


@dataclass(frozen=True)
class ChoiMatrix:
    entries: np.ndarray
    dim_in: int
    dim_out: int


@dataclass(frozen=True)
class ConditionalState:
    """Causal conditional state on ``out (x) in``."""

    entries: np.ndarray
    dim_in: int
    dim_out: int

    def propagate_matrix(self, rho_in: np.ndarray) -> np.ndarray:
        big = self.entries @ np.kron(np.eye(self.dim_out), rho_in)
        return ptrace(big, [self.dim_out, self.dim_in], [0])

    def propagate(self, rho: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(self.propagate_matrix(rho.matrix),
                             rho.partition if self.dim_out == self.dim_in else None)

    def element(self, out_vec: np.ndarray, in_vec: np.ndarray) -> complex:
        v = np.kron(out_vec, in_vec)
        return complex(np.vdot(v, self.entries @ v))


@dataclass(frozen=True)
class CPTDiagnostics:
    tp_residual: float
    choi_min_eigenvalue: float
    is_tp: bool
    is_cp: bool

    @property
    def ok(self) -> bool:
        return self.is_tp and self.is_cp


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------

def apply(channel: KrausChannel, rho: DensityMatrix, *, tol: Tolerances | None = None) -> DensityMatrix:
    if rho.dim != channel.dim_in:
        raise ValueError(f"channel input dimension {channel.dim_in} != state dimension {rho.dim}")
    out = channel.apply_matrix(rho.matrix)
    tr = float(np.trace(out).real)
    deficit = 1.0 - tr
    partition = rho.partition if channel.dim_out == channel.dim_in else channel.partition_out
    return DensityMatrix(out, partition, trace_deficit=deficit if deficit > resolve(tol).trace else 0.0,
                         tol=tol)


def _choi_entries(channel) -> np.ndarray:
    if isinstance(channel, KrausChannel):
        # C[(o,i),(o',j)] = sum_a E_a[o,i] conj(E_a[o',j])
        vecs = np.array([e.reshape(-1) for e in channel.kraus_ops])
        return vecs.T @ vecs.conj()
    if isinstance(channel, Superoperator):
        d_in, d_out = channel.dim_in, channel.dim_out
        c = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
        for i in range(d_in):
            for j in range(d_in):
                e = np.zeros((d_in, d_in), dtype=complex)
                e[i, j] = 1.0
                blk = np.zeros((d_in, d_in), dtype=complex)
                blk[i, j] = 1.0
                c += np.kron(channel.apply_matrix(e), blk)
        return c
    raise TypeError(f"unsupported channel type {type(channel).__name__}")


def choi(channel) -> ChoiMatrix:
    c = _choi_entries(channel)
    c.setflags(write=False)
    return ChoiMatrix(c, channel.dim_in, channel.dim_out)


def kraus_from_choi(c: ChoiMatrix, *, tol: Tolerances | None = None) -> KrausChannel:
    """Kraus operators sqrt(lambda_k) v_k from the Choi eigendecomposition.

    Eigenvalues at or below ``tol.psd`` are dropped; a Choi matrix with an
    eigenvalue below ``-tol.psd`` is not CP and raises ``ValueError``.
    """
    tol = resolve(tol)
    m = np.asarray(c.entries)
    if np.abs(m - m.conj().T).max() > tol.herm:
        raise ValueError("Choi matrix is not Hermitian")
    w, v = hermitian_eig(m, tol)
    if w[-1] < -tol.psd:
        raise ValueError(f"Choi matrix has negative eigenvalue {w[-1]:.3e}: map is not CP")
    ops = [np.sqrt(lam) * v[:, k].reshape(c.dim_out, c.dim_in)
           for k, lam in enumerate(w) if lam > tol.psd]
    return KrausChannel(ops, check=False, tol=tol)


def verify_cpt(channel, *, tol: Tolerances | None = None) -> CPTDiagnostics:
    """TP residual ||Tr_out C - 1||_max and minimum Choi eigenvalue."""
    tol = resolve(tol)
    c = _choi_entries(channel)
    tr_out = ptrace(c, [channel.dim_out, channel.dim_in], [1])
    tp = float(np.abs(tr_out - np.eye(channel.dim_in)).max())
    lam = float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])
    return CPTDiagnostics(tp, lam, tp <= tol.tp, lam >= -tol.tp)


def conditional_state(channel: KrausChannel) -> ConditionalState:
    """Causal conditional state: the Choi matrix partially transposed on the input."""
    d_in, d_out = channel.dim_in, channel.dim_out
    c = _choi_entries(channel).reshape(d_out, d_in, d_out, d_in)
    cs = c.transpose(0, 3, 2, 1).reshape(d_out * d_in, d_out * d_in)
    cs.setflags(write=False)
    return ConditionalState(cs, d_in, d_out)


# ---------------------------------------------------------------------------
# Lindblad dynamics
# ---------------------------------------------------------------------------

class LindbladGenerator:
    """Diagonal-form Lindblad generator with hbar = 1.

    d rho/dt = -i[H, rho] + sum_k g_k (A_k rho A_k^+ - 1/2 {A_k^+ A_k, rho})
    """

    __slots__ = ("hamiltonian", "jump_ops", "rates", "partition")

    def __init__(self, hamiltonian, jump_ops=(), rates=(), partition=None, *,
                 tol: Tolerances | None = None):
        tol = resolve(tol)
        h = np.array(hamiltonian.entries if isinstance(hamiltonian, Operator) else hamiltonian,
                     dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if np.abs(h - h.conj().T).max() > tol.herm:
            raise ValueError("Hamiltonian is not Hermitian")
        ops = _ops(jump_ops)
        rates = tuple(float(g) for g in rates)
        if len(ops) != len(rates):
            raise ValueError("one rate per jump operator is required")
        if any(g < 0 for g in rates):
            raise ValueError("rates must be non-negative")
        if any(a.shape != h.shape for a in ops):
            raise ValueError("jump operators must match the Hamiltonian shape")
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jump_ops", ops)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "partition", Partition.coerce(partition, h.shape[0]))

    def __setattr__(self, name, value):
        raise AttributeError("LindbladGenerator is immutable")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def lindblad_rhs(gen: LindbladGenerator, rho: np.ndarray) -> np.ndarray:
    h = gen.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for g, a in zip(gen.rates, gen.jump_ops):
        if g == 0.0:
            continue
        ad = a.conj().T
        ada = ad @ a
        out = out + g * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
    return out


@dataclass(frozen=True)
class LindbladResult:
    state: DensityMatrix
    times: np.ndarray
    samples: tuple
    trace_drift: float


def lindblad_evolve(gen: LindbladGenerator, rho: DensityMatrix, t: float, step: float = 1e-3, *,
                    sample_every: int | None = None, tol: Tolerances | None = None,
                    full: bool = False):
    """Fixed-step RK4 integration of the Lindblad equation up to time ``t``.

    The step is shrunk to ``t / ceil(t / step)`` so the final time is hit
    exactly.  After each step the state is Hermitian-symmetrized and its
    trace renormalized; the accumulated pre-renormalization trace drift is
    reported when ``full=True``.  A minimum eigenvalue below ``-tol.psd``
    at any step raises ``ValueError`` (step too large).
    """
    tol = resolve(tol)
    if t < 0:
        raise ValueError("t must be non-negative")
    if step <= 0:
        raise ValueError("step must be positive")
    if rho.dim != gen.dim:
        raise ValueError("generator and state dimensions differ")
    n = int(np.ceil(t / step - 1e-12)) if t > 0 else 0
    h = t / n if n else 0.0
    r = np.array(rho.matrix)
    tr0 = float(np.trace(r).real)
    drift = 0.0
    times, samples = [0.0], [r.copy()]
    for k in range(n):
        k1 = lindblad_rhs(gen, r)
        k2 = lindblad_rhs(gen, r + 0.5 * h * k1)
        k3 = lindblad_rhs(gen, r + 0.5 * h * k2)
        k4 = lindblad_rhs(gen, r + h * k3)
        r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        r = 0.5 * (r + r.conj().T)
        tr = float(np.trace(r).real)
        drift += abs(tr - tr0)
        r = r * (tr0 / tr)
        lam = np.linalg.eigvalsh(r)[0]
        if lam < -tol.psd:
            raise ValueError(f"positivity lost at step {k + 1} (min eigenvalue {lam:.3e}); reduce step")
        if sample_every and (k + 1) % sample_every == 0:
            times.append((k + 1) * h)
            samples.append(r.copy())
    out = DensityMatrix(r, rho.partition, trace_deficit=rho.trace_deficit, tol=tol)
    if full:
        return LindbladResult(out, np.array(times), tuple(samples), drift)
    return out


def lindblad_superoperator(gen: LindbladGenerator) -> np.ndarray:
    """Liouvillian matrix acting on row-major vectorized density matrices."""
    d = gen.dim
    eye = np.eye(d)
    h = gen.hamiltonian
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for g, a in zip(gen.rates, gen.jump_ops):
        ada = a.conj().T @ a
        lv = lv + g * (np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))
    return lv


def lindblad_channel(gen: LindbladGenerator, t: float, *, tol: Tolerances | None = None) -> KrausChannel:
    """Exact finite-time channel exp(t L) converted to Kraus form."""
    d = gen.dim
    sup = Superoperator(scipy.linalg.expm(t * lindblad_superoperator(gen)), d)
    ch = kraus_from_choi(choi(sup), tol=tol)
    return KrausChannel(ch.kraus_ops, gen.partition, tol=tol)


# ---------------------------------------------------------------------------
# measurement and assignment maps
# ---------------------------------------------------------------------------

def luders_channel(projectors: Sequence, *, tol: Tolerances | None = None) -> KrausChannel:
    """Non-selective projective measurement rho -> sum P rho P."""
    tol = resolve(tol)
    ps = _ops(projectors)
    if not ps:
        raise ValueError("at least one projector is required")
    d = ps[0].shape[0]
    for a, p in enumerate(ps):
        if np.abs(p - p.conj().T).max() > tol.tp or np.abs(p @ p - p).max() > tol.tp:
            raise ValueError(f"element {a} is not an orthogonal projector")
        for b in range(a):
            if np.abs(p @ ps[b]).max() > tol.tp:
                raise ValueError(f"projectors {b} and {a} are not mutually orthogonal")
    if np.abs(sum(ps) - np.eye(d)).max() > tol.tp:
        raise ValueError("projectors do not resolve the identity")
    return KrausChannel(ps, tol=tol)


def assignment_map(rho_w: DensityMatrix, q_labels: Sequence[str], x, *,
                   tol: Tolerances | None = None) -> np.ndarray:
    """Lift an operator on subsystem Q to the parent W using the parent state.

    A[X] = rho_W^1/2 (rho_Q^-1/2 (x) 1_E)(X (x) 1_E)(rho_Q^-1/2 (x) 1_E) rho_W^1/2

    ``rho_Q^-1/2`` is the pseudo-inverse on the support of rho_Q.  X must
    live on that support, otherwise ``ValueError``.  Q factors are taken in
    the parent partition's order.
    """
    tol = resolve(tol)
    q_labels = list(rho_w.partition.sub(q_labels).labels)
    x = np.asarray(x.entries if isinstance(x, Operator) else x, dtype=complex)
    rho_q = partial_trace(rho_w, q_labels).matrix
    if x.shape != rho_q.shape:
        raise ValueError(f"operator shape {x.shape} does not match subsystem {q_labels}")
    support = psd_power(rho_q, 0.0, tol)
    leak = np.abs(support @ x @ support - x).max()
    if leak > max(tol.orth, 1e-8) * max(1.0, np.abs(x).max()):
        raise ValueError(f"operator leaves the support of rho_Q (residual {leak:.3e})")
    inv_sqrt = embed(psd_power(rho_q, -0.5, tol), q_labels, rho_w.partition)
    sqrt_w = psd_power(rho_w.matrix, 0.5, tol)
    xw = embed(x, q_labels, rho_w.partition)
    left = sqrt_w @ inv_sqrt
    return left @ xw @ left.conj().T


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def identity_channel(dim: int, partition=None) -> KrausChannel:
    return KrausChannel([np.eye(dim)], partition)


def unitary_channel(u, partition=None, *, tol: Tolerances | None = None) -> KrausChannel:
    u = np.asarray(u.entries if isinstance(u, Operator) else u, dtype=complex)
    return KrausChannel([u], partition, tol=tol)


def dephasing_channel(p: float) -> KrausChannel:
    """Qubit phase flip with probability p; p = 1/2 is complete dephasing."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return KrausChannel([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * SZ])


def depolarizing_channel(p: float) -> KrausChannel:
    """rho -> (1 - p) rho + p 1/2, written with four Pauli Kraus operators."""
    if not 0 <= p <= 4 / 3:
        raise ValueError("p must lie in [0, 4/3]")
    return KrausChannel([np.sqrt(1 - 3 * p / 4) * I2, np.sqrt(p / 4) * SX,
                         np.sqrt(p / 4) * SY, np.sqrt(p / 4) * SZ])


def amplitude_damping_channel(g: float) -> KrausChannel:
    if not 0 <= g <= 1:
        raise ValueError("g must lie in [0, 1]")
    return KrausChannel([np.array([[1, 0], [0, np.sqrt(1 - g)]]),
                         np.array([[0, np.sqrt(g)], [0, 0]])])


def random_channel(dim: int, n_kraus: int = 2, seed=None, dim_out: int | None = None,
                   partition=None) -> KrausChannel:
    """Random CPT map from a Haar-random isometry (Stinespring dilation)."""
    dim_out = dim if dim_out is None else dim_out
    if dim_out * n_kraus < dim:
        raise ValueError("need dim_out * n_kraus >= dim for an isometric dilation")
    u = random_unitary(dim_out * n_kraus, seed)[:, :dim]
    ops = [u[k * dim_out:(k + 1) * dim_out, :] for k in range(n_kraus)]
    return KrausChannel(ops, partition)


def channel_tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    ops = [np.kron(x, y) for x in a.kraus_ops for y in b.kraus_ops]
    pa, pb = a.partition_in, b.partition_in
    part = pa + pb if not set(pa.labels) & set(pb.labels) else pa.dims + pb.dims
    return KrausChannel(ops, part)


def local_channel(ch: KrausChannel, labels: Sequence[str], partition: Partition) -> KrausChannel:
    """Extend a channel on ``labels`` by the identity on the remaining factors."""
    if ch.dim_in != ch.dim_out or ch.dim_in != partition.dim_of(labels):
        raise ValueError(f"channel dimension {ch.dim_in} does not act on factors {list(labels)}")
    return KrausChannel([embed(e, labels, partition) for e in ch.kraus_ops], partition)
