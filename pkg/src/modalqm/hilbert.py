"""Complex linear algebra over partitioned tensor-product spaces.

State vectors, operators and density matrices carry a :class:`Partition`
naming each tensor factor, so reductions can be requested by label
(``partial_trace(rho, ["A", "C"])``) instead of by axis bookkeeping.

Conventions
-----------
* Tensor factors are ordered as listed in the partition; the first label is
  the most significant index of the flattened (row-major) basis.
* Entropies use the natural logarithm (nats).
* Every value type is immutable: the underlying arrays are read-only.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import Tolerances, resolve

__all__ = [
    "DimensionError",
    "Partition",
    "StateVector",
    "Operator",
    "DensityMatrix",
    "EpistemicState",
    "DensityDiagnostics",
    "tensor",
    "partial_trace",
    "ptrace",
    "embed",
    "permute_factors",
    "hermitian_eig",
    "psd_power",
    "spectral_decompose",
    "von_neumann_entropy",
    "validate_density_matrix",
    "random_pure_state",
    "random_density_matrix",
    "random_unitary",
    "basis_state",
    "pure_density",
    "maximally_mixed",
    "I2",
    "SX",
    "SY",
    "SZ",
]

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (I2, SX, SY, SZ):
    _m.setflags(write=False)


class DimensionError(ValueError):
    """Raised when a construction would exceed the desk-scale dimension cap."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _roundoff(w: np.ndarray) -> float:
    return 10 * np.finfo(float).eps * w.size * max(1.0, float(np.abs(w).max()))


@dataclass(frozen=True)
class Partition:
    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __init__(self, labels: Iterable[str], dims: Iterable[int]):
        labels = tuple(str(l) for l in labels)
        dims = tuple(int(d) for d in dims)
        if len(labels) != len(dims):
            raise ValueError("labels and dims must have equal length")
        if len(set(labels)) != len(labels):
            raise ValueError(f"partition labels must be unique: {labels}")
        if any(d < 1 for d in dims):
            raise ValueError(f"dimensions must be positive: {dims}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def single(cls, dim: int, label: str = "S") -> "Partition":
        return cls((label,), (dim,))

    @classmethod
    def coerce(cls, partition, dim: int) -> "Partition":
        """Accept a Partition, a dims tuple, or None (one anonymous factor)."""
        if partition is None:
            return cls.single(dim)
        if isinstance(partition, Partition):
            p = partition
        else:
            dims = tuple(partition)
            p = cls([f"S{k}" for k in range(len(dims))], dims)
        if p.total != dim:
            raise ValueError(f"partition {p} does not match dimension {dim}")
        return p

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} not in partition {self.labels}") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        return [self.index(l) for l in labels]

    def dim_of(self, labels: Iterable[str]) -> int:
        return int(np.prod([self.dims[self.index(l)] for l in labels], dtype=np.int64))

    def sub(self, labels: Iterable[str]) -> "Partition":
        """Sub-partition on ``labels``, kept in this partition's order."""
        wanted = set(labels)
        keep = [k for k, l in enumerate(self.labels) if l in wanted]
        return Partition([self.labels[k] for k in keep], [self.dims[k] for k in keep])

    def __add__(self, other: "Partition") -> "Partition":
        return Partition(self.labels + other.labels, self.dims + other.dims)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    partition: Partition

    def __init__(self, amplitudes, partition=None, *, tol: Tolerances | None = None):
        tol = resolve(tol)
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if a.size > tol.max_vector_dim:
            raise DimensionError(f"state dimension {a.size} exceeds cap {tol.max_vector_dim}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > tol.norm:
            raise ValueError(f"state vector norm {norm!r} differs from 1 by more than {tol.norm}")
        object.__setattr__(self, "amplitudes", _frozen(a))
        object.__setattr__(self, "partition", Partition.coerce(partition, a.size))

    @classmethod
    def normalized(cls, amplitudes, partition=None, **kw) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(a)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(a / n, partition, **kw)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector(), self.partition)

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Operator:
    entries: np.ndarray
    partition: Partition

    def __init__(self, entries, partition=None, *, tol: Tolerances | None = None):
        tol = resolve(tol)
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] > tol.max_dim:
            raise DimensionError(f"operator side {m.shape[0]} exceeds cap {tol.max_dim}")
        object.__setattr__(self, "entries", _frozen(m))
        object.__setattr__(self, "partition", Partition.coerce(partition, m.shape[0]))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.partition)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries @ other.entries, self.partition)
        if isinstance(other, StateVector):
            return StateVector(self.entries @ other.amplitudes, self.partition)
        return NotImplemented


class DensityMatrix:
    """Hermitian, positive semi-definite, (sub)unit-trace operator.

    Construction symmetrizes the input and clips eigenvalues lying in
    ``(-tol.psd, 0)`` to zero.  Larger violations raise ``ValueError``.
    A trace below one is allowed only when declared through
    ``trace_deficit``; the deficit is read as a decay probability.
    """

    __slots__ = ("op", "trace_deficit")

    def __init__(self, matrix, partition=None, trace_deficit: float = 0.0, *,
                 tol: Tolerances | None = None):
        tol = resolve(tol)
        if isinstance(matrix, Operator):
            partition = matrix.partition if partition is None else partition
            matrix = matrix.entries
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] > tol.max_dim:
            raise DimensionError(f"operator side {m.shape[0]} exceeds cap {tol.max_dim}")
        if not 0.0 <= trace_deficit <= 1.0:
            raise ValueError("trace_deficit must lie in [0, 1]")
        herm = np.abs(m - m.conj().T).max() if m.size else 0.0
        if herm > tol.herm:
            raise ValueError(f"matrix is not Hermitian (residual {herm:.3e})")
        m = 0.5 * (m + m.conj().T)
        w, v = np.linalg.eigh(m)
        if w[0] < -tol.psd:
            raise ValueError(f"matrix is not positive semi-definite (min eigenvalue {w[0]:.3e})")
        # negatives at round-off level are left alone: rebuilding would smear
        # noise across exactly degenerate eigenspaces
        if w[0] < -_roundoff(w):
            w = np.clip(w, 0.0, None)
            m = (v * w) @ v.conj().T
        tr = float(np.trace(m).real)
        target = 1.0 - trace_deficit
        if abs(tr - target) > tol.trace:
            raise ValueError(f"trace {tr!r} differs from {target!r} by more than {tol.trace}")
        self.op = Operator(m, partition, tol=tol)
        self.trace_deficit = float(trace_deficit)

    def __setattr__(self, name, value):
        if hasattr(self, name):
            raise AttributeError("DensityMatrix is immutable")
        object.__setattr__(self, name, value)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, partition={self.partition.labels})"

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(psi.projector(), psi.partition)

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    @property
    def partition(self) -> Partition:
        return self.op.partition

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def relabel(self, partition) -> "DensityMatrix":
        return DensityMatrix(self.matrix, partition, self.trace_deficit)


# ---------------------------------------------------------------------------
# tensor products and reductions
# ---------------------------------------------------------------------------

def tensor(a, b, *, tol: Tolerances | None = None):
    """Kronecker product of two states, operators or density matrices."""
    tol = resolve(tol)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        if a.dim * b.dim > tol.max_vector_dim:
            raise DimensionError(f"product dimension {a.dim * b.dim} exceeds cap")
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.partition + b.partition, tol=tol)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        if a.dim * b.dim > tol.max_dim:
            raise DimensionError(f"product dimension {a.dim * b.dim} exceeds cap {tol.max_dim}")
        deficit = 1.0 - a.trace * b.trace
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.partition + b.partition,
                             trace_deficit=max(deficit, 0.0) if deficit > tol.trace else 0.0,
                             tol=tol)
    if isinstance(a, (Operator, DensityMatrix)) and isinstance(b, (Operator, DensityMatrix)):
        a = a.op if isinstance(a, DensityMatrix) else a
        b = b.op if isinstance(b, DensityMatrix) else b
        if a.dim * b.dim > tol.max_dim:
            raise DimensionError(f"product dimension {a.dim * b.dim} exceeds cap {tol.max_dim}")
        return Operator(np.kron(a.entries, b.entries), a.partition + b.partition, tol=tol)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def ptrace(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Array-level partial trace keeping the factor axes in ``keep`` (in ascending order)."""
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if 2 * n > len(string.ascii_letters):
        raise DimensionError("too many tensor factors for partial trace")
    rows = list(string.ascii_letters[:n])
    cols = list(string.ascii_letters[n:2 * n])
    for k in range(n):
        if k not in keep:
            cols[k] = rows[k]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    t = np.asarray(matrix).reshape(dims + dims)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dk = int(np.prod([dims[k] for k in keep], dtype=np.int64))
    return red.reshape(dk, dk)


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix on the factors named in ``keep``.

    The result lists the kept factors in the parent partition's order.
    """
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    idx = rho.partition.indices(keep)
    red = ptrace(rho.matrix, rho.partition.dims, idx)
    return DensityMatrix(red, rho.partition.sub(keep), trace_deficit=rho.trace_deficit)


def permute_factors(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square matrix: new factor k is old factor ``order[k]``."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(matrix).reshape(dims + dims)
    t = t.transpose(list(order) + [n + o for o in order])
    d = int(np.prod(dims, dtype=np.int64))
    return t.reshape(d, d)


def embed(op: np.ndarray, labels: Sequence[str], partition: Partition) -> np.ndarray:
    """Lift ``op`` acting on ``labels`` (in the given order) to the whole partition.

    The remaining factors receive the identity.
    """
    labels = list(labels)
    idx = partition.indices(labels)
    rest = [k for k in range(len(partition.dims)) if k not in idx]
    d_rest = int(np.prod([partition.dims[k] for k in rest], dtype=np.int64))
    op = np.asarray(op, dtype=complex)
    if op.shape[0] != partition.dim_of(labels):
        raise ValueError(f"operator side {op.shape[0]} does not match factors {labels}")
    big = np.kron(op, np.eye(d_rest))
    current = idx + rest
    dims_current = [partition.dims[k] for k in current]
    order = [current.index(k) for k in range(len(partition.dims))]
    return permute_factors(big, dims_current, order)


# ---------------------------------------------------------------------------
# spectral machinery
# ---------------------------------------------------------------------------

def _gauge_fix(v: np.ndarray, cutoff: float) -> np.ndarray:
    """Rotate each column so its first component with modulus > cutoff is real positive."""
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > cutoff)
        if nz.size:
            c = col[nz[0]]
            v[:, k] = col * (abs(c) / c)
    return v


def _lex_key(col: np.ndarray) -> tuple:
    # descending lexicographic order on (re, im) pairs, rounded against noise
    return tuple(x for c in col for x in (-round(c.real, 10), -round(c.imag, 10)))


def hermitian_eig(matrix: np.ndarray, tol: Tolerances | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by descending eigenvalue with a reproducible gauge.

    Eigenvector phases are fixed so the first component above ``tol.gauge``
    is real and positive.  Inside a block of eigenvalues separated by less
    than ``tol.degeneracy`` the solver's vectors are kept and ordered
    lexicographically.  Returns ``(values, vectors)`` with vectors as columns.
    """
    tol = resolve(tol)
    m = np.asarray(matrix, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    order = np.argsort(-w, kind="stable")
    w, v = w[order], _gauge_fix(v[:, order], tol.gauge)
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k - 1] - w[k] >= tol.degeneracy:
            if k - start > 1:
                block = sorted(range(start, k), key=lambda j: _lex_key(v[:, j]))
                v[:, start:k] = v[:, block]
                w[start:k] = w[block]
            start = k
    return w, v


def psd_power(matrix: np.ndarray, power: float, tol: Tolerances | None = None) -> np.ndarray:
    """Power of a PSD matrix via its eigendecomposition.

    Eigenvalues at or below ``tol.psd`` are treated as zero; negative powers
    are therefore pseudo-inverse powers on the support.
    """
    tol = resolve(tol)
    w, v = np.linalg.eigh(0.5 * (matrix + np.asarray(matrix).conj().T))
    support = w > tol.psd
    wp = np.zeros_like(w)
    wp[support] = w[support] ** power
    return (v * wp) @ v.conj().T


class EpistemicState:
    """Ordered (probability, ontic state) pairs from a density matrix spectrum.

    Zero-probability eigenvectors are kept so the projectors always resolve
    the identity.  ``deficit`` is ``1 - sum(p)``.
    """

    __slots__ = ("probabilities", "vectors", "partition")

    def __init__(self, probabilities, vectors, partition=None, *, tol: Tolerances | None = None):
        tol = resolve(tol)
        p = np.asarray(probabilities, dtype=float).reshape(-1)
        v = np.asarray(vectors, dtype=complex)
        if v.ndim != 2 or v.shape[1] != p.size:
            raise ValueError("vectors must be a matrix with one column per probability")
        if np.any(p < -tol.psd) or np.any(p > 1 + tol.trace):
            raise ValueError("probabilities must lie in [0, 1]")
        if p.sum() > 1 + tol.trace:
            raise ValueError(f"probabilities sum to {p.sum()!r} > 1")
        if np.any(np.diff(p) > tol.degeneracy):
            raise ValueError("pairs must be sorted by descending probability")
        gram = v.conj().T @ v
        off = np.abs(gram - np.eye(p.size)).max() if p.size else 0.0
        if off > tol.orth:
            raise ValueError(f"ontic states are not orthonormal (residual {off:.3e})")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "vectors", _frozen(v))
        object.__setattr__(self, "partition", Partition.coerce(partition, v.shape[0]))

    def __setattr__(self, name, value):
        raise AttributeError("EpistemicState is immutable")

    def __len__(self):
        return self.probabilities.size

    def __repr__(self):
        ps = ", ".join(f"{p:.6g}" for p in self.probabilities)
        return f"EpistemicState([{ps}])"

    @property
    def pairs(self) -> list[tuple[float, StateVector]]:
        return [(float(p), StateVector(self.vectors[:, k], self.partition))
                for k, p in enumerate(self.probabilities)]

    @property
    def deficit(self) -> float:
        return float(1.0 - self.probabilities.sum())

    def projector(self, k: int) -> np.ndarray:
        col = self.vectors[:, k]
        return np.outer(col, col.conj())

    def projectors(self) -> list[np.ndarray]:
        return [self.projector(k) for k in range(len(self))]

    def gaps(self) -> np.ndarray:
        """Differences between consecutive probabilities (basis-stability indicator)."""
        return -np.diff(self.probabilities)

    def rebuild_matrix(self) -> np.ndarray:
        return (self.vectors * self.probabilities) @ self.vectors.conj().T

    def rebuild(self) -> DensityMatrix:
        return DensityMatrix(self.rebuild_matrix(), self.partition,
                             trace_deficit=max(self.deficit, 0.0) if self.deficit > 1e-12 else 0.0)


def spectral_decompose(rho: DensityMatrix, tol: Tolerances | None = None) -> EpistemicState:
    """Epistemic state (eigenvalue, eigenvector pairs) of a density matrix."""
    w, v = hermitian_eig(rho.matrix, tol)
    return EpistemicState(np.clip(w, 0.0, None), v, rho.partition, tol=tol)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S = -sum p ln p over the spectrum, in nats, with 0 ln 0 = 0."""
    p = np.clip(np.linalg.eigvalsh(rho.matrix), 0.0, None)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class DensityDiagnostics:
    hermiticity_residual: float
    min_eigenvalue: float
    trace: float
    decay_probability: float
    is_hermitian: bool
    is_psd: bool
    is_unit_trace: bool

    @property
    def ok(self) -> bool:
        return self.is_hermitian and self.is_psd and self.is_unit_trace


def validate_density_matrix(op, tol: Tolerances | None = None) -> DensityDiagnostics:
    """Report how far ``op`` is from being a valid density matrix (never raises)."""
    tol = resolve(tol)
    m = op.entries if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    herm = float(np.abs(m - m.conj().T).max())
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    tr = float(np.trace(m).real)
    return DensityDiagnostics(
        hermiticity_residual=herm,
        min_eigenvalue=float(w[0]),
        trace=tr,
        decay_probability=1.0 - tr,
        is_hermitian=herm <= tol.herm,
        is_psd=bool(w[0] >= -tol.psd),
        is_unit_trace=abs(tr - 1.0) <= tol.trace,
    )


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pure_state(dim: int, seed=None, partition=None) -> StateVector:
    """Unitarily invariant random pure state (normalized complex Gaussian vector)."""
    rng = _rng(seed)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(z / np.linalg.norm(z), partition)


def random_density_matrix(dim: int, rank: int | None = None, seed=None, partition=None) -> DensityMatrix:
    """Rank-``rank`` density matrix G G^dagger / Tr from a complex Gaussian G (dim x rank)."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = _rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, partition)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def basis_state(index: int, dim: int, partition=None) -> StateVector:
    a = np.zeros(dim, dtype=complex)
    a[index] = 1.0
    return StateVector(a, partition)


def pure_density(psi, partition=None) -> DensityMatrix:
    if isinstance(psi, StateVector):
        return DensityMatrix.from_state(psi)
    psi = np.asarray(psi, dtype=complex)
    return DensityMatrix(np.outer(psi, psi.conj()), partition)


def maximally_mixed(dim: int, partition=None) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim, partition)
