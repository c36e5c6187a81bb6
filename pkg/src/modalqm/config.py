"""Numerical tolerances and desk-scale limits shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-9
    herm: float = 1e-9
    trace: float = 1e-9
    psd: float = 1e-10
    orth: float = 1e-8
    recon: float = 1e-9
    tp: float = 1e-9
    prob: float = 1e-10
    # eigenvalues closer than this are treated as a degenerate block
    degeneracy: float = 1e-10
    # first eigenvector component above this modulus fixes the phase
    gauge: float = 1e-12
    # operators (matrices) larger than this side length are refused
    max_dim: int = 256
    # state vectors may be larger: they cost O(d) memory, not O(d^2)
    max_vector_dim: int = 2**20

    def scaled(self, factor: float) -> "Tolerances":
        """Return a copy with every floating tolerance multiplied by ``factor``."""
        fields = ("norm", "herm", "trace", "psd", "orth", "recon", "tp", "prob")
        return replace(self, **{f: getattr(self, f) * factor for f in fields})


DEFAULT = Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return DEFAULT if tol is None else tol
