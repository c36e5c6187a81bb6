"""Monte Carlo sampling of ontic-state trajectories.

Each trajectory starts from an index drawn from the initial epistemic
probabilities and hops according to successive column-stochastic
conditional-probability matrices.  Per-step empirical occupations can be
compared with :func:`propagate_epistemic`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditional import propagate_epistemic

__all__ = ["OnticTrajectory", "TrajectoryEnsemble", "sample_trajectories", "split_seeds",
           "binomial_check"]


@dataclass(frozen=True)
class OnticTrajectory:
    times: tuple[float, ...]
    indices: tuple[int, ...]
    seed: int

    def __post_init__(self):
        if len(self.times) != len(self.indices):
            raise ValueError("times and indices must have equal length")


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Trajectory indices shaped ``(n, steps + 1)`` plus empirical occupations."""

    times: np.ndarray
    indices: np.ndarray
    occupations: np.ndarray
    expected: np.ndarray
    seed: int

    def __len__(self):
        return self.indices.shape[0]

    def trajectory(self, k: int) -> OnticTrajectory:
        return OnticTrajectory(tuple(float(t) for t in self.times),
                               tuple(int(i) for i in self.indices[k]), self.seed)

    def standard_errors(self) -> np.ndarray:
        p = self.expected
        return np.sqrt(p * (1.0 - p) / len(self))

    def max_sigma_deviation(self) -> float:
        """Largest |empirical - expected| in units of binomial standard error.

        Cells with zero standard error count as infinitely off if they differ at all.
        """
        diff = np.abs(self.occupations - self.expected)
        se = self.standard_errors()
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff > 1e-12, np.inf, 0.0))
        return float(z.max()) if z.size else 0.0


def split_seeds(seed: int, n: int) -> list[int]:
    """Independent per-stream seeds derived with ``SeedSequence.spawn``."""
    return [int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _check_stochastic(m: np.ndarray, tol: float) -> None:
    if m.ndim != 2 or m.shape[0] == 0:
        raise ValueError("conditional matrices must be 2-D")
    if m.min() < -tol or np.abs(m.sum(axis=0) - 1.0).max() > tol:
        raise ValueError("conditional matrix is not column stochastic")


def _draw(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    # cum: (k, n) cumulative columns selected per sample; inverse-CDF lookup
    return np.minimum((u[None, :] >= cum).sum(axis=0), cum.shape[0] - 1)


def sample_trajectories(cond_seq: Sequence, initial_p, n: int, seed: int = 0, *,
                        times: Sequence[float] | None = None, tol: float = 1e-9) -> TrajectoryEnsemble:
    """Sample ``n`` trajectories through ``cond_seq`` (matrices ``cond[j, i]``).

    Deterministic per ``seed``.  Sub-normalized initial probabilities are
    renormalized for sampling; the expected table keeps their scale relative
    to the total.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p0 = np.asarray(initial_p, dtype=float)
    if p0.ndim != 1 or p0.min() < -tol or p0.sum() <= 0:
        raise ValueError("initial probabilities must be a non-negative vector")
    p0 = np.clip(p0, 0, None) / p0.sum()
    mats = [np.asarray(m, dtype=float) for m in cond_seq]
    for m in mats:
        _check_stochastic(m, tol)
    dims = [p0.size] + [m.shape[0] for m in mats]
    for k, m in enumerate(mats):
        if m.shape[1] != dims[k]:
            raise ValueError(f"matrix {k} expects {m.shape[1]} inputs, previous step has {dims[k]}")
    if len(set(dims)) != 1:
        raise ValueError("all steps must share one outcome count")
    d = dims[0]
    steps = len(mats)
    t = np.arange(steps + 1, dtype=float) if times is None else np.asarray(times, dtype=float)
    if t.shape != (steps + 1,):
        raise ValueError("times must have one entry per step plus the initial time")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    idx = np.empty((n, steps + 1), dtype=np.int64)
    idx[:, 0] = _draw(np.cumsum(p0)[:, None] * np.ones((1, n)), rng.random(n))
    expected = [p0]
    for k, m in enumerate(mats):
        cum = np.cumsum(np.clip(m, 0, None), axis=0)
        cum /= cum[-1]
        idx[:, k + 1] = _draw(cum[:, idx[:, k]], rng.random(n))
        expected.append(propagate_epistemic(expected[-1], m, tol=tol))
    occ = np.stack([np.bincount(idx[:, k], minlength=d) / n for k in range(steps + 1)])
    return TrajectoryEnsemble(t, idx, occ, np.stack(expected), int(seed))


def binomial_check(ensemble: TrajectoryEnsemble, sigmas: float = 3.0) -> bool:
    return ensemble.max_sigma_deviation() <= sigmas
