"""Avoided crossings of near-degenerate density-matrix eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import identity_channel
from .conditional import dynamical_cond_probs, match_eigenstates
from .hilbert import EpistemicState, hermitian_eig

__all__ = ["SwapBlockModel", "SwapReport", "eigenstate_swap_analysis"]


@dataclass(frozen=True)
class SwapBlockModel:
    rho0: float
    xi: complex
    tau: float
    t0: float = 0.0

    def __post_init__(self):
        if not 0 < self.rho0 <= 1:
            raise ValueError("rho0 must lie in (0, 1]")
        if not 0 < abs(self.xi) < 1:
            raise ValueError("xi must satisfy 0 < |xi| < 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def block(self, t: float) -> np.ndarray:
        d = (t - self.t0) / self.tau
        off = self.rho0 * complex(self.xi)
        return np.array([[self.rho0 + d, off], [np.conj(off), self.rho0 - d]])

    @property
    def gap_at_crossing(self) -> float:
        return 2 * self.rho0 * abs(self.xi)

    @property
    def swap_time(self) -> float:
        return self.rho0 * abs(self.xi) * self.tau


@dataclass(frozen=True)
class SwapReport:
    times: np.ndarray
    eigenvalues: np.ndarray         # (T, 2), descending
    overlaps_initial: np.ndarray    # (T, 2), |<psi_k(t)|psi_k(t_first)>|^2
    gap_at_t0: float
    swap_time: float
    label_following: float
    state_following: float
    cond: np.ndarray
    matching: np.ndarray

    def curves(self) -> dict[str, np.ndarray]:
        return {
            "t": self.times,
            "lambda_0": self.eigenvalues[:, 0],
            "lambda_1": self.eigenvalues[:, 1],
            "overlap_0": self.overlaps_initial[:, 0],
            "overlap_1": self.overlaps_initial[:, 1],
        }


def _block_epistemic(block: np.ndarray) -> EpistemicState:
    # normalize the 2x2 block into a qubit density matrix; eigenvectors are unaffected
    w, v = hermitian_eig(block)
    tr = w.sum()
    return EpistemicState(np.clip(w / tr, 0, None), v)


def eigenstate_swap_analysis(model: SwapBlockModel, times: Sequence[float] | None = None, *,
                             window: float | None = None) -> SwapReport:
    """Track the 2x2 block through its avoided crossing.

    Follow probabilities compare the eigenbasis at ``t0 - window`` with the
    one at ``t0 + window`` through the identity channel.  Label following is
    p(k | k); state following is p(1 - k | k).  ``window`` defaults to
    ten swap times.
    """
    window = 10 * model.swap_time if window is None else float(window)
    if times is None:
        times = model.t0 + np.linspace(-window, window, 201)
    times = np.asarray(times, dtype=float)
    if np.any(np.abs(times - model.t0) > model.rho0 * model.tau):
        raise ValueError("times leave the region where the block stays positive")
    lam = np.empty((times.size, 2))
    ov = np.empty((times.size, 2))
    first = None
    for k, t in enumerate(times):
        w, v = hermitian_eig(model.block(t))
        lam[k] = w
        if first is None:
            first = v
        ov[k] = np.abs(np.sum(first.conj() * v, axis=0)) ** 2
    before = _block_epistemic(model.block(model.t0 - window))
    after = _block_epistemic(model.block(model.t0 + window))
    # identity channel does not map one spectrum onto the other, so skip the consistency check
    cond = dynamical_cond_probs(identity_channel(2), before, after, check=False)
    gap = float(np.diff(hermitian_eig(model.block(model.t0))[0][::-1])[0])
    return SwapReport(
        times=times,
        eigenvalues=lam,
        overlaps_initial=ov,
        gap_at_t0=gap,
        swap_time=model.swap_time,
        label_following=float(max(cond[0, 0], cond[1, 1])),
        state_following=float(min(cond[1, 0], cond[0, 1])),
        cond=cond,
        matching=match_eigenstates(before.vectors, after.vectors),
    )
