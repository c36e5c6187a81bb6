"""Randomized property suites behind ``modalqm verify``.

Every trial draws its inputs from a per-trial seed (``split_seeds``), so a
failing trial can be replayed from the counterexample record alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import (KrausChannel, Superoperator, amplitude_damping_channel, apply, choi,
                       conditional_state, dephasing_channel, depolarizing_channel, identity_channel,
                       kraus_from_choi, random_channel, unitary_channel, verify_cpt)
from .conditional import (dynamical_cond_probs, general_cond_probs, kinematical_cond_probs,
                          leifer_spekkens_check)
from .hilbert import (DensityMatrix, EpistemicState, Partition, partial_trace,
                      random_density_matrix, random_unitary, spectral_decompose)
from .trajectories import sample_trajectories, split_seeds

SUITES = ("channels", "conditional_probs", "partial_trace", "trajectories")


@dataclass
class PropertyResult:
    name: str
    tolerance: float
    passes: int = 0
    trials: int = 0
    worst: float = 0.0
    counterexamples: list = field(default_factory=list)

    def record(self, value: float, config: dict, *, lower: bool = False) -> None:
        """Record one residual; ``lower=True`` means the value must stay above -tolerance."""
        self.trials += 1
        ok = value >= -self.tolerance if lower else value <= self.tolerance
        if lower:
            self.worst = min(self.worst, value) if self.trials > 1 else value
        else:
            self.worst = max(self.worst, value)
        if ok:
            self.passes += 1
        elif len(self.counterexamples) < 5:
            self.counterexamples.append({**config, "value": value})

    @property
    def ok(self) -> bool:
        return self.passes == self.trials

    def to_dict(self) -> dict:
        return {"name": self.name, "passes": self.passes, "trials": self.trials, "worst": self.worst,
                "tolerance": self.tolerance, "ok": self.ok, "counterexamples": self.counterexamples}


def _dims(rng, n_factors: int, max_dim: int = 3) -> list[int]:
    return [int(d) for d in rng.integers(2, max_dim + 1, size=n_factors)]


# ---------------------------------------------------------------------------

def suite_partial_trace(trials: int, seed: int) -> list[PropertyResult]:
    diagram = PropertyResult("diagram_commutation", 1e-12)
    classical = PropertyResult("classical_partial_sums", 1e-12)
    hermitian = PropertyResult("trace_and_hermiticity", 1e-9)
    rebuild = PropertyResult("spectral_rebuild", 1e-12)
    for k, s in enumerate(split_seeds(seed, trials)):
        rng = np.random.default_rng(s)
        dims = _dims(rng, 3)
        cfg = {"trial": k, "seed": s, "dims": dims}
        part = Partition(["A", "B", "C"], dims)
        rho = random_density_matrix(int(np.prod(dims)), seed=s, partition=part)
        worst = 0.0
        for target in ("A", "B", "C"):
            direct = partial_trace(rho, [target]).matrix
            for other in {"A", "B", "C"} - {target}:
                two = partial_trace(rho, sorted({target, other}))
                worst = max(worst, float(np.abs(partial_trace(two, [target]).matrix - direct).max()))
        diagram.record(worst, cfg)

        joint = rng.random(dims)
        joint /= joint.sum()
        diag = DensityMatrix(np.diag(joint.reshape(-1)), part)
        res = 0.0
        for keep, axes in ((["A"], (1, 2)), (["B"], (0, 2)), (["C"], (0, 1)), (["A", "C"], (1,))):
            red = np.real(np.diag(partial_trace(diag, keep).matrix))
            res = max(res, float(np.abs(red - joint.sum(axis=axes).reshape(-1)).max()))
        classical.record(res, cfg)

        red = partial_trace(rho, ["A", "C"]).matrix
        hermitian.record(max(float(np.abs(red - red.conj().T).max()), abs(np.trace(red).real - 1)), cfg)
        epi = spectral_decompose(rho)
        rebuild.record(float(np.abs(epi.rebuild_matrix() - rho.matrix).max()), cfg)
    return [diagram, classical, hermitian, rebuild]


def _constructed_channels(rng, s: int) -> list[tuple[str, KrausChannel]]:
    p = float(rng.random())
    return [
        ("identity", identity_channel(int(rng.integers(2, 4)))),
        ("unitary", unitary_channel(random_unitary(int(rng.integers(2, 4)), s))),
        ("dephasing", dephasing_channel(p)),
        ("depolarizing", depolarizing_channel(p)),
        ("amplitude_damping", amplitude_damping_channel(p)),
        ("random", random_channel(int(rng.integers(2, 4)), int(rng.integers(1, 4)), s)),
    ]


def suite_channels(trials: int, seed: int) -> list[PropertyResult]:
    tp = PropertyResult("tp_residual", 1e-9)
    cp = PropertyResult("choi_min_eigenvalue", 1e-9)
    rt = PropertyResult("choi_roundtrip", 1e-10)
    cs = PropertyResult("conditional_state_propagation", 1e-10)
    psd = PropertyResult("apply_min_eigenvalue", 1e-9)
    for k, s in enumerate(split_seeds(seed, trials)):
        rng = np.random.default_rng(s)
        for name, ch in _constructed_channels(rng, s):
            cfg = {"trial": k, "seed": s, "channel": name}
            d = verify_cpt(ch)
            tp.record(d.tp_residual, cfg)
            cp.record(d.choi_min_eigenvalue, cfg, lower=True)
            rho = random_density_matrix(ch.dim_in, seed=s + 1)
            out = ch.apply_matrix(rho.matrix)
            back = kraus_from_choi(choi(ch)).apply_matrix(rho.matrix)
            rt.record(float(np.abs(out - back).max()), cfg)
            cs.record(float(np.abs(conditional_state(ch).propagate_matrix(rho.matrix) - out).max()), cfg)
            psd.record(float(np.linalg.eigvalsh(out).min()), cfg, lower=True)
    return [tp, cp, rt, cs, psd]


def _random_epi(dim: int, seed: int, partition=None) -> tuple[DensityMatrix, EpistemicState]:
    rho = random_density_matrix(dim, seed=seed, partition=partition)
    return rho, spectral_decompose(rho)


def suite_conditional_probs(trials: int, seed: int) -> list[PropertyResult]:
    nonneg = PropertyResult("non_negativity", 1e-12)
    norm = PropertyResult("normalization", 1e-10)
    marg = PropertyResult("marginalization", 1e-10)
    triv = PropertyResult("unitary_trivialization", 1e-10)
    inv = PropertyResult("global_unitary_invariance", 1e-10)
    ls = PropertyResult("leifer_spekkens", 1e-10)
    for k, s in enumerate(split_seeds(seed, trials)):
        rng = np.random.default_rng(s)
        n_f = int(rng.integers(2, 4))
        dims = _dims(rng, n_f)
        while int(np.prod(dims)) > 18:
            dims = _dims(rng, n_f)
        labels = [f"Q{i}" for i in range(n_f)]
        part = Partition(labels, dims)
        d = part.total
        cfg = {"trial": k, "seed": s, "dims": dims}
        rho, epi = _random_epi(d, s, part)
        ch = random_channel(d, int(rng.integers(1, 4)), s + 1, partition=part)
        groups = [[l] for l in labels]

        kin = kinematical_cond_probs(rho, groups)
        gen = general_cond_probs(ch, epi, groups)
        nonneg.record(min(kin.min_raw, gen.min_raw), cfg, lower=True)
        norm.record(max(kin.normalization_residual(), gen.normalization_residual()), cfg)

        evolved = DensityMatrix(ch.apply_matrix(rho.matrix), part)
        worst = 0.0
        for a, l in enumerate(labels):
            target = spectral_decompose(partial_trace(evolved, [l])).probabilities
            worst = max(worst, float(np.abs(gen.marginal(a) - target).max()))
            target0 = spectral_decompose(partial_trace(rho, [l])).probabilities
            worst = max(worst, float(np.abs(kin.marginal(a) - target0).max()))
        marg.record(worst, cfg)

        u = random_unitary(d, s + 2)
        m = dynamical_cond_probs(unitary_channel(u, part), epi)
        triv.record(float(np.abs(m - np.eye(d)).max()), cfg)

        # global unitary on the single-system table, local product unitary on subsystem tables
        v = random_unitary(d, s + 3)
        ch_v = KrausChannel([v @ e @ v.conj().T for e in ch.kraus_ops], part)
        rho_v = DensityMatrix(v @ rho.matrix @ v.conj().T, part)
        m0 = dynamical_cond_probs(ch, epi)
        m1 = dynamical_cond_probs(ch_v, spectral_decompose(rho_v))
        loc = np.ones((1, 1))
        for j, dj in enumerate(dims):
            loc = np.kron(loc, random_unitary(dj, s + 10 + j))
        ch_l = KrausChannel([loc @ e @ loc.conj().T for e in ch.kraus_ops], part)
        rho_l = DensityMatrix(loc @ rho.matrix @ loc.conj().T, part)
        g1 = general_cond_probs(ch_l, spectral_decompose(rho_l), groups)
        k1 = kinematical_cond_probs(rho_l, groups)
        inv.record(max(float(np.abs(m0 - m1).max()), float(np.abs(gen.values - g1.values).max()),
                       float(np.abs(kin.values - k1.values).max())), cfg)

        ls.record(leifer_spekkens_check(ch, epi), cfg)
    return [nonneg, norm, marg, triv, inv, ls]


def suite_trajectories(trials: int, seed: int, *, samples: int = 2000, sigmas: float = 5.0) -> list[PropertyResult]:
    stat = PropertyResult("binomial_agreement_sigmas", sigmas)
    det = PropertyResult("seed_determinism", 0.0)
    for k, s in enumerate(split_seeds(seed, trials)):
        rng = np.random.default_rng(s)
        d = int(rng.integers(2, 4))
        steps = int(rng.integers(1, 5))
        rho, epi = _random_epi(d, s)
        seq = []
        for j in range(steps):
            ch = random_channel(d, 2, s + j + 1)
            seq.append(dynamical_cond_probs(ch, epi))
            epi = spectral_decompose(apply(ch, epi.rebuild()))
        p0 = spectral_decompose(rho).probabilities
        ens = sample_trajectories(seq, p0, samples, seed=s)
        cfg = {"trial": k, "seed": s, "dim": d, "steps": steps}
        stat.record(ens.max_sigma_deviation(), cfg)
        again = sample_trajectories(seq, p0, samples, seed=s)
        det.record(float(np.abs(again.indices - ens.indices).max()), cfg)
    return [stat, det]


RUNNERS: dict[str, Callable[[int, int], list[PropertyResult]]] = {
    "channels": suite_channels,
    "conditional_probs": suite_conditional_probs,
    "partial_trace": suite_partial_trace,
    "trajectories": suite_trajectories,
}


def run_suite(suite: str, trials: int = 200, seed: int = 0) -> dict[str, list[PropertyResult]]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    names = SUITES if suite == "all" else (suite,)
    for n in names:
        if n not in RUNNERS:
            raise ValueError(f"unknown suite {suite!r}; choose from {list(SUITES) + ['all']}")
    return {n: RUNNERS[n](trials, seed) for n in names}


def transpose_superoperator(dim: int = 2) -> Superoperator:
    """The (positive, not completely positive) transpose map."""
    return Superoperator.from_function(lambda m: m.T, dim)
