"""The fourteen acceptance criteria, each at its stated tolerance and runtime bound.

Every test prints one ``criterion NN PASS/FAIL`` line; the lines are also
collected in the ``acceptance criteria`` section of the terminal summary.
"""

import math

import numpy as np

from modalqm.channels import LindbladGenerator, apply, lindblad_evolve, random_channel
from modalqm.conditional import dynamical_cond_probs, leifer_spekkens_deviations
from modalqm.hilbert import SX, SZ, DensityMatrix, Partition, random_density_matrix, spectral_decompose
from modalqm.scenarios.bell import bell_check, correlation, epr_bohm, ghz_mermin, perturbed_singlet
from modalqm.scenarios.communication import no_communication
from modalqm.scenarios.measurement import von_neumann_measurement
from modalqm.scenarios.nogo import kochen_specker, myrvold, pbr
from modalqm.swap import SwapBlockModel, eigenstate_swap_analysis
from modalqm.trajectories import sample_trajectories, split_seeds
from modalqm.verify import run_suite


def _worst(props, name):
    return next(p for p in props if p.name == name)


def test_01_epr_correlation(criterion):
    with criterion(1, "EPR correlation", 1.0) as c:
        rng = np.random.default_rng(1)
        psi = perturbed_singlet(0.0)
        rho = np.outer(psi, psi.conj())
        worst = 0.0
        for _ in range(100):
            a, b = rng.standard_normal((2, 3))
            a /= np.linalg.norm(a)
            b /= np.linalg.norm(b)
            worst = max(worst, abs(correlation(rho, a, b) + a @ b))
        c.check(f"max |<SaSb> + a.b| = {worst:.1e} <= 1e-9", worst <= 1e-9)
        aligned = epr_bohm((0, 0, 1), (0, 0, 1)).outputs["correlation_singlet"]
        c.check(f"a = b gives {aligned:.15f}", abs(aligned + 1) <= 1e-12)
    assert c.passed


def test_02_bell_violation(criterion):
    with criterion(2, "Bell violation", 1.0) as c:
        rep = bell_check()
        lhs, rhs = rep.outputs["lhs"], rep.outputs["rhs"]
        c.check(f"LHS {lhs:.4f}", abs(lhs - 0.7071) <= 1e-3)
        c.check(f"RHS {rhs:.4f}", abs(rhs - 0.2929) <= 1e-3)
        c.check("violation flagged", rep.outputs["violated"])
        n = rep.outputs["lhv_strategies_satisfying"]
        c.check(f"{n}/8 LHV strategies satisfy", n == 8)
    assert c.passed


def test_03_ghz(criterion):
    with criterion(3, "GHZ", 1.0) as c:
        rep = ghz_mermin()
        res = max(v for k, v in rep.outputs.items() if k.startswith("eigen_residual_"))
        c.check(f"eigenvalue residual {res:.1e} <= 1e-12", res <= 1e-12)
        n = rep.outputs["consistent_instruction_sets"]
        c.check(f"{n} of 64 instruction sets consistent", n == 0 and rep.outputs["instruction_sets"] == 64)
    assert c.passed


def test_04_myrvold(criterion):
    with criterion(4, "Myrvold", 1.0) as c:
        rep = myrvold()
        da = np.abs(np.asarray(rep.outputs["spectrum_alpha"]) - [9 / 12, 1 / 12, 1 / 12, 1 / 12]).max()
        db = np.abs(np.asarray(rep.outputs["spectrum_beta"]) - [1 / 3, 1 / 3, 1 / 3, 0]).max()
        c.check(f"alpha spectrum dev {da:.1e}", da <= 1e-12)
        c.check(f"beta spectrum dev {db:.1e}", db <= 1e-12)
        t = rep.outputs["transport_residual"]
        c.check(f"Hadamard transport residual {t:.1e}", t <= 1e-12)
    assert c.passed


def test_05_kochen_specker(criterion):
    with criterion(5, "Kochen-Specker", 1.0) as c:
        rep = kochen_specker()
        m = rep.outputs["max_commutator"]
        c.check(f"within-line commutators {m:.1e}", m <= 1e-12)
        rows = [rep.outputs[f"row_{k}_product_sign"] for k in (1, 2, 3)]
        cols = [rep.outputs[f"column_{k}_product_sign"] for k in (1, 2, 3)]
        c.check(f"row products {rows}, column products {cols}",
                rows == [1, 1, 1] and cols == [1, 1, -1]
                and all(ch.passed for ch in rep.checks if ch.name.endswith("_product")))
        n = rep.outputs["consistent_assignments"]
        c.check(f"{n} of 512 assignments consistent", n == 0 and rep.outputs["assignments"] == 512)
    assert c.passed


def test_06_pbr(criterion):
    with criterion(6, "PBR", 1.0) as c:
        rep = pbr()
        overlaps = [ch.value for ch in rep.checks if ch.name.startswith("overlap_")]
        c.check(f"designated overlaps max {max(overlaps):.1e}", len(overlaps) == 4 and max(overlaps) <= 1e-12)
        g = rep.outputs["gram_residual"]
        c.check(f"Gram residual {g:.1e}", g <= 1e-12)
    assert c.passed


def test_07_conditional_probability_suite(criterion):
    with criterion(7, "conditional-probability suite", 30.0) as c:
        props = run_suite("conditional_probs", trials=200, seed=7)["conditional_probs"]
        nn = _worst(props, "non_negativity")
        c.check(f"min pre-clip {nn.worst:.1e} >= -1e-12", nn.ok and nn.worst >= -1e-12)
        for name in ("normalization", "marginalization", "unitary_trivialization", "global_unitary_invariance"):
            p = _worst(props, name)
            c.check(f"{name} {p.worst:.1e} <= 1e-10 ({p.passes}/{p.trials})",
                    p.ok and p.worst <= 1e-10 and p.trials == 200)
    assert c.passed


def test_08_partial_trace_suite(criterion):
    with criterion(8, "partial-trace suite", 10.0) as c:
        props = run_suite("partial_trace", trials=200, seed=8)["partial_trace"]
        for name in ("diagram_commutation", "classical_partial_sums"):
            p = _worst(props, name)
            c.check(f"{name} {p.worst:.1e} <= 1e-12 ({p.passes}/{p.trials})",
                    p.ok and p.worst <= 1e-12 and p.trials == 200)
    assert c.passed


def test_09_channel_suite(criterion):
    with criterion(9, "channel suite", 30.0) as c:
        props = run_suite("channels", trials=200, seed=9)["channels"]
        tp = _worst(props, "tp_residual")
        cp = _worst(props, "choi_min_eigenvalue")
        rt = _worst(props, "choi_roundtrip")
        c.check(f"TP residual {tp.worst:.1e} <= 1e-9", tp.ok and tp.worst <= 1e-9)
        c.check(f"Choi min eigenvalue {cp.worst:.1e} >= -1e-9", cp.ok and cp.worst >= -1e-9)
        c.check(f"Choi round trip {rt.worst:.1e} <= 1e-10", rt.ok and rt.worst <= 1e-10)

        gamma = 0.5
        t = 2 / gamma
        plus = DensityMatrix(np.full((2, 2), 0.5))
        out = lindblad_evolve(LindbladGenerator(SZ, [SZ], [gamma]), plus, t, step=1e-3).matrix
        closed = np.array([[0.5, 0.5 * np.exp(-(2j + 2 * gamma) * t)],
                           [0.5 * np.exp((2j - 2 * gamma) * t), 0.5]])
        dev = np.abs(out - closed).max()
        c.check(f"dephasing vs closed form at t = 2/gamma {dev:.1e} <= 1e-6", dev <= 1e-6)

        h = 0.7 * SX + 0.3 * SZ
        rho = random_density_matrix(2, seed=9)
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * w * 1.7)) @ v.conj().T
        free = lindblad_evolve(LindbladGenerator(h, [SZ], [0.0]), rho, 1.7, step=1e-3).matrix
        dev0 = np.abs(free - u @ rho.matrix @ u.conj().T).max()
        c.check(f"gamma = 0 vs exact unitary {dev0:.1e} <= 1e-8", dev0 <= 1e-8)
    assert c.passed


def test_10_born_rule_emergence(criterion):
    with criterion(10, "Born-rule emergence", 5.0) as c:
        alpha = (math.sqrt(0.3), math.sqrt(0.7))
        reps = {k: von_neumann_measurement(alpha, env_qubits=k) for k in (4, 8, 12)}
        probs = np.asarray(reps[12].outputs["pointer_probabilities"])
        dev = np.abs(probs - [0.3, 0.7]).max()
        c.check(f"pointer probabilities dev {dev:.1e} <= 1e-6", dev <= 1e-6)
        off = [reps[k].outputs["offdiag_magnitude"] for k in (4, 8, 12)]
        c.check("off-diagonal " + " > ".join(f"{o:.3e}" for o in off), off[0] > off[1] > off[2])
    assert c.passed


def test_11_eigenstate_swap(criterion):
    with criterion(11, "eigenstate-swap avoidance", 1.0) as c:
        rep = eigenstate_swap_analysis(SwapBlockModel(0.5, 1e-4, 1.0))
        c.check(f"label following {rep.label_following:.4f} <= 0.05", rep.label_following <= 0.05)
        c.check(f"state following {rep.state_following:.4f} >= 0.95", rep.state_following >= 0.95)
    assert c.passed


def test_12_trajectory_ensembles(criterion):
    with criterion(12, "trajectory ensembles", 30.0) as c:
        # qutrit pushed through five random channels
        seeds = split_seeds(12, 6)
        rho = random_density_matrix(3, seed=seeds[0])
        epi = spectral_decompose(rho)
        p0 = epi.probabilities
        seq = []
        for s in seeds[1:]:
            ch = random_channel(3, 2, s)
            seq.append(dynamical_cond_probs(ch, epi))
            epi = spectral_decompose(apply(ch, epi.rebuild()))
        ens = sample_trajectories(seq, p0, 100_000, seed=12)
        z = ens.max_sigma_deviation()
        cells = ens.occupations.size
        c.check(f"max deviation {z:.2f} standard errors over {cells} cells <= 3", z <= 3.0)
        c.check("expected occupations equal propagated spectra",
                np.abs(ens.expected[-1] - epi.probabilities).max() <= 1e-12)
    assert c.passed


def test_13_leifer_spekkens(criterion):
    with criterion(13, "Leifer-Spekkens equivalence", 10.0) as c:
        worst = {}
        part = Partition(["Q", "E"], [2, 2])
        for s in split_seeds(13, 50):
            rng = np.random.default_rng(s)
            d = int(rng.integers(2, 5))
            ch = random_channel(d, int(rng.integers(1, 4)), s)
            epi = spectral_decompose(random_density_matrix(d, seed=s + 1))
            rho_w = random_density_matrix(4, seed=s + 2, partition=part)
            ch_w = random_channel(4, 2, s + 3, partition=part)
            devs = leifer_spekkens_deviations(ch, epi, rho_w=rho_w, q_labels=["Q"], channel_w=ch_w)
            for k, v in devs.items():
                worst[k] = max(worst.get(k, 0.0), v)
        for k, v in sorted(worst.items()):
            c.check(f"{k} {v:.1e} <= 1e-10", v <= 1e-10)
    assert c.passed


def test_14_no_communication(criterion):
    with criterion(14, "no-communication", 5.0) as c:
        rep = no_communication()
        o = rep.outputs
        c.check(f"unitary {o['deviation_unitary']:.1e} <= 1e-12", o["deviation_unitary"] <= 1e-12)
        c.check(f"Kraus {o['deviation_dephasing']:.1e} <= 1e-12", o["deviation_dephasing"] <= 1e-12)
        c.check(f"Lindblad {o['deviation_lindblad']:.1e} <= 1e-8 (integrator)", o["deviation_lindblad"] <= 1e-8)
        c.check("all report checks pass", rep.passed)
    assert c.passed
