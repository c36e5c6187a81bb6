import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from modalqm.channels import (KrausChannel, LindbladGenerator, amplitude_damping_channel, apply,
                              assignment_map, channel_tensor, choi, conditional_state, dephasing_channel,
                              depolarizing_channel, identity_channel, kraus_from_choi, lindblad_channel,
                              lindblad_evolve, local_channel, luders_channel, random_channel,
                              unitary_channel, verify_cpt)
from modalqm.hilbert import SX, SZ, DensityMatrix, Partition, partial_trace, random_density_matrix, random_unitary
from modalqm.verify import transpose_superoperator

# frozen from tests/oracles/compute_expected.py
DEPOLARIZING_03_CHOI = [1.55, 0.15, 0.15, 0.15]
# rho01 of |+><+| under H = sigma_z, A = sigma_z, gamma = 0.5 at t = 4 (ODE oracle)
DEPHASING_RHO01_T4 = -0.0013324630387725118 - 0.009060364188364464j


def plus_state():
    return DensityMatrix(np.full((2, 2), 0.5))


def test_constructors_are_cpt():
    for ch in (identity_channel(3), unitary_channel(random_unitary(3, 0)), dephasing_channel(0.3),
               depolarizing_channel(0.3), amplitude_damping_channel(0.2), random_channel(3, 2, 1)):
        d = verify_cpt(ch)
        assert d.ok
        assert d.tp_residual < 1e-12
        assert d.choi_min_eigenvalue > -1e-12


def test_non_tp_kraus_rejected_and_diagnosed():
    ops = [0.9 * k for k in amplitude_damping_channel(0.2).kraus_ops]
    with pytest.raises(ValueError):
        KrausChannel(ops)
    ch = KrausChannel(ops, check=False)
    d = verify_cpt(ch)
    assert not d.is_tp and d.is_cp
    assert d.tp_residual == pytest.approx(0.19, abs=1e-12)


def test_transpose_is_not_cp():
    d = verify_cpt(transpose_superoperator(2))
    assert d.is_tp and not d.is_cp
    assert d.choi_min_eigenvalue == pytest.approx(-1.0, abs=1e-12)


def test_depolarizing_choi_spectrum():
    w = np.sort(np.linalg.eigvalsh(choi(depolarizing_channel(0.3)).entries))[::-1]
    assert np.allclose(w, DEPOLARIZING_03_CHOI, atol=1e-12)


def test_depolarizing_action():
    rho = random_density_matrix(2, seed=4)
    out = depolarizing_channel(0.3).apply_matrix(rho.matrix)
    assert np.allclose(out, 0.7 * rho.matrix + 0.3 * np.eye(2) / 2, atol=1e-14)


def test_dephasing_kills_coherence_at_half():
    out = dephasing_channel(0.5).apply_matrix(plus_state().matrix)
    assert np.allclose(out, np.eye(2) / 2, atol=1e-15)


def test_choi_roundtrip():
    ch = random_channel(3, 3, seed=5)
    back = kraus_from_choi(choi(ch))
    rho = random_density_matrix(3, seed=6)
    assert np.abs(ch.apply_matrix(rho.matrix) - back.apply_matrix(rho.matrix)).max() < 1e-12
    assert len(back.kraus_ops) <= 3


def test_conditional_state_propagation():
    ch = random_channel(2, 2, seed=8, dim_out=3)
    rho = random_density_matrix(2, seed=9)
    cs = conditional_state(ch)
    assert np.abs(cs.propagate_matrix(rho.matrix) - ch.apply_matrix(rho.matrix)).max() < 1e-13


def test_apply_checks_dimensions():
    with pytest.raises(ValueError):
        apply(identity_channel(3), random_density_matrix(2, seed=0))


def test_compose_and_tensor():
    a, b = dephasing_channel(0.2), amplitude_damping_channel(0.3)
    rho = random_density_matrix(2, seed=1)
    assert np.allclose(a.compose(b).apply_matrix(rho.matrix), a.apply_matrix(b.apply_matrix(rho.matrix)))
    ab = channel_tensor(a, b)
    r = np.kron(random_density_matrix(2, seed=2).matrix, random_density_matrix(2, seed=3).matrix)
    assert verify_cpt(ab).ok and ab.dim_in == 4
    ref = np.kron(a.apply_matrix(random_density_matrix(2, seed=2).matrix),
                  b.apply_matrix(random_density_matrix(2, seed=3).matrix))
    assert np.abs(ab.apply_matrix(r) - ref).max() < 1e-14


def test_local_channel_acts_on_named_factor():
    part = Partition(["A", "B"], [2, 2])
    ch = local_channel(amplitude_damping_channel(1.0), ["B"], part)
    rho = DensityMatrix(np.kron(np.diag([0.3, 0.7]), np.diag([0.0, 1.0])), part)
    out = DensityMatrix(ch.apply_matrix(rho.matrix), part)
    assert np.allclose(partial_trace(out, ["B"]).matrix, np.diag([1.0, 0.0]))
    assert np.allclose(partial_trace(out, ["A"]).matrix, np.diag([0.3, 0.7]))


def test_luders_validation():
    with pytest.raises(ValueError):
        luders_channel([np.diag([1.0, 0.0])])  # does not resolve identity
    ch = luders_channel([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert np.allclose(ch.apply_matrix(plus_state().matrix), np.eye(2) / 2)


def test_lindblad_dephasing_closed_form():
    gamma = 0.5
    gen = LindbladGenerator(SZ, [SZ], [gamma])
    t = 2 / gamma
    out = lindblad_evolve(gen, plus_state(), t, step=1e-3)
    closed = 0.5 * np.exp(-(2j + 2 * gamma) * t)
    assert abs(out.matrix[0, 1] - closed) < 1e-6
    assert abs(out.matrix[0, 1] - DEPHASING_RHO01_T4) < 1e-6
    assert abs(out.matrix[0, 0] - 0.5) < 1e-12


def test_lindblad_zero_rate_is_unitary():
    h = 0.7 * SX + 0.2 * SZ
    gen = LindbladGenerator(h, [SZ], [0.0])
    rho = random_density_matrix(2, seed=11)
    u = scipy.linalg.expm(-1j * h * 1.5)
    out = lindblad_evolve(gen, rho, 1.5, step=1e-3)
    assert np.abs(out.matrix - u @ rho.matrix @ u.conj().T).max() < 1e-8


def test_lindblad_channel_matches_integrator():
    gen = LindbladGenerator(0.4 * SX, [SZ, np.array([[0, 1], [0, 0]])], [0.3, 0.2])
    rho = random_density_matrix(2, seed=12)
    ch = lindblad_channel(gen, 1.0)
    assert verify_cpt(ch).ok
    rk = lindblad_evolve(gen, rho, 1.0, step=1e-3)
    assert np.abs(ch.apply_matrix(rho.matrix) - rk.matrix).max() < 1e-10


def test_lindblad_trace_drift_reported():
    gen = LindbladGenerator(SZ, [SZ], [0.5])
    res = lindblad_evolve(gen, plus_state(), 1.0, step=1e-2, full=True, sample_every=10)
    assert res.trace_drift < 1e-12
    assert len(res.samples) == res.times.size == 11


def test_lindblad_rejects_bad_input():
    with pytest.raises(ValueError):
        LindbladGenerator(SX + 1j * SZ, [SZ], [0.1])
    with pytest.raises(ValueError):
        LindbladGenerator(SZ, [SZ], [-0.1])


def test_assignment_map_factorized_state():
    part = Partition(["Q", "E"], [2, 3])
    rho_q = random_density_matrix(2, seed=1).matrix
    rho_e = random_density_matrix(3, seed=2).matrix
    rho_w = DensityMatrix(np.kron(rho_q, rho_e), part)
    x = random_density_matrix(2, seed=3).matrix
    lifted = assignment_map(rho_w, ["Q"], x)
    assert np.abs(lifted - np.kron(x, rho_e)).max() < 1e-12


def test_assignment_map_trace_back():
    # Tr A[P] = Tr[rho_Q rho_Q^-1 P] = 1 for any rank-one projector on the support
    part = Partition(["Q", "E"], [2, 2])
    rho_w = random_density_matrix(4, seed=5, partition=part)
    rho_q = partial_trace(rho_w, ["Q"]).matrix
    _, v = np.linalg.eigh(rho_q)
    for k in range(2):
        p = np.outer(v[:, k], v[:, k].conj())
        assert np.trace(assignment_map(rho_w, ["Q"], p)).real == pytest.approx(1.0, abs=1e-12)


def test_assignment_map_rejects_off_support():
    part = Partition(["Q", "E"], [2, 2])
    rho_w = DensityMatrix(np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2), part)
    with pytest.raises(ValueError):
        assignment_map(rho_w, ["Q"], np.diag([0.0, 1.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_random_channels_preserve_density_matrices(dim, n_kraus, seed):
    ch = random_channel(dim, n_kraus, seed)
    d = verify_cpt(ch)
    assert d.tp_residual <= 1e-9 and d.choi_min_eigenvalue >= -1e-9
    out = ch.apply_matrix(random_density_matrix(dim, seed=seed).matrix)
    assert np.linalg.eigvalsh(out).min() > -1e-12
    assert abs(np.trace(out) - 1) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.integers(0, 2 ** 32 - 1))
def test_choi_roundtrip_property(p, seed):
    for ch in (dephasing_channel(p), amplitude_damping_channel(p), depolarizing_channel(p)):
        rho = random_density_matrix(2, seed=seed).matrix
        back = kraus_from_choi(choi(ch))
        assert np.abs(ch.apply_matrix(rho) - back.apply_matrix(rho)).max() <= 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_dephasing_decay_rate_is_two_gamma(t):
    # with L = g (A rho A - rho) for A = sigma_z the coherence decays as exp(-2 g t)
    gamma = 0.3
    ch = lindblad_channel(LindbladGenerator(np.zeros((2, 2)), [SZ], [gamma]), t)
    out = ch.apply_matrix(np.full((2, 2), 0.5))
    assert abs(out[0, 1]) == pytest.approx(0.5 * np.exp(-2 * gamma * t), rel=1e-12)
