import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modalqm.channels import apply, dephasing_channel, random_channel
from modalqm.conditional import dynamical_cond_probs
from modalqm.hilbert import DensityMatrix, random_density_matrix, spectral_decompose
from modalqm.swap import SwapBlockModel, eigenstate_swap_analysis
from modalqm.trajectories import OnticTrajectory, binomial_check, sample_trajectories, split_seeds

# frozen from tests/oracles/compute_expected.py: c^2 / (c^2 + (10 c)^2)
SWAP_LABEL_FOLLOWING = 1 / 101


def chain(dim, steps, seed):
    epi = spectral_decompose(random_density_matrix(dim, seed=seed))
    p0 = epi.probabilities
    seq = []
    for k in range(steps):
        ch = random_channel(dim, 2, seed + k + 1)
        seq.append(dynamical_cond_probs(ch, epi))
        epi = spectral_decompose(apply(ch, epi.rebuild()))
    return seq, p0, epi.probabilities


def test_sampling_is_deterministic_per_seed():
    seq, p0, _ = chain(3, 3, 1)
    a = sample_trajectories(seq, p0, 500, seed=42)
    b = sample_trajectories(seq, p0, 500, seed=42)
    c = sample_trajectories(seq, p0, 500, seed=43)
    assert np.array_equal(a.indices, b.indices)
    assert not np.array_equal(a.indices, c.indices)


def test_expected_tracks_evolved_spectrum():
    seq, p0, final = chain(3, 4, 5)
    ens = sample_trajectories(seq, p0, 10, seed=0)
    assert np.abs(ens.expected[-1] - final).max() < 1e-12


def test_large_ensemble_within_three_sigma():
    seq, p0, _ = chain(3, 5, 9)
    ens = sample_trajectories(seq, p0, 100_000, seed=2024)
    assert binomial_check(ens, 3.0)


def test_deterministic_chain_is_exact():
    # identity transitions: every trajectory stays at its initial index
    seq = [np.eye(2)] * 3
    ens = sample_trajectories(seq, [0.25, 0.75], 1000, seed=1)
    assert np.all(ens.indices == ens.indices[:, :1])
    tr = ens.trajectory(0)
    assert isinstance(tr, OnticTrajectory) and len(tr.indices) == 4


def test_dephasing_freezes_z_diagonal_state():
    z = DensityMatrix(np.diag([0.35, 0.65]))
    cond = dynamical_cond_probs(dephasing_channel(0.4), spectral_decompose(z))
    assert np.allclose(cond, np.eye(2), atol=1e-12)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        sample_trajectories([np.array([[0.5, 0.5], [0.6, 0.5]])], [0.5, 0.5], 10)
    with pytest.raises(ValueError):
        sample_trajectories([np.eye(2)], [0.5, 0.5], 0)
    with pytest.raises(ValueError):
        sample_trajectories([np.eye(2)], [0.5, 0.5], 5, times=[0.0])


def test_split_seeds_distinct_and_stable():
    a = split_seeds(7, 5)
    assert a == split_seeds(7, 5)
    assert len(set(a)) == 5


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 2 ** 31))
def test_occupations_agree_statistically(dim, steps, seed):
    seq, p0, _ = chain(dim, steps, seed)
    ens = sample_trajectories(seq, p0, 4000, seed=seed)
    # 5 sigma keeps the false-alarm rate negligible across hypothesis examples
    assert ens.max_sigma_deviation() <= 5.0
    assert np.allclose(ens.occupations.sum(axis=1), 1.0)


# ---------------------------------------------------------------------------
# eigenstate swap

def test_swap_model_quantities():
    m = SwapBlockModel(0.5, 1e-4, 1.0)
    assert m.gap_at_crossing == pytest.approx(1e-4)
    assert m.swap_time == pytest.approx(5e-5)
    rep = eigenstate_swap_analysis(m)
    assert rep.gap_at_t0 == pytest.approx(1e-4, rel=1e-9)


def test_swap_label_following_frozen():
    rep = eigenstate_swap_analysis(SwapBlockModel(0.5, 1e-4, 1.0))
    assert rep.label_following == pytest.approx(SWAP_LABEL_FOLLOWING, abs=1e-10)
    assert rep.state_following == pytest.approx(1 - SWAP_LABEL_FOLLOWING, abs=1e-10)
    assert list(rep.matching) == [1, 0]


def test_swap_curves_and_overlap_exchange():
    rep = eigenstate_swap_analysis(SwapBlockModel(0.5, 1e-4, 1.0))
    curves = rep.curves()
    assert set(curves) == {"t", "lambda_0", "lambda_1", "overlap_0", "overlap_1"}
    # the upper eigenvector ends almost orthogonal to where it started
    assert curves["overlap_0"][0] == pytest.approx(1.0)
    assert curves["overlap_0"][-1] < 0.05
    assert np.all(curves["lambda_0"] >= curves["lambda_1"])


def test_swap_model_validation():
    with pytest.raises(ValueError):
        SwapBlockModel(0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        SwapBlockModel(0.5, 1e-4, -1.0)
    with pytest.raises(ValueError):
        eigenstate_swap_analysis(SwapBlockModel(0.5, 1e-4, 1.0), times=[0.0, 10.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(1e-6, 1e-2), st.floats(3.0, 50.0))
def test_swap_following_matches_two_level_formula(rho0, xi, windows):
    m = SwapBlockModel(rho0, xi, 1.0)
    rep = eigenstate_swap_analysis(m, window=windows * m.swap_time)
    c, d = rho0 * xi, windows * m.swap_time
    assert rep.label_following == pytest.approx(c ** 2 / (c ** 2 + d ** 2), abs=1e-9)
