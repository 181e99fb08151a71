import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from qspectra.quaternion import Quaternion, QuaternionMatrix, embed_matrix
from qspectra.sampling import (
    KINDS,
    EntryDistribution,
    preprocess,
    replication_rng,
    sample_covariance,
    sample_matrix,
)
from qspectra.spectra import eigenvalues_hermitian


def test_rademacher_single_entry():
    X = sample_matrix(1, 1, EntryDistribution("q_rademacher"), seed=7)
    assert np.all(np.abs(X.coeffs) == 0.5)
    assert X[0, 0].norm == 1.0


def test_gaussian_second_moment():
    X = sample_matrix(50, 200, EntryDistribution("q_gaussian"), seed=1)
    assert 0.95 <= np.mean(X.norms() ** 2) <= 1.05


@pytest.mark.parametrize("kind", KINDS)
def test_unit_variance_and_centering(kind):
    X = sample_matrix(200, 200, EntryDistribution(kind), seed=2)
    c = X.coeffs.reshape(-1, 4)
    assert np.all(np.abs(c.mean(axis=0)) < 0.01)
    assert np.allclose(c.var(axis=0), 0.25, atol=0.01)


@pytest.mark.parametrize("kind", KINDS)
def test_sixth_moment_matches_sample(kind):
    dist = EntryDistribution(kind)
    X = sample_matrix(400, 500, dist, seed=3)
    assert np.mean(X.norms() ** 6) == pytest.approx(dist.sixth_moment_bound, rel=0.03)


def test_sixth_moment_bound_validation():
    assert EntryDistribution("q_gaussian", 10.0).sixth_moment_bound == 10.0
    with pytest.raises(ValueError):
        EntryDistribution("q_gaussian", 2.0)
    with pytest.raises(ValueError):
        EntryDistribution("cauchy")


def test_determinism():
    dist = EntryDistribution("q_bounded_mix")
    assert sample_matrix(4, 5, dist, 11) == sample_matrix(4, 5, dist, 11)
    assert not sample_matrix(4, 5, dist, 11) == sample_matrix(4, 5, dist, 12)


def test_zero_dimensions_rejected():
    with pytest.raises(ValueError):
        sample_matrix(0, 3, EntryDistribution(), 0)
    with pytest.raises(ValueError):
        sample_matrix(3, 0, EntryDistribution(), 0)


def test_replication_streams_independent_of_order():
    a = [replication_rng(5, i, 100).normal() for i in range(4)]
    b = [replication_rng(5, i, 100).normal() for i in reversed(range(4))][::-1]
    assert a == b
    assert len(set(a)) == 4
    assert replication_rng(5, 0, 100).normal() != replication_rng(5, 0, 200).normal()


# --------------------------------------------------------- truncated moments


def _gaussian_truncated_second_oracle(t):
    # ||x||^2 = chi2_4 / 4: E[chi2_4/4; chi2_4 < 4 t^2] by quadrature of the chi2_4 density
    val, _ = integrate.quad(lambda s: s / 4 * stats.chi2.pdf(s, 4), 0, 4 * t * t, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@pytest.mark.parametrize("n", [2, 16, 100, 10000])
def test_gaussian_truncated_moment_oracle(n):
    _, second = EntryDistribution("q_gaussian").truncated_moments(n**0.25)
    assert second == pytest.approx(_gaussian_truncated_second_oracle(n**0.25), abs=1e-12)


def test_gaussian_sigma_at_10000():
    _, second = EntryDistribution("q_gaussian").truncated_moments(10000**0.25)
    assert 1 - 1e-3 <= second <= 1.0


@pytest.mark.parametrize("t", [0.5, 0.9, 1.2, 1.5])
def test_bounded_mix_truncated_moment_monte_carlo(t):
    dist = EntryDistribution("q_bounded_mix")
    c = dist.draw_coeffs(np.random.default_rng(4), (400000,))
    r2 = np.sum(c**2, axis=1)
    mc = np.mean(r2 * (r2 < t * t))
    se = np.std(r2 * (r2 < t * t)) / math.sqrt(r2.size)
    _, second = dist.truncated_moments(t)
    assert abs(second - mc) < 5 * se + 1e-9


def test_bounded_mix_untruncated_beyond_corner():
    # corner of the cube sits at radius sqrt(4 * 3/4) = sqrt(3)
    assert EntryDistribution("q_bounded_mix").truncated_moments(1.8)[1] == 1.0


# ---------------------------------------------------------------- preprocess


@pytest.mark.parametrize("n", [2, 5, 50])
def test_rademacher_pipeline_is_identity(n):
    dist = EntryDistribution("q_rademacher")
    X = sample_matrix(3, n, dist, 0)
    Y, rep = preprocess(X, n, dist)
    assert Y == X
    assert rep.truncated_count == 0
    assert rep.recentering_shift == Quaternion(0.0)
    assert np.all(rep.rescale_factors == 1.0)


def test_boundary_entry_is_zeroed():
    X = QuaternionMatrix.from_entries([[Quaternion(2.0)] + [Quaternion(0.1)] * 15])
    Y, rep = preprocess(X, 16, EntryDistribution("q_gaussian"))
    assert rep.truncation_threshold == 2.0
    assert rep.truncated_count == 1
    assert np.all(Y.coeffs[0, 0] == 0.0)


def test_preprocess_checks_arguments():
    X = sample_matrix(2, 4, EntryDistribution(), 0)
    with pytest.raises(ValueError):
        preprocess(X, 5, EntryDistribution())
    with pytest.raises(TypeError):
        preprocess(X, 4, "q_gaussian")


def test_rademacher_n1_has_no_mass():
    X = sample_matrix(2, 1, EntryDistribution("q_rademacher"), 0)
    with pytest.raises(ValueError):
        preprocess(X, 1, EntryDistribution("q_rademacher"))


@given(
    st.sampled_from(KINDS),
    st.integers(min_value=2, max_value=60),
    st.integers(min_value=0, max_value=10**6),
)
def test_preprocessed_entries_bounded(kind, n, seed):
    dist = EntryDistribution(kind)
    X = sample_matrix(3, n, dist, seed)
    Y, rep = preprocess(X, n, dist)
    sigma_min = 1 / rep.rescale_factors.max()
    assert 0 < sigma_min <= 1
    assert np.all(Y.norms() < n**0.25 * (1 + 1e-6) / sigma_min)
    # truncated entries are exactly those at or beyond the threshold
    assert rep.truncated_count == int(np.sum(X.norms() >= n**0.25))


def test_pipeline_deterministic():
    dist = EntryDistribution("q_gaussian")
    run = lambda: preprocess(sample_matrix(4, 9, dist, replication_rng(1, 2, 9)), 9, dist)[0]
    assert run() == run()


# ---------------------------------------------------------------- covariance


def test_covariance_unit():
    X = QuaternionMatrix.from_entries([[Quaternion(1.0)]])
    assert np.array_equal(sample_covariance(X), np.eye(2))
    X = QuaternionMatrix.from_entries([[Quaternion(1.0), Quaternion(1.0)]])
    assert np.allclose(sample_covariance(X), np.eye(2))


def test_covariance_trace_identity():
    X = sample_matrix(4, 16, EntryDistribution("q_gaussian"), 5)
    ev = eigenvalues_hermitian(sample_covariance(X)).eigenvalues
    assert ev.sum() == pytest.approx(np.linalg.norm(embed_matrix(X)) ** 2 / 16, rel=1e-10)


@given(st.sampled_from(KINDS), st.integers(1, 8), st.integers(1, 8), st.integers(0, 10**6))
def test_covariance_hermitian_psd(kind, p, n, seed):
    H = sample_covariance(sample_matrix(p, n, EntryDistribution(kind), seed))
    norm = np.linalg.norm(H, 2)
    assert np.max(np.abs(H - H.conj().T)) <= 1e-13 * norm
    assert eigenvalues_hermitian(H).eigenvalues[0] >= -1e-10 * norm


@pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
def test_bounded_mix_inside_inscribed_ball(t):
    # for t^2 <= h^2 the region is a full orthant of the 4-ball: pi^2 t^6 / (48 h^4)
    h4 = (3 / 4) ** 2
    _, second = EntryDistribution("q_bounded_mix").truncated_moments(t)
    assert second == pytest.approx(math.pi**2 * t**6 / (48 * h4), rel=1e-10)
