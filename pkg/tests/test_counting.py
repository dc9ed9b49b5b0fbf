import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import hyp2f1

from qthermo.counting import (
    _log_poly,
    _log_poly_rows,
    _log_prob_grid,
    _moments,
    count_distribution,
    counting_fi_matrix,
    hyp2f1_series,
    joint_prob,
)
from qthermo.equal_temp import qfi_equal
from qthermo.gaussian_fisher import qfi_matrix
from qthermo.model import DomainError, SourcePair, build_image_state
from qthermo.oracle import fd_derivative, fock_density, number_diagonal


def _geometric(n, mean):
    return mean**n / (1 + mean) ** (n + 1)


@pytest.mark.parametrize("s", [0.0, 0.4, 1.0])
def test_equal_temperatures_factorize(s):
    pair = SourcePair(1.0, 1.0, 1.0, 0.5)
    st_ = build_image_state(pair, s)
    for n, m in [(0, 0), (2, 1), (4, 0), (3, 5)]:
        want = _geometric(n, st_.n_plus) * _geometric(m, st_.n_minus)
        assert joint_prob(n, m, pair, s) == pytest.approx(want, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("s", [0.0, 0.5, 0.95])
def test_vacuum_probability(fig5_pair, s):
    v = build_image_state(fig5_pair, s).pmatrix
    assert joint_prob(0, 0, fig5_pair, s) == pytest.approx(1 / np.linalg.det(np.eye(2) + v), rel=1e-12)


def test_matches_fock_diagonal():
    pair = SourcePair(0.8, 1.2, 1.0, 0.5)
    dim = 36
    diag = number_diagonal(fock_density(pair, 0.3, dim))
    for n in range(12):
        for m in range(12):
            assert joint_prob(n, m, pair, 0.3) == pytest.approx(diag[n, m], abs=1e-8)


def test_literal_exponential_series_misses_oracle():
    pair = SourcePair(0.8, 1.2, 1.0, 0.5)
    diag = number_diagonal(fock_density(pair, 0.5, 36))
    err = max(abs(joint_prob(n, m, pair, 0.5, series="literal") - diag[n, m]) for n in range(6) for m in range(6))
    assert err > 1e-4


@settings(max_examples=30)
@given(st.floats(0.3, 20), st.floats(0.3, 20), st.floats(0.1, 5), st.floats(0.05, 1), st.floats(0, 1))
def test_normalization(t1, t2, omega, eta, s):
    dist = count_distribution(SourcePair(t1, t2, omega, eta), s, tail_tol=1e-10)
    assert math.fsum(dist.probs.ravel()) == pytest.approx(1.0, abs=2e-10)
    assert dist.tail_mass <= 1e-10
    assert np.all(dist.probs >= 0)


@pytest.mark.parametrize("a,b,c,z", [(1.0, 2.0, 3.0, 0.3), (-3.0, -2.0, 1.0, 0.7), (0.5, 1.5, 2.5, -0.6), (2.0, 3.0, 1.0, 0.9)])
def test_hypergeometric_series(a, b, c, z):
    assert hyp2f1_series(a, b, c, z) == pytest.approx(hyp2f1(a, b, c, z), rel=1e-12)
    assert hyp2f1_series(a, b, c, z) == pytest.approx(float(mpmath.hyp2f1(a, b, c, z)), rel=1e-12)


def test_hypergeometric_series_domain():
    with pytest.raises(DomainError):
        hyp2f1_series(1.0, 1.0, 2.0, 1.0)


def test_score_matches_finite_differences():
    pair = SourcePair(0.8, 1.2, 1.0, 0.5)
    s = 0.5
    grid = np.arange(40.0)

    def probs(t1, t2):
        mo = _moments(SourcePair(t1, t2, 1.0, 0.5), s)
        return np.exp(_log_prob_grid(mo, grid[:, None], grid[None, :], "gauss")[0])

    p = probs(pair.t1, pair.t2)
    d1, e1 = fd_derivative(lambda t: probs(t, pair.t2), pair.t1, 1e-3)
    d2, e2 = fd_derivative(lambda t: probs(pair.t1, t), pair.t2, 1e-3)
    assert max(e1, e2) < 1e-9
    fd = np.array([[np.sum(a * b / p) for b in (d1, d2)] for a in (d1, d2)])
    np.testing.assert_allclose(counting_fi_matrix(pair, s).matrix, fd, rtol=1e-7)


def test_swap_symmetry(generic_pair):
    a = counting_fi_matrix(generic_pair, 0.6)
    b = counting_fi_matrix(generic_pair.swapped(), 0.6)
    assert a.h11 == pytest.approx(b.h22, rel=1e-12)
    assert a.h12 == pytest.approx(b.h12, rel=1e-12)


@pytest.mark.parametrize("s", [0.0, 0.3, 0.7, 0.99])
def test_counting_below_quantum_bound(fig5_pair, s):
    f = counting_fi_matrix(fig5_pair, s).matrix
    h = qfi_matrix(fig5_pair, s).matrix
    assert np.linalg.eigvalsh(h - f).min() >= -1e-10 * h.max()


@pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
def test_counting_optimal_for_common_temperature(s):
    # at T1 = T2 the state is diagonal in the (n+, n-) basis, so counting is
    # optimal for the shared temperature; the difference T1 - T2 only enters via gamma^2
    pair = SourcePair(1.0, 1.0, 1.0, 0.5)
    f = counting_fi_matrix(pair, s)
    assert f.h11 + f.h22 + 2 * f.h12 == pytest.approx(qfi_equal(1.0, 1.0, 0.5, s).qfi, rel=1e-10)
    assert abs(f.det) < 1e-10 * f.h11 * f.h22


def test_grid_recurrence_matches_direct_sum():
    for z in (0.0, 0.01, 0.5, 0.999):
        a, da = _log_poly(np.arange(80)[:, None], np.arange(50)[None, :], z)
        b, db = _log_poly_rows(79, np.arange(50), z)
        np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(db, da, rtol=1e-11, atol=1e-12)


def test_large_occupation_grid():
    dist = count_distribution(SourcePair(14.6, 3.4, 0.1, 0.5), 0.0, tail_tol=1e-10)
    assert max(dist.n_cap) > 1000
    assert math.fsum(dist.probs.ravel()) == pytest.approx(1.0, abs=2e-10)


def test_counting_singular_at_maximum_diffraction(fig5_pair):
    f = counting_fi_matrix(fig5_pair, 1.0)
    assert f.path == "counting"
    assert abs(f.det) < 1e-10 * f.h11 * f.h22


def test_negative_counts_rejected(generic_pair):
    with pytest.raises(DomainError):
        joint_prob(-1, 0, generic_pair, 0.5)
