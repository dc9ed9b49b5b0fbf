import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qthermo.equal_temp import qfi_equal
from qthermo.gaussian_fisher import (
    FisherMatrix,
    _image_mode_qfi,
    gaussian_qfi,
    normal_mode_qfi,
    qfi_equal_limit_closed,
    qfi_matrix,
    sld,
    weak_commutation,
)
from qthermo.model import (
    SingularityError,
    SourcePair,
    build_image_state,
    covariance_derivatives,
)
from qthermo.oracle import (
    density_derivative,
    fock_density,
    sld_operator,
    spectral_qfi_matrix,
)

temps = st.floats(0.1, 30.0)
etas = st.floats(0.05, 1.0)


def test_single_thermal_mode_reduces_to_textbook_fi():
    n, dn = 0.7, 0.3
    cov = np.diag([2 * n + 1, 2 * n + 1])
    dcov = np.diag([2 * dn, 2 * dn])
    k = np.diag([1.0, -1.0])
    from qthermo import gaussian_fisher as gf

    sol = np.linalg.solve(gf._kron_system(cov, k), gf.vec(dcov))
    h = 0.5 * gf.vec(dcov) @ sol
    assert h == pytest.approx(dn**2 / (n * (n + 1)), rel=1e-14)


def test_displacement_term_is_zero(generic_pair):
    state = build_image_state(generic_pair, 0.4)
    dcovs = covariance_derivatives(generic_pair, 0.4)
    a = gaussian_qfi(state.cov, dcovs)
    b = gaussian_qfi(state.cov, dcovs, state.displacement, [np.zeros(4), np.zeros(4)])
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("s", [0.0, 0.3, 0.5, 0.9, 1.0])
def test_equal_temperature_limit_matches_closed_form(s):
    h = qfi_matrix(SourcePair(1.0, 1.0, 1.0, 0.5), s)
    assert h.h11 == pytest.approx(h.h22, rel=1e-12)
    assert h.h11 == pytest.approx(qfi_equal_limit_closed(1.0, 1.0, 0.5, s), rel=1e-9)


@pytest.mark.parametrize("s", [0.0, 0.5, 0.99])
def test_closed_form_vs_nearby_point(s):
    t1 = 1.0
    h = qfi_matrix(SourcePair(t1, t1 * (1 + 1e-7), 1.0, 0.5), s)
    assert qfi_equal_limit_closed(t1, 1.0, 0.5, s) == pytest.approx(h.h11, rel=1e-5)


def test_printed_closed_form_carries_factor_minus_two():
    for s in (0.0, 0.4, 0.8):
        printed = qfi_equal_limit_closed(1.3, 2.0, 0.6, s, printed=True)
        assert printed == pytest.approx(-2 * qfi_equal_limit_closed(1.3, 2.0, 0.6, s), rel=1e-13)


def test_no_diffraction_equal_temperatures():
    h = qfi_matrix(SourcePair(1.0, 1.0, 1.0, 0.5), 0.0)
    assert abs(h.h12) < 1e-15
    assert qfi_equal(1.0, 1.0, 0.5, 0.0).qfi == pytest.approx(2 * h.h11, rel=1e-12)
    assert qfi_equal_limit_closed(1.0, 1.0, 0.5, 0.0) == pytest.approx(0.5 * qfi_equal(1.0, 1.0, 0.5, 0.0).qfi, rel=1e-12)


def test_maximum_diffraction_equal_temperatures():
    h = qfi_matrix(SourcePair(1.0, 1.0, 1.0, 0.5), 1.0)
    assert h.path == "normal-mode"
    assert qfi_equal(1.0, 1.0, 0.5, 1.0).qfi == pytest.approx(4 * h.h11, rel=1e-12)
    assert qfi_equal_limit_closed(1.0, 1.0, 0.5, 1.0) == pytest.approx(0.25 * qfi_equal(1.0, 1.0, 0.5, 1.0).qfi, rel=1e-12)


def test_limit_path_is_continuous(generic_pair):
    near = qfi_matrix(generic_pair, 1 - 1e-6)
    limit = qfi_matrix(generic_pair, 1.0)
    assert near.path == "kronecker" and limit.path == "normal-mode"
    np.testing.assert_allclose(near.matrix, _image_mode_qfi(generic_pair, 1 - 1e-6), rtol=1e-8)
    np.testing.assert_allclose(near.matrix, limit.matrix, rtol=1e-4)
    assert limit.det == pytest.approx(0.0, abs=1e-14)


@given(temps, st.floats(0.1, 10.0), etas, st.floats(0.0, 1.0))
def test_chain_rule_identity(t, omega, eta, s):
    h = qfi_matrix(SourcePair(t, t, omega, eta), s)
    assert h.h11 + h.h22 + 2 * h.h12 == pytest.approx(qfi_equal(t, omega, eta, s).qfi, rel=1e-8)


@given(temps, temps, st.floats(0.1, 10.0), etas, st.floats(0.0, 1.0))
def test_fisher_matrix_is_psd(t1, t2, omega, eta, s):
    h = qfi_matrix(SourcePair(t1, t2, omega, eta), s)
    assert h.h11 > 0 and h.h22 > 0
    eig = np.linalg.eigvalsh(h.matrix)
    assert eig[0] >= -1e-12 * eig[1]


def test_determinant_vanishes_monotonically(fig5_pair):
    dets = [qfi_matrix(fig5_pair, s).det for s in np.linspace(0, 1, 101)]
    assert np.all(np.diff(dets) < 0)
    assert dets[-1] < 1e-14 * dets[0]


def test_weak_commutation_grid():
    for t1, t2, s in itertools.product(np.linspace(0.5, 5, 5), np.linspace(0.5, 5, 5), [0.1, 0.5, 0.9]):
        for eta in (0.2, 1.0):
            assert abs(weak_commutation(SourcePair(t1, t2, 2.0, eta), s)) < 1e-9


def test_weak_commutation_zero_gamma_exact():
    assert weak_commutation(SourcePair(2.0, 2.0, 1.0, 0.5), 0.4) == 0


@pytest.fixture(scope="module")
def setup(generic_pair):
    state = fock_density(generic_pair, TestAgainstFockOracle.s, TestAgainstFockOracle.dim)
    ls = [sld_operator(sld(generic_pair, TestAgainstFockOracle.s, i), state.basis) for i in (1, 2)]
    return state, ls


class TestAgainstFockOracle:
    dim = 40
    s = 0.5

    def test_slds_have_zero_mean(self, setup):
        state, ls = setup
        for op in ls:
            assert abs(np.trace(state.rho @ op)) < 1e-10

    def test_sld_second_moment_is_qfi(self, setup, generic_pair):
        state, ls = setup
        h = qfi_matrix(generic_pair, self.s).matrix
        for i in range(2):
            for j in range(2):
                val = np.trace(state.rho @ (ls[i] @ ls[j] + ls[j] @ ls[i])).real / 2
                assert val == pytest.approx(h[i, j], rel=1e-6)

    def test_sld_reconstructs_derivative(self, setup, generic_pair):
        state, ls = setup
        for i, op in enumerate(ls):
            d_rho, err = density_derivative(generic_pair, self.s, self.dim, i + 1)
            resid = d_rho - 0.5 * (op @ state.rho + state.rho @ op)
            assert np.max(np.abs(resid)) < 1e-6
            assert err < 1e-8

    def test_commutator_expectation(self, setup):
        state, ls = setup
        assert abs(np.trace(state.rho @ (ls[0] @ ls[1] - ls[1] @ ls[0]))) < 1e-6

    def test_qfi_matrix_matches_spectral(self, generic_pair):
        np.testing.assert_allclose(
            spectral_qfi_matrix(generic_pair, self.s, self.dim),
            qfi_matrix(generic_pair, self.s).matrix,
            rtol=1e-5,
        )


def test_sld_at_maximum_diffraction_names_vacuum_mode(generic_pair):
    with pytest.raises(SingularityError, match="a_-"):
        sld(generic_pair, 1.0, 1)


def test_fisher_matrix_helpers():
    h = FisherMatrix.from_array([[2.0, 0.5], [0.5, 1.0]])
    assert h.det == pytest.approx(1.75)
    assert h[0, 1] == 0.5


def test_near_vacuum_source_uses_normal_modes():
    # n2 ~ 1e-14 makes the Kronecker system ill-conditioned although s is far from 1
    h = qfi_matrix(SourcePair(1.0, 0.25, 8.0, 1.0), 0.5)
    assert h.path == "normal-mode"
    # source 2 is dark, so the state is a single thermal mode carrying n1(T1)
    x = 8.0
    n1 = 1 / math.expm1(x)
    dn1 = x * math.exp(x) / math.expm1(x) ** 2
    assert h.h11 == pytest.approx(dn1**2 / (n1 * (n1 + 1)), rel=1e-9)


@pytest.mark.parametrize("s", [0.0, 0.5, 0.9])
def test_normal_mode_expression_matches_kronecker(generic_pair, s):
    state = build_image_state(generic_pair, s)
    dps = [0.5 * d[:2, :2] for d in covariance_derivatives(generic_pair, s)]
    np.testing.assert_allclose(normal_mode_qfi(state.pmatrix, dps), qfi_matrix(generic_pair, s).matrix, rtol=1e-10, atol=1e-15)
