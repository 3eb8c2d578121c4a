import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homotopy_scattering.line import (
    LineParams, born_series_single_delta, closed_form_SL_R, closed_form_SR_R, closed_form_Vind_R,
    compare_line_vs_limit, convergence_radius, heitler_check, k_matrix_single_delta, line_taylor,
    mapped_limit, t_from_k, t_matrix_single_delta, taylor_coefficients,
)
from homotopy_scattering.model import pauli_decompose
from homotopy_scattering.series import RadiusSweepPlan, fit_series, r_to_infinity
from oracles import single_delta_T_K


def test_single_delta_example():
    # reference closed form: T = lam / (1 - lam / 2 i kappa), K = lam
    p = LineParams(lam=1.0, kappa=1.0)
    assert t_matrix_single_delta(p) == pytest.approx(0.8 - 0.4j, abs=1e-15)
    assert k_matrix_single_delta(p) == 1.0


@pytest.mark.parametrize("lam,kappa", [(1.0, 1.0), (0.3, 2.0), (-0.7, 0.5), (2.5, 1.7)])
def test_single_delta_against_quadrature(lam, kappa):
    T, K = single_delta_T_K(lam, kappa)
    p = LineParams(lam, kappa)
    assert t_matrix_single_delta(p) == pytest.approx(T, rel=1e-10)
    assert k_matrix_single_delta(p) == pytest.approx(K, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), st.floats(0.05, 10))
def test_unitarity_and_heitler(lam, kappa):
    p = LineParams(lam, kappa)
    T = t_matrix_single_delta(p)
    assert (1 / T).imag == pytest.approx(1 / (2 * kappa), rel=1e-12)
    assert heitler_check(T, k_matrix_single_delta(p), kappa) < 1e-14 * max(1.0, abs(lam))


def test_born_series_converges_inside_radius():
    p = LineParams(lam=0.9, kappa=1.0)
    T = t_matrix_single_delta(p)
    errs = [abs(born_series_single_delta(p, n) - T) for n in (5, 10, 20, 80)]
    assert errs == sorted(errs, reverse=True) and errs[-1] < 1e-13


def test_matrix_heitler_round_trip():
    rng = np.random.default_rng(11)
    A = rng.normal(size=(3, 3))
    K = A + A.T
    T = t_from_k(K, 1.3)
    assert heitler_check(T, K, 1.3) < 1e-14


def test_closed_form_structure():
    p = LineParams(0.4, 1.2, 0.8)
    np.testing.assert_allclose(closed_form_SR_R(p), closed_form_SL_R(p).conj().T, atol=1e-16)
    V = closed_form_Vind_R(p)
    np.testing.assert_allclose(V, V.conj().T, atol=1e-16)
    np.testing.assert_allclose(closed_form_Vind_R(LineParams(0.0, 1.2, 0.8)), 0)


def test_vind_parity_in_lambda():
    for k, c in enumerate(line_taylor("v_ind", 1.1, 0.9, 4)):
        pc = pauli_decompose(c)
        if k % 2:
            assert np.abs(pc[[0, 1, 3]]).max() < 1e-13
        else:
            assert np.abs(pc[[2, 3]]).max() < 1e-13


def test_transparent_at_quarter_wave():
    # sin 2 a kappa = 0: V_ind vanishes and no convention can be read off
    p = LineParams(0.5, np.pi / 2, 1.0)
    np.testing.assert_allclose(closed_form_Vind_R(p), 0, atol=1e-15)
    assert convergence_radius(p.kappa, p.a) > 1e15


def test_taylor_coefficients_of_known_function():
    f = lambda z: np.array([[1 / (1 - z), np.exp(z)], [0.0, z ** 3]])
    c = taylor_coefficients(f, 4, 0.5)
    np.testing.assert_allclose([x[0, 0] for x in c], 1, atol=1e-14)
    np.testing.assert_allclose([x[0, 1] for x in c], [1, 1, 1 / 2, 1 / 6, 1 / 24], atol=1e-14)
    np.testing.assert_allclose([x[1, 1] for x in c], [0, 0, 0, 1, 0], atol=1e-14)


def test_circle_limit_matches_line():
    fits = fit_series(RadiusSweepPlan(kappa=1.3, a=0.7, lam=0.5), 3)
    lim = {c: r_to_infinity(c, 3, fits) for c in ("v_ind", "s_L", "s_R")}
    cmp = compare_line_vs_limit(lim, LineParams(0.5, 1.3, 0.7))
    assert cmp.epsilon == -1
    assert cmp.epsilon_quality < 1e-6
    assert cmp.worst() < 1e-6
    with pytest.raises(KeyError):
        mapped_limit("s_LR", 1, lim["v_ind"][1], -1)
