import numpy as np
import pytest

from homotopy_scattering.line import psi_block
from homotopy_scattering.modesums import partial_sums, shell_terms
from homotopy_scattering.series import (
    DivergentLimitError, IllConditionedFit, REFERENCE_TERMS, RadiusSweepPlan, SeriesCoefficient,
    appendix_oracle, evaluate_radius, extrapolate_cutoff, fit_series, fitted_lookup, graded_relations,
    oracle_lookup, r_to_infinity, radius_sweep, relative_difference, sweep_components, tail_exponent,
    window_weights,
)
from homotopy_scattering.transfer import check_relations, full_square_residual

PLAN = RadiusSweepPlan(kappa=1.0, a=1.0, lam=0.3)


@pytest.fixture(scope="module")
def evaluations():
    return sweep_components(PLAN, 3)


@pytest.fixture(scope="module")
def fits(evaluations):
    return {a: radius_sweep(PLAN, a, evaluations=evaluations) for a in (1, 2, 3)}


def test_constant_evaluator_is_a_fixed_point():
    const = lambda N: np.full((N + 1, 3), 2.5)
    ex = extrapolate_cutoff(const, (100, 200, 400))
    np.testing.assert_allclose(ex.value, 2.5, rtol=1e-14)
    assert ex.error < 1e-13


def test_power_tails_are_removed():
    # v(N) = 1 + 3/N + 5/N^3 is removed exactly by exponents (1, 3)
    f = lambda N: np.array([1 + 3 / max(n, 1) + 5 / max(n, 1) ** 3 for n in range(N + 1)])
    ex = extrapolate_cutoff(f, (50, 100, 200), window=None)
    assert ex.value == pytest.approx(1.0, abs=1e-12)


def test_schedule_validation():
    f = lambda N: np.zeros(N + 1)
    with pytest.raises(ValueError):
        extrapolate_cutoff(f, (100, 200))
    with pytest.raises(ValueError):
        extrapolate_cutoff(f, (100, 200, 500))
    with pytest.raises(ValueError):
        window_weights(10, "triangle")


def test_tail_exponent_of_hard_sums():
    hist = partial_sums(shell_terms(4, 1.0, 1.0, 8000), trapezoid=False)
    q = tail_exponent([hist[N] for N in (1000, 2000, 4000, 8000)], (1000, 2000, 4000, 8000))
    assert 0.9 <= q <= 2.1


def test_fixed_radius_second_order_matches_closed_form(evaluations):
    # reference closed form: V^(2,1)/R + V^(2,2)/R^2 at R = 4
    ev = evaluations[0]
    p = PLAN.params(ev.n0)
    expect = appendix_oracle(2, 1, "v_ind", p, ev.R) + appendix_oracle(2, 2, "v_ind", p, ev.R)
    assert relative_difference(ev.components.get("v_ind", 2), expect) < 1e-6


def test_extrapolated_components_satisfy_relations(evaluations):
    for ev in evaluations:
        for r in check_relations(ev.components, 3) + full_square_residual(ev.components, 3):
            assert r.relative < 1e-8, (ev.n0, r)


def test_fit_against_reference_terms(fits):
    # every reference term except the two with the misplaced first bracket
    for comp, a, b in REFERENCE_TERMS:
        fitted = fits[a].get(comp, b).value
        literal = relative_difference(fitted, appendix_oracle(a, b, comp, PLAN))
        corrected = relative_difference(fitted, appendix_oracle(a, b, comp, PLAN, corrected=True))
        assert corrected < 1e-6, (comp, a, b)
        if (a, b) == (2, 2) and comp != "v_ind":
            assert literal > 1.0
        else:
            assert literal < 1e-6


def test_degree_bound(fits):
    for a, fit in fits.items():
        for comp in ("v_ind", "s_L", "s_R"):
            assert fit.spurious_relative(comp) < 1e-6, (a, comp)


def test_graded_relations(fits):
    for r in graded_relations(fitted_lookup(fits), PLAN, 3):
        assert r.relative < 1e-8, r
    for r in graded_relations(oracle_lookup(PLAN, corrected=True), PLAN, 3):
        assert r.relative < 1e-12, r


def test_fit_is_stable_under_a_different_radius_set(fits):
    other = RadiusSweepPlan(kappa=1.0, a=1.0, lam=0.3, n0_values=(5, 6, 7, 9, 11, 14))
    fits2 = fit_series(other, 3)
    for a in (1, 2, 3):
        for c in fits[a].coefficients:
            if c.component == "s_LR":
                continue
            d = relative_difference(c.value, fits2[a].get(c.component, c.beta).value)
            assert d < 1e-7, (a, c.component, c.beta, d)


def test_error_estimates_are_reported(fits):
    for c in fits[3].coefficients:
        assert c.error_estimate >= 0
    assert fits[3].condition < 1e4


def test_sweep_input_checks():
    with pytest.raises(ValueError):
        radius_sweep(RadiusSweepPlan(1.0, 1.0, 0.3, n0_values=(4, 5, 6)), 3)
    with pytest.raises(ValueError):
        RadiusSweepPlan(1.0, 1.0, 0.3, n0_values=(4, 4, 5))
    with pytest.raises(ValueError):
        SeriesCoefficient(2, 3, "v_ind", np.zeros((4, 4)), 0.0)
    near = RadiusSweepPlan(1.0, 1.0, 0.3, n0_values=(400, 401, 402, 403, 404), cutoffs=(2000, 4000, 8000))
    with pytest.raises(IllConditionedFit):
        radius_sweep(near, 3, cond_limit=1e6)


def test_limit_of_s0_is_refused(fits):
    with pytest.raises(DivergentLimitError):
        r_to_infinity("s0", 3, fits)
    lim = r_to_infinity("s_L", 2, fits)
    np.testing.assert_allclose(psi_block(lim[1]), 2 * np.pi * 0.3 / np.pi * np.array(
        [[1, np.sin(2) / 2], [np.sin(2) / 2, 1]]), rtol=1e-10)


def test_single_radius_evaluation_reports_errors():
    ev = evaluate_radius(PLAN, 6, 2)
    assert set(ev.errors) >= {("v_ind", 1), ("s_L", 2)}
    assert max(ev.errors.values()) < 1e-8
