"""One check per acceptance criterion, at the stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary.
Criterion 3 fails for the two reference (2,2) spin-flip terms; the test
asserts exactly that failure pattern and passes only if nothing else
deviates (see the decisions ledger).
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from homotopy_scattering.kadeishvili import (
    RandomComplexSpec, build_random_complex, homotopy_residuals, perturb_by_conjugation, verify_transfer,
)
from homotopy_scattering.line import (
    LineParams, compare_line_vs_limit, heitler_check, k_matrix_single_delta, t_matrix_single_delta,
)
from homotopy_scattering.model import ModelParams, truncation_residual
from homotopy_scattering.series import (
    REFERENCE_TERMS, RadiusSweepPlan, appendix_oracle, fitted_lookup, graded_relations, r_to_infinity,
    radius_sweep, relative_difference, sweep_components,
)
from homotopy_scattering.transfer import full_square_residual, induced_differential

REFERENCE = RadiusSweepPlan(kappa=1.0, a=1.0, lam=0.3, n0_values=(4, 5, 6, 8, 12),
                            cutoffs=(2000, 4000, 8000))


def record(num, passed, detail):
    ACCEPTANCE.append((num, bool(passed), detail))


@pytest.fixture(scope="module")
def reference_run():
    t0 = time.perf_counter()
    evals = sweep_components(REFERENCE, 3)
    fits = {a: radius_sweep(REFERENCE, a, evaluations=evals) for a in (1, 2, 3)}
    return evals, fits, time.perf_counter() - t0


def test_criterion_1_single_delta():
    p = LineParams(lam=1.0, kappa=1.0)
    example = abs(t_matrix_single_delta(p) - 1.0 / (1 - 1.0 / 2j)) < 1e-15 and k_matrix_single_delta(p) == 1.0
    worst = 0.0
    for lam in np.linspace(-2.0, 3.0, 5):
        for kappa in (0.3, 0.9, 1.7, 4.0):
            q = LineParams(float(lam), kappa)
            worst = max(worst, heitler_check(t_matrix_single_delta(q), k_matrix_single_delta(q), kappa))
    ok = example and worst < 1e-14
    record(1, ok, f"example exact={example}, worst Heitler residual {worst:.2e} over 20 pairs (tol 1e-14)")
    assert ok


def test_criterion_2_first_order():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        kappa = rng.uniform(0.5, 2.0)
        n0 = int(rng.integers(2, 12))
        a = rng.uniform(0.1, 0.9) * np.pi * n0 / kappa
        p = ModelParams(float(rng.uniform(-1, 1)), float(a), float(kappa), n0, n0 + 15)
        V1 = induced_differential(p, 1).components.get("v_ind", 1)
        worst = max(worst, float(np.abs(V1 - appendix_oracle(1, 1, "v_ind", p, p.R)).max()))
    record(2, worst < 1e-12, f"max |V_ind^(1) - V^(1,1)/R| = {worst:.2e} over 10 configurations (tol 1e-12)")
    assert worst < 1e-12


def test_criterion_3_oracle_suite(reference_run):
    _, fits, elapsed = reference_run
    literal, corrected = {}, {}
    for comp, a, b in REFERENCE_TERMS:
        fitted = fits[a].get(comp, b).value
        literal[(comp, a, b)] = relative_difference(fitted, appendix_oracle(a, b, comp, REFERENCE))
        corrected[(comp, a, b)] = relative_difference(
            fitted, appendix_oracle(a, b, comp, REFERENCE, corrected=True))
    failing = {k for k, d in literal.items() if d >= 1e-6}
    worst_ok = max(d for k, d in literal.items() if k not in failing)
    names = ", ".join(f"{c}({a},{b}) rel={literal[(c, a, b)]:.2f}" for c, a, b in sorted(failing))
    passed = not failing and elapsed < 120
    record(3, passed, f"{len(literal) - len(failing)}/{len(literal)} reference terms within 1e-6 "
                      f"(worst {worst_ok:.1e}); mismatched: {names or 'none'}; "
                      f"corrected forms worst {max(corrected.values()):.1e}; {elapsed:.2f}s")
    # the honest outcome: only the two reference (2,2) spin-flip terms disagree
    assert failing == {("s_L", 2, 2), ("s_R", 2, 2)}
    assert max(corrected.values()) < 1e-6 and elapsed < 120


def test_criterion_4_quadratic_relations(reference_run):
    evals, fits, _ = reference_run
    graded = max(r.relative for r in graded_relations(fitted_lookup(fits), REFERENCE, 3))
    square = max(r.relative for ev in evals for r in full_square_residual(ev.components, 3))
    ok = graded < 1e-8 and square < 1e-8
    record(4, ok, f"(alpha,beta) relations worst {graded:.1e}; Q_ind^2 through lambda^3 worst {square:.1e}")
    assert ok


def test_criterion_5_degree_bound(reference_run):
    _, fits, _ = reference_run
    worst = max(fit.spurious_relative(c) for fit in fits.values() for c in ("v_ind", "s_L", "s_R"))
    record(5, worst < 1e-6, f"worst spurious beta=alpha+1 coefficient {worst:.1e} relative (tol 1e-6)")
    assert worst < 1e-6


def test_criterion_6_line_limit():
    sets = [(1.0, 1.0, 0.3), (1.3, 0.7, 0.5), (0.8, 1.9, 0.2), (1.0, 0.4, 1.0), (2.0, 1.1, 0.4)]
    eps, worst = set(), 0.0
    for kappa, a, lam in sets:
        plan = RadiusSweepPlan(kappa=kappa, a=a, lam=lam)
        evals = sweep_components(plan, 3)
        fits = {k: radius_sweep(plan, k, evaluations=evals) for k in (1, 2, 3)}
        lim = {c: r_to_infinity(c, 3, fits) for c in ("v_ind", "s_L", "s_R")}
        cmp = compare_line_vs_limit(lim, LineParams(lam, kappa, a))
        eps.add(cmp.epsilon)
        worst = max(worst, cmp.worst(), cmp.epsilon_quality)
    ok = len(eps) == 1 and worst < 1e-6
    record(6, ok, f"convention epsilon={sorted(eps)} over 5 sets; worst relative mismatch {worst:.1e}")
    assert ok


def test_criterion_7_kadeishvili():
    rng = np.random.default_rng(7)
    worst_sq = worst_h = 0.0
    for j in range(100):
        dims = tuple(int(d) for d in rng.integers(4, 9, size=int(rng.integers(3, 6))))
        cx = build_random_complex(RandomComplexSpec(dims, seed=j, epsilon=1e-2))
        hr = homotopy_residuals(cx)
        worst_h = max(worst_h, hr["Q0^2"], hr["1+{h,Q0}-i pi"])
        worst_sq = max(worst_sq, verify_transfer(cx, perturb_by_conjugation(cx, 1e-2, j), 8).residual)
    ok = worst_sq < 1e-9 and worst_h < 1e-12
    record(7, ok, f"100 complexes: worst |Q_ind^2| {worst_sq:.1e} (tol 1e-9), "
                  f"worst homotopy residual {worst_h:.1e} (tol 1e-12)")
    assert ok


def test_criterion_8_truncation():
    p = ModelParams(0.3, 1.0, 1.0, 4, 25)
    res = [truncation_residual(p.with_(cutoff_N=N)) for N in (25, 50, 100, 200)]
    ratios = [res[i] / res[i + 1] for i in range(3)]
    ok = min(ratios) >= 1.8
    record(8, ok, "ratios per doubling " + ", ".join(f"{r:.3f}" for r in ratios) + " (need >= 1.8)")
    assert ok
