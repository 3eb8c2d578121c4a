import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homotopy_scattering.graded import (
    EVEN, ODD, GHOST, GhostPolyOperator, GhostStructureError, GradedSpace, GradingError,
    assemble_ghost, compose, embed, extract_ghost_component, ghost_monomials, ghost_operator,
    supercommutator,
)

SPACE = GradedSpace([("a", (EVEN, ODD, EVEN)), ("b", (EVEN, ODD)), ("ghost_c", (EVEN, ODD))])


def random_homogeneous(space, parity, seed, degree=1):
    rng = np.random.default_rng(seed)
    n = space.total_dim
    par = space.parity
    mask = (par[:, None] + par[None, :]) % 2 == parity
    coeffs = (rng.normal(size=(degree + 1, n, n)) + 1j * rng.normal(size=(degree + 1, n, n))) * mask
    return GhostPolyOperator(space, coeffs, parity)


def odd_on(factor, seed):
    rng = np.random.default_rng(seed)
    fac = SPACE.factor(factor)
    par = np.array(fac.parities)
    m = rng.normal(size=(fac.dim, fac.dim)) * ((par[:, None] + par[None, :]) % 2 == 1)
    return embed(factor, m, ODD, SPACE)


def test_odd_operators_on_distinct_factors_anticommute():
    A, B = odd_on("a", 1), odd_on("b", 2)
    assert compose(A, B).norm() > 0.1
    assert (compose(A, B) + compose(B, A)).norm() < 1e-14


def test_ghost_algebra():
    c = ghost_operator("c", SPACE)
    dc = ghost_operator("dc", SPACE)
    assert compose(c, c).norm() == 0
    assert compose(dc, dc).norm() == 0
    ident = GhostPolyOperator.identity(SPACE)
    assert (supercommutator(dc, c) - ident).norm() == 0
    np.testing.assert_array_equal(GHOST.mul_c @ GHOST.del_c + GHOST.del_c @ GHOST.mul_c, np.eye(2))


def test_ctilde_is_a_polynomial_degree():
    ident = GhostPolyOperator.identity(SPACE)
    ct = ident.times_ctilde()
    sq = compose(ct, ct)
    assert sq.degree == 2
    np.testing.assert_array_equal(sq.coeff(2), np.eye(SPACE.total_dim))
    assert compose(ct.times_ctilde(2), ct.times_ctilde(2), dmax=3).norm() == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([EVEN, ODD]), st.sampled_from([EVEN, ODD]),
       st.sampled_from([EVEN, ODD]))
def test_super_jacobi(seed, pa, pb, pc):
    A = random_homogeneous(SPACE, pa, seed)
    B = random_homogeneous(SPACE, pb, seed + 1)
    C = random_homogeneous(SPACE, pc, seed + 2)
    sc = lambda X, Y: supercommutator(X, Y, dmax=4)
    lhs = sc(A, sc(B, C))
    rhs = sc(sc(A, B), C) + sc(B, sc(A, C)) * (-1) ** (pa * pb)
    assert (lhs - rhs).norm() < 1e-10 * max(1.0, lhs.norm())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_composition_is_associative(seed):
    A, B, C = (random_homogeneous(SPACE, p, seed + j) for j, p in enumerate((ODD, EVEN, ODD)))
    left = compose(compose(A, B), C)
    right = compose(A, compose(B, C))
    assert (left - right).norm() < 1e-11 * left.norm()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([EVEN, ODD]))
def test_ghost_split_round_trip(seed, parity):
    A = random_homogeneous(SPACE, parity, seed, degree=2)
    mons = ghost_monomials(A)
    B = assemble_ghost(mons, SPACE, parity)
    assert (A - B.truncate(A.degree)).norm() < 1e-12


def test_extract_identity_requires_equal_diagonal_blocks():
    X = np.diag([1.0, 2, 3, 4, 5, 6]).astype(complex)
    A = assemble_ghost({("c_dc", 0): X, ("dc_c", 0): 2 * X}, SPACE, EVEN)
    with pytest.raises(GhostStructureError):
        extract_ghost_component(A, "1", 0)
    np.testing.assert_allclose(extract_ghost_component(A, "c_dc", 0), X)
    np.testing.assert_allclose(extract_ghost_component(A, "∂_c c", 0), 2 * X)


def test_parity_is_enforced():
    n = SPACE.total_dim
    with pytest.raises(GradingError):
        GhostPolyOperator(SPACE, np.ones((1, n, n)), EVEN)
    A = GhostPolyOperator.identity(SPACE)
    with pytest.raises(ValueError):
        A.coeffs[0, 0, 0] = 2.0
