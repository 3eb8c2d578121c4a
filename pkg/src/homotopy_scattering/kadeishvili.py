"""Random finite complexes for testing the transfer series independently of the model.

A cochain complex ``C^0 -> C^1 -> ... `` with a Hodge decomposition is
drawn at random; ``h = -Q0^+`` is the contracting homotopy onto the
harmonic space, and a deformation ``Q = g Q0 g^-1`` keeps ``Q^2 = 0`` exactly.
Degree ``k`` elements have parity ``k mod 2``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .graded import EVEN, ODD, GhostPolyOperator, GradedSpace, compose, supercommutator
from .transfer import transfer_series


class SeriesDivergenceWarning(RuntimeWarning):
    pass


class DegenerateComplexError(RuntimeError):
    pass


@dataclass(frozen=True)
class RandomComplexSpec:
    dims: tuple[int, ...] = (5, 7, 6, 4)
    seed: int = 0
    epsilon: float = 1e-2
    series_order: int = 8

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 1:
            raise ValueError(f"dims must be a nonempty list of positive sizes, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.epsilon < 0 or self.series_order < 1:
            raise ValueError("epsilon must be >= 0 and series_order >= 1")


@dataclass
class RandomComplex:
    spec: RandomComplexSpec
    space: GradedSpace
    sub: GradedSpace
    Q0: GhostPolyOperator
    h: GhostPolyOperator
    inclusion: np.ndarray        # i; pi is its adjoint
    degree: np.ndarray           # degree of each basis vector of ``space``

    @property
    def projection(self) -> np.ndarray:
        return self.inclusion.conj().T


def _unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _block(rng, m):
    """Random m x m map with singular values in [0.5, 2]."""
    u, v = _unitary(rng, m), _unitary(rng, m)
    return u @ np.diag(rng.uniform(0.5, 2.0, size=m)) @ v


def build_random_complex(spec: RandomComplexSpec, *, max_retries: int = 10) -> RandomComplex:
    """Random complex with ``Q0^2 = 0`` and ``1 + {h, Q0} = i pi``."""
    for attempt in range(max_retries):
        rng = np.random.default_rng([spec.seed, attempt])
        try:
            return _draw(spec, rng)
        except DegenerateComplexError:
            continue
    raise DegenerateComplexError(f"no usable draw for seed {spec.seed} after {max_retries} tries")


def _draw(spec: RandomComplexSpec, rng) -> RandomComplex:
    dims = spec.dims
    K = len(dims)
    ranks = []
    prev = 0
    for k in range(K - 1):
        top = min(dims[k] - prev - 1, dims[k + 1] - 1)
        r = int(rng.integers(1, top + 1)) if top >= 1 else 0
        ranks.append(r)
        prev = r
    ranks.append(0)
    offsets = np.concatenate([[0], np.cumsum(dims)])
    n = int(offsets[-1])
    Q = np.zeros((n, n), dtype=complex)
    bases = [_unitary(rng, d) for d in dims]
    harmonic_cols = []
    r_in = 0
    for k in range(K):
        U = bases[k]
        # columns: [image of d_{k-1} | harmonic | coimage of d_k]
        h_k = dims[k] - r_in - ranks[k]
        if h_k < 0:
            raise DegenerateComplexError("ranks exceed dimension")
        harm = U[:, r_in:r_in + h_k]
        full = np.zeros((n, h_k), dtype=complex)
        full[offsets[k]:offsets[k + 1]] = harm
        harmonic_cols.append(full)
        if ranks[k]:
            coim = U[:, r_in + h_k:]
            img = bases[k + 1][:, :ranks[k]]
            Q[offsets[k + 1]:offsets[k + 2], offsets[k]:offsets[k + 1]] = \
                img @ _block(rng, ranks[k]) @ coim.conj().T
        r_in = ranks[k]
    inc = np.concatenate(harmonic_cols, axis=1)
    degree = np.repeat(np.arange(K), dims)
    parities = tuple(int(d % 2) for d in degree)
    space = GradedSpace([("complex", parities)])
    sub_par = tuple(int(d % 2) for d in (degree @ np.abs(inc) ** 2).round().astype(int))
    if not sub_par:
        raise DegenerateComplexError("harmonic space is empty")
    sub = GradedSpace([("complex", sub_par)])
    h = -np.linalg.pinv(Q, rcond=1e-10)
    h[degree[:, None] != degree[None, :] - 1] = 0.0   # drop rounding noise outside degree -1
    if np.linalg.matrix_rank(Q, tol=1e-8) != sum(ranks):
        raise DegenerateComplexError("rank deficient draw")
    return RandomComplex(spec, space, sub, GhostPolyOperator(space, Q, ODD),
                         GhostPolyOperator(space, h, ODD), inc, degree)


def perturb_by_conjugation(cx: RandomComplex, epsilon: float, seed: int) -> GhostPolyOperator:
    """``Q1 = g Q0 g^-1 - Q0`` with ``g = exp(epsilon M)``, M random and degree preserving."""
    rng = np.random.default_rng([seed, 7919])
    n = cx.space.total_dim
    M = np.zeros((n, n), dtype=complex)
    for k in np.unique(cx.degree):
        sel = np.flatnonzero(cx.degree == k)
        m = len(sel)
        M[np.ix_(sel, sel)] = (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))) / np.sqrt(m)
    g = expm(epsilon * M)
    ginv = expm(-epsilon * M)
    Q0 = cx.Q0.coeffs[0]
    return GhostPolyOperator(cx.space, g @ Q0 @ ginv - Q0, ODD)


@dataclass(frozen=True)
class TransferCheck:
    residual: float
    hq1_norm: float
    terms: int


def homotopy_residuals(cx: RandomComplex) -> dict[str, float]:
    """``|Q0^2|``, ``|1 + {h, Q0} - i pi|``, ``|pi i - 1|`` and ``|pi Q0 i|``."""
    Q0 = cx.Q0
    ident = GhostPolyOperator.identity(cx.space)
    ipi = GhostPolyOperator(cx.space, cx.inclusion @ cx.projection, EVEN)
    return {
        "Q0^2": compose(Q0, Q0).norm(),
        "1+{h,Q0}-i pi": (ident + supercommutator(cx.h, Q0) - ipi).norm(),
        "pi i - 1": float(np.abs(cx.projection @ cx.inclusion - np.eye(cx.sub.total_dim)).max()),
        "pi Q0 i": float(np.abs(cx.projection @ Q0.coeffs[0] @ cx.inclusion).max()),
    }


def verify_transfer(cx: RandomComplex, Q1: GhostPolyOperator, series_order: int) -> TransferCheck:
    """Max |entry| of ``Q_ind^2`` for the transfer series truncated at ``series_order``."""
    hq1 = float(np.linalg.norm(cx.h.coeffs[0] @ Q1.coeffs[0], 2))
    if hq1 >= 1:
        warnings.warn(f"|h Q1| = {hq1:.3g} >= 1: transfer series may diverge",
                      SeriesDivergenceWarning, stacklevel=2)
    terms = transfer_series(cx.Q0, Q1, cx.h, cx.inclusion, cx.sub, series_order, dmax=0)
    total = terms[0]
    for T in terms[1:]:
        total = total + T
    return TransferCheck(compose(total, total, dmax=0).norm(), hq1, len(terms))
