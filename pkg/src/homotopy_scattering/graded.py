"""Matrix representation of the ghost / operator superalgebra.

Every operator is a polynomial in the even ghost ``c~`` whose coefficients
are complex matrices on a :class:`GradedSpace`.  Odd factors are embedded
with a fermionic string (Koszul) twist, so supercommutation signs come out
of ordinary matrix products.

The global factor order used by the model is ``(mode, internal, ghost_c)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

EVEN = 0
ODD = 1

#: degree of ``c~`` kept by default; enough for the c~^3 term of Q_ind^2
DEFAULT_CTILDE_MAX = 3


class GradingError(ValueError):
    """Raised for parity or space mismatches."""


class GhostStructureError(ValueError):
    """Raised when a ghost component is requested that is not well defined."""


@dataclass(frozen=True)
class Factor:
    name: str
    parities: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.parities)


class GradedSpace:
    """Ordered tensor product of graded factors.

    Basis vectors are ordered row-major: the first factor is the slowest
    index, matching ``np.kron(first, second, ...)``.
    """

    def __init__(self, factors: Iterable[tuple[str, Sequence[int]]]):
        fs = []
        for name, parities in factors:
            par = tuple(int(p) % 2 for p in parities)
            if not par:
                raise GradingError(f"factor {name!r} has dimension 0")
            fs.append(Factor(str(name), par))
        names = [f.name for f in fs]
        if len(set(names)) != len(names):
            raise GradingError(f"duplicate factor names in {names}")
        self.factors: tuple[Factor, ...] = tuple(fs)
        self.total_dim = int(np.prod([f.dim for f in fs])) if fs else 1
        par = np.zeros(1, dtype=np.int8)
        for f in fs:
            par = (par[:, None] + np.asarray(f.parities, dtype=np.int8)[None, :]).ravel() % 2
        self.parity = par
        self.parity.setflags(write=False)

    # --- lookup -----------------------------------------------------------
    def index(self, name: str) -> int:
        for j, f in enumerate(self.factors):
            if f.name == name:
                return j
        raise GradingError(f"space has no factor named {name!r}")

    def factor(self, name: str) -> Factor:
        return self.factors[self.index(name)]

    def has_factor(self, name: str) -> bool:
        return any(f.name == name for f in self.factors)

    def parity_operator(self) -> np.ndarray:
        """Diagonal (-1)^|v| over the whole space."""
        return np.diag(1.0 - 2.0 * self.parity)

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedSpace) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        inner = ", ".join(f"{f.name}[{f.dim}]" for f in self.factors)
        return f"GradedSpace({inner})"


def _is_homogeneous(mat: np.ndarray, parity_in: np.ndarray, parity_out: np.ndarray, p: int,
                    atol: float = 0.0) -> bool:
    mask = ((parity_out[:, None] - parity_in[None, :]) % 2) != p
    if not mask.any():
        return True
    return bool(np.all(np.abs(mat[mask]) <= atol))


class GhostPolyOperator:
    """Polynomial ``sum_d c~^d A_d`` of square matrices on a graded space.

    Instances are treated as immutable; arithmetic returns new objects and
    the coefficient array is write-protected.
    """

    __slots__ = ("space", "coeffs", "parity")

    def __init__(self, space: GradedSpace, coeffs, parity: int, *, check: bool = True):
        arr = np.array(coeffs, dtype=complex)
        if arr.ndim == 2:
            arr = arr[None]
        n = space.total_dim
        if arr.ndim != 3 or arr.shape[1:] != (n, n):
            raise GradingError(f"coefficients must have shape (D+1, {n}, {n}); got {arr.shape}")
        parity = int(parity) % 2
        if check:
            for d, mat in enumerate(arr):
                if not _is_homogeneous(mat, space.parity, space.parity, parity):
                    raise GradingError(f"c~^{d} coefficient is not of parity {parity}")
        arr.setflags(write=False)
        self.space = space
        self.coeffs = arr
        self.parity = parity

    # --- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, space: GradedSpace) -> "GhostPolyOperator":
        return cls(space, np.eye(space.total_dim), EVEN, check=False)

    @classmethod
    def zero(cls, space: GradedSpace, parity: int = EVEN) -> "GhostPolyOperator":
        return cls(space, np.zeros((1, space.total_dim, space.total_dim)), parity, check=False)

    @property
    def degree(self) -> int:
        """Largest c~ degree stored (zero padding included)."""
        return self.coeffs.shape[0] - 1

    def coeff(self, d: int) -> np.ndarray:
        if 0 <= d < self.coeffs.shape[0]:
            return self.coeffs[d]
        return np.zeros((self.space.total_dim,) * 2, dtype=complex)

    def times_ctilde(self, k: int = 1) -> "GhostPolyOperator":
        """Multiply by ``c~^k`` (c~ is even and central)."""
        n = self.space.total_dim
        arr = np.concatenate([np.zeros((k, n, n), dtype=complex), self.coeffs])
        return GhostPolyOperator(self.space, arr, self.parity, check=False)

    def truncate(self, dmax: int) -> "GhostPolyOperator":
        return GhostPolyOperator(self.space, self.coeffs[: dmax + 1], self.parity, check=False)

    def norm(self) -> float:
        """Largest absolute entry over all c~ degrees."""
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def __add__(self, other: "GhostPolyOperator") -> "GhostPolyOperator":
        _check_same(self, other)
        if self.parity != other.parity and self.norm() and other.norm():
            raise GradingError("sum of operators with different parity is not homogeneous")
        parity = self.parity if self.norm() else other.parity
        D = max(self.degree, other.degree)
        n = self.space.total_dim
        arr = np.zeros((D + 1, n, n), dtype=complex)
        arr[: self.degree + 1] += self.coeffs
        arr[: other.degree + 1] += other.coeffs
        return GhostPolyOperator(self.space, arr, parity, check=False)

    def __neg__(self) -> "GhostPolyOperator":
        return GhostPolyOperator(self.space, -self.coeffs, self.parity, check=False)

    def __sub__(self, other: "GhostPolyOperator") -> "GhostPolyOperator":
        return self + (-other)

    def __mul__(self, scalar) -> "GhostPolyOperator":
        return GhostPolyOperator(self.space, self.coeffs * complex(scalar), self.parity, check=False)

    __rmul__ = __mul__

    def __matmul__(self, other: "GhostPolyOperator") -> "GhostPolyOperator":
        return compose(self, other)

    def __repr__(self) -> str:
        return (f"GhostPolyOperator({self.space!r}, degree={self.degree}, "
                f"parity={'odd' if self.parity else 'even'})")


def _check_same(A: GhostPolyOperator, B: GhostPolyOperator) -> None:
    if A.space != B.space:
        raise GradingError(f"space mismatch: {A.space!r} vs {B.space!r}")


def poly_matmul(a: np.ndarray, b: np.ndarray, dmax: int | None = None) -> np.ndarray:
    """Cauchy product of matrix polynomials stored as ``(D+1, n, k)`` arrays."""
    da, db = a.shape[0] - 1, b.shape[0] - 1
    D = da + db if dmax is None else min(da + db, dmax)
    out = np.zeros((D + 1, a.shape[1], b.shape[2]), dtype=np.result_type(a, b))
    for i in range(min(da, D) + 1):
        if not a[i].any():
            continue
        for j in range(min(db, D - i) + 1):
            out[i + j] += a[i] @ b[j]
    return out


def compose(A: GhostPolyOperator, B: GhostPolyOperator, dmax: int | None = None) -> GhostPolyOperator:
    """Operator product ``A B``; c~ degrees add, parities add mod 2.

    ``dmax`` truncates the result; by default the larger of the input
    degrees (at least :data:`DEFAULT_CTILDE_MAX`) is kept.
    """
    _check_same(A, B)
    if dmax is None:
        dmax = max(A.degree, B.degree, DEFAULT_CTILDE_MAX)
    arr = poly_matmul(A.coeffs, B.coeffs, dmax)
    return GhostPolyOperator(A.space, arr, (A.parity + B.parity) % 2, check=False)


def supercommutator(A: GhostPolyOperator, B: GhostPolyOperator, dmax: int | None = None) -> GhostPolyOperator:
    """Graded bracket ``A B - (-1)^{|A||B|} B A``."""
    _check_same(A, B)
    for X in (A, B):
        for mat in X.coeffs:
            if not _is_homogeneous(mat, X.space.parity, X.space.parity, X.parity, atol=0.0):
                raise GradingError("supercommutator needs parity-homogeneous operators")
    if A.parity and B.parity:
        return compose(A, B, dmax) + compose(B, A, dmax)
    return compose(A, B, dmax) - compose(B, A, dmax)


# --- ghost c sector ---------------------------------------------------------

@dataclass(frozen=True)
class GhostCBasis:
    """Matrix units on span{1, c}; index 0 is ``1`` (even), index 1 is ``c`` (odd)."""

    mul_c: np.ndarray = field(default_factory=lambda: np.array([[0, 0], [1, 0]], dtype=complex))
    del_c: np.ndarray = field(default_factory=lambda: np.array([[0, 1], [0, 0]], dtype=complex))
    c_delc: np.ndarray = field(default_factory=lambda: np.array([[0, 0], [0, 1]], dtype=complex))
    delc_c: np.ndarray = field(default_factory=lambda: np.array([[1, 0], [0, 0]], dtype=complex))


GHOST = GhostCBasis()
GHOST_PARITIES = (EVEN, ODD)

#: ghost monomials and the (out, in) block of span{1, c} they occupy
_GHOST_BLOCKS = {"c": (1, 0), "dc": (0, 1), "c_dc": (1, 1), "dc_c": (0, 0)}
_GHOST_ALIASES = {
    "1": "1", "c": "c", "dc": "dc", "∂_c": "dc", "c_dc": "c_dc", "c∂_c": "c_dc",
    "dc_c": "dc_c", "∂_c c": "dc_c",
}
_ODD_GHOST = {"c", "dc"}


def embed(factor_name: str, local_op, local_parity: int, space: GradedSpace) -> GhostPolyOperator:
    """Act with ``local_op`` on one factor and identity elsewhere.

    Odd operators pick up the parity operator of every factor ordered
    before the named one, so odd operators on distinct factors anticommute.
    """
    j = space.index(factor_name)
    fac = space.factors[j]
    op = np.asarray(local_op, dtype=complex)
    if op.shape != (fac.dim, fac.dim):
        raise GradingError(f"operator shape {op.shape} does not match factor "
                           f"{factor_name!r} of dimension {fac.dim}")
    local_parity = int(local_parity) % 2
    par = np.asarray(fac.parities)
    if not _is_homogeneous(op, par, par, local_parity):
        raise GradingError(f"local operator is not of parity {local_parity} on {factor_name!r}")
    mats = []
    for k, f in enumerate(space.factors):
        if k == j:
            mats.append(op)
        elif k < j and local_parity == ODD:
            mats.append(np.diag(1.0 - 2.0 * np.asarray(f.parities, dtype=float)))
        else:
            mats.append(np.eye(f.dim))
    full = reduce(np.kron, mats)
    return GhostPolyOperator(space, full, local_parity, check=False)


def embed_block(factor_names: Sequence[str], local_op, local_parity: int,
                space: GradedSpace) -> GhostPolyOperator:
    """Embed an operator acting jointly on several consecutive factors.

    The factors must be contiguous and in space order; the Koszul twist is
    applied for the factors before the first one.
    """
    idx = [space.index(n) for n in factor_names]
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise GradingError("embed_block needs contiguous factors in space order")
    sub = GradedSpace((space.factors[k].name, space.factors[k].parities) for k in idx)
    op = np.asarray(local_op, dtype=complex)
    if op.shape != (sub.total_dim, sub.total_dim):
        raise GradingError(f"operator shape {op.shape} does not match block dimension {sub.total_dim}")
    local_parity = int(local_parity) % 2
    if not _is_homogeneous(op, sub.parity, sub.parity, local_parity):
        raise GradingError(f"block operator is not of parity {local_parity}")
    mats = []
    for k, f in enumerate(space.factors):
        if k == idx[0]:
            mats.append(op)
        elif k in idx:
            continue
        elif k < idx[0] and local_parity == ODD:
            mats.append(np.diag(1.0 - 2.0 * np.asarray(f.parities, dtype=float)))
        else:
            mats.append(np.eye(f.dim))
    return GhostPolyOperator(space, reduce(np.kron, mats), local_parity, check=False)


def _split_ghost(A: GhostPolyOperator, ghost: str) -> tuple[np.ndarray, np.ndarray]:
    """Return coefficient blocks ``B[d, g_out, g_in]`` and the twist matrix."""
    if not A.space.has_factor(ghost):
        raise GhostStructureError(f"space has no ghost factor {ghost!r}")
    if A.space.index(ghost) != len(A.space.factors) - 1:
        raise GhostStructureError("ghost factor must be the last factor")
    m = A.space.total_dim // 2
    blocks = A.coeffs.reshape(A.coeffs.shape[0], m, 2, m, 2).transpose(0, 2, 4, 1, 3)
    rest = GradedSpace((f.name, f.parities) for f in A.space.factors[:-1])
    return blocks, rest.parity_operator()


def extract_ghost_component(A: GhostPolyOperator, c_structure: str, ctilde_degree: int,
                            *, ghost: str = "ghost_c", atol: float = 1e-12) -> np.ndarray:
    """Coefficient matrix of ``c~^d * g`` for a ghost monomial ``g``.

    ``g`` is one of ``1, c, dc, c_dc, dc_c`` (aliases ``∂_c``, ``c∂_c``,
    ``∂_c c`` accepted).  Ghost monomials are written to the left of the
    coefficient, ``A = sum g X_g``.  ``1`` is only defined when both diagonal
    ghost blocks agree; otherwise ask for ``c_dc`` and ``dc_c`` separately.
    """
    try:
        key = _GHOST_ALIASES[c_structure]
    except KeyError:
        raise GhostStructureError(f"unknown ghost structure {c_structure!r}") from None
    blocks, twist = _split_ghost(A, ghost)
    if not 0 <= ctilde_degree < blocks.shape[0]:
        return np.zeros_like(blocks[0, 0, 0])
    b = blocks[ctilde_degree]
    if key == "1":
        diff = np.abs(b[0, 0] - b[1, 1]).max(initial=0.0)
        if diff > atol * max(1.0, np.abs(b).max(initial=0.0)):
            raise GhostStructureError("diagonal ghost blocks differ; request 'c_dc' and 'dc_c'")
        return b[0, 0].copy()
    go, gi = _GHOST_BLOCKS[key]
    out = b[go, gi]
    # odd monomial g = P (x) unit on the left: g X = (P X) (x) unit
    return twist @ out if key in _ODD_GHOST else out.copy()


def ghost_monomials(A: GhostPolyOperator, *, ghost: str = "ghost_c") -> dict[tuple[str, int], np.ndarray]:
    """All four matrix-unit components ``{(g, d): X}`` of ``A``."""
    blocks, _ = _split_ghost(A, ghost)
    out = {}
    for d in range(blocks.shape[0]):
        for key in _GHOST_BLOCKS:
            out[(key, d)] = extract_ghost_component(A, key, d, ghost=ghost)
    return out


def ghost_operator(c_structure: str, space: GradedSpace, *, ghost: str = "ghost_c") -> GhostPolyOperator:
    """The ghost monomial itself as an operator on ``space``."""
    key = _GHOST_ALIASES[c_structure]
    if key == "1":
        return GhostPolyOperator.identity(space)
    mats = {"c": GHOST.mul_c, "dc": GHOST.del_c, "c_dc": GHOST.c_delc, "dc_c": GHOST.delc_c}
    return embed(ghost, mats[key], ODD if key in _ODD_GHOST else EVEN, space)


def assemble_ghost(components: Mapping[tuple[str, int], np.ndarray], space: GradedSpace,
                   parity: int, *, ghost: str = "ghost_c") -> GhostPolyOperator:
    """Inverse of :func:`extract_ghost_component`: ``sum c~^d g X``.

    ``X`` acts on all factors before the ghost factor and is placed to the
    right of the ghost monomial.
    """
    rest = [f.name for f in space.factors if f.name != ghost]
    n = space.total_dim
    D = max((d for _, d in components), default=0)
    total = GhostPolyOperator(space, np.zeros((D + 1, n, n)), parity, check=False)
    for (g, d), X in components.items():
        X = np.asarray(X, dtype=complex)
        if not X.any():
            continue
        key = _GHOST_ALIASES[g]
        gpar = ODD if key in _ODD_GHOST else EVEN
        xop = embed_block(rest, X, (parity - gpar) % 2, space)
        term = compose(ghost_operator(key, space, ghost=ghost), xop, dmax=D)
        total = total + term.times_ctilde(d) if d else total + term
    return total.truncate(D)


def restrict(A: GhostPolyOperator, inclusion: np.ndarray, subspace: GradedSpace) -> GhostPolyOperator:
    """``pi A i`` for an isometric inclusion (columns orthonormal), ``pi = i^dagger``."""
    inc = np.asarray(inclusion, dtype=complex)
    if inc.shape != (A.space.total_dim, subspace.total_dim):
        raise GradingError("inclusion shape does not match spaces")
    arr = np.einsum("ji,djk,kl->dil", inc.conj(), A.coeffs, inc, optimize=True)
    return GhostPolyOperator(subspace, arr, A.parity, check=False)
