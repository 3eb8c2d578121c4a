"""SUSY quantum mechanics with a double delta potential on a circle.

The superpotential is ``W'(x) = (lambda/2) sgn(a^2 - x^2)`` on a circle of
radius ``R = n0/kappa``.  Everything is written in the truncated Fourier
basis ``|n>``, ``|n| <= N``, with momenta ``k_n = n/R``.

Operators live on the graded space ``mode (x) internal (x) ghost_c``:

* ``internal`` is span{|0>, psi|0>} with ``psi`` raising fermion number;
* ``ghost_c`` is span{1, c} for the odd ghost of the Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graded import (
    DEFAULT_CTILDE_MAX, EVEN, GHOST, GHOST_PARITIES, ODD, GhostPolyOperator, GhostStructureError,
    GradedSpace, compose, embed,
)

# internal fermion sector, basis (|0>, psi|0>)
PSI = np.array([[0, 0], [1, 0]], dtype=complex)
DPSI = np.array([[0, 1], [0, 0]], dtype=complex)
FERMION_PARITY = np.diag([1.0, -1.0]).astype(complex)
INTERNAL_PARITIES = (EVEN, ODD)

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_decompose(M) -> np.ndarray:
    """Coefficients ``(c0, c1, c2, c3)`` with ``M = sum c_i sigma_i``."""
    M = np.asarray(M, dtype=complex)
    return np.array([np.trace(s @ M) / 2 for s in SIGMA])


def pauli_compose(coeffs) -> np.ndarray:
    return sum(c * s for c, s in zip(coeffs, SIGMA))


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters of one circle model.

    ``lam`` is the coupling (1/length), ``a`` the half separation of the
    two deltas, ``kappa`` the on-shell momentum, ``n0`` the on-shell mode
    number (so ``R = n0/kappa``) and ``cutoff_N`` the hard mode cutoff.
    """

    lam: float
    a: float
    kappa: float
    n0: int
    cutoff_N: int
    ctilde_max: int = DEFAULT_CTILDE_MAX

    def __post_init__(self):
        if not np.isfinite([self.lam, self.a, self.kappa]).all():
            raise ParameterError("lam, a and kappa must be finite")
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}")
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise ParameterError(f"n0 must be a positive integer, got {self.n0}")
        if int(self.cutoff_N) != self.cutoff_N or self.cutoff_N <= self.n0:
            raise ParameterError(f"cutoff_N must be an integer above n0={self.n0}, got {self.cutoff_N}")
        if not 0 < self.a < np.pi * self.R:
            raise ParameterError(f"need 0 < a < pi R = {np.pi * self.R:.6g}, got a={self.a}")
        if self.ctilde_max < 3:
            raise ParameterError("ctilde_max must be at least 3")
        object.__setattr__(self, "n0", int(self.n0))
        object.__setattr__(self, "cutoff_N", int(self.cutoff_N))

    @property
    def R(self) -> float:
        return self.n0 / self.kappa

    @property
    def energy(self) -> float:
        """Eigenvalue of the full Hamiltonian on the on-shell states."""
        return self.kappa ** 2 + self.lam ** 2 / 4

    def with_(self, **changes) -> "ModelParams":
        fields = dict(lam=self.lam, a=self.a, kappa=self.kappa, n0=self.n0,
                      cutoff_N=self.cutoff_N, ctilde_max=self.ctilde_max)
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class ModeBasis:
    N: int
    n0: int

    @classmethod
    def from_params(cls, p: ModelParams) -> "ModeBasis":
        return cls(p.cutoff_N, p.n0)

    @cached_property
    def indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def onshell(self) -> tuple[int, int]:
        return (self.n0, -self.n0)

    @cached_property
    def offshell(self) -> np.ndarray:
        idx = self.indices
        return idx[np.abs(idx) != self.n0]

    def position(self, n: int) -> int:
        if abs(n) > self.N:
            raise IndexError(f"mode {n} outside cutoff {self.N}")
        return int(n) + self.N

    def __len__(self) -> int:
        return 2 * self.N + 1


def model_space(p: ModelParams) -> GradedSpace:
    dim = 2 * p.cutoff_N + 1
    return GradedSpace([("mode", (EVEN,) * dim), ("internal", INTERNAL_PARITIES),
                        ("ghost_c", GHOST_PARITIES)])


def onshell_space() -> GradedSpace:
    """Target of the transfer: modes (+n0, -n0) with internal and ghost factors."""
    return GradedSpace([("mode", (EVEN, EVEN)), ("internal", INTERNAL_PARITIES),
                        ("ghost_c", GHOST_PARITIES)])


def momenta(p: ModelParams) -> np.ndarray:
    return ModeBasis.from_params(p).indices / p.R


# --- mode matrices -----------------------------------------------------------

def _k_diff(p: ModelParams) -> np.ndarray:
    k = momenta(p)
    return k[None, :] - k[:, None]          # entry (n, m) = k_m - k_n


def h0e_modes(p: ModelParams) -> np.ndarray:
    return np.diag(momenta(p) ** 2 - p.kappa ** 2).astype(complex)


def v_modes(p: ModelParams) -> np.ndarray:
    """Mode part of V; the full operator also carries (-1)^F."""
    return (1j * p.lam / (np.pi * p.R)) * np.sin(p.a * _k_diff(p))


def theta_modes(p: ModelParams) -> np.ndarray:
    """Matrix of the indicator of [-a, a]; diagonal is the limit a/(pi R)."""
    d = _k_diff(p)
    on_diag = d == 0
    safe = np.where(on_diag, 1.0, d)
    return np.where(on_diag, p.a, np.sin(p.a * d) / safe) / (np.pi * p.R)


def s0_modes(p: ModelParams) -> np.ndarray:
    return np.diag(1j * momenta(p) - p.lam / 2)


def s1_modes(p: ModelParams) -> np.ndarray:
    return p.lam * theta_modes(p)


def gst_modes(p: ModelParams) -> np.ndarray:
    k = momenta(p)
    g = np.zeros_like(k)
    off = np.abs(ModeBasis.from_params(p).indices) != p.n0
    g[off] = 1.0 / (p.kappa ** 2 - k[off] ** 2)
    return np.diag(g).astype(complex)


# --- full operators ------------------------------------------------------------

def _on_modes_internal(space: GradedSpace, mode_mat, internal_mat, parity: int) -> GhostPolyOperator:
    """``mode_mat (x) internal_mat (x) 1_ghost`` with the Koszul embedding."""
    m = embed("mode", mode_mat, EVEN, space)
    s = embed("internal", internal_mat, parity, space)
    return compose(m, s, dmax=0)


def build_H0E(p: ModelParams) -> GhostPolyOperator:
    return _on_modes_internal(model_space(p), h0e_modes(p), np.eye(2), EVEN)


def build_V(p: ModelParams) -> GhostPolyOperator:
    return _on_modes_internal(model_space(p), v_modes(p), FERMION_PARITY, EVEN)


def build_S0(p: ModelParams) -> GhostPolyOperator:
    return _on_modes_internal(model_space(p), s0_modes(p), PSI, ODD)


def build_S1(p: ModelParams) -> GhostPolyOperator:
    return _on_modes_internal(model_space(p), s1_modes(p), PSI, ODD)


def build_Gst(p: ModelParams) -> GhostPolyOperator:
    return _on_modes_internal(model_space(p), gst_modes(p), np.eye(2), EVEN)


def build_H(p: ModelParams) -> GhostPolyOperator:
    """Full (truncated) Hamiltonian ``-d^2 + lambda^2/4 + V``."""
    space = model_space(p)
    kin = np.diag(momenta(p) ** 2 + p.lam ** 2 / 4).astype(complex)
    return _on_modes_internal(space, kin, np.eye(2), EVEN) + build_V(p)


def build_Qplus(p: ModelParams) -> GhostPolyOperator:
    return build_S0(p) + build_S1(p)


def build_Qminus(p: ModelParams) -> GhostPolyOperator:
    """``d_psi (-d/dx + W')`` in the truncated basis (not used by the transfer)."""
    mode = np.diag(-1j * momenta(p) - p.lam / 2) + p.lam * theta_modes(p)
    return _on_modes_internal(model_space(p), mode, DPSI, ODD)


def _ghost(space: GradedSpace, which: str) -> GhostPolyOperator:
    mats = {"c": GHOST.mul_c, "dc": GHOST.del_c}
    return embed("ghost_c", mats[which], ODD, space)


def build_Q0(p: ModelParams) -> GhostPolyOperator:
    """``c H_{0,E} + c~ S_0``."""
    space = model_space(p)
    c = _ghost(space, "c")
    return compose(c, build_H0E(p)) + build_S0(p).times_ctilde(1)


def build_Q1(p: ModelParams) -> GhostPolyOperator:
    """``c V + c~ S_1``; linear in lambda."""
    space = model_space(p)
    c = _ghost(space, "c")
    return compose(c, build_V(p)) + build_S1(p).times_ctilde(1)


def build_h(p: ModelParams) -> GhostPolyOperator:
    """Contracting homotopy ``G_st d_c``."""
    space = model_space(p)
    return compose(build_Gst(p), _ghost(space, "dc"))


def onshell_inclusion(p: ModelParams) -> np.ndarray:
    """Isometry from :func:`onshell_space` into :func:`model_space`.

    Columns are ordered (mode, internal, ghost) with modes (+n0, -n0).
    """
    basis = ModeBasis.from_params(p)
    dim = len(basis) * 4
    inc = np.zeros((dim, 8), dtype=complex)
    col = 0
    for n in basis.onshell:
        for f in range(2):
            for g in range(2):
                inc[basis.position(n) * 4 + f * 2 + g, col] = 1.0
                col += 1
    return inc


def kernel_projector(p: ModelParams) -> GhostPolyOperator:
    """``i pi``: orthogonal projector onto ker H_{0,E} (times the ghost factor)."""
    inc = onshell_inclusion(p)
    return GhostPolyOperator(model_space(p), inc @ inc.conj().T, EVEN)


def project_onshell(A: GhostPolyOperator, p: ModelParams, ctilde_degree: int = 0,
                    *, atol: float = 1e-12) -> np.ndarray:
    """4x4 block ``pi A i`` on (modes +-n0) (x) internal for a ghost-trivial operator."""
    basis = ModeBasis.from_params(p)
    rows = []
    for n in basis.onshell:
        for f in range(2):
            rows.append(basis.position(n) * 4 + f * 2)
    rows = np.array(rows)
    mat = A.coeff(ctilde_degree)
    blk0 = mat[np.ix_(rows, rows)]
    blk1 = mat[np.ix_(rows + 1, rows + 1)]
    off = max(np.abs(mat[np.ix_(rows + 1, rows)]).max(), np.abs(mat[np.ix_(rows, rows + 1)]).max())
    scale = max(1.0, np.abs(blk0).max(initial=0.0))
    if off > atol * scale:
        raise GhostStructureError("operator mixes ghost sectors; use extract_ghost_component")
    if np.abs(blk0 - blk1).max(initial=0.0) > atol * scale:
        raise GhostStructureError("operator acts differently on the two ghost sectors")
    return blk0


def window_indices(p: ModelParams, width: int) -> np.ndarray:
    """Positions in the full space of all basis vectors with ``|n| <= width``."""
    basis = ModeBasis.from_params(p)
    width = min(width, p.cutoff_N)
    modes = np.arange(-width, width + 1)
    return (basis.position(0) + modes)[:, None] * 4 + np.arange(4)[None, :]


def truncation_residual(p: ModelParams, window: int | None = None) -> float:
    """Max |entry| of (Q0+Q1)^2 restricted to the low modes ``|n|, |m| <= window``.

    The default window is ``2 n0``.  The square is formed only on the rows
    and columns needed, so large cutoffs are cheap.
    """
    Q = build_Q0(p) + build_Q1(p)
    idx = window_indices(p, 2 * p.n0 if window is None else window).ravel()
    left = Q.coeffs[:, idx, :]
    right = Q.coeffs[:, :, idx]
    D = Q.degree
    worst = 0.0
    for d in range(2 * D + 1):
        acc = np.zeros((idx.size, idx.size), dtype=complex)
        for i in range(max(0, d - D), min(d, D) + 1):
            acc += left[i] @ right[d - i]
        worst = max(worst, float(np.abs(acc).max()))
    return worst
