"""Induced differential on the on-shell space and its components.

``Q_ind = pi Q0 i + sum_alpha pi Q1 (h Q1)^(alpha-1) i`` is computed order by
order in lambda.  Two routes are available:

* ``dense``: literal products of the ghost-algebra matrices on the full
  truncated space;
* ``separable``: the rank-2 structure ``sin a(k_m - k_n) = s_m c_n - c_m s_n``
  reduces every chain to products of 2x2 matrices built from ten primitive
  mode sums, so any cutoff (or an extrapolated set of sums) costs O(N).

Components are read off with ghost monomials to the left,
``Q_ind = c~ S0 + c V_ind + c d_c c~ S_R + d_c c c~ S_L - d_c c~^2 S_LR``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graded import (
    ODD, GhostPolyOperator, GhostStructureError, GradedSpace, assemble_ghost, compose,
    extract_ghost_component, ghost_monomials, poly_matmul,
)
from .model import (
    FERMION_PARITY, PSI, ModelParams, build_h, build_Q0, build_Q1, onshell_inclusion,
    onshell_space, pauli_decompose,
)
from .modesums import hard_cutoff_sums

COMPONENTS = ("v_ind", "s_L", "s_R", "s_LR")

# ghost monomial (structure, c~ degree) carrying each component, with sign
_GHOST_SLOTS = {"v_ind": ("c", 0, 1.0), "s_R": ("c_dc", 1, 1.0),
                "s_L": ("dc_c", 1, 1.0), "s_LR": ("dc", 2, -1.0)}
_J0 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def transfer_series(Q0: GhostPolyOperator, Q1: GhostPolyOperator, h: GhostPolyOperator,
                    inclusion: np.ndarray, subspace: GradedSpace, order: int,
                    *, association: str = "right", dmax: int | None = None) -> list[GhostPolyOperator]:
    """Terms ``[pi Q0 i, pi Q1 i, pi Q1 h Q1 i, ...]`` up to ``order`` insertions of Q1.

    ``pi`` is the adjoint of the isometric ``inclusion``.  ``association``
    picks the multiplication order: ``"right"`` grows ``Q1 (h (Q1 i))`` and
    ``"left"`` grows ``((pi Q1) h) Q1``; both give the same terms.
    """
    inc = np.asarray(inclusion, dtype=complex)[None]
    proj = inc.conj().transpose(0, 2, 1)
    if dmax is None:
        dmax = max(Q0.degree, Q1.degree, h.degree, 3)
    q0, q1, hh = Q0.coeffs, Q1.coeffs, h.coeffs

    def wrap(arr, parity):
        return GhostPolyOperator(subspace, arr, parity, check=False)

    terms = [wrap(poly_matmul(proj, poly_matmul(q0, inc, dmax), dmax), Q0.parity)]
    if order < 1:
        return terms
    if association == "right":
        X = poly_matmul(q1, inc, dmax)
        terms.append(wrap(poly_matmul(proj, X, dmax), Q1.parity))
        for _ in range(order - 1):
            X = poly_matmul(q1, poly_matmul(hh, X, dmax), dmax)
            terms.append(wrap(poly_matmul(proj, X, dmax), Q1.parity))
    elif association == "left":
        Y = poly_matmul(proj, q1, dmax)
        terms.append(wrap(poly_matmul(Y, inc, dmax), Q1.parity))
        for _ in range(order - 1):
            Y = poly_matmul(poly_matmul(Y, hh, dmax), q1, dmax)
            terms.append(wrap(poly_matmul(Y, inc, dmax), Q1.parity))
    else:
        raise ValueError(f"association must be 'left' or 'right', got {association!r}")
    return terms


@dataclass
class ComponentSet:
    """On-shell components per lambda order, as 4x4 matrices on modes (+n0,-n0) (x) internal.

    ``s0_orders`` splits ``s0_part`` into its lambda^0 (kinetic) and
    lambda^1 (``-lambda/2``) pieces.
    """

    s0_part: np.ndarray
    s0_orders: dict[int, np.ndarray]
    v_ind: dict[int, np.ndarray] = field(default_factory=dict)
    s_L: dict[int, np.ndarray] = field(default_factory=dict)
    s_R: dict[int, np.ndarray] = field(default_factory=dict)
    s_LR: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def alpha_max(self) -> int:
        return max(self.v_ind, default=0)

    def get(self, component: str, alpha: int) -> np.ndarray:
        if component in ("s0", "s0_part"):
            return self.s0_orders.get(alpha, np.zeros((4, 4), complex))
        return getattr(self, component).get(alpha, np.zeros((4, 4), complex))

    def order_operator(self, k: int) -> GhostPolyOperator:
        """The lambda^k piece of Q_ind, rebuilt from components."""
        comps = {}
        s0 = self.s0_orders.get(k)
        if s0 is not None:
            comps[("c_dc", 1)] = s0
            comps[("dc_c", 1)] = s0
        if k >= 1:
            for name, (g, d, sign) in _GHOST_SLOTS.items():
                X = sign * self.get(name, k)
                key = (g, d)
                comps[key] = comps.get(key, 0) + X
        comps.setdefault(("c", 0), np.zeros((4, 4), complex))
        return assemble_ghost(comps, onshell_space(), ODD).truncate(3)

    def reassemble(self) -> GhostPolyOperator:
        total = self.order_operator(0)
        for k in range(1, self.alpha_max + 1):
            total = total + self.order_operator(k)
        return total


def split_s0(s0_part: np.ndarray) -> dict[int, np.ndarray]:
    """Kinetic (lambda^0) and constant (lambda^1) parts of the on-shell S0.

    The psi-block of S0 restricted on shell is ``i kappa sigma_3 - lambda/2``;
    its identity component is the lambda-linear piece.
    """
    blk = s0_part.reshape(2, 2, 2, 2)[:, 1, :, 0]
    c = pauli_decompose(blk)
    lin = np.kron(c[0] * np.eye(2), PSI)
    return {0: s0_part - lin, 1: lin}


def decompose(terms, *, atol: float = 1e-12) -> ComponentSet:
    """Read components off ``[T_0, T_1, ...]`` and check ghost closure.

    Any ghost monomial outside the allowed set that exceeds ``atol``
    (relative to the term's largest entry, floor 1) raises
    :class:`GhostStructureError`.
    """
    terms = list(terms)
    allowed0 = {("c", 0), ("c_dc", 1), ("dc_c", 1)}
    allowed = {("c", 0), ("c_dc", 1), ("dc_c", 1), ("dc", 2)}
    out = None
    for alpha, T in enumerate(terms):
        mons = ghost_monomials(T)
        ok = allowed0 if alpha == 0 else allowed
        tol = atol * max(1.0, T.norm())
        for key, X in mons.items():
            if key not in ok and np.abs(X).max(initial=0.0) > tol:
                raise GhostStructureError(
                    f"order {alpha}: unexpected ghost monomial {key[0]} c~^{key[1]} "
                    f"of size {np.abs(X).max():.3e}")
        if alpha == 0:
            sl, sr = mons[("dc_c", 1)], mons[("c_dc", 1)]
            if np.abs(sl - sr).max(initial=0.0) > tol:
                raise GhostStructureError("order 0: c~ part is not proportional to the identity ghost")
            if np.abs(mons[("c", 0)]).max(initial=0.0) > tol:
                raise GhostStructureError("order 0: pi H_{0,E} i does not vanish")
            out = ComponentSet(s0_part=sl, s0_orders=split_s0(sl))
            continue
        for name, (g, d, sign) in _GHOST_SLOTS.items():
            getattr(out, name)[alpha] = sign * mons.get((g, d), np.zeros((4, 4), complex))
    if out is None:
        raise ValueError("decompose needs at least the order-0 term")
    return out


# --- separable route ---------------------------------------------------------

def onshell_u(p: ModelParams) -> np.ndarray:
    ko = np.array([p.kappa, -p.kappa])
    return np.stack([np.cos(p.a * ko), np.sin(p.a * ko)], axis=1)


def s1_onshell_modes(p: ModelParams) -> np.ndarray:
    off = np.sin(2 * p.a * p.kappa) / (2 * p.kappa)
    return p.lam / (np.pi * p.R) * np.array([[p.a, off], [off, p.a]])


def s0_onshell(p: ModelParams) -> np.ndarray:
    return np.kron(np.diag([1j * p.kappa - p.lam / 2, -1j * p.kappa - p.lam / 2]), PSI)


def unpack_primitives(prim) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    prim = np.asarray(prim, dtype=float)
    M = np.array([[prim[0], prim[1]], [prim[1], prim[2]]])
    W = np.array([[prim[3], prim[4]], [prim[5], prim[6]]])
    Z = np.array([[prim[7], prim[8]], [prim[8], prim[9]]])
    return M, W, Z


def mode_chains(p: ModelParams, prim, alpha_max: int) -> dict[str, dict[int, np.ndarray]]:
    """2x2 mode parts of each component with every V insertion read as +1 on the internal factor."""
    M, W, Z = unpack_primitives(prim)
    U = onshell_u(p)
    g = p.lam / (np.pi * p.R)
    J = 1j * g * _J0
    MJ = M @ J
    out = {name: {} for name in COMPONENTS}
    S1 = s1_onshell_modes(p)
    for alpha in range(1, alpha_max + 1):
        out["v_ind"][alpha] = U @ J @ np.linalg.matrix_power(MJ, alpha - 1) @ U.T
        if alpha == 1:
            out["s_L"][1] = S1
            out["s_R"][1] = S1
            out["s_LR"][1] = np.zeros((2, 2), complex)
            continue
        chain = np.linalg.matrix_power(MJ, alpha - 2)
        out["s_L"][alpha] = g * W @ J @ chain @ U.T
        out["s_R"][alpha] = g * U @ J @ chain @ W.T
        if alpha == 2:
            out["s_LR"][2] = (g * g * Z).astype(complex)
        else:
            out["s_LR"][alpha] = g * g * W @ J @ np.linalg.matrix_power(MJ, alpha - 3) @ W.T
    return out


def internal_structure(component: str, alpha: int) -> np.ndarray:
    """Internal 2x2 factor of a component: V -> Z^a, S_L -> psi Z^(a-1), S_R -> Z^(a-1) psi."""
    Zp = np.linalg.matrix_power(FERMION_PARITY, alpha - 1)
    if component == "v_ind":
        return Zp @ FERMION_PARITY
    if component == "s_L":
        return PSI @ Zp
    if component == "s_R":
        return Zp @ PSI
    if component == "s_LR":
        return PSI @ np.linalg.matrix_power(FERMION_PARITY, max(alpha - 2, 0)) @ PSI
    raise KeyError(component)


def components_from_primitives(p: ModelParams, prim, alpha_max: int = 3) -> ComponentSet:
    """Full on-shell components from the ten primitive mode sums."""
    chains = mode_chains(p, prim, alpha_max)
    s0 = s0_onshell(p)
    cs = ComponentSet(s0_part=s0, s0_orders=split_s0(s0))
    for name in COMPONENTS:
        for alpha, mode in chains[name].items():
            getattr(cs, name)[alpha] = np.kron(mode, internal_structure(name, alpha))
    return cs


# --- public engine -----------------------------------------------------------

@dataclass
class InducedDifferential:
    """Terms ``T_0..T_alpha_max`` of Q_ind on the on-shell space (``T_alpha`` carries lambda^alpha,
    except that ``T_0`` also holds the lambda-linear part of S0)."""

    params: ModelParams
    terms: list[GhostPolyOperator]
    method: str
    components: ComponentSet

    @property
    def alpha_max(self) -> int:
        return len(self.terms) - 1

    def total(self) -> GhostPolyOperator:
        out = self.terms[0]
        for T in self.terms[1:]:
            out = out + T
        return out


def dense_terms(p: ModelParams, alpha_max: int, *, association: str = "right") -> list[GhostPolyOperator]:
    return transfer_series(build_Q0(p), build_Q1(p), build_h(p), onshell_inclusion(p),
                           onshell_space(), alpha_max, association=association,
                           dmax=p.ctilde_max)


def induced_differential(p: ModelParams, alpha_max: int = 3, *, method: str = "separable",
                         primitives=None) -> InducedDifferential:
    """Transfer Q0 + Q1 onto ker H_{0,E} through lambda^alpha_max.

    ``primitives`` (separable route only) replaces the hard-cutoff mode
    sums, e.g. with cutoff-extrapolated values.
    """
    if alpha_max < 1:
        raise ValueError("alpha_max must be at least 1")
    if method == "dense":
        if primitives is not None:
            raise ValueError("primitives only apply to the separable route")
        terms = dense_terms(p, alpha_max)
        return InducedDifferential(p, terms, method, decompose(terms))
    if method != "separable":
        raise ValueError(f"unknown method {method!r}")
    if primitives is None:
        primitives = hard_cutoff_sums(p.n0, p.kappa, p.a, p.cutoff_N)
    cs = components_from_primitives(p, primitives, alpha_max)
    terms = [_order0_term(cs)]
    for alpha in range(1, alpha_max + 1):
        comps = {(g, d): sign * cs.get(name, alpha) for name, (g, d, sign) in _GHOST_SLOTS.items()}
        terms.append(assemble_ghost(comps, onshell_space(), ODD).truncate(p.ctilde_max))
    return InducedDifferential(p, terms, method, cs)


def _order0_term(cs: ComponentSet) -> GhostPolyOperator:
    comps = {("c_dc", 1): cs.s0_part, ("dc_c", 1): cs.s0_part}
    return assemble_ghost(comps, onshell_space(), ODD)


# --- relations ---------------------------------------------------------------

@dataclass(frozen=True)
class RelationResidual:
    equation: str
    order: int
    residual: float
    scale: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else 0.0


def _norm(X) -> float:
    return float(np.abs(X).max(initial=0.0))


def _residual(eq: str, order: int, pieces) -> RelationResidual:
    zero = np.zeros((4, 4), complex)
    total = sum(pieces, zero)
    scale = max((_norm(x) for x in pieces), default=0.0)
    return RelationResidual(eq, order, _norm(total), scale)


def check_relations(cs: ComponentSet, alpha_max: int | None = None) -> list[RelationResidual]:
    """Residuals of the four quadratic relations at each lambda order 1..alpha_max.

    E1: [V, S0] + V S_L - S_R V;  E2: {S0, S_R} + S_R^2 - V S_LR;
    E3: {S0, S_L} + S_L^2 - S_LR V;  E4: [S0, S_LR].
    """
    alpha_max = cs.alpha_max if alpha_max is None else alpha_max
    S0 = lambda j: cs.get("s0", j)
    get = cs.get
    out = []
    for k in range(1, alpha_max + 1):
        e1, e2, e3, e4 = [], [], [], []
        for j in (0, 1):
            i = k - j
            if i < 1:
                continue
            V, SR, SL, SLR = get("v_ind", i), get("s_R", i), get("s_L", i), get("s_LR", i)
            e1 += [V @ S0(j), -S0(j) @ V]
            e2 += [S0(j) @ SR, SR @ S0(j)]
            e3 += [S0(j) @ SL, SL @ S0(j)]
            e4 += [S0(j) @ SLR, -SLR @ S0(j)]
        for i in range(1, k):
            j = k - i
            e1 += [get("v_ind", i) @ get("s_L", j), -get("s_R", j) @ get("v_ind", i)]
            e2 += [get("s_R", i) @ get("s_R", j), -get("v_ind", i) @ get("s_LR", j)]
            e3 += [get("s_L", i) @ get("s_L", j), -get("s_LR", i) @ get("v_ind", j)]
        for name, pieces in zip(("E1", "E2", "E3", "E4"), (e1, e2, e3, e4)):
            out.append(_residual(name, k, pieces))
    return out


def full_square_residual(source, alpha_max: int | None = None, *, method: str = "separable",
                         primitives=None) -> list[RelationResidual]:
    """Per-order max |entry| of Q_ind^2 (orders 0..alpha_max).

    ``source`` is a :class:`ComponentSet` or :class:`ModelParams`; the
    scale of each order is the largest product ``|O_i| |O_j|`` entering it.
    """
    if isinstance(source, ModelParams):
        cs = induced_differential(source, alpha_max or 3, method=method, primitives=primitives).components
    else:
        cs = source
    alpha_max = cs.alpha_max if alpha_max is None else alpha_max
    ops = [cs.order_operator(k) for k in range(alpha_max + 1)]
    out = []
    for k in range(alpha_max + 1):
        total = None
        scale = 0.0
        for i in range(k + 1):
            prod = compose(ops[i], ops[k - i])
            scale = max(scale, ops[i].norm() * ops[k - i].norm())
            total = prod if total is None else total + prod
        out.append(RelationResidual("Q_ind^2", k, total.norm(), scale))
    return out
