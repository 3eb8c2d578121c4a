"""Scattering on the line: single-delta T and K, and the double-delta closed forms.

The closed forms return 2x2 mode matrices in the basis (+kappa, -kappa);
the psi prefactor of S_L and S_R is implied and not included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SIGMA
from .series import relative_difference

I2, S1, S2, S3 = SIGMA


@dataclass(frozen=True)
class LineParams:
    lam: float
    kappa: float
    a: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")


# --- single delta ------------------------------------------------------------

def t_matrix_single_delta(p: LineParams) -> complex:
    """On-shell T for ``V = lambda delta(x)``; independent of the momenta."""
    return p.lam / (1 - p.lam / (2j * p.kappa))


def born_series_single_delta(p: LineParams, order: int) -> complex:
    """``lambda sum_{k<=order} (lambda g)^k`` with the causal kernel ``g = 1/(2 i kappa)``."""
    g = 1 / (2j * p.kappa)
    return complex(p.lam * sum((p.lam * g) ** k for k in range(order + 1)))


def k_matrix_single_delta(p: LineParams) -> float:
    """K = lambda: the standing-wave kernel vanishes at coincident points."""
    return float(p.lam)


def heitler_check(T, K, kappa: float) -> float:
    """|K - T - (i/2 kappa) T K| (max entry for matrices)."""
    T = np.asarray(T, dtype=complex)
    K = np.asarray(K, dtype=complex)
    prod = T @ K if T.ndim == 2 else T * K
    return float(np.abs(K - T - 1j / (2 * kappa) * prod).max())


def t_from_k(K, kappa: float):
    """Solve the Heitler relation for T given K (scalar or square matrix)."""
    K = np.asarray(K, dtype=complex)
    if K.ndim == 0:
        return complex(K / (1 + 1j / (2 * kappa) * K))
    return K @ np.linalg.inv(np.eye(K.shape[0]) + 1j / (2 * kappa) * K)


# --- double delta closed forms -----------------------------------------------

def _vind(lam, kappa, a):
    s, c = np.sin(2 * a * kappa), np.cos(2 * a * kappa)
    pref = -4 * kappa * lam * s / (4 * kappa ** 2 + lam ** 2 * s ** 2)
    return pref * (lam * c * I2 + lam * S1 + 2 * kappa * S2)


def _sl(lam, kappa, a):
    ak = a * kappa
    s, c, s4 = np.sin(2 * ak), np.cos(2 * ak), np.sin(4 * ak)
    pref = 4 * ak * lam / (4 * kappa ** 2 + lam ** 2 * s ** 2)
    return pref * (2 * kappa * I2 - 1j * lam * (1 - s4 / (4 * ak)) * S3
                   + s / a * S1 + lam * (c - s / (2 * ak)) * S2)


def _sr(lam, kappa, a):
    # adjoint of S_L taken at real coupling, continued analytically in lambda
    return _sl(np.conj(lam), kappa, a).conj().T


def closed_form_Vind_R(p: LineParams) -> np.ndarray:
    return _vind(p.lam, p.kappa, p.a)


def closed_form_SL_R(p: LineParams) -> np.ndarray:
    return _sl(p.lam, p.kappa, p.a)


def closed_form_SR_R(p: LineParams) -> np.ndarray:
    return _sr(p.lam, p.kappa, p.a)


CLOSED_FORMS = {"v_ind": _vind, "s_L": _sl, "s_R": _sr}


def convergence_radius(kappa: float, a: float) -> float:
    """Distance from lambda = 0 to the nearest pole ``4 kappa^2 + lambda^2 sin^2 2a kappa = 0``."""
    s = abs(np.sin(2 * a * kappa))
    return np.inf if s < 1e-300 else 2 * kappa / s


def taylor_coefficients(f, order: int, radius: float, *, samples: int = 64) -> list[np.ndarray]:
    """Coefficients of ``lambda^0..lambda^order`` of an analytic (matrix) function.

    Trapezoidal Cauchy integral on ``|lambda| = radius``; the aliasing
    error is of order ``(radius/rho)^samples`` for convergence radius rho.
    """
    theta = 2 * np.pi * np.arange(samples) / samples
    z = radius * np.exp(1j * theta)
    vals = np.stack([np.asarray(f(zj), dtype=complex) for zj in z])
    out = []
    for k in range(order + 1):
        w = np.exp(-1j * k * theta) / samples
        out.append(np.tensordot(w, vals, axes=1) / radius ** k)
    return out


def line_taylor(component: str, kappa: float, a: float, order: int = 4) -> list[np.ndarray]:
    f = CLOSED_FORMS[component]
    rho = convergence_radius(kappa, a)
    r = min(0.5 * rho, kappa)
    return taylor_coefficients(lambda lam: f(lam, kappa, a), order, r)


# --- comparison with the circle limit -------------------------------------------

def boson_block(M4: np.ndarray) -> np.ndarray:
    """Mode 2x2 block of a 4x4 (modes (x) internal) matrix in the F = 0 sector."""
    return np.asarray(M4).reshape(2, 2, 2, 2)[:, 0, :, 0]


def psi_block(M4: np.ndarray) -> np.ndarray:
    """Mode 2x2 coefficient of psi (F = 0 -> F = 1 block)."""
    return np.asarray(M4).reshape(2, 2, 2, 2)[:, 1, :, 0]


@dataclass(frozen=True)
class LimitResidual:
    component: str
    alpha: int
    line: np.ndarray
    circle: np.ndarray
    relative: float


@dataclass
class LineComparison:
    epsilon: int
    epsilon_quality: float        # relative mismatch of the alpha=1 v_ind fit
    residuals: list[LimitResidual]

    def worst(self) -> float:
        return max((r.relative for r in self.residuals), default=0.0)


def determine_convention(v1_limit: np.ndarray, line_v1: np.ndarray) -> tuple[int, float]:
    """Sign ``epsilon`` with ``line O(lambda) term = epsilon * F=0 block of 2 pi R V^(1,1)``."""
    B = boson_block(v1_limit)
    overlap = np.vdot(B, line_v1).real
    if abs(overlap) < 1e-300:
        raise ValueError("alpha=1 term vanishes; convention cannot be determined (sin 2 a kappa = 0)")
    eps = 1 if overlap > 0 else -1
    return eps, relative_difference(eps * B, line_v1)


def mapped_limit(component: str, alpha: int, limit4: np.ndarray, epsilon: int) -> np.ndarray:
    """Circle limit in the line presentation, for a fixed convention sign."""
    if component == "v_ind":
        return epsilon ** alpha * boson_block(limit4)
    if component == "s_L":
        return epsilon ** (alpha - 1) * psi_block(limit4)
    if component == "s_R":
        return (-epsilon) ** (alpha - 1) * psi_block(limit4)
    raise KeyError(component)


def compare_line_vs_limit(limits: dict[str, dict[int, np.ndarray]], p: LineParams,
                          orders: dict[str, int] | None = None) -> LineComparison:
    """Compare ``r_to_infinity`` output with the lambda-expansion of the closed forms.

    ``limits[component][alpha]`` is the 4x4 lambda^alpha circle limit from
    a sweep at coupling ``p.lam``, so line Taylor coefficients are scaled
    by ``p.lam**alpha``.  The sign convention is fixed at alpha = 1 from
    v_ind and then held for every other term.
    """
    orders = orders or {"v_ind": 3, "s_L": 2, "s_R": 2}
    top = max(max(orders.values()), 1)
    taylor = {c: line_taylor(c, p.kappa, p.a, top) for c in set(orders) | {"v_ind"}}
    line1 = taylor["v_ind"][1] * p.lam
    eps, quality = determine_convention(limits["v_ind"][1], line1)
    res = []
    for comp, amax in orders.items():
        for alpha in range(1, amax + 1):
            line = taylor[comp][alpha] * p.lam ** alpha
            circ = mapped_limit(comp, alpha, limits[comp][alpha], eps)
            res.append(LimitResidual(comp, alpha, line, circ, relative_difference(line, circ)))
    return LineComparison(eps, quality, res)
