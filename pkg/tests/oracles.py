"""Independent reference computations used by the tests.

Nothing here calls the package's transfer, mode-sum or extrapolation code.
Mode matrices are rebuilt from their Fourier definitions and the transfer
terms are plain Born chains on the on-shell columns.
"""

import numpy as np
from scipy import integrate

I2 = np.eye(2, dtype=complex)
PAULI = (I2, np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]], complex),
         np.array([[1, 0], [0, -1]], complex))


def pauli_coeffs(M):
    return np.array([np.trace(s @ M) / 2 for s in PAULI])


# --- circle Born chains ---------------------------------------------------------

def circle_matrices(lam, a, kappa, n0, N):
    """Modes e^{i n x / R}, |n| <= N, with R = n0 / kappa."""
    R = n0 / kappa
    n = np.arange(-N, N + 1)
    k = n / R
    d = k[None, :] - k[:, None]
    V = 1j * lam / (np.pi * R) * np.sin(a * d)
    same = d == 0
    theta = np.where(same, a, np.sin(a * d) / np.where(same, 1.0, d)) / (np.pi * R)
    g = np.zeros(len(n))
    off = np.abs(n) != n0
    g[off] = 1.0 / (kappa ** 2 - k[off] ** 2)
    on = [int(np.flatnonzero(n == n0)[0]), int(np.flatnonzero(n == -n0)[0])]
    return V, lam * theta, g, on


def born_chain_blocks(lam, a, kappa, n0, N, alpha_max=3):
    """2x2 mode blocks of v_ind (F = 0), s_L and s_R (psi coefficient) at fixed cutoff.

    v_ind^(a) = P V (G V)^(a-1) P,  s_L^(a) = P S1 (G V)^(a-1) P,
    s_R^(a) = (-1)^(a-1) P (V G)^(a-1) S1 P.
    """
    V, S1, g, on = circle_matrices(lam, a, kappa, n0, N)
    out = {"v_ind": {}, "s_L": {}, "s_R": {}}
    X = np.eye(len(g), dtype=complex)[:, on]     # (G V)^(a-1) P
    Y = S1[:, on]                                 # (V G)^(a-1) S1 P
    for al in range(1, alpha_max + 1):
        VX = V @ X
        out["v_ind"][al] = VX[on]
        out["s_L"][al] = (S1 @ X)[on]
        out["s_R"][al] = (-1) ** (al - 1) * Y[on]
        X = g[:, None] * VX
        Y = V @ (g[:, None] * Y)
    return out


# --- line scattering ---------------------------------------------------------------

def free_green_at_origin(kappa):
    """int dk/2pi 1/(kappa^2 - k^2 + i0): principal value by quadrature plus the pole term."""
    def pv_half(k0):
        # PV int_0^L f(k)/(k - k0) with f = -1/(k + k0), plus the analytic tail
        L = 50 * k0
        val, _ = integrate.quad(lambda k: -1.0 / (k + k0), 0, L, weight="cauchy", wvar=k0)
        tail, _ = integrate.quad(lambda k: 1.0 / (k0 ** 2 - k ** 2), L, np.inf)
        return val + tail
    pv = 2 * pv_half(kappa) / (2 * np.pi)
    pole = -1j / (2 * kappa)
    return pv, pole


def single_delta_T_K(lam, kappa):
    pv, pole = free_green_at_origin(kappa)
    T = lam / (1 - lam * (pv + pole))
    K = lam / (1 - lam * pv)
    return T, K


# --- finite complexes ------------------------------------------------------------------

def geometric_transfer(Q0, Q1, h, inc):
    """pi Q1 (1 - h Q1)^-1 i summed in closed form, plus pi Q0 i."""
    n = Q0.shape[0]
    pi = inc.conj().T
    return pi @ Q0 @ inc + pi @ Q1 @ np.linalg.solve(np.eye(n) - h @ Q1, inc)
