"""Numpy reference implementation of the shell-resolved mode sums."""

import numpy as np

N_PRIMITIVES = 10


def shell_terms(n0, kappa, a, N):
    """Per-shell contributions to the ten primitive mode sums.

    Row ``s`` holds the contribution of modes ``l = +-s``; the on-shell
    shell ``s = n0`` contributes nothing.  Columns are

    ``M00 M01 M11 | W+0 W+1 W-0 W-1 | Z++ Z+- Z--``

    with ``M = sum G U U^T``, ``W_{n,j} = sum sigma_{n,l} G U_{l,j}`` and
    ``Z_{nm} = sum sigma_{n,l} G sigma_{m,l}``, where ``U_l = (cos a k_l,
    sin a k_l)`` and ``sigma_{n,l} = sin a(k_l - k_n) / (k_l - k_n)``.
    """
    R = n0 / kappa
    s = np.arange(N + 1)
    out = np.zeros((N + 1, N_PRIMITIVES))
    cp, sp = np.cos(a * kappa), np.sin(a * kappa)
    for sign in (1.0, -1.0):
        ls = s if sign > 0 else s[1:]
        k = sign * ls / R
        g = np.zeros_like(k)
        off = ls != n0
        g[off] = 1.0 / (kappa ** 2 - k[off] ** 2)
        c, sn = np.cos(a * k), np.sin(a * k)
        with np.errstate(divide="ignore", invalid="ignore"):
            # sin a(k - kappa) = sn cp - c sp; sin a(k + kappa) = sn cp + c sp
            sig_p = np.where(off, (sn * cp - c * sp) / (k - kappa), 0.0)
            sig_m = np.where(off, (sn * cp + c * sp) / (k + kappa), 0.0)
        block = np.stack([
            g * c * c, g * c * sn, g * sn * sn,
            sig_p * g * c, sig_p * g * sn, sig_m * g * c, sig_m * g * sn,
            sig_p * g * sig_p, sig_p * g * sig_m, sig_m * g * sig_m,
        ], axis=1)
        out[ls] += block
    return out
