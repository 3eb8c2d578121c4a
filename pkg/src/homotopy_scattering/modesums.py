"""Shell-resolved primitive mode sums with a compiled kernel when available.

``BACKEND`` is ``"cython"`` if the extension imported and ``"python"``
otherwise.  Both kernels return identical arrays up to rounding.
"""

from __future__ import annotations

import numpy as np

from . import _modesums_py
from ._modesums_py import N_PRIMITIVES

try:
    from . import _modesums as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

PRIMITIVE_NAMES = ("M00", "M01", "M11", "W+0", "W+1", "W-0", "W-1", "Z++", "Z+-", "Z--")


def shell_terms(n0: int, kappa: float, a: float, N: int, *, backend: str | None = None) -> np.ndarray:
    """``(N+1, 10)`` array of per-shell contributions (see ``_modesums_py``)."""
    backend = backend or BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled mode-sum kernel is not available")
        return _compiled.shell_terms(int(n0), float(kappa), float(a), int(N))
    if backend == "python":
        return _modesums_py.shell_terms(int(n0), float(kappa), float(a), int(N))
    raise ValueError(f"unknown backend {backend!r}")


def partial_sums(terms: np.ndarray, *, trapezoid: bool = True) -> np.ndarray:
    """Partial sums over shells ``0..N'`` for every ``N'``.

    With ``trapezoid`` the shell at the cutoff enters with weight 1/2,
    which removes the leading boundary term of the tail.
    """
    cum = np.cumsum(terms, axis=0)
    return cum - 0.5 * terms if trapezoid else cum


def hard_cutoff_sums(n0: int, kappa: float, a: float, N: int, **kw) -> np.ndarray:
    """The ten primitives summed over all ``|l| <= N`` with unit weights."""
    return shell_terms(n0, kappa, a, N, **kw).sum(axis=0)
