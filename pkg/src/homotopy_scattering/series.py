"""(lambda, 1/R) coefficients from radius sweeps with cutoff extrapolation.

Each radius is evaluated from the ten primitive mode sums, extrapolated to
infinite cutoff; components at every lambda order are then polynomials in
1/R, fitted by least squares over the sweep.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import FERMION_PARITY, PSI, SIGMA, ModelParams
from .modesums import partial_sums, shell_terms
from .transfer import COMPONENTS, ComponentSet, check_relations, components_from_primitives

I2, S1, S2, S3 = SIGMA


class IllConditionedFit(RuntimeError):
    pass


class DivergentLimitError(ValueError):
    """The requested component has no finite R -> infinity limit."""


class MissingOracleError(KeyError):
    pass


# --- cutoff extrapolation ----------------------------------------------------

@dataclass(frozen=True)
class ExtrapolationResult:
    value: np.ndarray
    error: float
    monotone: bool
    samples: tuple          # windowed value at each cutoff of the schedule
    previous: np.ndarray    # best extrapolant one level before ``value``


def window_weights(N: int, window: str) -> tuple[np.ndarray, np.ndarray]:
    """Indices ``N/2..N`` and normalized averaging weights."""
    idx = np.arange(N // 2, N + 1)
    t = (idx - N / 2) / (N / 2)
    if window == "bump":
        w = np.zeros_like(t)
        inner = (t > 0) & (t < 1)
        w[inner] = np.exp(-1.0 / (t[inner] * (1.0 - t[inner])))
    elif window == "hann":
        w = np.sin(np.pi * t) ** 2
    elif window == "rect":
        w = np.ones_like(t)
    else:
        raise ValueError(f"unknown window {window!r}")
    return idx, w / w.sum()


def _windowed(history: np.ndarray, N: int, window: str | None) -> np.ndarray:
    history = np.asarray(history)
    if history.shape[0] < N + 1:
        raise ValueError(f"evaluator returned {history.shape[0]} partial values, need {N + 1}")
    if window is None:
        return history[N]
    idx, w = window_weights(N, window)
    return np.tensordot(w, history[idx], axes=1)


def extrapolate_cutoff(evaluator, schedule, *, window: str | None = "bump",
                       exponents=(1, 3)) -> ExtrapolationResult:
    """Richardson extrapolation of a truncated mode sum to infinite cutoff.

    ``evaluator(N)`` returns the partial values at every cutoff ``0..N``
    (leading axis of length N+1).  With a ``window`` the value at ``N`` is
    a smooth weighted average over cutoffs in ``[N/2, N]``, which damps the
    oscillating part of the tail; ``window=None`` uses the value at ``N``.
    The tail is then removed level by level assuming ``c_e / N^e`` terms for
    each exponent in ``exponents`` (leading 1/N first).
    """
    schedule = [int(n) for n in schedule]
    if len(schedule) < 3:
        raise ValueError("need at least 3 cutoffs")
    ratios = {schedule[i + 1] / schedule[i] for i in range(len(schedule) - 1)}
    if len(ratios) != 1 or min(ratios) <= 1:
        raise ValueError(f"cutoff schedule must be geometric and increasing, got {schedule}")
    ratio = ratios.pop()
    exponents = tuple(exponents)[: len(schedule) - 1]
    top = evaluator(schedule[-1])
    samples = [np.asarray(_windowed(top, N, window), dtype=np.result_type(top, float))
               for N in schedule]
    diffs = [float(np.abs(samples[i + 1] - samples[i]).max()) for i in range(len(samples) - 1)]
    monotone = all(diffs[i + 1] <= diffs[i] for i in range(len(diffs) - 1))
    level = list(samples)
    prev_level = level
    for e in exponents:
        f = ratio ** e
        prev_level = level
        level = [(f * level[i + 1] - level[i]) / (f - 1) for i in range(len(level) - 1)]
    value = level[-1]
    previous = level[-2] if len(level) > 1 else prev_level[-1]
    error = float(np.abs(value - previous).max())
    return ExtrapolationResult(value, error, monotone, tuple(samples), previous)


def tail_exponent(values, schedule) -> float:
    """Fitted q in ``|v(N) - v(rN)| ~ N^-q`` from successive differences."""
    v = [np.asarray(x) for x in values]
    d = np.array([np.abs(v[i + 1] - v[i]).max() for i in range(len(v) - 1)])
    logs = np.log(np.asarray(schedule[:-1], dtype=float))
    slope = np.polyfit(logs, np.log(d), 1)[0]
    return float(-slope)


def extrapolated_primitives(n0: int, kappa: float, a: float, schedule, *, window="bump",
                            exponents=(1, 3), trapezoid: bool = True,
                            backend: str | None = None) -> ExtrapolationResult:
    terms = shell_terms(n0, kappa, a, max(schedule), backend=backend)
    hist = partial_sums(terms, trapezoid=trapezoid)
    return extrapolate_cutoff(lambda N: hist[: N + 1], schedule, window=window, exponents=exponents)


# --- radius sweep ------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSweepPlan:
    kappa: float
    a: float
    lam: float
    n0_values: tuple[int, ...] = (4, 5, 6, 8, 12)
    cutoffs: tuple[int, ...] = (2000, 4000, 8000)
    window: str | None = "bump"
    exponents: tuple[int, ...] = (1, 3)
    trapezoid: bool = True

    def __post_init__(self):
        n0s = tuple(int(n) for n in self.n0_values)
        if len(set(n0s)) != len(n0s):
            raise ValueError(f"n0 values must be distinct: {n0s}")
        object.__setattr__(self, "n0_values", n0s)
        object.__setattr__(self, "cutoffs", tuple(int(n) for n in self.cutoffs))
        object.__setattr__(self, "exponents", tuple(self.exponents))
        for n0 in n0s:
            if n0 < 1 or np.pi * n0 / self.kappa <= self.a:
                raise ValueError(f"n0={n0} gives pi R <= a")
        if min(self.cutoffs) <= max(n0s):
            raise ValueError("every cutoff must exceed the largest n0")

    def params(self, n0: int) -> ModelParams:
        return ModelParams(self.lam, self.a, self.kappa, n0, max(self.cutoffs))


@dataclass
class RadiusEvaluation:
    n0: int
    R: float
    components: ComponentSet
    errors: dict[tuple[str, int], float]
    primitives: ExtrapolationResult


def evaluate_radius(plan: RadiusSweepPlan, n0: int, alpha_max: int = 3,
                    *, backend: str | None = None) -> RadiusEvaluation:
    """Extrapolated components at one radius, with per-component error estimates."""
    p = plan.params(n0)
    ex = extrapolated_primitives(n0, plan.kappa, plan.a, plan.cutoffs, window=plan.window,
                                 exponents=plan.exponents, trapezoid=plan.trapezoid, backend=backend)
    cs = components_from_primitives(p, ex.value, alpha_max)
    alt = components_from_primitives(p, ex.previous, alpha_max)
    errors = {(name, k): float(np.abs(cs.get(name, k) - alt.get(name, k)).max())
              for name in COMPONENTS for k in range(1, alpha_max + 1)}
    return RadiusEvaluation(n0, p.R, cs, errors, ex)


def sweep_components(plan: RadiusSweepPlan, alpha_max: int = 3, **kw) -> list[RadiusEvaluation]:
    return [evaluate_radius(plan, n0, alpha_max, **kw) for n0 in plan.n0_values]


@dataclass(frozen=True)
class SeriesCoefficient:
    """Coefficient of lambda^alpha R^-beta: the term itself is ``value / R**beta``."""

    alpha: int
    beta: int
    component: str
    value: np.ndarray
    error_estimate: float

    def __post_init__(self):
        if not 1 <= self.beta <= self.alpha:
            raise ValueError(f"need 1 <= beta <= alpha, got ({self.alpha}, {self.beta})")
        if self.error_estimate < 0:
            raise ValueError("error_estimate must be non-negative")


@dataclass
class SweepFit:
    alpha: int
    coefficients: list[SeriesCoefficient]
    spurious: dict[str, np.ndarray]       # fitted beta = alpha+1 coefficient per component
    condition: float
    radii: tuple[float, ...]
    residual: dict[str, float] = field(default_factory=dict)

    def get(self, component: str, beta: int) -> SeriesCoefficient:
        for c in self.coefficients:
            if c.component == component and c.beta == beta:
                return c
        raise KeyError((component, beta))

    def spurious_relative(self, component: str) -> float:
        scale = max((np.abs(c.value).max() for c in self.coefficients if c.component == component),
                    default=0.0)
        spur = float(np.abs(self.spurious[component]).max())
        return spur / scale if scale > 0 else spur


def radius_sweep(plan: RadiusSweepPlan, alpha: int, *, evaluations=None,
                 components=COMPONENTS, cond_limit: float = 1e10) -> SweepFit:
    """Least-squares fit of the order-``alpha`` components in powers ``R^-1..R^-(alpha+1)``.

    The extra power checks the degree bound; it needs ``alpha + 2`` radii.
    """
    if evaluations is None:
        evaluations = sweep_components(plan, alpha)
    nr = len(evaluations)
    ncol = alpha + 1
    if nr < alpha + 2:
        raise ValueError(f"alpha={alpha} needs at least {alpha + 2} radii, got {nr}")
    R = np.array([ev.R for ev in evaluations])
    A = np.stack([R ** -b for b in range(1, ncol + 1)], axis=1)
    scale = np.abs(A).max(axis=0)
    As = A / scale
    cond = float(np.linalg.cond(As))
    if cond > cond_limit:
        raise IllConditionedFit(f"radius fit condition number {cond:.3e} exceeds {cond_limit:.1e}")
    pinv = np.linalg.pinv(As) / scale[:, None]
    coeffs, spurious, resid = [], {}, {}
    for name in components:
        Y = np.stack([ev.components.get(name, alpha).ravel() for ev in evaluations])
        err = np.array([ev.errors[(name, alpha)] for ev in evaluations])
        sol, *_ = np.linalg.lstsq(As, Y, rcond=None)
        sol = sol / scale[:, None]
        fit_err = np.abs(pinv) @ err
        resid[name] = float(np.abs(A @ sol - Y).max())
        for b in range(1, alpha + 1):
            coeffs.append(SeriesCoefficient(alpha, b, name, sol[b - 1].reshape(4, 4),
                                            float(fit_err[b - 1])))
        spurious[name] = sol[alpha].reshape(4, 4)
    return SweepFit(alpha, coeffs, spurious, cond, tuple(R), resid)


def fit_series(plan: RadiusSweepPlan, alpha_max: int = 3, **kw) -> dict[int, SweepFit]:
    """Fits for every order 1..alpha_max sharing one set of radius evaluations."""
    evals = sweep_components(plan, alpha_max)
    return {a: radius_sweep(plan, a, evaluations=evals, **kw) for a in range(1, alpha_max + 1)}


# --- reference closed forms --------------------------------------------------

def _trig(p):
    ak = p.a * p.kappa
    return np.sin(2 * ak), np.cos(2 * ak), ak


def closed_form_mode_matrix(alpha: int, beta: int, component: str, p, *, corrected: bool = False) -> np.ndarray:
    """2x2 mode matrix of a reference series term (internal prefactor stripped), times ``R^beta``."""
    lam, k, a = p.lam, p.kappa, p.a
    s, c, ak = _trig(p)
    pi = np.pi
    key = (component, alpha, beta)
    if component == "v_ind":
        table = {
            (1, 1): lambda: lam * s / pi * S2,
            (2, 1): lambda: -lam ** 2 * s / (2 * pi * k) * (c * I2 + S1),
            (2, 2): lambda: lam ** 2 * a * s / (pi ** 2 * k) * ((c - s / (4 * ak)) * I2 + S1),
            (3, 1): lambda: -lam ** 3 * s ** 3 / (4 * pi * k ** 2) * S2,
            (3, 2): lambda: lam ** 3 * (c + 4 * ak * s) * s ** 2 / (4 * pi ** 2 * k ** 3) * S2,
            (3, 3): lambda: -lam ** 3 * (8 * ak * c + (16 * ak ** 2 - 1) * s) * s ** 2
                            / (16 * pi ** 3 * k ** 4) * S2,
        }
    elif component == "s_L":
        s4 = np.sin(4 * ak)
        first = np.cos(4 * ak) + 2 * ak * s4 - 4 * ak ** 2 - 1
        table = {
            (1, 1): lambda: a * lam / pi * (I2 + s / (2 * ak) * S1),
            (2, 1): lambda: 1j * lam ** 2 * a / (2 * pi * k)
                           * ((1 - s4 / (4 * ak)) * S3 + 1j * (c - s / (2 * ak)) * S2),
            (2, 2): lambda: 1j * lam ** 2 / (8 * pi ** 2 * k ** 3)
                           * (first * (S3 if corrected else I2) + 1j * 4 * ak * (s - ak * c) * S2),
        }
    elif component == "s_R":
        L = lambda b: closed_form_mode_matrix(alpha, b, "s_L", p, corrected=corrected)
        table = {
            (1, 1): lambda: L(1),
            (2, 1): lambda: L(1).conj().T,
            (2, 2): lambda: L(2).conj().T if corrected else L(2),
        }
    elif component == "s_LR":
        if 1 <= beta <= alpha:
            return np.zeros((2, 2), complex)
        table = {}
    else:
        table = {}
    if (alpha, beta) not in table:
        raise MissingOracleError(f"no reference closed form for {key}")
    return np.asarray(table[(alpha, beta)](), dtype=complex)


def appendix_oracle(alpha: int, beta: int, component: str, p, R: float | None = None,
                    *, corrected: bool = False) -> np.ndarray:
    """4x4 reference term on modes (x) internal.

    Without ``R`` the coefficient of ``R^-beta`` is returned (comparable to
    :class:`SeriesCoefficient`.value); with ``R`` the term at that radius.
    V carries (-1)^F at odd orders and S_L carries psi.  Reference S_R
    matrices are read in the sector where the V insertions act as +1, so
    they enter the faithful representation with ``(-1)^(alpha-1)``.
    """
    M = closed_form_mode_matrix(alpha, beta, component, p, corrected=corrected)
    if component == "v_ind":
        internal = FERMION_PARITY if alpha % 2 else np.eye(2)
    elif component == "s_R":
        internal = (-1) ** (alpha - 1) * PSI
    else:
        internal = PSI
    out = np.kron(M, internal)
    return out if R is None else out / R ** beta


REFERENCE_TERMS = (
    ("v_ind", 2, 1), ("v_ind", 2, 2), ("v_ind", 3, 1), ("v_ind", 3, 2), ("v_ind", 3, 3),
    ("s_L", 1, 1), ("s_L", 2, 1), ("s_L", 2, 2),
    ("s_R", 1, 1), ("s_R", 2, 1), ("s_R", 2, 2),
)


def relative_difference(A, B) -> float:
    scale = max(np.abs(A).max(initial=0.0), np.abs(B).max(initial=0.0))
    diff = float(np.abs(np.asarray(A) - np.asarray(B)).max(initial=0.0))
    return diff / scale if scale > 0 else diff


# --- limits and relations ----------------------------------------------------

def r_to_infinity(component: str, alpha_max: int, fits: dict[int, SweepFit]) -> dict[int, np.ndarray]:
    """``2 pi R`` times the beta=1 terms, per lambda order: the line-normalized limit."""
    if component in ("s0", "s0_part"):
        raise DivergentLimitError("S0 is diagonal in modes; 2 pi R S0 diverges like delta(0) ~ R")
    if component not in COMPONENTS:
        raise KeyError(component)
    return {a: 2 * np.pi * fits[a].get(component, 1).value for a in range(1, alpha_max + 1)}


def s0_pieces(p) -> dict[int, np.ndarray]:
    """``S0^(0,0) = i kappa sigma_3 psi`` and ``S0^(1,0) = -(lambda/2) psi``."""
    return {0: np.kron(1j * p.kappa * S3, PSI), 1: np.kron(-p.lam / 2 * I2, PSI)}


@dataclass(frozen=True)
class OrderRelation:
    alpha: int
    beta: int
    residual: float
    scale: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else 0.0


def graded_relations(lookup, p, alpha_max: int = 3) -> list[OrderRelation]:
    """The (alpha, beta)-resolved pieces of ``[V, S0] + V S_L - S_R V``.

    ``lookup(component, alpha, beta)`` returns the 4x4 coefficient (zero if
    absent); S0 enters through :func:`s0_pieces`.
    """
    s0 = s0_pieces(p)
    zero = np.zeros((4, 4), complex)

    def get(name, a, b):
        if a < 1 or not 1 <= b <= a:
            return zero
        return lookup(name, a, b)

    out = []
    for alpha in range(1, alpha_max + 1):
        for beta in range(1, alpha + 1):
            pieces = []
            for j in (0, 1):
                V = get("v_ind", alpha - j, beta)
                pieces += [V @ s0[j], -s0[j] @ V]
            for a1 in range(1, alpha):
                for b1 in range(1, beta):
                    V = get("v_ind", a1, b1)
                    pieces += [V @ get("s_L", alpha - a1, beta - b1),
                               -get("s_R", alpha - a1, beta - b1) @ V]
            total = sum(pieces, zero)
            scale = max(float(np.abs(x).max()) for x in pieces)
            out.append(OrderRelation(alpha, beta, float(np.abs(total).max()), scale))
    return out


def fitted_lookup(fits: dict[int, SweepFit]):
    def lookup(name, a, b):
        if a not in fits:
            return np.zeros((4, 4), complex)
        return fits[a].get(name, b).value
    return lookup


def oracle_lookup(p, *, corrected: bool = False):
    def lookup(name, a, b):
        try:
            return appendix_oracle(a, b, name, p, corrected=corrected)
        except MissingOracleError:
            return np.zeros((4, 4), complex)
    return lookup


def radius_relations(evaluations: list[RadiusEvaluation], alpha_max: int = 3):
    """Per-radius quadratic relations E1-E4 with extrapolated components."""
    return {ev.n0: check_relations(ev.components, alpha_max) for ev in evaluations}


def warn_if_nonmonotone(evaluations: list[RadiusEvaluation]) -> list[int]:
    bad = [ev.n0 for ev in evaluations if not ev.primitives.monotone]
    if bad:
        warnings.warn(f"non-monotone cutoff tail at n0={bad}", RuntimeWarning, stacklevel=2)
    return bad
