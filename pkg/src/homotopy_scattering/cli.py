"""Command-line entry point.

Usage::

    python3 -m homotopy_scattering <command> [--config run.json] [--output out.json]
        [--format json|csv|text] [--seed N] [--alpha-max N] [--cutoff N]

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import copy
import json
import platform
import sys
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__, modesums
from .graded import GhostPolyOperator, GhostStructureError, compose, supercommutator
from .kadeishvili import (
    RandomComplexSpec, build_random_complex, homotopy_residuals, perturb_by_conjugation, verify_transfer,
)
from .line import (
    LineParams, born_series_single_delta, closed_form_SL_R, closed_form_SR_R, compare_line_vs_limit,
    heitler_check, k_matrix_single_delta, line_taylor, psi_block, boson_block, t_matrix_single_delta,
)
from .model import (
    ModelParams, ParameterError, build_h, build_Q0, build_S0, build_S1, kernel_projector, model_space,
    pauli_decompose, truncation_residual,
)
from .report import CoefficientRow, VerificationReport, emit
from .series import (
    REFERENCE_TERMS, RadiusSweepPlan, appendix_oracle, evaluate_radius, fit_series, fitted_lookup,
    graded_relations, r_to_infinity, radius_sweep, relative_difference, sweep_components,
)
from .transfer import (
    COMPONENTS, check_relations, decompose, dense_terms, full_square_residual, induced_differential,
)

COMMANDS = ("verify-relations", "series", "limit", "line", "selftest")
FORMATS = ("json", "csv", "text")


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "command": None,
    "alpha_max": 3,
    "seed": 0,
    "model": {"lambda": 0.3, "a": 1.0, "kappa": 1.0, "n0": 4, "cutoff_N": 40, "ctilde_max": 3},
    "sweep": {"n0_values": [4, 5, 6, 8, 12], "cutoffs": [2000, 4000, 8000],
              "window": "bump", "exponents": [1, 3], "trapezoid": True},
    "tolerances": {"oracle_rel": 1e-6, "relation_rel": 1e-8, "machine_abs": 1e-12, "transfer_abs": 1e-9},
    "oracle_forms": "reference",
    "line": {"lambda": 1.0, "kappa": 1.0, "a": 1.0},
    "limit": {"parameter_sets": [[1.0, 1.0, 0.3], [1.3, 0.7, 0.5], [0.8, 1.9, 0.2],
                                 [1.0, 0.4, 1.0], [2.0, 1.1, 0.4]]},
    "selftest": {"complexes": 100, "epsilon": 1e-2, "series_order": 8,
                 "dim_range": [4, 8], "grade_range": [3, 5]},
    "output": {"path": None, "format": "json"},
}


@dataclass
class RunConfig:
    command: str
    data: dict

    @property
    def tol(self) -> dict:
        return self.data["tolerances"]

    def model_params(self) -> ModelParams:
        m = self.data["model"]
        return ModelParams(float(m["lambda"]), float(m["a"]), float(m["kappa"]), int(m["n0"]),
                           int(m["cutoff_N"]), int(m["ctilde_max"]))

    def sweep_plan(self, kappa=None, a=None, lam=None) -> RadiusSweepPlan:
        m, s = self.data["model"], self.data["sweep"]
        return RadiusSweepPlan(
            float(m["kappa"] if kappa is None else kappa), float(m["a"] if a is None else a),
            float(m["lambda"] if lam is None else lam), tuple(s["n0_values"]), tuple(s["cutoffs"]),
            s["window"], tuple(s["exponents"]), bool(s["trapezoid"]))


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and base[k] is not None:
            if not isinstance(v, dict):
                raise ConfigError(f"config key {path + k!r} must be an object")
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = v
    return out


def load_config(args) -> RunConfig:
    raw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    data = _merge(DEFAULTS, raw)
    if args.command:
        data["command"] = args.command
    if args.seed is not None:
        data["seed"] = args.seed
    if args.alpha_max is not None:
        data["alpha_max"] = args.alpha_max
    if args.cutoff is not None:
        data["model"]["cutoff_N"] = args.cutoff
    if args.format is not None:
        data["output"]["format"] = args.format
    if args.output is not None:
        data["output"]["path"] = args.output
    cmd = data["command"]
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {cmd!r}")
    if data["output"]["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    for k, v in data["tolerances"].items():
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerance {k} must be positive, got {v!r}")
    if not isinstance(data["alpha_max"], int) or data["alpha_max"] < 1:
        raise ConfigError("alpha_max must be a positive integer")
    if data["oracle_forms"] not in ("reference", "corrected"):
        raise ConfigError("oracle_forms must be 'reference' or 'corrected'")
    cfg = RunConfig(cmd, data)
    # validate the physics sections the command uses
    try:
        if cmd in ("verify-relations", "series"):
            cfg.model_params()
            plan = cfg.sweep_plan()
            if cmd == "series" and len(plan.n0_values) < data["alpha_max"] + 2:
                raise ConfigError(f"alpha_max={data['alpha_max']} needs {data['alpha_max'] + 2} radii")
        if cmd == "line":
            ln = data["line"]
            LineParams(float(ln["lambda"]), float(ln["kappa"]), float(ln["a"]))
        if cmd == "limit":
            for row in data["limit"]["parameter_sets"]:
                if len(row) != 3:
                    raise ConfigError("limit parameter sets are [kappa, a, lambda]")
                cfg.sweep_plan(*row)
    except (ParameterError, ValueError, TypeError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return cfg


def provenance(cfg: RunConfig) -> dict:
    return {
        "config": cfg.data,
        "seed": cfg.data["seed"],
        "versions": {"homotopy_scattering": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "mode_sum_backend": modesums.BACKEND,
    }


# --- pipelines -----------------------------------------------------------------

def _mode_block(component: str, M4: np.ndarray) -> tuple[str, np.ndarray]:
    if component == "v_ind":
        return "F=0", boson_block(M4)
    return "psi", psi_block(M4)


def run_verify_relations(cfg: RunConfig, rep: VerificationReport) -> None:
    p = cfg.model_params()
    tol = cfg.tol
    amax = cfg.data["alpha_max"]
    space = model_space(p)
    Q0, h = build_Q0(p), build_h(p)
    ident = GhostPolyOperator.identity(space)
    rep.add("model.Q0_squared", "Q0^2", compose(Q0, Q0).norm(), tol["machine_abs"])
    rep.add("model.homotopy", "1+{h,Q0}-i pi",
            (ident + supercommutator(h, Q0) - kernel_projector(p)).norm(), tol["machine_abs"])
    rep.add("model.S0_squared", "S0^2", compose(build_S0(p), build_S0(p)).norm(), tol["machine_abs"])
    rep.add("model.S1_squared", "S1^2", compose(build_S1(p), build_S1(p)).norm(), tol["machine_abs"])

    right = dense_terms(p, amax, association="right")
    left = dense_terms(p, amax, association="left")
    scale = max(1.0, max(T.norm() for T in right))
    rep.add("transfer.association", f"T_1..T_{amax}",
            max((a - b).norm() for a, b in zip(right, left)), tol["machine_abs"] * scale)
    try:
        dense = decompose(right)
        rep.add("transfer.ghost_closure", "allowed monomials only", 0.0, tol["machine_abs"])
    except GhostStructureError as exc:
        rep.add("transfer.ghost_closure", str(exc), 1.0, tol["machine_abs"])
        return
    sep = induced_differential(p, amax, method="separable").components
    for name in COMPONENTS:
        for a in range(1, amax + 1):
            rep.add("transfer.dense_vs_separable", f"{name} alpha={a}",
                    np.abs(dense.get(name, a) - sep.get(name, a)).max(), tol["machine_abs"])

    plan = cfg.sweep_plan()
    ev = evaluate_radius(plan, p.n0, amax)
    cs = ev.components
    for r in check_relations(cs, amax):
        rep.add("relation." + r.equation, f"lambda^{r.order}", r.relative, tol["relation_rel"],
                absolute=r.residual)
    for r in full_square_residual(cs, amax):
        rep.add("relation.Q_ind_squared", f"lambda^{r.order}", r.relative, tol["relation_rel"],
                absolute=r.residual)
    for a in range(1, amax + 1):
        V = cs.get("v_ind", a)
        rep.add("component.v_ind_hermitian", f"alpha={a}", np.abs(V - V.conj().T).max(),
                tol["machine_abs"])
        rep.add("component.s_LR_zero", f"alpha={a}", np.abs(cs.get("s_LR", a)).max(), tol["machine_abs"])
        SL, SR = psi_block(cs.get("s_L", a)), psi_block(cs.get("s_R", a))
        rep.add("component.s_R_vs_s_L_transpose", f"alpha={a}", relative_difference(SR, SL.T),
                tol["relation_rel"])

    Ns = [p.cutoff_N * 2 ** j for j in range(4)]
    res = [truncation_residual(p.with_(cutoff_N=N)) for N in Ns]
    for j in range(3):
        if res[j] <= tol["machine_abs"]:
            ratio_ok, ratio = True, float("inf")
        else:
            ratio = res[j] / res[j + 1] if res[j + 1] > 0 else float("inf")
            ratio_ok = ratio >= 1.8
        rep.add("model.truncation_decay", f"N={Ns[j]}->{Ns[j + 1]}", 0.0 if ratio_ok else 1.0, 0.5,
                ratio=ratio, residual_N=res[j], residual_2N=res[j + 1])


def run_series(cfg: RunConfig, rep: VerificationReport) -> None:
    tol = cfg.tol
    amax = cfg.data["alpha_max"]
    plan = cfg.sweep_plan()
    corrected = cfg.data["oracle_forms"] == "corrected"
    evals = sweep_components(plan, amax)
    fits = {a: radius_sweep(plan, a, evaluations=evals) for a in range(1, amax + 1)}
    oracle_rel = {}
    for comp, a, b in REFERENCE_TERMS:
        if a > amax:
            continue
        o = appendix_oracle(a, b, comp, plan, corrected=corrected)
        f = fits[a].get(comp, b)
        d = relative_difference(f.value, o)
        oracle_rel[(comp, a, b)] = d
        rep.add("oracle." + comp, f"({a},{b})" + (" corrected" if corrected else ""), d,
                tol["oracle_rel"], error_estimate=f.error_estimate)
    for a, fit in fits.items():
        for comp in COMPONENTS:
            rep.add("degree_bound." + comp, f"alpha={a} beta={a + 1}", fit.spurious_relative(comp),
                    tol["oracle_rel"], condition=fit.condition)
    for r in graded_relations(fitted_lookup(fits), plan, amax):
        rep.add("relation.graded", f"({r.alpha},{r.beta})", r.relative, tol["relation_rel"],
                absolute=r.residual)
    for ev in evals:
        for r in full_square_residual(ev.components, amax):
            rep.add("relation.Q_ind_squared", f"n0={ev.n0} lambda^{r.order}", r.relative,
                    tol["relation_rel"])
    for a, fit in fits.items():
        for c in fit.coefficients:
            if c.component == "s_LR":
                continue
            sector, blk = _mode_block(c.component, c.value)
            rep.coefficients.append(CoefficientRow(
                c.alpha, c.beta, c.component, sector, blk, c.error_estimate,
                oracle_rel.get((c.component, c.alpha, c.beta))))
    if not corrected:
        rep.notes.append("reference S_L^(2,2) places its first bracket on the identity; parity allows "
                         "only sigma_2 and sigma_3 (set oracle_forms=corrected to compare with sigma_3)")


def run_limit(cfg: RunConfig, rep: VerificationReport) -> None:
    tol = cfg.tol
    eps_seen = []
    orders = {"v_ind": 3, "s_L": 2, "s_R": 2}
    for kappa, a, lam in cfg.data["limit"]["parameter_sets"]:
        plan = cfg.sweep_plan(kappa, a, lam)
        fits = fit_series(plan, 3)
        lim = {c: r_to_infinity(c, 3, fits) for c in orders}
        cmp = compare_line_vs_limit(lim, LineParams(lam, kappa, a), orders)
        eps_seen.append(cmp.epsilon)
        tag = f"kappa={kappa:g} a={a:g} lambda={lam:g}"
        rep.add("limit.convention_fit", tag, cmp.epsilon_quality, tol["oracle_rel"], epsilon=cmp.epsilon)
        for r in cmp.residuals:
            rep.add("limit." + r.component, f"{tag} alpha={r.alpha}", r.relative, tol["oracle_rel"])
    stable = len(set(eps_seen)) == 1
    rep.add("limit.convention_stable", f"epsilon={eps_seen}", 0.0 if stable else 1.0, 0.5)
    rep.notes.append(f"line-limit sign convention epsilon={eps_seen[0]} (fixed at alpha=1 from v_ind)")


def run_line(cfg: RunConfig, rep: VerificationReport) -> None:
    tol = cfg.tol
    ln = cfg.data["line"]
    p = LineParams(float(ln["lambda"]), float(ln["kappa"]), float(ln["a"]))
    T, K = t_matrix_single_delta(p), k_matrix_single_delta(p)
    rep.add("line.heitler", f"lambda={p.lam:g} kappa={p.kappa:g}", heitler_check(T, K, p.kappa),
            tol["machine_abs"], T={"re": T.real, "im": T.imag}, K=K)
    if p.lam != 0:
        rep.add("line.unitarity", "Im(1/T) - 1/(2 kappa)", abs((1 / T).imag - 1 / (2 * p.kappa)),
                tol["machine_abs"])
    if abs(p.lam / (2 * p.kappa)) < 1:
        n = 200
        rep.add("line.born_series", f"order {n}", abs(born_series_single_delta(p, n) - T),
                tol["machine_abs"] * max(1.0, abs(T)))
    rep.add("line.SR_adjoint", "S_R = S_L^dagger",
            np.abs(closed_form_SR_R(p) - closed_form_SL_R(p).conj().T).max(), tol["machine_abs"])
    coeffs = line_taylor("v_ind", p.kappa, p.a, 4)
    scale = max(np.abs(c).max() for c in coeffs)
    bad = 0.0
    for k, c in enumerate(coeffs):
        pc = pauli_decompose(c)
        wrong = [pc[0], pc[1]] if k % 2 else [pc[2]]
        bad = max(bad, max(abs(x) for x in wrong) / scale)
    rep.add("line.vind_parity", "odd powers sigma_2, even powers {1, sigma_1}", bad, tol["machine_abs"])


def run_selftest(cfg: RunConfig, rep: VerificationReport) -> None:
    tol = cfg.tol
    st = cfg.data["selftest"]
    rng = np.random.default_rng(cfg.data["seed"])
    worst_q0 = worst_h = worst_t = 0.0
    for j in range(int(st["complexes"])):
        ngr = int(rng.integers(st["grade_range"][0], st["grade_range"][1] + 1))
        dims = tuple(int(d) for d in rng.integers(st["dim_range"][0], st["dim_range"][1] + 1, size=ngr))
        seed = int(cfg.data["seed"]) * 100003 + j
        spec = RandomComplexSpec(dims, seed, float(st["epsilon"]), int(st["series_order"]))
        cx = build_random_complex(spec)
        hr = homotopy_residuals(cx)
        worst_q0 = max(worst_q0, hr["Q0^2"])
        worst_h = max(worst_h, hr["1+{h,Q0}-i pi"], hr["pi i - 1"], hr["pi Q0 i"])
        Q1 = perturb_by_conjugation(cx, spec.epsilon, seed)
        worst_t = max(worst_t, verify_transfer(cx, Q1, spec.series_order).residual)
    n = int(st["complexes"])
    rep.add("harness.Q0_squared", f"{n} complexes", worst_q0, tol["machine_abs"])
    rep.add("harness.homotopy", f"{n} complexes", worst_h, tol["machine_abs"])
    rep.add("harness.Q_ind_squared", f"{n} complexes order {st['series_order']}", worst_t,
            tol["transfer_abs"])


PIPELINES = {"verify-relations": run_verify_relations, "series": run_series, "limit": run_limit,
             "line": run_line, "selftest": run_selftest}


def run(cfg: RunConfig) -> VerificationReport:
    rep = VerificationReport(cfg.command, provenance=provenance(cfg))
    PIPELINES[cfg.command](cfg, rep)
    return rep


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="homotopy_scattering",
                                 description="Homotopy-transfer scattering checks for the circle model.")
    ap.add_argument("command", nargs="?", choices=COMMANDS,
                    help="pipeline to run (overrides the config's command)")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--output", help="report path (default: stdout)")
    ap.add_argument("--format", choices=FORMATS, help="report format (default json)")
    ap.add_argument("--seed", type=int, help="base seed for the self-test")
    ap.add_argument("--alpha-max", type=int, dest="alpha_max", help="highest lambda order")
    ap.add_argument("--cutoff", type=int, help="mode cutoff N of the model")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    rep = run(cfg)
    fmt, path = cfg.data["output"]["format"], cfg.data["output"]["path"]
    try:
        text = emit(rep, fmt, path)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return 2
    if path is None:
        sys.stdout.write(text)
    return 0 if rep.passed else 1
