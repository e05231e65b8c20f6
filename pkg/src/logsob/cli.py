"""Command-line entry point: configure a space, run verifiers and sweeps, emit reports.

Exit status: 0 when every check passes, 1 when an inequality fails, 2 on a
usage or configuration error, 3 on a numerical error (tail not negligible,
class violation, failed normalization).
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .calculus import RadialFunction, TailNotNegligibleError
from .constants import conjugate, corrupted_lsc
from .families import bump, exp_decay, gaussian, gaussian_extremal, hyper_class_battery, parse_family
from .hopf_lax import (
    ClassViolationError,
    HopfLaxParams,
    hj_check,
    hj_initial_check,
    hopf_lax_bruteforce,
    hopf_lax_fast,
    semigroup_monotonicity_check,
)
from .inequalities import (
    gaussian_hyper_verify,
    gaussian_lsi_verify,
    gaussian_sharpness_sweep,
    hypercontractivity_verify,
    isoperimetry_verify,
    lsi_sharpness_sweep,
    lsi_verify,
    onedim_lsi_verify,
)
from .rearrange import InfiniteMeasureError
from .reports import VerificationReport, dumps_json, reports_to_csv
from .spaces import SpaceDescriptor, SpaceKind, angle_deficit_cone, euclidean, model_cone, synthetic_theta_profile

COMMANDS = (
    "verify-lsi",
    "verify-1d",
    "verify-hyper",
    "verify-gaussian",
    "verify-gaussian-hyper",
    "verify-isoperimetry",
    "sweep-lsi-sharpness",
    "sweep-gaussian-sharpness",
    "check-hopflax",
    "battery",
)

REQUIRED = {
    "verify-lsi": ("p", "N"),
    "verify-1d": ("p", "N"),
    "verify-hyper": ("p", "N", "alpha", "beta", "t", "t0"),
    "verify-gaussian": ("N",),
    "verify-gaussian-hyper": ("N", "alpha", "t"),
    "verify-isoperimetry": ("N",),
    "sweep-lsi-sharpness": ("p", "N"),
    "sweep-gaussian-sharpness": ("N",),
    "check-hopflax": ("p", "t"),
    "battery": (),
}

NUMERIC_ERRORS = (TailNotNegligibleError, ClassViolationError, InfiniteMeasureError, ArithmeticError, ValueError)


class UsageError(Exception):
    """Bad flags, config file or parameter values (exit status 2)."""


# --- parsing ----------------------------------------------------------------


def parse_schedule(text: str) -> np.ndarray:
    """``geometric:start..end:count`` or a comma-separated list of numbers."""
    text = str(text).strip()
    m = re.fullmatch(r"geometric:([^.:][^:]*?)\.\.([^:]+):(\d+)", text)
    if m:
        start, end, count = float(m.group(1)), float(m.group(2)), int(m.group(3))
        if not (start > 0 and end > 0 and count >= 1):
            raise UsageError(f"bad geometric schedule {text!r}")
        return np.geomspace(start, end, count)
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise UsageError(f"cannot parse schedule {text!r}") from None


def read_config_file(path: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc.strerror}") from None
    for k, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{k}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="logsob", description="Numerical checks of sharp log-Sobolev and hypercontractivity inequalities.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key = value file; flags override it")
    ap.add_argument("--space", default=None, help="euclidean-radial, model-cone or angle-deficit-cone")
    ap.add_argument("--N", dest="N", type=float)
    ap.add_argument("--avr", type=float)
    ap.add_argument("--p", type=float)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--beta", type=float)
    ap.add_argument("--t", type=float)
    ap.add_argument("--t0", type=float)
    ap.add_argument("--lambdas", type=parse_schedule)
    ap.add_argument("--t-values", dest="t_values", type=parse_schedule)
    ap.add_argument("--radii", type=parse_schedule)
    ap.add_argument("--trial-constant", dest="trial_constant", type=float)
    ap.add_argument("--synthetic-scale", dest="synthetic_scale", type=float,
                    help="sweep against a synthetic theta+ profile with this decay scale")
    ap.add_argument("--limit-tol", dest="limit_tol", type=float,
                    help="relative tolerance on the extrapolated limit of a synthetic sweep")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--function", help="gaussian:LAM, exp-decay:A, bump, class:INDEX or a CSV path")
    ap.add_argument("--points", type=int, help="grid size for check-hopflax")
    ap.add_argument("--output", help="output path (default: standard output)")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--inject-lsc-factor", dest="inject_lsc_factor", type=float, help=argparse.SUPPRESS)
    return ap


DEFAULTS = {
    "space": "model-cone",
    "avr": 1.0,
    "tol": None,
    "function": None,
    "format": "json",
    "output": "-",
    "trial_constant": 2.0,
    "limit_tol": 1e-2,
    "points": 2048,
}


@dataclass
class RunConfig:
    command: str
    space: Optional[SpaceDescriptor]
    p: Optional[float]
    alpha: Optional[float]
    beta: Optional[float]
    t: Optional[float]
    t0: Optional[float]
    lambdas: Optional[np.ndarray]
    t_values: Optional[np.ndarray]
    radii: Optional[np.ndarray]
    trial_constant: float
    synthetic_scale: Optional[float]
    limit_tol: float
    tol: Optional[float]
    input_function: Optional[str]
    points: int
    output: str
    format: str
    inject_lsc_factor: Optional[float]


def parse_config(argv: Sequence[str]) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        file_values = read_config_file(args.config)
        known = {a.dest for a in parser._actions} - {"help", "command", "config"}
        unknown = sorted(set(file_values) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        # string defaults go through each option's type conversion
        parser.set_defaults(**file_values)
        args = parser.parse_args(argv)
    values = vars(args)
    for key, default in DEFAULTS.items():
        if values.get(key) is None:
            values[key] = default
    missing = [k for k in REQUIRED[args.command] if values.get(k) is None]
    if missing:
        raise UsageError(f"{args.command} needs --{' --'.join(missing)}")
    if values["tol"] is not None and not values["tol"] > 0:
        raise UsageError("--tol must be > 0")
    if values["format"] not in ("json", "csv"):
        raise UsageError("--format must be json or csv")
    space = None
    if values.get("N") is not None:
        try:
            kind = SpaceKind.parse(values["space"])
            space = SpaceDescriptor(kind, values["N"], values["avr"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    p = values.get("p")
    if p is not None and not p > 1:
        raise UsageError("--p must be > 1")
    return RunConfig(
        command=args.command,
        space=space,
        p=p,
        alpha=values["alpha"],
        beta=values["beta"],
        t=values["t"],
        t0=values["t0"],
        lambdas=values["lambdas"],
        t_values=values["t_values"],
        radii=values["radii"],
        trial_constant=float(values["trial_constant"]),
        synthetic_scale=values["synthetic_scale"],
        limit_tol=float(values["limit_tol"]),
        tol=values["tol"],
        input_function=values["function"],
        points=int(values["points"]),
        output=values["output"],
        format=values["format"],
        inject_lsc_factor=values["inject_lsc_factor"],
    )


def resolve_function(text: Optional[str], p: float, alpha: float = 1.0, t0: float = 1.0, default: str = "gaussian:1") -> RadialFunction:
    text = default if text is None else text
    name, _, arg = text.strip().lower().partition(":")
    if name == "class":
        members = hyper_class_battery(p, alpha, t0)
        try:
            m = members[int(arg or 0)]
        except (ValueError, IndexError):
            raise UsageError(f"class index must be 0..{len(members) - 1}") from None
        return m.u
    if os.path.exists(text):
        try:
            u = RadialFunction.from_csv(text)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read function CSV {text!r}: {exc}") from None
        u.family = os.path.basename(text)
        return u
    try:
        return parse_family(text, p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def worker_count() -> int:
    cap = os.environ.get("LOGSOB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            c = int(cap)
        except ValueError:
            raise UsageError(f"LOGSOB_THREADS must be an integer, got {cap!r}") from None
        if c < 1:
            raise UsageError("LOGSOB_THREADS must be >= 1")
        n = min(n, c)
    return max(1, n)


# --- commands ---------------------------------------------------------------


@dataclass
class Outcome:
    reports: List[VerificationReport]
    records: List[dict]
    csv_text: str
    failed: bool
    errors: List[str]


def _report_outcome(reports: List[VerificationReport]) -> Outcome:
    return Outcome(reports, [r.to_record() for r in reports], reports_to_csv(reports), not all(r.passed for r in reports), [])


def _single(cfg: RunConfig) -> Outcome:
    c = cfg.command
    sp = cfg.space
    if c == "verify-1d":
        u = resolve_function(cfg.input_function, cfg.p)
        return _report_outcome([onedim_lsi_verify(u, cfg.p, sp.N, tolerance=cfg.tol)])
    if c == "verify-lsi":
        u = resolve_function(cfg.input_function, cfg.p)
        return _report_outcome([lsi_verify(u, cfg.p, sp, tolerance=cfg.tol)])
    if c == "verify-hyper":
        u = resolve_function(cfg.input_function, cfg.p, cfg.alpha, cfg.t0, default="class:0")
        return _report_outcome([hypercontractivity_verify(u, cfg.p, cfg.alpha, cfg.beta, cfg.t, cfg.t0, sp, tolerance=cfg.tol)])
    if c == "verify-gaussian":
        u = resolve_function(cfg.input_function, 2.0)
        return _report_outcome([gaussian_lsi_verify(u, sp, tolerance=cfg.tol)])
    if c == "verify-gaussian-hyper":
        u = resolve_function(cfg.input_function, 2.0, default="exp-decay:1")
        return _report_outcome([gaussian_hyper_verify(u, sp, cfg.alpha, cfg.t, tolerance=cfg.tol)])
    if c == "verify-isoperimetry":
        radii = cfg.radii if cfg.radii is not None else np.geomspace(0.1, 10.0, 9)
        return _report_outcome([isoperimetry_verify(sp, radii, tolerance=cfg.tol)])
    raise AssertionError(c)


def _sweep_lsi(cfg: RunConfig) -> Outcome:
    lambdas = cfg.lambdas if cfg.lambdas is not None else np.geomspace(1.0, 1e-3, 7)
    theta = None if cfg.synthetic_scale is None else synthetic_theta_profile(cfg.space.avr_param, cfg.synthetic_scale)
    res = lsi_sharpness_sweep(cfg.p, cfg.space.N, cfg.space, lambdas, theta_plus=theta)
    if theta is None:
        # on a cone the implied constants must not exceed the sharp one
        tol = 1e-6 if cfg.tol is None else cfg.tol
        failed = bool(np.any(res.implied_values > res.target * (1.0 + tol)))
    else:
        failed = not abs(res.limit_estimate / res.target - 1.0) <= cfg.limit_tol
    return Outcome([], [res.to_record()], res.to_csv(), failed, [])


def _sweep_gaussian(cfg: RunConfig) -> Outcome:
    lambdas = cfg.lambdas if cfg.lambdas is not None else np.geomspace(1e-1, 1e-4, 8)
    tol = 1e-6 if cfg.tol is None else cfg.tol
    try:
        res = gaussian_sharpness_sweep(cfg.space, lambdas, cfg.trial_constant, tolerance=tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Outcome([], [res.to_record()], res.to_csv(), bool(res.extras["violated"]), [])


def hopflax_reports(u: RadialFunction, params: HopfLaxParams, space: SpaceDescriptor) -> List[VerificationReport]:
    """Fast path against the brute-force oracle, the HJ inequality and monotonicity."""
    fast = hopf_lax_fast(u, params, extend=False)
    brute = hopf_lax_bruteforce(u, params, extend=False)
    gap = float(np.max(np.abs(fast.values - brute.values)))
    oracle = VerificationReport.build(
        "hopflax-oracle",
        gap,
        0.0,
        tolerance=1e-12,
        params={"p": params.p, "t": params.t, "points": int(u.grid.size), "space": space.label(), "N": space.N, "avr": space.avr_param},
        provenance=f"fast={fast.method} brute={brute.method}",
    )
    out = [oracle, hj_check(u, params), hj_initial_check(u, params.p_conj)]
    for r in out[1:]:
        r.params.setdefault("p", params.p)
    mono = semigroup_monotonicity_check(u, params, space)
    mono.params.update(p=params.p, space=space.label(), N=space.N, avr=space.avr_param)
    out.append(mono)
    return out


def _check_hopflax(cfg: RunConfig) -> Outcome:
    p = cfg.p
    t0 = cfg.t0 if cfg.t0 is not None else 2.0 * cfg.t
    try:
        params = HopfLaxParams(conjugate(p), cfg.t, t0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    base = resolve_function(cfg.input_function, p, 1.0, t0, default="class:0")
    grid = np.linspace(0.0, base.r_max, cfg.points)
    if base.evaluator is not None:
        u = RadialFunction.from_callable(base.evaluator, grid, derivative=base.analytic_derivative, breakpoints=base.breakpoints)
    else:
        u = base
    space = cfg.space or model_cone(2.0)
    return _report_outcome(hopflax_reports(u, params, space))


# --- the standard battery ---------------------------------------------------

BATTERY_P = (1.5, 2.0, 3.0)
BATTERY_N = (2.0, 2.5, 3.0, 5.0)
BATTERY_AVR = 0.5
BATTERY_HYPER_N = (2.0, 3.0)
BATTERY_HYPER_TRIPLES = ((1.0, 1.0, 0.3), (1.0, 2.0, 0.3), (0.5, 1.5, 0.2))
BATTERY_HYPER_T0 = 0.5
BATTERY_GAUSSIAN_HYPER = ((1.0, 0.5), (2.0, 1.0))


def battery_spaces(N: float) -> List[SpaceDescriptor]:
    return [euclidean(N), model_cone(N), angle_deficit_cone(N, BATTERY_AVR)]


def battery_families(p: float) -> List[RadialFunction]:
    return [gaussian(lam, p) for lam in (0.5, 1.0, 2.0)] + [bump(), exp_decay(1.0)]


@dataclass(frozen=True)
class Case:
    key: tuple
    run: Callable[[], VerificationReport]


def battery_cases(tol: Optional[float] = None) -> List[Case]:
    cases = []
    for p in BATTERY_P:
        for N in BATTERY_N:
            for lam in (0.5, 1.0, 2.0):
                cases.append(Case(("lsi-1d", p, N, f"gaussian-extremal:{lam:g}"),
                                  lambda p=p, N=N, lam=lam: onedim_lsi_verify(gaussian_extremal(p, N, lam), p, N, tolerance=tol)))
            for fam in ("bump", "exp-decay:1"):
                cases.append(Case(("lsi-1d", p, N, fam),
                                  lambda p=p, N=N, fam=fam: onedim_lsi_verify(parse_family(fam, p), p, N, tolerance=tol)))
            for sp in battery_spaces(N):
                for k, fam in enumerate(("gaussian:0.5", "gaussian:1", "gaussian:2", "bump", "exp-decay:1")):
                    cases.append(Case(("lsi", p, N, sp.label(), fam),
                                      lambda p=p, sp=sp, fam=fam: lsi_verify(parse_family(fam, p), p, sp, tolerance=tol)))
        for N in BATTERY_HYPER_N:
            for sp in battery_spaces(N):
                for alpha, beta, t in BATTERY_HYPER_TRIPLES:
                    for i in range(len(hyper_class_battery(p, alpha, BATTERY_HYPER_T0))):
                        cases.append(Case(("hypercontractivity", p, N, sp.label(), alpha, beta, t, i),
                                          lambda p=p, sp=sp, a=alpha, b=beta, t=t, i=i: _hyper_case(p, sp, a, b, t, i, tol)))
    for N in BATTERY_N:
        for sp in battery_spaces(N):
            for fam in ("gaussian:0.5", "gaussian:1", "gaussian:2", "bump", "exp-decay:1"):
                cases.append(Case(("gaussian-lsi", N, sp.label(), fam),
                                  lambda sp=sp, fam=fam: gaussian_lsi_verify(parse_family(fam, 2.0), sp, tolerance=tol)))
                for alpha, t in BATTERY_GAUSSIAN_HYPER:
                    cases.append(Case(("gaussian-hyper", N, sp.label(), fam, alpha, t),
                                      lambda sp=sp, fam=fam, a=alpha, t=t: gaussian_hyper_verify(parse_family(fam, 2.0), sp, a, t, tolerance=tol)))
            radii = np.geomspace(0.1, 10.0, 9)
            cases.append(Case(("isoperimetry", N, sp.label()), lambda sp=sp, r=radii: isoperimetry_verify(sp, r, tolerance=tol)))
            cases.append(Case(("isoperimetry-annulus", N, sp.label()),
                              lambda sp=sp, r=radii: isoperimetry_verify(sp, r, annulus=True, tolerance=tol)))
    return sorted(cases, key=lambda c: tuple(map(str, c.key)))


def _hyper_case(p, space, alpha, beta, t, index, tol):
    m = hyper_class_battery(p, alpha, BATTERY_HYPER_T0)[index]
    r = hypercontractivity_verify(m.u, p, alpha, beta, t, BATTERY_HYPER_T0, space, M=m.M, C0=m.C0, tolerance=tol)
    r.provenance = f"{r.provenance} member={m.name}"
    return r


def run_battery(tol: Optional[float] = None, workers: int = 1) -> Outcome:
    cases = battery_cases(tol)
    errors = []

    def one(case):
        try:
            return case.run()
        except NUMERIC_ERRORS as exc:
            return exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, cases))
    else:
        results = [one(c) for c in cases]
    reports = []
    for case, res in zip(cases, results):
        if isinstance(res, Exception):
            errors.append(f"{'/'.join(map(str, case.key))}: {type(res).__name__}: {res}")
        else:
            reports.append(res)
    out = _report_outcome(reports)
    out.errors = errors
    return out


def summary_table(reports: List[VerificationReport]) -> str:
    rows: Dict[str, list] = {}
    for r in reports:
        row = rows.setdefault(r.inequality_id, [0, 0, math.inf])
        row[0] += 1
        row[1] += int(r.passed)
        row[2] = min(row[2], r.deficit)
    lines = [f"{'inequality':<24}{'checks':>8}{'passed':>8}{'min deficit':>16}"]
    for key in sorted(rows):
        n, ok, worst = rows[key]
        lines.append(f"{key:<24}{n:>8}{ok:>8}{worst:>16.6g}")
    return "\n".join(lines)


# --- entry point ------------------------------------------------------------


def execute(cfg: RunConfig) -> Outcome:
    ctx = corrupted_lsc(cfg.inject_lsc_factor) if cfg.inject_lsc_factor is not None else nullcontext()
    with ctx:
        if cfg.command == "battery":
            return run_battery(cfg.tol, worker_count())
        if cfg.command == "sweep-lsi-sharpness":
            return _sweep_lsi(cfg)
        if cfg.command == "sweep-gaussian-sharpness":
            return _sweep_gaussian(cfg)
        if cfg.command == "check-hopflax":
            return _check_hopflax(cfg)
        return _single(cfg)


def _write(cfg: RunConfig, out: Outcome) -> None:
    text = out.csv_text if cfg.format == "csv" else dumps_json(out.records)
    if cfg.output in ("-", ""):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if any(a in ("-h", "--help") for a in argv):
        build_parser().print_help()
        return 0
    try:
        cfg = parse_config(argv)
        start = time.perf_counter()
        out = execute(cfg)
        _write(cfg, out)
    except UsageError as exc:
        print(f"logsob: usage error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"logsob: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"logsob: cannot write output: {exc}", file=sys.stderr)
        return 2
    if cfg.command == "battery":
        print(summary_table(out.reports), file=sys.stderr)
        print(f"{len(out.reports)} checks, {len(out.errors)} errors, {time.perf_counter() - start:.1f} s", file=sys.stderr)
    for e in out.errors:
        print(f"logsob: numerical error: {e}", file=sys.stderr)
    if out.errors:
        return 3
    failed = [r for r in out.reports if not r.passed]
    for r in failed[:10]:
        print(f"logsob: failed: {r.inequality_id} {r.params.get('space', '')} deficit={r.deficit:.6g}", file=sys.stderr)
    if len(failed) > 10:
        print(f"logsob: {len(failed) - 10} more failed checks", file=sys.stderr)
    return 1 if out.failed else 0


if __name__ == "__main__":
    sys.exit(main())
