"""Command-line front end.

Subcommands::

    generate   closure tensors and the theta table for a parameter file
    verify     the full residual suite; exit 1 if any check fails
    profile    per-order size of the antisymmetric flux parts, as CSV
    xmat       the 14x14 boost matrix for a velocity
    appendix2  integration-constant test on a tabulated thermo CSV

Exit status: 0 success, 1 verification failure, 2 input error.  Output is
deterministic: JSON is written with sorted keys and no timestamps.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from .closure import Beta0Ansatz, antisym_profile, check_beta0, flux_tensors
from .galilean import LABELS, build_X, matrix_to_json
from .recurrence import NormalizationError, ThetaTable, close_table, verify_table
from .ring import ExpFamily, PolynomialFamily
from .series import Multipliers, OrderError
from .solutions import SolutionParams, build_H, build_H1, build_Hstar0, build_ttHk
from .thermo import GridError, read_thermo_csv, verify_integration_constant
from .verify import ConditionReport, verify_potential

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

SAMPLE_POINT = Multipliers(Fraction(0), Fraction(2), (Fraction(0),) * 3,
                           ((Fraction(1), 0, 0), (0, Fraction(0), 0), (0, 0, Fraction(0))),
                           (Fraction(1), Fraction(0), Fraction(0)))


class InputError(Exception):
    """Malformed command-line input or input file."""


# ---------------------------------------------------------------------------
# helpers


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _load_params(path: Optional[str], seed_table: Optional[str], order: int) -> SolutionParams:
    params = SolutionParams()
    if path is not None:
        data = _load_json(path)
        if not isinstance(data, dict):
            raise InputError(f"{path}: parameter file must hold a JSON object")
        try:
            params = SolutionParams.from_json(data)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{path}: bad parameters: {exc}") from None
    if seed_table is not None:
        data = _load_json(seed_table)
        try:
            seeds = ThetaTable.from_json(data)
            res = close_table(seeds.entries, max(order, seeds.max_order), seeds.max_s)
        except (KeyError, TypeError, ValueError, NormalizationError) as exc:
            raise InputError(f"{seed_table}: bad seed table: {exc}") from None
        if not res.consistent:
            names = sorted({v.relation for v in res.conflicts})
            raise InputError(f"{seed_table}: seeds conflict with {', '.join(names)}")
        params.theta = res.table
    return params


def _point(mode: str, rng_seed: Optional[int]) -> Multipliers:
    from .series import random_rational_points

    p = SAMPLE_POINT if rng_seed is None else random_rational_points(1, rng_seed)[0]
    return p if mode == "rational" else p.as_float()


def _realization(mode: str):
    return PolynomialFamily() if mode == "rational" else ExpFamily()


def _num(x) -> str:
    return str(x) if isinstance(x, (Fraction, int)) else repr(float(x))


# ---------------------------------------------------------------------------
# subcommands


def run_generate(args) -> int:
    params = _load_params(args.params, args.seed_table, args.order)
    mode = args.mode or "rational"
    at = _point(mode, args.rng_seed)
    H = build_H(params, args.order + 2)
    T = flux_tensors(H, args.order, at, _realization(mode))
    out = {"order": args.order, "mode": mode, "point": at.to_json(), "params": params.to_json(),
           "tensors": T.to_json(),
           "antisymmetric_profile": [{"order": n, "antisym_F": _num(a), "antisym_G": _num(b)}
                                     for n, a, b in antisym_profile(T)]}
    table = params.theta_table(args.order)
    if args.out is None:
        _write(_dump({"closure_tensors": out, "theta_table": table.to_json()}), None)
    else:
        os.makedirs(args.out, exist_ok=True)
        _write(_dump(out), os.path.join(args.out, "closure_tensors.json"))
        _write(_dump(table.to_json()), os.path.join(args.out, "theta_table.json"))
    return EXIT_OK


def _report(name: str, passed: bool, max_residual=0.0, **extra) -> dict:
    out = {"condition": name, "pass": bool(passed), "max_residual": float(max_residual),
           "worst_point": None}
    out.update(extra)
    return out


def _from_condition(prefix: str, r: ConditionReport) -> dict:
    d = r.to_json()
    d["condition"] = f"{prefix}.{r.condition}"
    return d


def run_verify(args) -> int:
    params = _load_params(args.params, args.seed_table, args.order)
    n = args.order
    mode = args.mode
    symbolic = None if mode is None else mode == "rational"
    kw = dict(points=args.points, tol=args.tol, rng_seed=args.rng_seed or 0, symbolic=symbolic)
    inject = args.inject_beta0
    checks = []

    top = n + 2
    for r in verify_potential(build_H1(top), "core", n, **kw):
        checks.append(_from_condition("H1", r))
    H = build_H(params, top)
    for r in verify_potential(H, "core", n, **kw):
        checks.append(_from_condition("H", r))
    for r in verify_potential(H, "galilean", n, **kw):
        checks.append(_from_condition("H", r))
    Hs = build_Hstar0(params, top, inject)
    for r in verify_potential(Hs, "hstar0", n, **kw):
        checks.append(_from_condition("Hstar0", r))
    Hk = build_ttHk(params, top, inject)
    for r in verify_potential(Hk, "vector", n, companion=Hs, **kw):
        checks.append(_from_condition("ttHk", r))

    violations = verify_table(params.theta_table(n))
    checks.append(_report("theta_table", not violations, violations=len(violations),
                          relations=sorted({v.relation for v in violations})))

    b0 = check_beta0(Beta0Ansatz(beta0=Fraction(inject or 0)))
    checks.append(_report("beta0_obstruction", b0.solvable, beta0=str(b0.beta0),
                          solvable=b0.solvable))

    low = min(n, 2)
    T = flux_tensors(H, low, SAMPLE_POINT, PolynomialFamily())
    prof = antisym_profile(T)
    worst = max((max(a, b) for _, a, b in prof), default=0)
    checks.append(_report("low_order_flux_symmetry", worst == 0, float(worst), orders=low + 1))

    ok = all(c["pass"] for c in checks)
    report = {"order": n, "tol": args.tol, "points": args.points,
              "inject_beta0": None if inject is None else str(inject),
              "checks": checks, "failed": [c["condition"] for c in checks if not c["pass"]],
              "pass": ok}
    _write(_dump(report), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def run_profile(args) -> int:
    params = _load_params(args.params, args.seed_table, args.order)
    mode = args.mode or "rational"
    at = _point(mode, args.rng_seed)
    H = build_H(params, args.order + 2)
    T = flux_tensors(H, args.order, at, _realization(mode))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["order", "antisym_F", "antisym_G"])
    for n, a, b in antisym_profile(T):
        w.writerow([n, _num(a), _num(b)])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def _parse_velocity(text: str) -> list:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise InputError("--velocity needs three comma-separated components")
    try:
        return [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--velocity: not a rational vector: {text!r}") from None


def run_xmat(args) -> int:
    if args.velocity is None:
        raise InputError("xmat needs --velocity")
    v = _parse_velocity(args.velocity)
    out = {"velocity": [str(x) for x in v], "labels": LABELS, "X": matrix_to_json(build_X(v))}
    _write(_dump(out), args.out)
    return EXIT_OK


def run_appendix2(args) -> int:
    if args.thermo is None:
        raise InputError("appendix2 needs --thermo")
    try:
        table = read_thermo_csv(args.thermo)
    except OSError as exc:
        raise InputError(f"cannot read {args.thermo}: {exc.strerror}") from None
    rep = verify_integration_constant(table, args.tol)
    _write(_dump(rep.to_json()), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {"generate": run_generate, "verify": run_verify, "profile": run_profile,
            "xmat": run_xmat, "appendix2": run_appendix2}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="closure14", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--order", type=int, default=4, help="deviation order (default 4)")
    ap.add_argument("--params", help="SolutionParams JSON file")
    ap.add_argument("--seed-table", help="theta seed table JSON, closed before use")
    ap.add_argument("--thermo", help="thermo CSV (appendix2)")
    ap.add_argument("--tol", type=float, default=1e-9, help="residual tolerance")
    ap.add_argument("--points", type=int, default=100, help="random points for numeric checks")
    ap.add_argument("--rng-seed", type=int, default=None, help="seed for sampled points")
    ap.add_argument("--out", help="output file (verify, profile, xmat, appendix2) or directory "
                                  "(generate); default stdout")
    ap.add_argument("--mode", choices=["rational", "float"], default=None)
    ap.add_argument("--velocity", help="boost velocity for xmat, e.g. 1,0,1/2")
    ap.add_argument("--inject-beta0", type=Fraction, default=None,
                    help="force a beta_0 into the vector and scalar potentials (verify)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.order < 0:
            raise InputError("--order must be non-negative")
        if not args.tol > 0:
            raise InputError("--tol must be positive")
        if args.points < 1:
            raise InputError("--points must be at least 1")
        return COMMANDS[args.command](args)
    except (InputError, GridError, OrderError) as exc:
        print(f"closure14: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"closure14: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
