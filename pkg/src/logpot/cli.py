"""Command line front end: ``logpot solve | hilbert | verify | sweep``.

Exit codes: 0 success, 1 usage error, 2 solver did not converge,
3 a requested verification failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import diagnostics
from .fields import parse_field
from .grid import make_grid, normalize, read_csv
from .hilbert import hilbert_pv
from .potential import estimate_F, variational_residuals
from .solver import EquilibriumResult, SolverOptions, solve_equilibrium, uniqueness_gap

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED, EXIT_VERIFY_FAILED = 0, 1, 2, 3

CHECKS = ("kkt", "tricomi", "orthogonality", "gradient-identity")
EQ_TOL = 2e-2
INEQ_TOL = 1e-3
TRICOMI_TOL = 1e-2
ORTH_TOL = 1e-2
GRAD_TOL = 5e-2

log = logging.getLogger("logpot")


class UsageError(Exception):
    pass


def _domain(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=SolverOptions.kkt_tol, help="relative KKT tolerance")
    p.add_argument("--max-iters", type=int, default=SolverOptions.max_iters)
    p.add_argument("--threshold", type=float, default=SolverOptions.support_threshold,
                   help="relative support threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logpot", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized starts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an equilibrium measure")
    p.add_argument("--field", required=True)
    p.add_argument("--domain", type=_domain, required=True, help="lo:hi")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--uniqueness", action="store_true",
                   help="also rerun from a random start and report the L1 gap")
    _add_solver_flags(p)

    p = sub.add_parser("hilbert", help="Hilbert transform of x,value samples")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("spectral", "pv"), default="spectral")

    p = sub.add_parser("verify", help="check a saved result against the variational identities")
    p.add_argument("--result", required=True)
    p.add_argument("--field", help="defaults to the field stored in the result")
    p.add_argument("--checks", default=",".join(CHECKS))

    p = sub.add_parser("sweep", help="solve on growing truncations (-L, L)")
    p.add_argument("--field", required=True)
    p.add_argument("--Ls", type=_float_list, required=True)
    p.add_argument("--spacing", type=float, default=0.02)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(p)
    return parser


def _options(args) -> SolverOptions:
    try:
        return SolverOptions(max_iters=args.max_iters, kkt_tol=args.tol,
                             support_threshold=args.threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _field(spec: str):
    try:
        return parse_field(spec)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args) -> int:
    fld = _field(args.field)
    opts = _options(args)
    lo, hi = args.domain
    t0 = time.perf_counter()
    try:
        result = solve_equilibrium(fld, lo, hi, args.n, opts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    try:
        result.save(args.out)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None
    print(f"field={fld.spec} n={args.n} iterations={result.iterations} "
          f"converged={result.converged} ({elapsed:.2f}s)")
    print(f"F={result.F:.10g} kkt_residual={result.kkt_residual:.3g}")
    print("support=" + " ".join(f"[{a:.6g}, {b:.6g}]" for a, b in result.support))
    print(f"eq_residual_max={result.residuals.eq_residual_max:.3g} "
          f"ineq_violation_max={result.residuals.ineq_violation_max:.3g}")
    if args.uniqueness:
        gap = uniqueness_gap(fld, lo, hi, args.n, opts, seed=args.seed)
        print(f"uniqueness L1 gap={gap:.3g} (seed {args.seed})")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_hilbert(args) -> int:
    try:
        f = read_csv(args.inp)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    try:
        hilbert_pv(f, args.method).to_csv(args.out)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def run_checks(result: EquilibriumResult, fld, checks) -> list[tuple[str, bool, str]]:
    """Evaluate the named checks; returns ``(name, passed, detail)`` triples."""
    out = []
    thr = result.options.support_threshold
    for name in checks:
        if name == "kkt":
            F = estimate_F(result.measure, fld, thr)
            rep = variational_residuals(result.measure, fld, F, thr)
            ok = rep.eq_residual_max <= EQ_TOL and rep.ineq_violation_max <= INEQ_TOL
            detail = (f"eq_residual_max={rep.eq_residual_max:.3g} (<= {EQ_TOL}) "
                      f"ineq_violation_max={rep.ineq_violation_max:.3g} (<= {INEQ_TOL}) F={F:.6g}")
        elif name == "tricomi":
            scalar, pointwise = diagnostics.result_tricomi(result)
            l2 = diagnostics.l2_mass(diagnostics.sqrt_density(result))
            ok = abs(scalar) <= TRICOMI_TOL * l2 and pointwise <= TRICOMI_TOL
            detail = f"|int f Hf|={abs(scalar):.3g} pointwise={pointwise:.3g} (<= {TRICOMI_TOL})"
        elif name == "orthogonality":
            f = diagnostics.sqrt_density(result, pad=diagnostics.RESULT_PAD)
            defect = diagnostics.orthogonality_defect(f)
            l2 = diagnostics.l2_mass(f)
            ok = abs(defect) <= ORTH_TOL * l2
            detail = f"|int f Hf|={abs(defect):.3g} (<= {ORTH_TOL} * {l2:.6g})"
        elif name == "gradient-identity":
            res = diagnostics.gradient_identity_residual(result, fld)
            ok = res <= GRAD_TOL
            detail = f"max|V' - Hf|={res:.3g} (<= {GRAD_TOL})"
        else:
            raise UsageError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
        out.append((name, bool(ok), detail))
    return out


def cmd_verify(args) -> int:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(CHECKS)
    if unknown or not checks:
        raise UsageError(f"unknown checks {sorted(unknown)}; choose from {', '.join(CHECKS)}")
    try:
        data = json.loads(open(args.result).read())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read result: {exc}") from None
    # weights may have been edited by hand; renormalize instead of rejecting
    try:
        grid = make_grid(data["grid"]["lo"], data["grid"]["hi"], data["grid"]["n"])
        data["weights"] = normalize(np.asarray(data["weights"], float), grid).weights.tolist()
        result = EquilibriumResult.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed result file: {exc}") from None
    fld = _field(args.field or result.field_spec)
    all_ok = True
    for name, ok, detail in run_checks(result, fld, checks):
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def cmd_sweep(args) -> int:
    fld = _field(args.field)
    opts = _options(args)
    try:
        report = diagnostics.truncation_sweep(fld, args.Ls, args.spacing, opts, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        report.save(args.out, args.csv)
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from None
    for r in report.rows:
        print(f"L={r.L:g} n={r.n} l2_mass={r.l2_mass:.6g} F={r.F:.6g} "
              f"support_fraction={r.support_fraction:.3f} converged={r.converged}")
    print(f"verdict: {report.verdict.value}")
    return EXIT_OK if all(r.converged for r in report.rows) else EXIT_NOT_CONVERGED


COMMANDS = {"solve": cmd_solve, "hilbert": cmd_hilbert, "verify": cmd_verify, "sweep": cmd_sweep}


def _join_negative_values(argv: list[str]) -> list[str]:
    # "--domain -40:40" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--domain", "--Ls") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LOGPOT_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"logpot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
