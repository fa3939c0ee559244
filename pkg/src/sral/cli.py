"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 bad input, 3 word budget
exhausted (or an uncertified bracket), 4 a hypothesis of the requested check
does not hold (the report is still written).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .elementary import (
    elem_matrix,
    elem_spectrum,
    elem_trace,
    spectral_inclusion_check,
    strong_engel_check,
)
from .errors import BudgetExceeded, HypothesisViolation, InputError, SralError
from .families import jsr_bracket, tsr_bracket
from .linalg import Contour, riesz_projection
from .ordered_pair import OrderedPairNorm, pair_norm
from .suites import SUITES, run_suite
from .triangular import product_decay, triangularize
from .words import DEFAULT_BUDGET


def _budget(args) -> int:
    if args.budget is not None:
        return int(args.budget)
    env = os.environ.get("SRAL_BUDGET")
    if env:
        try:
            return int(float(env))
        except ValueError:
            raise InputError(f"SRAL_BUDGET={env!r} is not a number") from None
    return DEFAULT_BUDGET


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_jsr(args) -> int:
    fam = io.family_from_json(io.load_json(args.family))
    br = jsr_bracket(fam, delta=args.delta, budget=_budget(args))
    _emit(args, io.dumps(br.to_dict()))
    return 0 if br.certified else BudgetExceeded.exit_code


def cmd_tsr(args) -> int:
    fam = io.family_from_json(io.load_json(args.family))
    br = tsr_bracket(fam, args.depth, seed=args.seed, budget=_budget(args))
    _emit(args, io.dumps(br.to_dict()))
    return 0


def cmd_elem(args) -> int:
    obj = io.load_json(args.operator)
    code = 0
    if args.check == "inclusion":
        if not isinstance(obj, dict) or "u" not in obj or "v" not in obj:
            raise InputError("inclusion needs a file with operators 'u' and 'v'")
        rep = spectral_inclusion_check(io.operator_from_json(obj["u"]), io.operator_from_json(obj["v"]), args.tol)
        if not rep["hypothesis_satisfied"]:
            code = 4
    else:
        T = io.operator_from_json(obj)
        if args.check == "spec":
            ev = elem_spectrum(T).sorted()
            rep = {"eigenvalues": [complex(z) for z in ev], "radius": float(np.max(np.abs(ev)))}
        elif args.check == "trace":
            rep = {"trace": elem_trace(T), "lift_trace": complex(np.trace(elem_matrix(T)))}
        else:
            rep = strong_engel_check(T, args.tol)
            if not rep["hypothesis_satisfied"]:
                code = 4
    _emit(args, io.dumps(rep))
    return code


def cmd_riesz(args) -> int:
    a = io.matrix_from_json(io.load_json(args.matrix))
    p = riesz_projection(a, Contour(complex(args.center), args.radius))
    # round-off below the quadrature tolerance is reported as exact zero
    p = np.where(np.abs(p.real) < 1e-13, 0.0, p.real) + 1j * np.where(np.abs(p.imag) < 1e-13, 0.0, p.imag)
    _emit(args, io.dumps(io.matrix_to_json(p)))
    return 0


def _generators(obj):
    if isinstance(obj, dict) and "generators" in obj:
        return io.algebra_from_json(obj)[0]
    return list(io.family_from_json(obj).members)


def cmd_triangularize(args) -> int:
    obj = io.load_json(args.generators)
    gens = _generators(obj)
    bounded = None
    if isinstance(obj, dict) and obj.get("bounded"):
        bounded = [io.matrix_from_json(m) for m in obj["bounded"]]
    chain = triangularize(gens, bounded=bounded)
    _emit(args, io.dumps(io.chain_to_json(chain)))
    return 0


def cmd_decay(args) -> int:
    obj = io.load_json(args.config)
    if not isinstance(obj, dict) or "radical" not in obj:
        raise InputError("decay needs a file with fields 'radical', 'bounded' and 'fraction'")
    radical = [io.matrix_from_json(m) for m in obj["radical"]]
    bounded = [io.matrix_from_json(m) for m in obj.get("bounded", [])]
    frac = args.fraction if args.fraction is not None else obj.get("fraction")
    if isinstance(frac, bool) or not isinstance(frac, (int, float)) or not 0 < frac < 1:
        raise InputError("fraction must be a number in (0, 1)")
    curve = product_decay(radical, bounded, float(frac), args.m_max, budget=_budget(args))
    _emit(args, curve.to_csv())
    return 0


def cmd_pair(args) -> int:
    T = io.operator_from_json(io.load_json(args.operator))
    rep = pair_norm(T, OrderedPairNorm(args.p, T.dims), seed=args.seed)
    _emit(args, io.dumps(rep.to_dict()))
    return 0


def _run_one(job):
    name, seed = job
    return run_suite(name, seed)


def cmd_verify(args) -> int:
    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise InputError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    jobs = [(n, args.seed) for n in names]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    report = {"seed": args.seed, "suites": results, "passed": all(r["passed"] for r in results)}
    text = io.dumps(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    width = max(len(n) for n in names)
    for r in results:
        sys.stdout.write(f"{r['suite']:<{width}}  {'PASS' if r['passed'] else 'FAIL'}\n")
    if not args.output:
        sys.stdout.write(text)
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sral", description="Spectral radii and operator-algebra checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("-o", "--output", help="write the report here instead of stdout")
        return p

    p = add("jsr", cmd_jsr, "joint spectral radius bracket of a family")
    p.add_argument("family")
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--budget", type=float)

    p = add("tsr", cmd_tsr, "tensor spectral radius bracket of a family")
    p.add_argument("family")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--budget", type=float)

    p = add("elem", cmd_elem, "checks on elementary operators")
    p.add_argument("operator")
    p.add_argument("check", choices=["spec", "trace", "engel", "inclusion"])
    p.add_argument("--tol", type=float, default=1e-7)

    p = add("riesz", cmd_riesz, "spectral projection for a circle")
    p.add_argument("matrix")
    p.add_argument("--center", type=complex, required=True)
    p.add_argument("--radius", type=float, required=True)

    p = add("triangularize", cmd_triangularize, "invariant chain of a nil family")
    p.add_argument("generators")

    p = add("decay", cmd_decay, "decay curve of radical-weighted products (CSV)")
    p.add_argument("config")
    p.add_argument("--fraction", type=float, help="minimum share of radical factors (overrides the file)")
    p.add_argument("--m-max", type=int, default=16)
    p.add_argument("--budget", type=float)

    p = add("pair", cmd_pair, "induced norms for operator norm and Schatten quasinorm")
    p.add_argument("operator")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=42)

    p = add("verify", cmd_verify, "run the seeded property suites")
    p.add_argument("--suite", action="append", help="suite name (repeatable); default all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SralError as exc:
        sys.stderr.write(f"sral {args.command}: {exc}\n")
        if isinstance(exc, HypothesisViolation):
            _emit(args, io.dumps({"error": type(exc).__name__, "message": str(exc), "hypothesis_satisfied": False}))
        return exc.exit_code
    except ValueError as exc:
        sys.stderr.write(f"sral {args.command}: invalid input: {exc}\n")
        return InputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
