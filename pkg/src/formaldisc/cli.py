"""Command-line interface.

Subcommands: weyl mul|comm|iota, poisson, tower check, cohomology dims|class,
darboux normalize|transport, verify <suite>.  Exit codes: 0 success, 1 a
check failed, 2 usage error.  Reports carry `"schema": 1` and an echoed seed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import cohomology, darboux, suites, tower
from .errors import UsageError
from .exprs import EvalContext, eval_form, eval_poly, eval_weyl
from .reports import _jsonable
from .series import PoissonBivector, poisson_bracket
from .weyl import TruncationSpec, commutator, iota, star


def _add_common(parser, p_default=2, n_default=6):
    parser.add_argument("--d", type=int, default=1, help="disc dimension d")
    parser.add_argument("--p", type=int, default=p_default, help="h-order truncation")
    parser.add_argument("--N", type=int, default=n_default, help="weight cutoff")
    parser.add_argument("--seed", type=int, default=2026, help="sweep seed")
    parser.add_argument("--json", metavar="PATH", help="write a JSON report/result")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="formaldisc",
        description="Exact truncated Weyl algebra, Lie tower, cohomology and "
        "formal Darboux toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    weyl = sub.add_parser("weyl", help="Weyl algebra operations")
    weyl_sub = weyl.add_subparsers(dest="op", required=True)
    for op, nargs in (("mul", 2), ("comm", 2), ("iota", 1)):
        wp = weyl_sub.add_parser(op)
        wp.add_argument("exprs", nargs=nargs, metavar="EXPR")
        _add_common(wp)

    poisson = sub.add_parser("poisson", help="Poisson bracket of two functions")
    poisson.add_argument("f", metavar="F")
    poisson.add_argument("g", metavar="G")
    poisson.add_argument(
        "--form", help="symplectic form expression (default: standard bivector)"
    )
    _add_common(poisson)

    towp = sub.add_parser("tower", help="Lie tower checks")
    tow_sub = towp.add_subparsers(dest="op", required=True)
    check = tow_sub.add_parser("check")
    check.add_argument(
        "--inject-fault",
        action="store_true",
        help="corrupt one structure constant first (the report must fail)",
    )
    _add_common(check)

    coh = sub.add_parser("cohomology", help="Chevalley-Eilenberg computations")
    coh_sub = coh.add_subparsers(dest="op", required=True)
    dims = coh_sub.add_parser("dims")
    dims.add_argument(
        "--algebra", choices=("H", "A", "sp", "W"), default="H", help="which algebra"
    )
    dims.add_argument("--module", choices=("trivial",), default="trivial")
    dims.add_argument("--degrees", default="0,1,2", help="comma list of degrees")
    _add_common(dims, n_default=5)
    cls = coh_sub.add_parser("class")
    cls.add_argument(
        "--which", choices=("omega", "obstruction"), default="omega"
    )
    _add_common(cls)

    dar = sub.add_parser("darboux", help="formal Darboux normalization")
    dar_sub = dar.add_subparsers(dest="op", required=True)
    norm = dar_sub.add_parser("normalize")
    norm.add_argument("--form", required=True, help="symplectic form expression")
    _add_common(norm, n_default=8)
    trans = dar_sub.add_parser("transport")
    trans.add_argument("--form", required=True)
    trans.add_argument("--a", required=True)
    trans.add_argument("--b", required=True)
    _add_common(trans)

    verify = sub.add_parser("verify", help="run a verification suite")
    verify.add_argument("suite", choices=suites.SUITES)
    verify.add_argument("--inject-fault", action="store_true")
    _add_common(verify)

    return parser


def _emit(payload, path):
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    return text


def _result_payload(command, params, **results):
    return {
        "schema": 1,
        "command": command,
        "params": params,
        **{k: _jsonable(v) for k, v in results.items()},
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    command = args.command

    if command == "weyl":
        spec = TruncationSpec(args.d, args.p, args.N)
        params = {"d": args.d, "p": args.p, "N": args.N}
        if args.op == "mul":
            a, b = (eval_weyl(e, spec) for e in args.exprs)
            result = star(a, b)
        elif args.op == "comm":
            a, b = (eval_weyl(e, spec) for e in args.exprs)
            result = commutator(a, b)
        else:
            result = iota(eval_weyl(args.exprs[0], spec))
        print(result)
        if args.json:
            _emit(
                _result_payload(f"weyl {args.op}", params, result=result.to_json()),
                args.json,
            )
        return 0

    if command == "poisson":
        ctx = EvalContext(args.d, args.N)
        f, g = eval_poly(args.f, ctx), eval_poly(args.g, ctx)
        if args.form:
            fs = darboux.check_symplectic(eval_form(args.form, ctx))
            theta = darboux.form_to_bivector(fs)
        else:
            theta = PoissonBivector.standard(args.d, args.N)
        result = poisson_bracket(f, g, theta)
        print(result)
        if args.json:
            _emit(
                _result_payload(
                    "poisson",
                    {"d": args.d, "N": args.N},
                    result=result.to_json(),
                ),
                args.json,
            )
        return 0

    if command == "tower":
        report = tower.commu_diagram_check(
            args.d, args.p, args.N, corrupt=args.inject_fault
        )
        print(report.render_text())
        if args.json:
            _emit(report.to_json(), args.json)
        return report.exit_code

    if command == "cohomology":
        return _cohomology_command(args)

    if command == "darboux":
        return _darboux_command(args)

    if command == "verify":
        report = suites.run_suite(
            args.suite,
            d=args.d,
            p=args.p,
            n=args.N,
            seed=args.seed,
            inject_fault=args.inject_fault,
        )
        print(report.render_text())
        if args.json:
            _emit(report.to_json(), args.json)
        return report.exit_code

    raise UsageError(f"unknown command {command}")


def _pick_algebra(name, d, p, n):
    if name == "H":
        return tower.build_h(d, n)
    if name == "A":
        return tower.build_a_poisson(d, n)
    if name == "W":
        return tower.build_w(d, n)
    sp, _ = tower.sp_subalgebra(tower.build_derd_level(d, min(p, 1), max(n, 4)))
    return sp


def _cohomology_command(args) -> int:
    started = time.monotonic()
    if args.op == "dims":
        algebra = _pick_algebra(args.algebra, args.d, args.p, args.N)
        module = cohomology.trivial_module(algebra)
        degrees = [int(tok) for tok in args.degrees.split(",") if tok.strip()]
        table = {}
        for k in degrees:
            weights = sorted(
                {
                    sum(algebra.weights[i] for i in idx)
                    for idx in _k_subsets(algebra.dim, k)
                }
            )
            for w in weights:
                dim = cohomology.cohomology_dim(module, k, w)
                if dim:
                    table[f"H^{k}(w={w})"] = dim
        payload = _result_payload(
            "cohomology dims",
            {"algebra": args.algebra, "d": args.d, "N": args.N, "module": "trivial"},
            dimensions=table,
            duration_s=round(time.monotonic() - started, 3),
        )
        print(_emit(payload, args.json))
        return 0

    if args.which == "omega":
        cls = cohomology.omega_class(args.d, args.N)
        nonzero = cls.is_nonzero()
        payload = _result_payload(
            "cohomology class omega",
            {"d": args.d, "N": args.N},
            degree=cls.degree,
            weight=cls.weight,
            nonzero=nonzero,
            support={
                str(idx): {str(m): str(c) for m, c in vec.items()}
                for idx, vec in cls.representative.values.items()
            },
        )
        print(_emit(payload, args.json))
        return 0 if nonzero else 1

    obs = tower.tower_obstruction(args.d, args.p, args.N)
    ok = cohomology.is_cocycle(obs.cochain)
    payload = _result_payload(
        "cohomology class obstruction",
        {"d": args.d, "p": args.p, "N": args.N},
        cocycle=ok,
        support_pairs=len(obs.cochain.values),
    )
    print(_emit(payload, args.json))
    return 0 if ok else 1


def _k_subsets(n, k):
    from itertools import combinations

    return combinations(range(n), k)


def _darboux_command(args) -> int:
    ctx = EvalContext(args.d, args.N)
    fs = darboux.check_symplectic(eval_form(args.form, ctx))
    if args.op == "normalize":
        phi = darboux.darboux_normalize(fs)
        residual = darboux.pullback_residual(fs, phi)
        print("coordinate change:")
        print(f"  {phi}")
        print(f"verification residual: {residual if not residual.is_zero() else '0'}")
        if args.json:
            _emit(
                _result_payload(
                    "darboux normalize",
                    {"d": args.d, "N": args.N},
                    phi=phi.to_json(),
                    residual_zero=residual.is_zero(),
                ),
                args.json,
            )
        return 0 if residual.is_zero() else 1

    deep = darboux.check_symplectic(
        darboux.lift_form(fs.form, args.N + 2)
    )
    phi = darboux.darboux_normalize(deep)
    phi_inv = phi.inverse()
    spec = TruncationSpec(args.d, max(args.p, 1), phi.cutoff)
    a = eval_poly(args.a, ctx).lifted(phi.cutoff)
    b = eval_poly(args.b, ctx).lifted(phi.cutoff)
    product = darboux.transported_product_symbol(phi, a, b, spec, phi_inv).truncated(
        args.N
    )
    print(product)
    if args.json:
        _emit(
            _result_payload(
                "darboux transport",
                {"d": args.d, "p": args.p, "N": args.N},
                result=product.to_json(),
            ),
            args.json,
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
