"""Command-line front end.

Subcommands: eval (numeric value of one nested sum), derive (emit an
identity), verify (check an identity file numerically), rank (permutation
identity systems), reduce (diagram to combination), sweep (batch verify a
family up to a weight bound).

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

import argparse
import json
import os
import sys

from mpmath import mp

from . import diagrams, identities, linalg, numerics
from .compositions import iter_admissible, parse_composition


def _default_digits():
    raw = os.environ.get("MZV_PRECISION_DIGITS")
    if raw is None:
        return 12
    try:
        digits = int(raw)
    except ValueError:
        raise ValueError("MZV_PRECISION_DIGITS must be an integer, got %r" % raw)
    if digits < 1:
        raise ValueError("MZV_PRECISION_DIGITS must be positive")
    return digits


def _print_json(obj):
    print(json.dumps(obj, sort_keys=True))


def _parse_int_list(text, what):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ValueError("malformed %s: %r (expected comma-separated integers)"
                         % (what, text))


def cmd_eval(args):
    c = parse_composition(args.composition)
    digits = args.digits if args.digits else _default_digits() + 4
    if args.trunc:
        pv = numerics.eval_mzv_direct(c, args.trunc)
        method = "direct"
    elif c.signs is not None:
        # No acceleration for alternating sums; fall back to a long
        # truncated sum whose bound is still rigorous.
        pv = numerics.eval_mzv_direct(c, 10 ** 6)
        method = "direct"
    else:
        if not c.admissible:
            raise ValueError("%s diverges; no numeric value" % c.zeta_str())
        eps = args.eps if args.eps else 10.0 ** (-_default_digits())
        pv = numerics.eval_mzv_accel(c, eps)
        method = "accelerated"
    if args.json:
        _print_json({
            "bound": "%.3e" % pv.bound,
            "composition": c.to_json(),
            "method": method,
            "value": mp.nstr(pv.value, digits),
        })
    else:
        print(mp.nstr(pv.value, digits))
    return 0


def cmd_derive(args):
    identity = identities.derive(args.family, args.args, variant=args.variant)
    if args.json:
        _print_json(identity.to_json())
    else:
        print(identity)
    return 0


def _verification_report(identity, eps):
    extra = {}
    if identity.regularized:
        # Raw partial-integration identities carry zeta(1) symbols; trade
        # them for admissible terms before putting numbers in.
        comb = identities.eliminate_zeta1(identity.combination)
        report = numerics.verify_identity(comb, eps=eps)
        report["identity"] = {"family": identity.family,
                             "parameters": identity.parameters}
        extra["eliminated"] = True
    else:
        report = numerics.verify_identity(identity, eps=eps)
    report.update(extra)
    return report


def cmd_verify(args):
    if args.file == "-":
        payload = json.load(sys.stdin)
    else:
        try:
            with open(args.file) as fh:
                payload = json.load(fh)
        except OSError as exc:
            raise ValueError("cannot read identity file: %s" % exc)
        except json.JSONDecodeError as exc:
            raise ValueError("identity file is not valid JSON: %s" % exc)
    identity = identities.identity_from_json(payload)
    eps = args.eps if args.eps else 10.0 ** (-_default_digits())
    report = _verification_report(identity, eps)
    if args.json:
        _print_json(report)
    else:
        status = "PASS" if report["pass"] else "FAIL"
        print("%s  residual %s  (bound %s, eps %.1e)"
              % (status, report["residual"], report["bound"], eps))
    return 0 if report["pass"] else 1


def cmd_rank(args):
    if args.pattern:
        symbols = tuple(t.strip() for t in args.pattern.split(","))
        if not all(symbols):
            raise ValueError("malformed pattern %r" % args.pattern)
    elif args.length:
        symbols = linalg.generic_symbols(args.length)
    else:
        raise ValueError("rank needs --length or --pattern")
    system = linalg.assemble_permutation_system(symbols)
    rank = system.rank()
    if args.json:
        _print_json({
            "columns": len(system.columns),
            "length": len(symbols),
            "rank": rank,
            "rows": len(system.rows),
            "symbols": list(symbols),
        })
    else:
        print(rank)
    return 0


def _diagram_from_args(args):
    if args.seashell:
        return diagrams.build_seashell(parse_composition(args.seashell))
    if args.half_moon:
        a, b, c = _parse_int_list(args.half_moon, "half-moon labels")
        return diagrams.build_half_moon(a, b, c)
    if args.peacock:
        trunk, b1, b2 = (_parse_int_list(t, "peacock labels")
                         for t in args.peacock)
        return diagrams.build_peacock(trunk, b1, b2)
    try:
        with open(args.file) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ValueError("cannot read diagram file: %s" % exc)
    except json.JSONDecodeError as exc:
        raise ValueError("diagram file is not valid JSON: %s" % exc)
    return diagrams.diagram_from_json(payload)


def cmd_reduce(args):
    d = _diagram_from_args(args)
    comb, trace = diagrams.reduce(d, strategy=args.strategy, trace=True)
    if args.json:
        out = {
            "diagram": d.to_json(),
            "strategy": args.strategy,
            "terms": len(comb.terms),
            "value": comb.to_json(),
        }
        if args.trace:
            out["trace"] = list(trace)
        _print_json(out)
    else:
        if args.trace:
            for line in trace:
                print("# %s" % line)
        print(comb)
    return 0


def _sweep_pairs(max_weight):
    comps = list(iter_admissible(max_weight - 2))
    for left in comps:
        for right in comps:
            if left.weight + right.weight <= max_weight:
                yield left, right


def cmd_sweep(args):
    eps = args.eps if args.eps else 1e-9
    failures = []
    worst = 0.0
    count = 0
    if args.family in ("stuffle", "shuffle"):
        emit = (identities.permutation_identity if args.family == "stuffle"
                else identities.shuffle_identity)
        for left, right in _sweep_pairs(args.max_weight):
            identity = emit(left, right)
            count += 1
            label = "%s * %s" % (left.zeta_str(), right.zeta_str())
            if identity.regularized:
                failures.append({"item": label, "reason": "regularized"})
                continue
            report = numerics.verify_identity(identity, eps=eps)
            worst = max(worst, float(report["residual"]))
            if not report["pass"]:
                failures.append({"item": label, "reason": "residual",
                                 "report": report})
    elif args.family == "partial-int":
        for c in iter_admissible(args.max_weight, min_depth=2):
            count += 1
            residual = identities.partial_integration_cross_check(c.parts)
            if not residual.is_zero():
                failures.append({"item": c.zeta_str(),
                                 "reason": "nonzero symbolic residual",
                                 "terms": len(residual.terms)})
    else:
        raise ValueError("sweep families: stuffle, shuffle, partial-int")
    summary = {
        "count": count,
        "failures": failures,
        "family": args.family,
        "max_weight": args.max_weight,
    }
    if args.family != "partial-int":
        summary["worst_residual"] = "%.3e" % worst
    if args.json:
        _print_json(summary)
    else:
        if failures:
            for f in failures:
                print("FAIL  %s (%s)" % (f["item"], f["reason"]))
        tail = ("" if args.family == "partial-int"
                else ", worst residual %.3e" % worst)
        print("%d/%d passed%s" % (count - len(failures), count, tail))
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mzv",
        description="Nested harmonic sums: evaluation, identities, diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="numeric value of one nested sum")
    p.add_argument("composition", help='exponent list, e.g. "2,1" or "2,-1"')
    p.add_argument("--eps", type=float, help="accuracy target")
    p.add_argument("--trunc", type=int, metavar="N",
                   help="truncated direct sum over indices up to N")
    p.add_argument("--digits", type=int, help="printed digits")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("derive", help="emit one identity")
    p.add_argument("family", help="one of: %s" % ", ".join(sorted(identities.FAMILIES)))
    p.add_argument("args", nargs="*", help="family parameters")
    p.add_argument("--variant",
                   choices=["rightward", "leftward", "alternative"])
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("verify", help="check an identity file numerically")
    p.add_argument("file", help='identity JSON (from derive --json), or "-"')
    p.add_argument("--eps", type=float, help="accuracy target")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("rank", help="rank of a permutation identity system")
    p.add_argument("--length", type=int, help="number of generic exponents")
    p.add_argument("--pattern", help='degenerate exponents, e.g. "a,b,b"')
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("reduce", help="reduce a diagram to nested sums")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--seashell", metavar="COMP",
                   help='cycle labels from the root, e.g. "2,1"')
    g.add_argument("--half-moon", metavar="A,B,C", dest="half_moon",
                   help="two-vertex diagram with labels a; b, c")
    g.add_argument("--peacock", nargs=3, metavar=("TRUNK", "B1", "B2"),
                   help='three label lists, e.g. 0 2 2')
    g.add_argument("--file", help="diagram JSON file")
    p.add_argument("--strategy", default="auto",
                   choices=["auto", "structural", "rightward", "shuffle"])
    p.add_argument("--trace", action="store_true",
                   help="print the rewrite steps taken")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("sweep", help="batch-verify a family up to a weight")
    p.add_argument("family", choices=["stuffle", "shuffle", "partial-int"])
    p.add_argument("--max-weight", type=int, default=8)
    p.add_argument("--eps", type=float, help="accuracy target per identity")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, ArithmeticError) as exc:
        print("mzv: error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
