"""Command-line interface.

Subcommands: list, verify, truncation, derive, search, integrate, converge,
stability.  Exit code 0 on success, 1 on domain errors (unknown scheme,
unreachable horizon, bad input files), 2 on usage errors.  A failed
verification is a finding, not an error: `verify` exits 0 either way.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from fractions import Fraction

from . import __version__, analysis, derive, harness
from . import scheme as sch
from .exact import rat_str
from .integrate import integrate as run_integration
from .integrate import problem as load_problem


def _rat(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _rat_list(text: str) -> list[Fraction]:
    return [_rat(tok) for tok in text.split(",") if tok.strip()]


def _range_pair(text: str) -> tuple[Fraction, Fraction]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    return _rat(parts[0]), _rat(parts[1])


def _fix_pair(text: str) -> tuple[int, Fraction]:
    parts = text.split("=")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected index=value, got {text!r}")
    try:
        idx = int(parts[0])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad component index {parts[0]!r}") from None
    return idx, _rat(parts[1])


def _load_scheme(name: str) -> sch.Scheme:
    if name in sch.BUILTIN_NAMES:
        return sch.builtin(name)
    if os.path.exists(name):
        return sch.load(name)
    raise ValueError(
        f"unknown scheme {name!r}; builtins: {', '.join(sch.BUILTIN_NAMES)}"
    )


def _vec_str(v) -> str:
    return "(" + ", ".join(rat_str(x) for x in v) + ")"


def _print_matrix(label, M):
    print(f"{label} =")
    width = max(len(rat_str(x)) for row in M for x in row)
    for row in M:
        print("  [" + "  ".join(rat_str(x).rjust(width) for x in row) + "]")


# ----- subcommands ----------------------------------------------------------


def cmd_list(args) -> int:
    print(f"{'name':10s} {'s':>2s} {'q':>2s}  {'EIS':3s}  abscissae")
    for name in sch.BUILTIN_NAMES:
        scheme = sch.builtin(name)
        rep = analysis.verify_conditions(scheme)
        eis = "yes" if rep.all_pass else "no"
        print(
            f"{name:10s} {scheme.s:2d} {rep.q:2d}  {eis:3s}  "
            f"{_vec_str(scheme.c_in)} -> {_vec_str(scheme.c_out)}"
        )
    return 0


def _condition_line(label: str, rec: analysis.ConditionRecord) -> str:
    if rec.passed is None:
        return f"{label} NOT EVALUATED (requires C1 and C2)"
    if label == "C1":
        detail = f"rank={rec.witness}"
    elif label == "C2":
        detail = f"row_sums={_vec_str(rec.witness)}"
    elif label == "C3":
        detail = f"trace={rat_str(rec.witness)}"
    else:
        detail = f"eis_residual={rat_str(rec.witness)}"
    return f"{label} {rec.status} {detail}"


def cmd_verify(args) -> int:
    scheme = _load_scheme(args.scheme)
    rep = analysis.verify_conditions(scheme)
    if args.json:
        import json

        doc = {
            "scheme": rep.scheme_name,
            "conditions": {
                label: {
                    "status": rec.status,
                    "witness": None
                    if rec.witness is None
                    else (
                        _vec_str(rec.witness)
                        if isinstance(rec.witness, tuple)
                        else rat_str(rec.witness)
                        if isinstance(rec.witness, Fraction)
                        else rec.witness
                    ),
                }
                for label, rec in rep.conditions.items()
            },
            "q": rep.q,
            "leading": [rat_str(x) for x in rep.leading],
            "a": None if rep.a is None else [rat_str(x) for x in rep.a],
            "eis_residual": None if rep.eis_residual is None else rat_str(rep.eis_residual),
            "error_inhibiting": rep.all_pass,
        }
        print(json.dumps(doc, indent=2))
        return 0
    print(f"scheme {rep.scheme_name}")
    for label in ("C1", "C2", "C3", "C4"):
        print(_condition_line(label, rep.conditions[label]))
    print(f"truncation order q={rep.q}, leading residual d_{rep.q + 1} = {_vec_str(rep.leading)}")
    print(f"error inhibiting: {'yes' if rep.all_pass else 'no'}")
    return 0


def cmd_truncation(args) -> int:
    scheme = _load_scheme(args.scheme)
    table = analysis.residual_table(scheme, args.pmax)
    for p in sorted(table):
        print(f"d_{p} = {_vec_str(table[p])}")
    order = analysis.truncation_order(scheme, args.pmax)
    if order.saturated:
        print(f"truncation order >= {order.q} (saturated; raise --pmax)")
    else:
        print(f"truncation order q={order.q}")
    return 0


def _abscissae(args, n_components: int):
    c_in = args.cin
    if c_in is None:
        s = n_components
        c_in = [Fraction(s - 1 - j, s) for j in range(s)]
    return c_in, args.cout


def cmd_derive(args) -> int:
    a = args.a
    if args.s is not None and args.s != len(a):
        raise ValueError(f"--s {args.s} disagrees with --a of length {len(a)}")
    c_in, c_out = _abscissae(args, len(a))
    result = derive.derive_scheme(a, c_in, c_out)
    scheme = derive.assemble(a, c_in, c_out)
    print(f"a = {_vec_str(result.a)}")
    print(f"c_in = {_vec_str(scheme.c_in)}, c_out = {_vec_str(scheme.c_out)}")
    _print_matrix("B", result.B)
    print(f"achieved truncation order q={result.achieved_order}")
    print(f"eis_residual = {rat_str(result.eis_residual)}")
    if args.out:
        sch.save(scheme, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_search(args) -> int:
    lo, hi = args.range
    if args.s == 2:
        c_in, c_out = _abscissae(args, 2)
        roots = derive.search_s2(c_in, c_out, (lo, hi), args.samples)
    else:
        if args.fix is None:
            raise ValueError("--fix index=value is required for --s 3")
        idx, val = args.fix
        c_in, c_out = _abscissae(args, 3)
        roots = derive.search_s3_slice(idx, val, (lo, hi), args.samples, c_in, c_out)
    if not roots:
        print("no roots in range")
        return 0
    for i, root in enumerate(roots):
        kind = "exact" if root.exact else "bisected"
        result = derive.derive_scheme(root.a, c_in, c_out)
        print(
            f"root {i}: param={rat_str(root.param)} ({float(root.param):.17g}, {kind}), "
            f"a={_vec_str(root.a)}, q={result.achieved_order}, "
            f"eis_residual={rat_str(result.eis_residual)}"
        )
        if args.out_dir:
            scheme = derive.assemble(root.a, c_in, c_out, name=f"candidate_s{args.s}_{i}")
            path = os.path.join(args.out_dir, f"candidate_s{args.s}_{i}.json")
            sch.save(scheme, path)
            print(f"  wrote {path}")
    return 0


def cmd_integrate(args) -> int:
    scheme = _load_scheme(args.scheme)
    prob = load_problem(args.problem)
    traj = run_integration(scheme, prob, args.dt, float(args.T), n_sub=args.nsub)
    if args.out:
        m = prob.dim
        lines = ["t," + ",".join(f"component_{k}" for k in range(m))]
        for block in traj.blocks:
            row = [format(block.t, ".17g")]
            row += [format(v, ".17g") for v in block.values[scheme.s - 1]]
            lines.append(",".join(row))
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.out}")
    final = traj.final
    print(f"final base time t={final.t:.17g} after {final.n} steps of dt={traj.dt:.17g}")
    for j in range(scheme.s):
        vals = ", ".join(format(v, ".17g") for v in final.values[j])
        line = f"  c_in={rat_str(scheme.c_in[j])}: ({vals})"
        if prob.exact is not None:
            ref = prob.exact(final.t + float(scheme.c_in[j]) * traj.dt)
            err = max(abs(final.values[j][k] - ref[k]) for k in range(prob.dim))
            line += f"  |error|={err:.3e}"
        print(line)
    return 0


def cmd_converge(args) -> int:
    scheme = _load_scheme(args.scheme)
    prob = load_problem(args.problem)
    dts = [float(d) for d in args.dts]
    report = harness.converge(scheme, prob, dts, float(args.T))
    print(f"{scheme.name} on {prob.name}, T={float(args.T):g}, reference: {report.reference}")
    s = scheme.s
    header = f"{'dt':>12s} " + " ".join(f"{'err[' + str(j) + ']':>12s}" for j in range(s))
    if report.lte is not None:
        header += " " + " ".join(f"{'lte[' + str(j) + ']':>12s}" for j in range(s))
    print(header)
    for i, dt in enumerate(report.dts):
        row = f"{dt:12.6g} " + " ".join(f"{e:12.4e}" for e in report.global_err[i])
        if report.lte is not None:
            row += " " + " ".join(f"{v:12.4e}" for v in report.lte[i])
        print(row)
    slopes = ", ".join(f"{x:.3f}" for x in report.global_slopes)
    print(f"global slopes: [{slopes}]  max-norm: {report.maxnorm_global_slope:.3f}")
    if report.lte_slopes is not None:
        slopes = ", ".join(f"{x:.3f}" for x in report.lte_slopes)
        print(f"lte slopes:    [{slopes}]  max-norm: {report.maxnorm_lte_slope:.3f}")
    if args.csv:
        harness.emit_csv(report, args.csv)
        print(f"wrote {args.csv}")
    if args.plot:
        harness.emit_plot_script(report, args.plot)
        print(f"wrote {args.plot}")
    return 0


def cmd_stability(args) -> int:
    scheme = _load_scheme(args.scheme)
    re_lo, re_hi = args.re
    im_lo, im_hi = args.im
    re_vals, im_vals, rho = analysis.stability_scan(
        scheme, (float(re_lo), float(re_hi)), (float(im_lo), float(im_hi)), args.n
    )
    lines = ["re,im,rho"]
    for i, y in enumerate(im_vals):
        for j, x in enumerate(re_vals):
            lines.append(f"{x:.17g},{y:.17g},{rho[i, j]:.17g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({args.n}x{args.n} grid)")
    else:
        sys.stdout.write(text)
    return 0


# ----- parser ---------------------------------------------------------------


def _allow_leading_minus(parser: argparse.ArgumentParser) -> None:
    # Values like -1/6,7/6 or -3:3 start with '-' but are data, not flags.
    # argparse only waves through plain negative numbers; widen its matcher
    # to anything that starts with a digit after the minus (no option of ours
    # does).  Falls back silently on interpreters without the attribute, where
    # the --flag=value form still works.
    if hasattr(parser, "_negative_number_matcher"):
        parser._negative_number_matcher = re.compile(r"^-\d")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="blockstep",
        description="Error-inhibiting explicit block one-step ODE schemes: "
        "verify conditions, derive candidates, run convergence studies.",
        epilog="Values starting with '-' can always be passed as --flag=value.",
    )
    _allow_leading_minus(p)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    class _Sub(argparse.ArgumentParser):
        def __init__(self, *a, **kw):
            super().__init__(*a, **kw)
            _allow_leading_minus(self)

    sub = p.add_subparsers(dest="command", required=True, metavar="command",
                           parser_class=_Sub)

    q = sub.add_parser("list", help="list builtin schemes")
    q.set_defaults(func=cmd_list)

    q = sub.add_parser("verify", help="check conditions C1-C4 for a scheme")
    q.add_argument("scheme", help="builtin name or scheme JSON file")
    q.add_argument("--json", action="store_true", help="machine-readable output")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("truncation", help="print residual vectors d_p and the order")
    q.add_argument("scheme", help="builtin name or scheme JSON file")
    q.add_argument("--pmax", type=int, default=6, help="highest order to print")
    q.set_defaults(func=cmd_truncation)

    q = sub.add_parser("derive", help="solve the order conditions for B given the row a")
    q.add_argument("--a", type=_rat_list, required=True, help="comma-separated rationals")
    q.add_argument("--s", type=int, help="block size (checked against --a)")
    q.add_argument("--cin", type=_rat_list, help="input abscissae (default (s-1)/s,...,0)")
    q.add_argument("--cout", type=_rat_list, help="output abscissae (default cin + 1)")
    q.add_argument("--out", help="write the assembled scheme JSON here")
    q.set_defaults(func=cmd_derive)

    q = sub.add_parser("search", help="find roots of the error-inhibiting constraint")
    q.add_argument("--s", type=int, choices=(2, 3), default=2)
    q.add_argument("--range", type=_range_pair, default=(Fraction(-2), Fraction(2)),
                   metavar="LO:HI", help="slice parameter range (default -2:2)")
    q.add_argument("--samples", type=int, default=33)
    q.add_argument("--fix", type=_fix_pair, metavar="K=V",
                   help="s=3 only: pin component K of a to value V")
    q.add_argument("--cin", type=_rat_list)
    q.add_argument("--cout", type=_rat_list)
    q.add_argument("--out-dir", help="write candidate scheme JSON files here")
    q.set_defaults(func=cmd_search)

    q = sub.add_parser("integrate", help="run a scheme on a problem")
    q.add_argument("--scheme", required=True)
    q.add_argument("--problem", required=True, help="P1, P2, P3, or P4")
    q.add_argument("--dt", type=_rat, required=True, help="step size, p/q or decimal")
    q.add_argument("--T", type=_rat, required=True, help="final time")
    q.add_argument("--out", help="write trajectory CSV (abscissa-0 row per block)")
    q.add_argument("--nsub", type=int, default=1000, help="bootstrap RK4 substeps")
    q.set_defaults(func=cmd_integrate)

    q = sub.add_parser("converge", help="convergence study over a dt ladder")
    q.add_argument("--scheme", required=True)
    q.add_argument("--problem", required=True)
    q.add_argument("--dts", type=_rat_list,
                   default=[Fraction(1, 8), Fraction(1, 16), Fraction(1, 32),
                            Fraction(1, 64), Fraction(1, 128)],
                   help="comma-separated step sizes (default 1/8,...,1/128)")
    q.add_argument("--T", type=_rat, default=Fraction(1))
    q.add_argument("--csv", help="write the error table here")
    q.add_argument("--plot", help="write a gnuplot script here")
    q.set_defaults(func=cmd_converge)

    q = sub.add_parser("stability", help="spectral radius of A + zB on a z grid")
    q.add_argument("--scheme", required=True)
    q.add_argument("--re", type=_range_pair, default=(Fraction(-3), Fraction(1)),
                   metavar="LO:HI")
    q.add_argument("--im", type=_range_pair, default=(Fraction(-3), Fraction(3)),
                   metavar="LO:HI")
    q.add_argument("--n", type=int, default=41, help="grid points per axis")
    q.add_argument("--out", help="write re,im,rho CSV here (default stdout)")
    q.set_defaults(func=cmd_stability)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ZeroDivisionError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def app() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    app()
