"""Command-line front end.

Subcommands cover every public operation; `verify` runs the deterministic
property suites and writes machine-readable reports. Exit codes: 0 pass,
1 failure (including failed checks), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from .embed import NotInImage, decode, embed, in_image
from .frobphi import (
    ConvergenceFailure,
    FrobLift,
    PhiMap,
    gamma_approx,
    lift_difference_order_check,
    projector_normal_form,
    stress_perturbation,
)
from .hslift import HSDerivation, canonical_lift
from .poly import Fp, MultiPoly, PolyParseError, Zmod, format_poly, parse_poly
from .suites import SUITE_NAMES, SuiteConfig, run_suite
from .wdo import WDONormalForm, WorkingContext, basic_operator, compose, reconstruct, evaluate
from .witt import WittVec, format_witt, parse_witt, teichmuller, witt_scalar


class CliError(Exception):
    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


def _add_context_args(sp, vars_default=1):
    sp.add_argument("--p", type=int, required=True, help="the prime")
    sp.add_argument("--len", type=int, dest="length", required=True, help="Witt length L")
    sp.add_argument("--vars", type=int, default=vars_default, help="variable count")
    sp.add_argument("--max-deg", type=int, default=4, help="coordinate degree cap")
    sp.add_argument("--json", dest="json_out", default=None, help="emit JSON instead of text")


def _emit(args, text_value, json_value):
    if getattr(args, "json_out", None):
        payload = json.dumps({"schema": 1, "result": json_value}, indent=2, sort_keys=True)
        if args.json_out == "-":
            print(payload)
        else:
            with open(args.json_out, "w") as fh:
                fh.write(payload + "\n")
    else:
        print(text_value)


# -- operator grammar -----------------------------------------------------------
# product := factor ('*' factor)* ; factor := 'F^-<r>(<witt>)' | '(<witt>)'
#          | '{d<l>}_{<j>}' | '{d<l>}_{<j>/p^<r>}' with optional '^<k>'

_FACTOR = re.compile(
    r"\s*(?:F\^-(?P<tw>\d+)\((?P<coeff>\[[^]]*\])\)"
    r"|\((?P<mcoeff>\[[^]]*\])\)"
    r"|\{d(?P<var>\d+)\}_\{(?P<j>\d+)(?:/p\^(?P<r>\d+))?\}(?:\^(?P<pow>\d+))?)\s*"
)


def parse_operator(text: str, ctx: WorkingContext):
    """Parse an operator product into (normal form, semantic evaluator)."""
    factors = []
    pos = 0
    while pos < len(text):
        if text[pos] == "*":
            pos += 1
            continue
        m = _FACTOR.match(text, pos)
        if not m:
            raise CliError(f"cannot parse operator at position {pos}: {text[pos:]!r}")
        pos = m.end()
        if m.group("var") is not None:
            var = int(m.group("var")) - 1
            j = int(m.group("j"))
            r = int(m.group("r") or 0)
            k = int(m.group("pow") or 1)
            if not (0 <= var < ctx.n):
                raise CliError(f"variable d{var+1} out of range")
            for _ in range(k):
                factors.append(basic_operator(ctx, var, j, r))
        else:
            tw = int(m.group("tw") or 0)
            w = parse_witt(m.group("coeff") or m.group("mcoeff"), ctx.p, ctx.n, ctx.L)
            if tw == 0:
                factors.append(WDONormalForm.multiplication(ctx, w))
            else:
                # twisted coefficient: F^-tw(w) alone is not an operator; it
                # must multiply a fractional factor, which composition handles
                factors.append(("twist", tw, w))
    # merge twisted coefficients into the following factor via composition
    ops = []
    pending = None
    for f in factors:
        if isinstance(f, tuple):
            if pending is not None:
                raise CliError("two twisted coefficients in a row")
            pending = f
            continue
        if pending is not None:
            _, tw, w = pending
            terms = []
            for t in f.terms:
                if t.r != tw:
                    raise CliError("twisted coefficient must match the factor's twist")
                terms.append(type(t)(t.r, t.J, t.I, w * t.alpha))
            f = WDONormalForm(ctx, terms)
            pending = None
        ops.append(f)
    if pending is not None:
        raise CliError("dangling twisted coefficient")
    if not ops:
        raise CliError("empty operator")
    result = ops[0]
    for f in ops[1:]:
        result = compose(result, f)
    return result


# -- subcommand handlers ----------------------------------------------------------


def cmd_witt(args):
    p, L, n = args.p, args.length, args.vars
    vals = [parse_witt(s, p, n, L) for s in args.values]
    op = args.witt_op
    if op == "add":
        out = vals[0] + vals[1]
    elif op == "mul":
        out = vals[0] * vals[1]
    elif op == "frob":
        out = vals[0].frobenius()
    elif op == "versch":
        out = vals[0].verschiebung()
    elif op == "restrict":
        out = vals[0].restrict()
    elif op == "teich":
        out = teichmuller(parse_poly(args.values[0], Fp(p), n), L)
    elif op == "ghost":
        gs = vals[0].ghost()
        _emit(args, " | ".join(format_poly(g) for g in gs), [format_poly(g) for g in gs])
        return 0
    else:
        raise CliError(f"unknown witt operation {op!r}")
    _emit(args, format_witt(out), format_witt(out))
    return 0


def cmd_embed(args):
    w = parse_witt(args.value, args.p, args.vars, args.length)
    g = embed(w)
    _emit(args, format_poly(g), format_poly(g))
    return 0


def cmd_decode(args):
    g = parse_poly(args.value, Zmod(args.p, args.length), args.vars)
    try:
        w = decode(g)
    except NotInImage as exc:
        print(f"not in the embedded Witt ring: {exc}", file=sys.stderr)
        return 1
    _emit(args, format_witt(w), format_witt(w))
    return 0


def cmd_member(args):
    g = parse_poly(args.value, Zmod(args.p, args.length), args.vars)
    ok = in_image(g)
    _emit(args, "member" if ok else "not-member", ok)
    return 0 if ok else 1


def _parse_index(text, p, r_top):
    """Accept a plain component index 'j', or 'j/p^r' for the fractional
    operator index, which acts as component j*p^(r_top - r)."""
    m = re.fullmatch(r"(\d+)(?:/p\^(\d+))?", text.strip())
    if not m:
        raise CliError(f"bad index {text!r}; use j or j/p^r")
    j = int(m.group(1))
    if j < 1:
        raise CliError("index must be positive")
    if m.group(2) is None:
        return j
    r = int(m.group(2))
    if r > r_top:
        raise CliError("index outside the truncation")
    return j * p ** (r_top - r)


def cmd_hs(args):
    p, L, n = args.p, args.length, args.vars
    w = parse_witt(args.value, p, n, L)
    D = HSDerivation.coordinate(p, n, args.var - 1)
    j = _parse_index(args.j, p, L - 1)
    out = canonical_lift(D, j, w, method=args.method)
    _emit(args, format_witt(out), format_witt(out))
    return 0


def cmd_op(args):
    ctx = WorkingContext(args.p, args.vars, args.length, args.max_deg, args.level)
    Q = parse_operator(args.operator, ctx)
    if args.op_op == "apply":
        w = parse_witt(args.operand, ctx.p, ctx.n, ctx.L)
        out = Q.apply(w)
        _emit(args, format_witt(out), format_witt(out))
    elif args.op_op == "compose":
        Q2 = parse_operator(args.operand, ctx)
        out = compose(Q, Q2)
        _emit(args, repr(out), repr(out))
    elif args.op_op == "normalform":
        out = reconstruct(ctx, evaluate(Q))
        _emit(args, repr(out), repr(out))
    elif args.op_op == "check":
        out = reconstruct(ctx, evaluate(Q)) == Q
        _emit(args, "consistent" if out else "inconsistent", out)
        return 0 if out else 1
    return 0


_LIFT = re.compile(r"T(\d+)\s*->\s*T\1\^(\d+)(?:\s*\+\s*(\d+)\*\((.*)\))?\s*$")


def parse_lift(spec: str, p: int, L: int, n: int) -> FrobLift:
    """Lift syntax: 'T1->T1^p + p*(<poly>)' joined with ';' per variable;
    omitted variables take the standard lift."""
    ring = Zmod(p, L)
    gs = [MultiPoly.zero(ring, n) for _ in range(n)]
    if spec.strip():
        for part in spec.split(";"):
            m = _LIFT.match(part.strip())
            if not m:
                raise CliError(f"bad lift component {part!r}")
            idx = int(m.group(1)) - 1
            if not (0 <= idx < n) or int(m.group(2)) != p:
                raise CliError(f"lift component {part!r} does not match T^{p}")
            if m.group(3) is not None:
                if int(m.group(3)) != p:
                    raise CliError(f"correction in {part!r} must be scaled by {p}")
                gs[idx] = parse_poly(m.group(4), ring, n)
    return FrobLift(p, L, n, gs)


def cmd_phi(args):
    p, L, n = args.p, args.length, args.vars
    if args.phi_op == "apply":
        lift = parse_lift(args.lift or "", p, L, n)
        a = parse_poly(args.value, Zmod(p, L), n)
        out = PhiMap(lift)(a)
        _emit(args, format_witt(out), format_witt(out))
        return 0
    if args.phi_op == "projector":
        ctx = WorkingContext(p, n, L, args.max_deg, 0)
        nf = projector_normal_form(ctx, args.mode)
        _emit(args, repr(nf), repr(nf))
        return 0
    if args.phi_op == "delta":
        import random

        ctx = WorkingContext(p, n, L, args.max_deg, 0)
        l1 = parse_lift(args.lift1 or "", p, L, n)
        l2 = parse_lift(args.lift2 or "", p, L, n)
        ok, witness = lift_difference_order_check(
            l1, l2, args.nmax, ctx, random.Random(args.seed)
        )
        _emit(args, "pass" if ok else f"FAIL: {witness!r}", {"pass": ok, "witness": repr(witness)})
        return 0 if ok else 1
    if args.phi_op == "gamma":
        ctx = WorkingContext(p, n, L, args.max_deg, 0)
        l1 = parse_lift(args.lift1 or "", p, L, n)
        l2 = parse_lift(args.lift2 or "", p, L, n)
        pert = stress_perturbation(ctx) if args.stress else None
        try:
            rep = gamma_approx(l1, l2, args.steps, ctx, level=args.level, perturbation=pert)
        except ConvergenceFailure as exc:
            _emit(args, f"ConvergenceFailure: {exc}", {"converged": False, "error": str(exc)})
            return 1
        _emit(
            args,
            f"converged; per-step gains: {rep.step_gains}",
            {"converged": rep.converged, "gains": rep.step_gains},
        )
        return 0
    raise CliError(f"unknown phi operation {args.phi_op!r}")


def cmd_verify(args):
    primes = tuple(int(x) for x in args.p.split(","))
    config = SuiteConfig(
        primes=primes,
        max_len=args.max_len,
        max_deg=args.max_deg,
        max_vars=args.max_vars,
        samples=args.samples,
        seed=args.seed,
    )
    report = run_suite(config, args.suite)
    for line in report.summary_lines():
        print(line)
    if args.json_out:
        payload = report.to_json()
        if args.json_out == "-":
            print(payload)
        else:
            with open(args.json_out, "w") as fh:
                fh.write(payload + "\n")
    print(("PASS" if report.passed else "FAIL") + f" ({len(report.results)} checks)")
    return 0 if report.passed else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="wittops", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("witt", help="Witt vector arithmetic")
    w.add_argument("witt_op", choices=["add", "mul", "frob", "versch", "restrict", "teich", "ghost"])
    _add_context_args(w)
    w.add_argument("values", nargs="+")
    w.set_defaults(fn=cmd_witt)

    e = sub.add_parser("embed", help="embed a Witt vector into (Z/p^L)[T]")
    _add_context_args(e)
    e.add_argument("value")
    e.set_defaults(fn=cmd_embed)

    d = sub.add_parser("decode", help="decode an embedded element")
    _add_context_args(d)
    d.add_argument("value")
    d.set_defaults(fn=cmd_decode)

    m = sub.add_parser("member", help="image membership test")
    _add_context_args(m)
    m.add_argument("value")
    m.set_defaults(fn=cmd_member)

    h = sub.add_parser("hs", help="canonical lifts of coordinate derivations")
    hsub = h.add_subparsers(dest="hs_op", required=True)
    hl = hsub.add_parser("lift")
    _add_context_args(hl)
    hl.add_argument("--method", choices=["orbit", "embed"], default="orbit")
    hl.add_argument("--j", required=True, help="component index, j or j/p^r")
    hl.add_argument("--var", type=int, default=1)
    hl.add_argument("value")
    hl.set_defaults(fn=cmd_hs)

    o = sub.add_parser("op", help="Witt differential operators")
    o.add_argument("op_op", choices=["apply", "compose", "normalform", "check"])
    _add_context_args(o)
    o.add_argument("--level", type=int, default=0)
    o.add_argument("operator")
    o.add_argument("operand", nargs="?")
    o.set_defaults(fn=cmd_op)

    f = sub.add_parser("phi", help="Frobenius-lift sections and projectors")
    fsub = f.add_subparsers(dest="phi_op", required=True)
    fa = fsub.add_parser("apply")
    _add_context_args(fa)
    fa.add_argument("--lift", default="")
    fa.add_argument("value")
    fa.set_defaults(fn=cmd_phi)
    fp = fsub.add_parser("projector")
    _add_context_args(fp)
    fp.add_argument("--mode", choices=["reconstruct", "recursion"], default="reconstruct")
    fp.set_defaults(fn=cmd_phi)
    fd = fsub.add_parser("delta")
    _add_context_args(fd)
    fd.add_argument("--lift1", default="")
    fd.add_argument("--lift2", default="")
    fd.add_argument("--nmax", type=int, default=2)
    fd.add_argument("--seed", type=int, default=0)
    fd.set_defaults(fn=cmd_phi)
    fg = fsub.add_parser("gamma")
    _add_context_args(fg)
    fg.add_argument("--lift1", default="")
    fg.add_argument("--lift2", default="")
    fg.add_argument("--steps", type=int, default=2)
    fg.add_argument("--level", type=int, default=0)
    fg.add_argument("--stress", action="store_true")
    fg.set_defaults(fn=cmd_phi)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", choices=list(SUITE_NAMES) + ["all"])
    v.add_argument("--p", default="2,3")
    v.add_argument("--max-len", type=int, default=3)
    v.add_argument("--max-deg", type=int, default=3)
    v.add_argument("--max-vars", type=int, default=2)
    v.add_argument("--samples", type=int, default=25)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json", dest="json_out", default=None)
    v.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PolyParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, NotInImage) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
