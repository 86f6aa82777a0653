"""Command line front end.

Exit status: 0 satisfied / ok, 1 not satisfied / invalid model, 2 usage or
parse error, 3 precision or recursion limit reached.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .errors import DepthExceeded, FormulaSyntaxError, IllConditioned, PrecisionExhausted, QctmcError
from .io import load_model
from .isolation import IsolationStats, clear_left, factor_name, find_roots, sign_at_zero
from .exppoly import atomic_exppoly
from .model import signal_table, validate_model
from .scalars import max_precision, set_max_precision
from .stl import check, mnt, parse
from .stl.ast import Atomic
from .stl.checker import CheckError

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


def _rat(q: Fraction):
    return str(q)


def _dec(q: Fraction, digits=17):
    return f"{float(q):.{digits}g}"


class _RootNames:
    """Stable ids for roots in order of first appearance."""

    def __init__(self, width):
        self.ids = {}
        self.width = width

    def endpoint(self, e):
        doc = {"open": e.open}
        if e.is_rational:
            doc["value"] = _rat(e.value)
            return doc
        r = e.base
        if r not in self.ids:
            self.ids[r] = len(self.ids) + 1
        r.refine_to(self.width)
        doc.update({
            "root_id": self.ids[r],
            "owner": r.owner,
            "offset": _rat(e.offset),
            "enclosure": {"lo": _rat(r.lo + e.offset), "hi": _rat(r.hi + e.offset)},
            "approx": _dec((r.lo + r.hi) / 2 + e.offset),
        })
        return doc

    def interval_set(self, s):
        return [{"lo": self.endpoint(iv.lo), "hi": self.endpoint(iv.hi)} for iv in s]


def _text_set(s, names):
    if s.is_empty():
        return "{}"
    parts = []
    for iv in s:
        lo, hi = names.endpoint(iv.lo), names.endpoint(iv.hi)
        lo_s, hi_s = _text_endpoint(lo), _text_endpoint(hi)
        if lo == hi and not iv.lo.open:
            parts.append(f"{{{lo_s}}}")
        else:
            parts.append(f"{'(' if iv.lo.open else '['}{lo_s}, {hi_s}{')' if iv.hi.open else ']'}")
    return " U ".join(parts)


def _text_endpoint(doc):
    if "value" in doc:
        return doc["value"]
    off = Fraction(doc["offset"])
    name = f"r{doc['root_id']}"
    if off:
        name += f"{'+' if off > 0 else '-'}{abs(off)}"
    return f"{name}~{float(doc['approx']):.10g}"


def _coeffs(cs, digits):
    out = []
    for r, c in enumerate(cs):
        v = float(c.enclose(128).real.mid())
        if v:
            out.append(f"{v:.{digits}g}" + ("" if r == 0 else "*t" if r == 1 else f"*t^{r}"))
    return " + ".join(out).replace("+ -", "- ") or "0"


def format_real_form(f, digits=12):
    """exp(a t) * (p(t) cos(b t) + q(t) sin(b t)) terms with exact exponents."""
    parts = []
    for t in f.terms:
        z = t.alpha.enclose(128)
        a = float(z.real.mid())
        if t.oscillating:
            b = float(z.imag.mid())
            body = f"({_coeffs(t.p, digits)})*cos({b:.{digits}g}*t) + ({_coeffs(t.q, digits)})*sin({b:.{digits}g}*t)"
        else:
            body = _coeffs(t.p, digits)
        if t.alpha.is_zero():
            parts.append(body)
        else:
            parts.append(f"exp({a:.{digits}g}*t)*({body})  [exponent {t.alpha}]")
    return "\n    + ".join(parts) or "0"


# ------------------------------------------------------------------ commands

def cmd_validate(args):
    m = load_model(args.model)
    rep = validate_model(m)
    if rep.ok:
        print(f"ok: {len(m.classical_states)} classical states, quantum dimension {m.hilbert_dim}, {len(m.Ls)} jump operators")
        return EXIT_OK
    for v in rep.violations:
        print(f"violation: {v}")
    return EXIT_FALSE


def cmd_signals(args):
    m = load_model(args.model)
    validate_model(m).raise_if_invalid()
    table = signal_table(m)
    for name, f in table.items():
        print(f"x{name}(t) = {format_real_form(f, args.digits)}")
    tmax, step = Fraction(args.tmax), Fraction(args.step)
    if step <= 0 or tmax < 0:
        raise _Usage("--step must be positive and --tmax nonnegative")
    names = list(table)
    rows = []
    k = 0
    while k * step <= tmax:
        t = k * step
        vals = []
        for n in names:
            v = table[n].evaluate(t, 128).mid
            vals.append(f"{float(v):.{args.digits}g}")
        rows.append([_dec(t, args.digits)] + vals)
        k += 1
    header = ["t"] + names
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        print(f"wrote {len(rows)} approximate samples ({args.digits} significant digits) to {args.csv}")
    else:
        print("# approximate samples")
        print(",".join(header))
        for r in rows:
            print(",".join(r))
    return EXIT_OK


def cmd_isolate(args):
    m = load_model(args.model)
    validate_model(m).raise_if_invalid()
    atom = parse(args.atom)
    if not isinstance(atom, Atomic):
        raise _Usage("--atom must be a single atomic proposition")
    try:
        a, b = (Fraction(x.strip()) for x in args.window.split(","))
    except ValueError:
        raise _Usage("--window must be two rationals a,b") from None
    width = Fraction(1, 2 ** args.precision)
    af = atomic_exppoly(atom.poly, atom.bound, signal_table(m))
    stats = IsolationStats()
    out = []
    for g, side in af.factors:
        name = factor_name(atom.poly, atom.bound.lo if side == "lo" else atom.bound.hi)
        lo = a
        if a == 0 and sign_at_zero(g) == 0:
            lo = clear_left(g, Fraction(1, 1000))
            print(f"note: {name} vanishes at t = 0; searching from {lo}")
        for r in find_roots(g, (lo, b), owner=name, stats=stats):
            first = (r.lo, r.hi)
            r = r.refine_to(width)
            out.append({"function": name, "isolating": [_rat(first[0]), _rat(first[1])],
                        "refined": [_rat(r.lo), _rat(r.hi)], "approx": _dec((r.lo + r.hi) / 2)})
    for k, d in enumerate(out, 1):
        print(f"root {k} of {d['function']}: isolating [{_dec(Fraction(d['isolating'][0]))}, "
              f"{_dec(Fraction(d['isolating'][1]))}], refined to "
              f"[{_dec(Fraction(d['refined'][0]))}, {_dec(Fraction(d['refined'][1]))}]")
    print(f"{len(out)} root(s); isolation calls {stats.calls}, max depth {stats.max_depth}")
    if args.json:
        _write_json(args.json, {"atom": args.atom, "window": [_rat(a), _rat(b)], "roots": out,
                                "counters": _stats_doc(stats)})
    return EXIT_OK


def _stats_doc(stats):
    return {"isolation_calls": stats.calls, "max_depth": stats.max_depth,
            "final_precision": stats.final_precision}


def cmd_check(args):
    m = load_model(args.model)
    validate_model(m).raise_if_invalid()
    f = parse(args.formula)
    v = check(m, f)
    names = _RootNames(Fraction(1, 2 ** args.precision))
    doc = {
        "formula": args.formula,
        "verdict": v.satisfied,
        "validity_horizon": _rat(v.validity_horizon),
        "solution_set": names.interval_set(v.solution_set),
        "nodes": [{"formula": n.text, "mnt": _rat(n.mnt), "horizon": _rat(n.horizon),
                   "solution_set": names.interval_set(n.solution)} for n in v.nodes],
        "counters": {"atomic_solves": v.counters.atomic_solves, "interval_operations": v.counters.interval_ops,
                     **_stats_doc(v.counters.isolation)},
    }
    print(f"verdict: {'satisfied' if v.satisfied else 'not satisfied'}")
    print(f"solution set over [0, {v.validity_horizon}]: {_text_set(v.solution_set, names)}")
    if args.table:
        for n in v.nodes:
            print(f"  [{n.mnt}|{n.horizon}] {n.text}: {_text_set(n.solution, names)}")
    for r, k in names.ids.items():
        print(f"  r{k}: root of {r.owner} in [{_dec(r.lo)}, {_dec(r.hi)}]")
    if args.json:
        _write_json(args.json, doc)
    return EXIT_OK if v.satisfied else EXIT_FALSE


def cmd_mnt(args):
    print(mnt(parse(args.formula)))
    return EXIT_OK


def _write_json(path, doc):
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


class _Usage(Exception):
    pass


def build_parser():
    p = argparse.ArgumentParser(prog="qctmc", description="Exact STL model checking over quantum CTMCs.")
    p.add_argument("--max-precision", type=int, default=None, help="precision cap in bits")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="validate a model file")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("signals", help="closed-form signals and approximate samples")
    s.add_argument("model")
    s.add_argument("--tmax", required=True)
    s.add_argument("--step", required=True)
    s.add_argument("--csv")
    s.add_argument("--digits", type=int, default=12)
    s.set_defaults(func=cmd_signals)

    s = sub.add_parser("isolate", help="isolate the roots of an atomic proposition")
    s.add_argument("model")
    s.add_argument("--atom", required=True)
    s.add_argument("--window", required=True, help="a,b")
    s.add_argument("--precision", type=int, default=40, help="report roots to width 2^-bits")
    s.add_argument("--json")
    s.set_defaults(func=cmd_isolate)

    s = sub.add_parser("check", help="check a formula at t = 0")
    s.add_argument("model")
    s.add_argument("--formula", required=True)
    s.add_argument("--precision", type=int, default=40, help="report roots to width 2^-bits")
    s.add_argument("--json")
    s.add_argument("--table", action="store_true", help="print every node's solution set")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("mnt", help="time horizon a formula needs")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_mnt)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    old_cap = max_precision()
    try:
        if args.max_precision:
            try:
                set_max_precision(args.max_precision)
            except ValueError as exc:
                raise _Usage(str(exc)) from None
        return args.func(args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormulaSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        if exc.text is not None and exc.position is not None:
            print(f"  {exc.text}\n  {' ' * exc.position}^", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionExhausted, DepthExceeded, IllConditioned) as exc:
        print(f"precision limit: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except CheckError as exc:
        code = EXIT_PRECISION if isinstance(exc.cause, (PrecisionExhausted, DepthExceeded, IllConditioned)) else EXIT_USAGE
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (QctmcError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        set_max_precision(old_cap)


if __name__ == "__main__":
    sys.exit(main())
