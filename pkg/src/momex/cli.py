"""Command-line front end.

Each subcommand builds one report (title, columns, rows of pre-formatted
strings) and renders it as markdown, CSV, or JSON.  All three renderings
share the same cell strings, so the numeric content is format-independent
and identical configurations produce byte-identical output.

The `table` subcommand reproduces the bundled reference tables: cells are
displayed at 10 significant digits (round-half-even) and each carries an
achieved-precision annotation obtained by recomputing the whole table at
15 extra digits and counting agreeing significant digits ("exact" for
cells computed in rational arithmetic).
"""

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, Context, ROUND_HALF_EVEN
from fractions import Fraction

from mpmath import mp, mpf, mpc, fabs, im, re

from .errors import (MomexError, ValidationError, NumericalError,
                     IllConditioned, NoConvergence)
from .expmatch import PrecisionContext, match_expansion, evaluate, _num
from .qstate import MomentSequence, moment_sequence, harmonic_overlap
from .cmx import (connected_moments, cmx_fit_E, cmx_fit_U, knowles_a0,
                  overlap_s2)
from .problems import builtin, load_problem, BUILTIN_NAMES

TABLE_DIGITS = 10          # display precision for the reference tables


# ---------------------------------------------------------------------------
# formatting

def _round_sig(d, sig):
    if d == 0:
        return Decimal(0)
    quantum = Decimal(1).scaleb(d.adjusted() - sig + 1)
    # the default decimal context caps results at 28 digits
    return d.quantize(quantum, rounding=ROUND_HALF_EVEN,
                      context=Context(prec=sig + 10))


def _fmt_real(x, sig):
    """mpf/int/Fraction -> positional decimal string, sig significant
    digits, round-half-even.  Values are padded, never truncated, so
    trailing zeros are visible ("5.000000000")."""
    with mp.workdps(max(mp.dps, sig + 25)):
        x = _num(x)
        s = mp.nstr(x, sig + 15, strip_zeros=False)
    d = _round_sig(Decimal(s), sig)
    text = format(d, "f")
    return text


def _fmt_value(x, sig):
    """Format a real or complex pipeline value."""
    if isinstance(x, mpc) and im(x) != 0:
        rp = _fmt_real(re(x), sig)
        ip = _fmt_real(abs(im(x)), sig)
        sign = "-" if im(x) < 0 else "+"
        return f"{rp}{sign}{ip}i"
    if isinstance(x, mpc):
        x = re(x)
    return _fmt_real(x, sig)


def _agreed_digits(lo, hi, cap):
    """Count of agreeing significant digits between two runs of a cell."""
    with mp.workdps(cap + 20):
        lo, hi = _num(lo), _num(hi)
        if lo == hi:
            return cap
        scale = max(fabs(lo), fabs(hi))
        if scale == 0:
            return cap
        relerr = fabs(lo - hi) / scale
        if relerr == 0:
            return cap
        return max(0, min(cap, int(mp.floor(-mp.log10(relerr)))))


# ---------------------------------------------------------------------------
# renderers

def _render_md(rep):
    out = [rep["title"], ""]
    out.append("| " + " | ".join(rep["columns"]) + " |")
    out.append("|" + "|".join(" --- " for _ in rep["columns"]) + "|")
    for row in rep["rows"]:
        out.append("| " + " | ".join(row) + " |")
    if rep.get("note"):
        out.extend(["", rep["note"]])
    return "\n".join(out) + "\n"


def _render_csv(rep):
    buf = io.StringIO()
    buf.write(f"# {rep['title']}\n")
    if rep.get("note"):
        buf.write(f"# {rep['note']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rep["columns"])
    for row in rep["rows"]:
        w.writerow(row)
    return buf.getvalue()


def _render_json(rep):
    doc = {"title": rep["title"], "columns": rep["columns"],
           "rows": rep["rows"]}
    for key in ("note", "cell_precision"):
        if rep.get(key):
            doc[key] = rep[key]
    return json.dumps(doc, indent=2) + "\n"


_RENDERERS = {"md": _render_md, "csv": _render_csv, "json": _render_json}


# ---------------------------------------------------------------------------
# shared pipeline plumbing

_MOMENT_CACHE = {}


def _moments_for(spec, jmax):
    cached = _MOMENT_CACHE.get(spec)
    if cached is None or len(cached.rational_parts) <= jmax:
        cached = moment_sequence(spec.hamiltonian, spec.trial, jmax)
        _MOMENT_CACHE[spec] = cached
    if len(cached.rational_parts) == jmax + 1:
        return cached
    return MomentSequence(cached.rational_parts[:jmax + 1], cached.beta)


_CONNECTED_CACHE = {}


def _connected_for(spec, kmax):
    ms = _moments_for(spec, kmax)
    key = (spec, kmax)
    I = _CONNECTED_CACHE.get(key)
    if I is None:
        I = connected_moments(ms.nu, kmax)
        _CONNECTED_CACHE[key] = I
    return I, ms


def _resolve_problem(ref):
    if ref in BUILTIN_NAMES:
        return builtin(ref)
    try:
        with open(ref, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(
            f"{ref!r} is neither a builtin problem ({', '.join(BUILTIN_NAMES)}"
            f") nor a readable file: {exc}") from None
    return load_problem(text)


def _parse_order(text):
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ValidationError(
            f"--order expects N or N1..N2, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise ValidationError(f"invalid order range {text!r}")
    return lo, hi


def _scaled_terms(model, mu0, ctx):
    """Match-model terms with amplitudes rescaled from nu- to mu-units."""
    with mp.workdps(ctx.digits):
        return [(d * mu0, e) for d, e in model.terms]


# ---------------------------------------------------------------------------
# single-stage commands

def _report_moments(args, ctx):
    spec = _resolve_problem(args.problem)
    if args.jmax < 1:
        raise ValidationError("--jmax must be >= 1")
    ms = _moments_for(spec, args.jmax)
    nu = ms.nu
    mu0 = ms.mu0(ctx.digits)
    rows = []
    with mp.workdps(ctx.digits):
        for j in range(args.jmax + 1):
            mu_j = _num(nu[j]) * mu0
            rows.append([str(j), str(nu[j]), mp.nstr(mu_j, ctx.digits)])
    return {"title": f"moments of problem {spec.name} "
                     f"(precision {ctx.digits} digits)",
            "columns": ["j", "nu_j (exact)", "mu_j"], "rows": rows}


def _report_match(args, ctx):
    spec = _resolve_problem(args.problem)
    lo, hi = _parse_order(args.order)
    ms = _moments_for(spec, 2 * hi + 1)
    nu = ms.nu
    mu0 = ms.mu0(ctx.digits)
    rows = []
    for N in range(lo, hi + 1):
        model = match_expansion(nu[:2 * N + 2], ctx)
        with mp.workdps(ctx.digits):
            for j, (d, e) in enumerate(_scaled_terms(model, mu0, ctx)):
                rows.append([str(N), str(j),
                             _fmt_value(e, ctx.digits),
                             _fmt_value(d, ctx.digits)])
    return {"title": f"exponential match for {spec.name} "
                     f"(amplitudes include the trial norm)",
            "columns": ["N", "j", "W_j", "d_j"], "rows": rows}


def _report_cmx(args, ctx):
    spec = _resolve_problem(args.problem)
    lo, hi = _parse_order(args.order)
    variant = args.variant
    kmax = 2 * hi + (2 if variant == "U" else 1)
    I, _ = _connected_for(spec, kmax)
    rows = []
    for N in range(lo, hi + 1):
        if variant == "E":
            model = cmx_fit_E(I, N, ctx)
            rows.append([str(N), "const", "",
                         _fmt_value(model.a0, ctx.digits)])
            first = 1
        else:
            model = cmx_fit_U(I, N, ctx)
            first = 0
        for j, (A, b) in enumerate(model.terms, start=first):
            rows.append([str(N), str(j), _fmt_value(b, ctx.digits),
                         _fmt_value(A, ctx.digits)])
    return {"title": f"connected-moment {variant}-fit for {spec.name}",
            "columns": ["N", "j", "b_j", "A_j"], "rows": rows}


def _report_knowles(args, ctx):
    spec = _resolve_problem(args.problem)
    lo, hi = _parse_order(args.order)
    I, _ = _connected_for(spec, 2 * hi + 1)
    rows = []
    for M in range(lo, hi + 1):
        a0 = knowles_a0(I, M, ctx)
        rows.append([str(M), _fmt_value(a0, ctx.digits)])
    return {"title": f"closed-form energy approximants for {spec.name}",
            "columns": ["M", "A0"], "rows": rows}


def _report_overlap(args, ctx):
    spec = _resolve_problem(args.problem)
    lo, hi = _parse_order(args.order)
    I, ms = _connected_for(spec, 2 * hi + 1)
    mu0 = ms.mu0(ctx.digits)
    rows = []
    for N in range(lo, hi + 1):
        model = cmx_fit_E(I, N, ctx)
        s2 = overlap_s2(model, mu0, ctx)
        rows.append([str(N), _fmt_value(s2, ctx.digits)])
    return {"title": f"squared ground-state overlap estimates for "
                     f"{spec.name} (unnormalized trial)",
            "columns": ["N", "S2"], "rows": rows}


def _report_dynamics(args, ctx):
    spec = _resolve_problem(args.problem)
    lo, hi = _parse_order(args.order)
    if lo != hi:
        raise ValidationError("dynamics takes a single --order")
    if args.steps < 1:
        raise ValidationError("--steps must be >= 1")
    try:
        tmax = Fraction(args.tmax)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"--tmax is not a number: {args.tmax!r}") \
            from None
    if tmax <= 0:
        raise ValidationError("--tmax must be positive")
    ms = _moments_for(spec, 2 * lo + 1)
    model = match_expansion(ms.nu[:2 * lo + 2], ctx)
    mu0 = ms.mu0(ctx.digits)
    terms = _scaled_terms(model, mu0, ctx)
    rows = []
    with mp.workdps(ctx.digits):
        for k in range(args.steps + 1):
            t = tmax * k / args.steps
            z = mp.mpmathify(0)
            for d, e in terms:
                z += d * mp.exp(-mpc(0, 1) * _num(t) * e)
            rows.append([_fmt_real(t, 12),
                         _fmt_value(re(z), ctx.digits),
                         _fmt_value(im(z), ctx.digits),
                         _fmt_value(re(z) ** 2 + im(z) ** 2, ctx.digits)])
    return {"title": f"survival amplitude Z(it) for {spec.name} at N={lo}",
            "columns": ["t", "re_z", "im_z", "abs2_z"], "rows": rows}


# ---------------------------------------------------------------------------
# reference tables

def _pad(cells, width, filler="---"):
    return cells + [filler] * (width - len(cells))


def _build_t1(ctx, deep):
    rows = []
    for j in (0, 2, 4, 6):
        row = [str(j)]
        for name in ("ho_g", "ho_e"):
            row.append(harmonic_overlap(builtin(name).trial, j, ctx))
        rows.append(row)
    return rows


def _match_table_rows(name, orders, ncols, ctx):
    spec = builtin(name)
    ms = _moments_for(spec, 2 * max(orders) + 1)
    nu = ms.nu
    mu0 = ms.mu0(ctx.digits)
    rows = []
    for N in orders:
        model = match_expansion(nu[:2 * N + 2], ctx)
        terms = _scaled_terms(model, mu0, ctx)[:ncols]
        rows.append([str(N), "W"] + _pad([e for _, e in terms], ncols))
        rows.append(["", "d"] + _pad([d for d, _ in terms], ncols))
    return rows


def _build_t2(ctx, deep):
    return _match_table_rows("ho_g", (2, 3, 4), 4, ctx)


def _build_t7(ctx, deep):
    return _match_table_rows("ho_e", (2, 3, 4, 5), 4, ctx)


def _build_t9(ctx, deep):
    return _match_table_rows("aho_g", (2, 3, 4, 5), 3, ctx)


def _build_t3(ctx, deep):
    # row N carries the N-term all-exponential fit
    I, _ = _connected_for(builtin("ho_g"), 9)
    rows = []
    for N in (2, 3, 4):
        model = cmx_fit_U(I, N - 1, ctx)
        rows.append([str(N), "b"] + _pad([b for _, b in model.terms], 4))
        rows.append(["", "A"] + _pad([A for A, _ in model.terms], 4))
    return rows


def _build_t4(ctx, deep):
    I, _ = _connected_for(builtin("ho_g"), 9)
    rows = []
    for N in (2, 3, 4):
        model = cmx_fit_E(I, N, ctx)
        terms = model.terms[:3]
        rows.append([str(N), "b"] + _pad([b for _, b in terms], 3))
        rows.append(["", "A"] + _pad([A for A, _ in terms], 3))
    return rows


def _build_t5(ctx, deep):
    I, ms = _connected_for(builtin("ho_g"), 9)
    mu0 = ms.mu0(ctx.digits)
    rows = []
    for N in (2, 3, 4):
        s2 = overlap_s2(cmx_fit_E(I, N, ctx), mu0, ctx)
        rows.append([str(N), s2])
    return rows


def _build_t6(ctx, deep):
    Ig, _ = _connected_for(builtin("ho_g"), 21)
    Ie, _ = _connected_for(builtin("ho_e"), 21)
    rows = []
    for M in range(1, 11):
        rows.append([str(M), knowles_a0(Ig, M, ctx), knowles_a0(Ie, M, ctx)])
    return rows


def _build_t8(ctx, deep):
    # row N carries the (N+1)-term fit; only the diagnostic term is shown
    I, _ = _connected_for(builtin("ho_e"), 12)
    rows = []
    for N in (2, 3, 4, 5):
        model = cmx_fit_U(I, N, ctx)
        A0, b0 = model.terms[0]
        rows.append([str(N), b0, A0])
    return rows


def _build_t10(ctx, deep):
    if deep:
        orders = (5, 10, 15, 20, 25, 30, 35, 40, 50, 60, 70, 80, 90, 100)
        g_cap = e_cap = 100
        # the Hankel condition number costs roughly 7 digits per order, so
        # order 100 needs ~800 working digits; leave headroom, and scale
        # with ctx so the annotation pass still adds 15 digits
        work = PrecisionContext(digits=ctx.digits + 940)
    else:
        orders = (5, 10, 15, 20, 25, 30)
        g_cap, e_cap = 30, 20
        work = None
    Ig, _ = _connected_for(builtin("aho_g"), 2 * g_cap + 1)
    Ie, _ = _connected_for(builtin("aho_e"), 2 * e_cap + 1)
    if deep:
        # high-order Hankel solves run in floats at >= 400 digits; the
        # exact path would drown in coefficient growth at these orders
        with mp.workdps(work.digits + 10):
            Ig = type(Ig)(tuple(_num(v) for v in Ig.values))
            Ie = type(Ie)(tuple(_num(v) for v in Ie.values))
    rows = []
    for M in orders:
        row = [str(M)]
        row.append(knowles_a0(Ig, M, work or ctx) if M <= g_cap else "---")
        row.append(knowles_a0(Ie, M, work or ctx) if M <= e_cap else "---")
        rows.append(row)
    ref_g = builtin("aho_g").references[0][1]
    ref_e = builtin("aho_e").references[0][1]
    rows.append(["reference", ref_g, ref_e])
    return rows


def _build_t11(ctx, deep):
    # row N carries the (N+1)-term fit; the diagnostic term comes first,
    # the remaining shown terms are the two with smallest real part
    I, _ = _connected_for(builtin("aho_g"), 12)
    rows = []
    for N in (2, 3, 4):
        model = cmx_fit_U(I, N, ctx)
        rest = sorted(model.terms[1:], key=lambda t: (re(t[1]), im(t[1])))
        show = [model.terms[0]] + rest[:2]
        rows.append([str(N), "b"] + [b for _, b in show])
        rows.append(["", "A"] + [A for A, _ in show])
    return rows


def _build_t11e(ctx, deep):
    I, _ = _connected_for(builtin("aho_g"), 11)
    rows = []
    for N in (2, 3, 4, 5):
        model = cmx_fit_E(I, N, ctx)
        terms = model.terms[:3]
        rows.append([str(N), "b"] + _pad([b for _, b in terms], 3))
        rows.append(["", "A"] + _pad([A for A, _ in terms], 3))
    return rows


def _build_t12(ctx, deep):
    I, ms = _connected_for(builtin("aho_g"), 13)
    mu0 = ms.mu0(ctx.digits)
    rows = []
    for N in (2, 3, 4, 5, 6):
        s2 = overlap_s2(cmx_fit_E(I, N, ctx), mu0, ctx)
        rows.append([str(N), s2])
    return rows


_TABLES = {
    "1": ("squared overlaps of the harmonic trial states with the "
          "oscillator eigenstates",
          ["j", "ho_g", "ho_e"], _build_t1),
    "2": ("exponential-match parameters, harmonic oscillator, ground-type "
          "trial",
          ["N", "param", "0", "1", "2", "3"], _build_t2),
    "3": ("all-exponential fit parameters, harmonic oscillator, "
          "ground-type trial",
          ["N", "param", "0", "1", "2", "3"], _build_t3),
    "4": ("constant-plus-exponentials fit parameters, harmonic oscillator, "
          "ground-type trial",
          ["N", "param", "1", "2", "3"], _build_t4),
    "5": ("squared overlap estimates, harmonic oscillator, ground-type "
          "trial",
          ["N", "S2"], _build_t5),
    "6": ("closed-form energy approximants, harmonic oscillator, both "
          "trials",
          ["N", "A0(ho_g)", "A0(ho_e)"], _build_t6),
    "7": ("exponential-match parameters, harmonic oscillator, excited-type "
          "trial",
          ["N", "param", "0", "1", "2", "3"], _build_t7),
    "8": ("diagnostic root and amplitude of the all-exponential fit, "
          "harmonic oscillator, excited-type trial",
          ["N", "b_0", "A_0"], _build_t8),
    "9": ("exponential-match parameters, quartic oscillator, ground-type "
          "trial",
          ["N", "param", "0", "1", "2"], _build_t9),
    "10": ("closed-form energy approximants, quartic oscillator, both "
           "trials",
           ["M", "A0(aho_g)", "A0(aho_e)"], _build_t10),
    "11": ("all-exponential fit parameters, quartic oscillator, ground-type "
           "trial",
           ["N", "param", "0", "1", "2"], _build_t11),
    "11e": ("constant-plus-exponentials fit parameters, quartic oscillator, "
            "ground-type trial",
            ["N", "param", "1", "2", "3"], _build_t11e),
    "12": ("squared overlap estimates, quartic oscillator, ground-type "
           "trial",
           ["N", "S2"], _build_t12),
}


def _report_table(args, ctx):
    if args.table_id not in _TABLES:
        raise ValidationError(
            f"no such table {args.table_id!r}; available: "
            + ", ".join(sorted(_TABLES, key=lambda s: (len(s), s))))
    title, columns, build = _TABLES[args.table_id]
    base = build(ctx, args.deep)
    hictx = PrecisionContext(digits=ctx.digits + 15)
    high = build(hictx, args.deep)
    rows, precision = [], []
    for row, hrow in zip(base, high):
        cells, prec = [], []
        for cell, hcell in zip(row, hrow):
            if isinstance(cell, str):
                cells.append(cell)
                prec.append("")
            elif isinstance(cell, (Fraction, int)):
                cells.append(_fmt_value(cell, TABLE_DIGITS))
                prec.append("exact")
            else:
                cells.append(_fmt_value(cell, TABLE_DIGITS))
                prec.append(str(_agreed_digits(cell, hcell, ctx.digits)))
        rows.append(cells)
        precision.append(prec)
    numeric = [int(p) for row in precision for p in row
               if p not in ("", "exact")]
    note = (f"cells show {TABLE_DIGITS} significant digits; achieved "
            f"precision >= {min(numeric)} digits"
            if numeric else
            f"cells show {TABLE_DIGITS} significant digits; all cells exact")
    return {"title": f"table {args.table_id}: {title}", "columns": columns,
            "rows": rows, "note": note, "cell_precision": precision}


# ---------------------------------------------------------------------------
# driver

_COMMANDS = {
    "moments": _report_moments,
    "match": _report_match,
    "cmx": _report_cmx,
    "knowles": _report_knowles,
    "overlap": _report_overlap,
    "table": _report_table,
    "dynamics": _report_dynamics,
}


def _add_common(sp, problem=True, order=True):
    if problem:
        sp.add_argument("--problem", required=True,
                        help="builtin name or problem file path")
    if order:
        sp.add_argument("--order", required=True,
                        help="fit order N, or a range N1..N2")
    sp.add_argument("--precision", type=int, default=60,
                    help="working precision in decimal digits (default 60)")
    sp.add_argument("--format", choices=("md", "csv", "json"), default="md")
    sp.add_argument("--out", help="write output to this file instead of "
                                  "stdout")
    sp.add_argument("--deep", action="store_true",
                    help="push table 10 to order 100 in >=1000-digit floats")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="momex",
        description="Match Hamiltonian moment expansions to sums of "
                    "exponentials and evaluate the derived energy and "
                    "overlap approximants.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("moments", help="exact moments of a problem")
    _add_common(sp, order=False)
    sp.add_argument("--jmax", type=int, default=10,
                    help="highest moment index (default 10)")

    sp = sub.add_parser("match", help="exponential match of the moment "
                                      "series")
    _add_common(sp)

    sp = sub.add_parser("cmx", help="connected-moment exponential fits")
    _add_common(sp)
    sp.add_argument("--variant", choices=("E", "U"), default="E",
                    help="E: constant plus N exponentials; U: N+1 pure "
                         "exponentials (default E)")

    sp = sub.add_parser("knowles", help="closed-form energy approximants")
    _add_common(sp)

    sp = sub.add_parser("overlap", help="squared overlap estimates")
    _add_common(sp)

    sp = sub.add_parser("table", help="reproduce a bundled reference table")
    sp.add_argument("table_id", help="1..12 or 11e")
    _add_common(sp, problem=False, order=False)

    sp = sub.add_parser("dynamics", help="survival amplitude Z(it) on a "
                                         "time grid")
    _add_common(sp, order=False)
    sp.add_argument("--order", default="4",
                    help="model order N (default 4)")
    sp.add_argument("--tmax", default="10", help="end of the time grid "
                                                 "(default 10)")
    sp.add_argument("--steps", type=int, default=50,
                    help="number of grid intervals (default 50)")
    return parser


def _run(args):
    ctx = PrecisionContext(digits=args.precision)
    report = _COMMANDS[args.command](args, ctx)
    return _RENDERERS[args.format](report)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        try:
            text = _run(args)
        except (IllConditioned, NoConvergence):
            # one retry at doubled precision before giving up
            print(f"retrying at {2 * args.precision} digits", file=sys.stderr)
            args.precision *= 2
            text = _run(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except MomexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
