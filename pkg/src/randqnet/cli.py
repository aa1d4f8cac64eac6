"""Command-line front end.

Commands emit CSV (default) or JSON tables with deterministic content for
a fixed flag set and seed. Probabilities may be given as exact rationals
("1/2"), which routes computation through big-rational arithmetic;
decimal inputs ("0.5") use the float path and print a note to stderr.

Exit codes: 0 success, 2 usage or validation error, 3 cost-guard refusal,
4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, ROUND_HALF_UP
from fractions import Fraction

import numpy as np

from . import channels, connectivity, digraph
from .digraph import CostGuardError

DEFAULT_SEED = 171717
EXACT_TABLE_LIMIT = 30

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COST = 3
EXIT_NUMERIC = 4


class UsageError(ValueError):
    pass


def _parse_prob(text: str, *, closed: bool = False) -> connectivity.Prob:
    """Parse "a/b" to an exact Fraction, decimals to float."""
    text = text.strip()
    try:
        if "/" in text:
            value: connectivity.Prob = Fraction(text)
        else:
            value = float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse probability {text!r}") from exc
    if closed:
        if not 0 <= value <= 1:
            raise UsageError(f"probability {text!r} must lie in [0, 1]")
    elif not 0 < value < 1:
        raise UsageError(f"probability {text!r} must lie strictly in (0, 1)")
    if isinstance(value, float):
        print(f"note: decimal probability {text} uses the float path", file=sys.stderr)
    return value


def _parse_prob_list(text: str, *, closed: bool = False) -> list[connectivity.Prob]:
    return [_parse_prob(tok, closed=closed) for tok in text.split(",") if tok.strip()]


def _fmt(value, precision: int) -> str:
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        return format(value, f".{precision}g")
    return str(value)


def _fmt_fixed(value, decimals: int) -> str:
    """Round half away from zero to a fixed number of decimals."""
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        dec = Decimal(repr(float(value)))
    return str(dec.quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_UP))


def _write_rows(rows: list[dict], fieldnames: list[str], fmt: str, out_path: str | None) -> None:
    if fmt == "json":
        payload = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        payload = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _prob_str(p) -> str:
    return str(p) if isinstance(p, Fraction) else repr(float(p))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_pc_table(args) -> int:
    p = _parse_prob(args.p)
    if args.nmax < 2:
        raise UsageError("--nmax must be >= 2")
    exact = isinstance(p, Fraction)
    if args.exact and not exact:
        raise UsageError("--exact requires a rational probability such as 1/2")
    if args.exact and args.nmax > EXACT_TABLE_LIMIT:
        raise CostGuardError(f"exact table refused for nmax > {EXACT_TABLE_LIMIT}")
    use_exact = exact and args.nmax <= EXACT_TABLE_LIMIT
    session = connectivity.ConnectivitySession(p if use_exact else float(p))
    rows = []
    for n in range(2, args.nmax + 1):
        val = session.prob_strongly_connected(n)
        rows.append({"n": n, "p_c": _fmt_fixed(val, args.precision)})
    _write_rows(rows, ["n", "p_c"], args.format, args.out)
    return EXIT_OK


def _cmd_pc_curve(args) -> int:
    p_list = _parse_prob_list(args.p_list)
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    if args.nmax > 400:
        raise CostGuardError("curve refused for nmax > 400")
    per_p = args.out and "{p}" in args.out
    all_rows = []
    for p in p_list:
        curve = connectivity.pc_curve(args.nmax, p)
        rows = []
        for n, val in curve.rows:
            bound = connectivity.lower_bound_pc(n, p) if n >= 2 else ""
            rows.append(
                {
                    "n": n,
                    "p": _prob_str(p),
                    "p_c": _fmt(val, args.precision),
                    "lower_bound": _fmt(bound, args.precision) if bound != "" else "",
                }
            )
        if per_p:
            tag = str(p).replace("/", "-")
            _write_rows(rows, ["n", "p", "p_c", "lower_bound"], args.format, args.out.replace("{p}", tag))
        else:
            all_rows.extend(rows)
    if not per_p:
        _write_rows(all_rows, ["n", "p", "p_c", "lower_bound"], args.format, args.out)
    return EXIT_OK


def _cmd_pc_mc(args) -> int:
    p = _parse_prob(args.p, closed=True)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    est = digraph.estimate_pc_monte_carlo(
        args.n, p, args.samples, seed=args.seed, workers=args.threads
    )
    rows = [
        {
            "n": args.n,
            "p": _prob_str(p),
            "samples": est.samples,
            "hits": est.hits,
            "estimate": _fmt(est.estimate, args.precision),
            "lo": _fmt(est.lo, args.precision),
            "hi": _fmt(est.hi, args.precision),
            "confidence": est.confidence,
            "seed": args.seed,
        }
    ]
    _write_rows(rows, list(rows[0]), args.format, args.out)
    return EXIT_OK


def _cmd_pc_bound(args) -> int:
    p = _parse_prob(args.p)
    if args.nmax < 2:
        raise UsageError("--nmax must be >= 2")
    rows = [
        {"n": n, "p": _prob_str(p), "lower_bound": _fmt(connectivity.lower_bound_pc(n, p), args.precision)}
        for n in range(2, args.nmax + 1)
    ]
    _write_rows(rows, ["n", "p", "lower_bound"], args.format, args.out)
    return EXIT_OK


def _cmd_evolve(args) -> int:
    p_list = _parse_prob_list(args.p_list)
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.n > 6:
        raise CostGuardError("channel iteration refused for n > 6 (4^n transfer matrices)")
    if args.rmax < 0:
        raise UsageError("--rmax must be >= 0")
    rows = []
    if args.mode == "dynamic":
        for p in p_list:
            trace = channels.convergence_trace(args.n, float(p), "dynamic", args.rmax)
            rows.extend(
                {"p": _prob_str(p), "r": r, "distance": _fmt(d, args.precision)} for r, d in trace
            )
    else:
        mode = args.ensemble_mode
        if mode == "auto":
            mode = "exhaustive" if args.n <= channels.STATIC_EXHAUSTIVE_MAX_N else "sampled"
        traces = channels.static_convergence_traces(
            args.n, [float(p) for p in p_list], args.rmax, mode=mode, budget=args.budget, seed=args.seed
        )
        for p in p_list:
            rows.extend(
                {"p": _prob_str(p), "r": r, "distance": _fmt(d, args.precision)}
                for r, d in traces[float(p)]
            )
    _write_rows(rows, ["p", "r", "distance"], args.format, args.out)
    return EXIT_OK


def _cmd_asymptote(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.n > 6:
        raise CostGuardError("asymptotic map refused for n > 6")
    n = args.n
    if args.state == "zero":
        rho = channels.state_zero(n)
    elif args.state == "plus":
        rho = channels.state_plus(n)
    elif args.state == "mixed":
        rho = channels.state_mixed(n)
    else:
        with open(args.state, encoding="utf-8") as fh:
            coeffs = json.load(fh)
        rho = np.asarray(coeffs, dtype=float)
        if rho.size != 4 ** n:
            raise UsageError(f"coefficient file must hold {4 ** n} values for n={n}")
    sigma = channels.asymptotic_channel(n) @ rho
    rows = [
        {"index": a, "word": channels.index_to_word(a, n), "coefficient": _fmt(c, args.precision)}
        for a, c in enumerate(sigma)
    ]
    _write_rows(rows, ["index", "word", "coefficient"], args.format, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_io_flags(sp, precision=6):
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--precision", type=int, default=precision, help="output digits")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="randqnet",
        description="Strong connectivity of random digraphs and random CNOT network dynamics",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("pc", help="strong-connectivity probabilities")
    pcsub = pc.add_subparsers(dest="subcommand", required=True)

    t = pcsub.add_parser("table", help="exact P_C(n, p) for n = 2..nmax")
    t.add_argument("--nmax", type=int, default=7)
    t.add_argument("--p", default="1/2")
    t.add_argument("--exact", action="store_true", help="insist on the exact rational path")
    _add_io_flags(t, precision=4)
    t.set_defaults(func=_cmd_pc_table)

    c = pcsub.add_parser("curve", help="P_C and its lower bound over a p list")
    c.add_argument("--nmax", type=int, default=50)
    c.add_argument("--p-list", dest="p_list", default="2/3,1/2,3/7,2/5,1/3,1/5")
    _add_io_flags(c)
    c.set_defaults(func=_cmd_pc_curve)

    m = pcsub.add_parser("mc", help="Monte Carlo estimate with Wilson interval")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--p", default="1/2")
    m.add_argument("--samples", type=int, default=10 ** 6)
    m.add_argument("--seed", type=int, default=DEFAULT_SEED)
    m.add_argument("--threads", type=int, default=1)
    _add_io_flags(m)
    m.set_defaults(func=_cmd_pc_mc)

    b = pcsub.add_parser("bound", help="exponential lower bound on P_C")
    b.add_argument("--nmax", type=int, default=50)
    b.add_argument("--p", default="1/2")
    _add_io_flags(b)
    b.set_defaults(func=_cmd_pc_bound)

    ev = sub.add_parser("evolve", help="distance of iterated channels to the asymptotic map")
    evsub = ev.add_subparsers(dest="subcommand", required=True)
    for name in ("dynamic", "static"):
        e = evsub.add_parser(name)
        e.add_argument("--n", type=int, default=4)
        e.add_argument("--p-list", dest="p_list", default="0.2,0.4,0.6,0.8,0.95")
        e.add_argument("--rmax", type=int, default=160 if name == "static" else 1000)
        e.add_argument("--budget", type=int, default=10 ** 4, help="sampled-mode graph budget")
        e.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if name == "static":
            e.add_argument(
                "--mode",
                dest="ensemble_mode",
                choices=("auto", "exhaustive", "sampled"),
                default="auto",
                help="graph-ensemble averaging (auto: exhaustive up to n=4)",
            )
        _add_io_flags(e)
        e.set_defaults(func=_cmd_evolve, mode=name)

    a = sub.add_parser("asymptote", help="Pauli coefficients of the asymptotic state")
    a.add_argument("--n", type=int, default=4)
    a.add_argument("--state", default="zero", help="zero | plus | mixed | coefficient file (JSON)")
    _add_io_flags(a)
    a.set_defaults(func=_cmd_asymptote)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CostGuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_COST
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
