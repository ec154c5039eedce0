"""Command-line interface.

Exit status 0 on success, 2 on usage errors (bad flags, invalid
estimator or bandwidth settings), 1 on data or numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import mc as mc_mod
from .bandwidth import BandwidthRule, bootstrap_select, default_grid, resolve_with_note, scan
from .diagnostics import QU_CRITICAL_10PCT, detect_mean_breaks, qu_test, subsample_estimates
from .errors import DataError, SpecError
from .estimators import METHODS, EstimateResult, EstimatorSpec, estimate, profile
from .guidance import antipersistence_note, disagreement_note, range_notes
from .series import TimeSeries, diff, load_csv, log, read_csv_text, to_csv
from .simulate import SimSpec, arfima
from .spectrum import VELASCO_TAPERS

__all__ = ["main", "build_parser"]

# flags whose values may start with "-" (negative numbers)
_VALUE_FLAGS = ("--bounds", "--grid", "--m-range", "--d", "--rho", "--mu", "--beta")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _pair(text: str, name: str, count: int = 2, kind=float):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise UsageError(f"{name} expects {count} comma-separated values, got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError:
        raise UsageError(f"{name}: cannot parse {text!r}") from None


def _add_data(p):
    p.add_argument("--input", help="CSV file (default: standard input)")
    p.add_argument("--column", default="0", help="column name or 0-based index (default 0)")
    p.add_argument("--log", action="store_true", help="take logs first")
    p.add_argument("--diff", action="store_true", help="first-difference (after --log)")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")


def _add_bandwidth(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=int, help="bandwidth")
    g.add_argument("--alpha", type=float, help="bandwidth floor(n^alpha) (default 0.65)")
    g.add_argument("--boot", action="store_true", help="bootstrap-MSE bandwidth")
    p.add_argument("--B", type=int, default=200, help="bootstrap replications (with --boot)")
    p.add_argument("--k-n", type=int, default=None, help="bootstrap local width (with --boot)")
    p.add_argument("--seed", type=int, default=0)


def _add_estimator(p, allow_all: bool = False):
    methods = METHODS + (("all",) if allow_all else ())
    p.add_argument("--method", choices=methods, default="lw")
    p.add_argument("--taper", choices=VELASCO_TAPERS, default="kolmogorov")
    p.add_argument("--bounds", help="search interval LO,HI")
    p.add_argument("--demean", choices=("none", "sample", "first"), default="none",
                   help="mean correction for elw")
    p.add_argument("--trend", default="none",
                   help="2elw: none or adaptive (adaptive mean only) or K (OLS detrend of order K)")
    p.add_argument("--first-step", choices=("hc", "velasco"), default="hc")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lwhittle", description="Local Whittle estimation of the memory parameter d.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate d")
    _add_data(p)
    _add_estimator(p, allow_all=True)
    _add_bandwidth(p)

    p = sub.add_parser("profile", help="objective function on a grid of d")
    _add_data(p)
    _add_estimator(p)
    _add_bandwidth(p)
    p.add_argument("--grid", default="-1,3,0.01", help="LO,HI,STEP")

    p = sub.add_parser("simulate", help="simulate an ARFIMA(1, d, 0) path as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="write CSV here instead of standard output")

    p = sub.add_parser("scan-m", help="estimates across bandwidths")
    _add_data(p)
    _add_estimator(p)
    p.add_argument("--m-range", help="LO,HI,STEP (default floor(sqrt n) .. n/2 in 20 steps)")

    p = sub.add_parser("boot-m", help="bootstrap-MSE bandwidth choice")
    _add_data(p)
    p.add_argument("--B", type=int, default=200)
    p.add_argument("--k-n", type=int, default=None)
    p.add_argument("--grid", help="comma-separated candidate bandwidths")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("mc", help="Monte Carlo run from a JSON config")
    p.add_argument("--config", required=True, help="JSON file (see README)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--layout", choices=("wide", "long"), default="wide")
    p.add_argument("--shade", type=float, default=0.05, help="mark MSE above this value")
    p.add_argument("--samples", help="also write raw estimates as CSV to this path")

    p = sub.add_parser("breaks", help="mean-shift breaks and per-regime estimates")
    _add_data(p)
    _add_estimator(p)
    p.add_argument("--max-breaks", type=int, default=5)
    p.add_argument("--min-len", type=float, default=0.15, help="minimum segment length as a fraction of n")
    p.add_argument("--m", type=int, help="fixed bandwidth for every segment")
    p.add_argument("--alpha", type=float, default=None, help="per-segment bandwidth floor(n^alpha)")

    p = sub.add_parser("qu", help="Qu test of true long memory")
    _add_data(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=int)
    g.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--critical", type=float, default=QU_CRITICAL_10PCT,
                   help="critical value matching --epsilon (default: 10%% value at epsilon 0.02)")
    return parser


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    out = []
    i = 0
    argv = list(argv)
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and len(argv[i + 1]) > 1 and (argv[i + 1][1].isdigit() or argv[i + 1][1] == "."):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


# ---------------------------------------------------------------------------
# helpers

def _read_series(args, stdin) -> TimeSeries:
    column = int(args.column) if args.column.isdigit() else args.column
    if args.input:
        import os
        if not os.path.exists(args.input):
            raise UsageError(f"input file not found: {args.input}")
        x = load_csv(args.input, column)
    else:
        text = stdin.read()
        if not text.strip():
            raise UsageError("no input: pass --input PATH or pipe CSV on standard input")
        x = read_csv_text(text, column, name="stdin")
    if args.log:
        x = log(x)
    if args.diff:
        x = diff(x)
    return x


def _trend(text: str):
    if text in ("none", "adaptive"):
        return None
    try:
        k = int(text)
    except ValueError:
        raise UsageError(f"--trend must be none, adaptive or a nonnegative integer, got {text!r}") from None
    if k < 0:
        raise UsageError("--trend order must be nonnegative")
    return k


def _spec(args, method: str | None = None) -> EstimatorSpec:
    bounds = _pair(args.bounds, "--bounds") if args.bounds else None
    return EstimatorSpec(method or args.method, bounds=bounds, taper=args.taper,
                         mean_correction=args.demean, trend=_trend(args.trend),
                         first_step=args.first_step)


def _rule(args) -> BandwidthRule:
    if getattr(args, "boot", False):
        return BandwidthRule.bootstrap(B=args.B, k_n=args.k_n, seed=args.seed)
    if getattr(args, "m", None) is not None:
        return BandwidthRule.fixed(args.m)
    alpha = getattr(args, "alpha", None)
    return BandwidthRule.power_floor(0.65 if alpha is None else alpha)


def _num(v, digits=4):
    if v is None:
        return ""
    if isinstance(v, float) and not math.isfinite(v):
        return "nan"
    return f"{v:.{digits}f}" if isinstance(v, float) else str(v)


def _render_table(header, rows) -> str:
    cells = [[str(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(c) if isinstance(c, float) else ("" if c is None else c) for c in r])
    return buf.getvalue()


def _json(obj) -> str:
    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return None
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, np.generic):
            return clean(o.item())
        return o
    return json.dumps(clean(obj), indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def _cmd_estimate(args, out, err, stdin) -> int:
    x = _read_series(args, stdin)
    methods = METHODS if args.method == "all" else (args.method,)
    specs = [_spec(args, m) for m in methods]
    rule = _rule(args)
    m, clamp_note = resolve_with_note(rule, x.n, x)
    notes = [clamp_note] if clamp_note else []
    results: list[EstimateResult | None] = []
    errors: list[str | None] = []
    for spec in specs:
        try:
            r = estimate(x, spec.replace(m=m))
        except (SpecError, DataError, ArithmeticError) as exc:
            if args.method != "all":
                raise
            r = None
            errors.append(f"{spec.label}: {exc}")
        else:
            errors.append(None)
            notes.extend(f"{r.method}: {n}" for n in r.notes)
            notes.extend(range_notes(spec, r))
        results.append(r)
    if all(r is None for r in results):
        raise DataError("; ".join(e for e in errors if e))
    if args.method == "all":
        dn = disagreement_note(results)
        if dn:
            notes.append(dn)
        an = antipersistence_note(results[3], results[1])
        if an:
            notes.append(an)

    header = ["method", "d_hat", "se", "ci_low", "ci_high", "m", "n"]
    rows = []
    for spec, r, e in zip(specs, results, errors):
        if r is None:
            rows.append([spec.label, math.nan, math.nan, math.nan, math.nan, m, x.n])
            notes.append(e)
        else:
            lo, hi = r.ci()
            rows.append([r.method, r.d_hat, r.se, lo, hi, r.m, r.n])
    if args.format == "json":
        payload = {"series": x.name, "n": x.n, "m": m,
                   "results": [r.to_dict() if r is not None else {"method": s.label, "error": e}
                               for s, r, e in zip(specs, results, errors)],
                   "notes": notes}
        out.write(_json(payload))
    elif args.format == "csv":
        out.write(_render_csv(header, rows))
        for n in notes:
            err.write(n + "\n")
    else:
        out.write(_render_table(header, [[c if not isinstance(c, float) else _num(c) for c in r] for r in rows]))
        for n in notes:
            out.write(n + "\n")
    return 0


def _cmd_profile(args, out, err, stdin) -> int:
    x = _read_series(args, stdin)
    spec = _spec(args)
    m, _ = resolve_with_note(_rule(args), x.n, x)
    lo, hi, step = _pair(args.grid, "--grid", 3)
    prof = profile(x, spec.replace(m=m), grid=(lo, hi, step))
    header = ["d", "objective", "local_min"]
    mins = set(prof.minima)
    rows = [[float(d), float(v), int(i in mins)] for i, (d, v) in enumerate(zip(prof.d, prof.value))]
    if args.format == "json":
        out.write(_json({"method": prof.method, "m": m, "d": prof.d.tolist(),
                         "objective": prof.value.tolist(),
                         "local_minima": [float(prof.d[i]) for i in prof.minima]}))
    elif args.format == "csv":
        out.write(_render_csv(header, rows))
    else:
        out.write(_render_table(header, [[f"{r[0]:.4f}", f"{r[1]:.6f}", r[2]] for r in rows]))
        if len(prof.minima) > 1:
            out.write(f"note: {len(prof.minima)} local minima at d = "
                      + ", ".join(f"{prof.d[i]:.2f}" for i in prof.minima) + "\n")
    return 0


def _cmd_simulate(args, out, err, stdin) -> int:
    x = arfima(SimSpec(args.n, args.d, rho=args.rho, mu=args.mu, beta=args.beta,
                       sigma=args.sigma, seed=args.seed))
    text = to_csv(x, args.output)
    if args.output is None:
        out.write(text)
    return 0


def _cmd_scan(args, out, err, stdin) -> int:
    x = _read_series(args, stdin)
    spec = _spec(args)
    if args.m_range:
        lo, hi, step = _pair(args.m_range, "--m-range", 3, int)
    else:
        g = default_grid(x.n)
        lo, hi = int(g[0]), int(g[-1])
        step = max(1, (hi - lo) // 19)
    rows = scan(x, spec, (lo, hi, step))
    header = ["m", "d_hat", "se", "error"]
    if args.format == "json":
        out.write(_json([r._asdict() for r in rows]))
    elif args.format == "csv":
        out.write(_render_csv(header, [list(r) for r in rows]))
    else:
        out.write(_render_table(header, [[r.m, _num(r.d_hat), _num(r.se), r.error or ""] for r in rows]))
    return 0


def _cmd_boot(args, out, err, stdin) -> int:
    x = _read_series(args, stdin)
    grid = [int(g) for g in args.grid.split(",")] if args.grid else None
    curve = bootstrap_select(x, B=args.B, k_n=args.k_n, grid=grid, seed=args.seed)
    header = ["m", "mse", "selected"]
    rows = [[int(m), float(v), int(m == curve.m_star)] for m, v in curve.rows()]
    if args.format == "json":
        out.write(_json({"candidates": curve.candidates.tolist(), "mse": curve.mse.tolist(),
                         "m_star": curve.m_star, "d_pilot": curve.d_pilot, "m_pilot": curve.m_pilot,
                         "B": curve.B, "k_n": curve.k_n}))
    elif args.format == "csv":
        out.write(_render_csv(header, rows))
    else:
        out.write(_render_table(header, [[r[0], f"{r[1]:.6f}", "*" if r[2] else ""] for r in rows]))
        out.write(f"m_star = {curve.m_star} (pilot d = {curve.d_pilot:.4f} at m0 = {curve.m_pilot}, "
                  f"B = {curve.B}, k_n = {curve.k_n})\n")
    return 0


def _cmd_mc(args, out, err, stdin) -> int:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    config = mc_mod.MCConfig.from_json(text)
    summary = mc_mod.run(config, workers=args.workers)
    if args.samples:
        with open(args.samples, "w") as fh:
            fh.write(mc_mod.samples_csv(summary))
    if args.format == "json":
        out.write(_json({"config": config.to_dict(),
                         "rows": [r.__dict__ for r in summary.rows]}))
    elif args.format == "csv":
        out.write(mc_mod.summary_csv(summary))
    else:
        out.write(mc_mod.table(summary, args.shade, layout=args.layout))
    return 0


def _cmd_breaks(args, out, err, stdin) -> int:
    x = _read_series(args, stdin)
    spec = _spec(args)
    model = detect_mean_breaks(x, args.max_breaks, args.min_len)
    if args.m is not None:
        rule = BandwidthRule.fixed(args.m)
    else:
        rule = BandwidthRule.power_floor(0.65 if args.alpha is None else args.alpha)
    rows = subsample_estimates(x, model, spec, rule)
    means = dict(zip([str(i + 1) for i in range(model.n_breaks + 1)], model.segment_means))
    header = ["segment", "start", "end", "n", "mean", "m", "d_hat", "se", "error"]
    table_rows = []
    for r in rows:
        mean = means.get(r.segment, float(np.mean(x.values)))
        res = r.result
        table_rows.append([r.segment, r.start, r.end, r.n, mean, r.m,
                           res.d_hat if res else math.nan, res.se if res else math.nan, r.error or ""])
    if args.format == "json":
        out.write(_json({"break_indices": list(model.break_indices), "segment_means": list(model.segment_means),
                         "ssr": model.ssr, "bic": model.criterion, "min_len": model.min_len,
                         "rows": [dict(zip(header, tr)) for tr in table_rows]}))
    elif args.format == "csv":
        out.write(_render_csv(header, table_rows))
    else:
        out.write(f"breaks: {model.n_breaks} at {list(model.break_indices)} "
                  f"(BIC {model.criterion:.3f}, minimum segment {model.min_len})\n")
        out.write(_render_table(header, [[c if not isinstance(c, float) else _num(c) for c in tr]
                                         for tr in table_rows]))
    return 0


def _cmd_qu(args, out, err, stdin) -> int:
    x = _read_series(args, stdin)
    m, _ = resolve_with_note(_rule(args), x.n)
    res = qu_test(x, m, args.epsilon, args.critical)
    if args.format == "json":
        out.write(_json(res.__dict__))
    elif args.format == "csv":
        out.write(_render_csv(["W", "epsilon", "critical", "reject", "d_hat", "m"],
                              [[res.W, res.epsilon, res.critical_10pct, int(res.reject_10pct), res.d_hat, res.m]]))
    else:
        verdict = "reject" if res.reject_10pct else "do not reject"
        out.write(f"W = {res.W:.3f} (m = {m}, epsilon = {res.epsilon:g}, critical = {res.critical_10pct:.3f}): "
                  f"{verdict} true long memory\n")
    return 0


_COMMANDS = {
    "estimate": _cmd_estimate,
    "profile": _cmd_profile,
    "simulate": _cmd_simulate,
    "scan-m": _cmd_scan,
    "boot-m": _cmd_boot,
    "mc": _cmd_mc,
    "breaks": _cmd_breaks,
    "qu": _cmd_qu,
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None, stdin=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    inp = stdin or sys.stdin
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(_join_negative_values(argv))
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        return _COMMANDS[args.command](args, out, err, inp)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except SpecError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except (DataError, ArithmeticError) as exc:
        err.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
