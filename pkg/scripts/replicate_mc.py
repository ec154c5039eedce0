"""Run the bundled Monte Carlo designs and print their tables.

    python3 scripts/replicate_mc.py                 # every config in scripts/configs
    python3 scripts/replicate_mc.py two_step --reps 500 --workers 4
    python3 scripts/replicate_mc.py elw_wide_range --csv out.csv

Ratio designs (``unknown_mean``, ``linear_trend``) also print the MSE
ratio of each contaminated cell against its clean counterpart.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

from lwhittle.mc import MCConfig, run, summary_csv, table

CONFIG_DIR = Path(__file__).with_name("configs")


def ratios(summary) -> list[str]:
    cfg = summary.config
    lines = []
    for name, vals in (("mu", cfg.mu_values), ("beta", cfg.beta_values)):
        if len(vals) < 2 or vals[0] != 0.0:
            continue
        for r in summary.rows:
            if getattr(r, name) == 0.0:
                continue
            clean = {"mu": r.mu, "beta": r.beta, name: 0.0}
            base = summary.row(r.estimator, r.d, r.rho, **clean)
            lines.append(f"{name}={getattr(r, name):g} d={r.d:g} {r.estimator}: "
                         f"MSE ratio {r.mse / base.mse:.3f}")
    return lines


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("names", nargs="*", help="config names without .json (default: all)")
    p.add_argument("--reps", type=int, help="override the replication count")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write the summary CSV of the last design here")
    args = p.parse_args(argv)

    names = args.names or sorted(f.stem for f in CONFIG_DIR.glob("*.json"))
    for name in names:
        cfg = MCConfig.from_json((CONFIG_DIR / f"{name}.json").read_text())
        if args.reps:
            cfg = dataclasses.replace(cfg, reps=args.reps)
        t0 = time.perf_counter()
        summary = run(cfg, workers=args.workers)
        print(f"== {name} ({time.perf_counter() - t0:.1f} s)")
        print(table(summary))
        for line in ratios(summary):
            print(line)
        if args.csv:
            Path(args.csv).write_text(summary_csv(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
