"""Manual check of published empirical estimates on user-supplied data.

    python3 scripts/empirical_check.py path/to/manifest.json

The manifest format is shown in empirical_manifest.example.json.  For
each series the script applies the listed transforms, runs all five
estimators at the given bandwidth, and compares the HC estimate (and
the Qu statistic when a reference is given) with the reference value.
Exits 1 if any comparison is off by more than 0.01 (HC) or 0.001 (Qu).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from lwhittle.diagnostics import qu_test
from lwhittle.estimators import EstimatorSpec, estimate
from lwhittle.series import apply_transforms, load_csv

SPECS = [EstimatorSpec("lw"), EstimatorSpec("velasco", taper="kolmogorov"), EstimatorSpec("hc"),
         EstimatorSpec("elw"), EstimatorSpec("2elw")]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print(__doc__, file=sys.stderr)
        return 2
    path = Path(argv[0])
    manifest = json.loads(path.read_text())
    failed = False
    for entry in manifest["series"]:
        x = apply_transforms(load_csv(path.parent / entry["file"], entry.get("column")),
                             entry.get("transforms", []))
        m = entry["m"]
        cells = []
        hc = None
        for spec in SPECS:
            r = estimate(x, spec.replace(m=m))
            cells.append(f"{spec.label} {r.d_hat:.3f} ({r.se:.3f})")
            if spec.method == "hc":
                hc = r.d_hat
        ok = abs(hc - entry["hc"]) <= 0.01
        failed |= not ok
        print(f"{entry['name']} n={x.n} m={m}: " + ", ".join(cells))
        print(f"  HC {hc:.3f} vs reference {entry['hc']:.2f}: {'ok' if ok else 'MISMATCH'}")
        if "qu" in entry:
            W = qu_test(x, m).W
            ok = abs(round(W, 3) - entry["qu"]) <= 1e-3
            failed |= not ok
            print(f"  Qu W {W:.3f} vs reference {entry['qu']:.3f}: {'ok' if ok else 'MISMATCH'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
