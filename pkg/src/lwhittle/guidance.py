"""Estimator selection heuristics surfaced as informational notes.

Nothing here changes an estimate.  The helpers compare estimates with the
range of d over which each method is known to be consistent and flag
patterns worth a second look.
"""

from __future__ import annotations

import math
from typing import Sequence

from .estimators import EstimateResult, EstimatorSpec

__all__ = ["VALIDITY", "validity_range", "range_notes", "disagreement_note", "antipersistence_note"]

# open intervals of d over which each method is consistent
VALIDITY = {
    "lw": (-0.5, 1.0),
    "velasco(bartlett)": (-0.5, 1.5),
    "velasco(cosine)": (-0.5, 2.5),
    "velasco(kolmogorov)": (-0.5, 2.5),
    "hc": (-0.5, 1.5),
    "elw": (-math.inf, math.inf),
    "2elw": (-0.5, 2.0),
    "2elw(detrended)": (-0.5, 1.75),
}


def validity_range(spec: EstimatorSpec) -> tuple[float, float]:
    if spec.method == "velasco":
        return VALIDITY[f"velasco({spec.taper})"]
    if spec.method == "2elw":
        return VALIDITY["2elw(detrended)" if spec.trend is not None else "2elw"]
    if spec.method == "elw":
        # a sample-mean correction keeps consistency only below d = 1
        return (-0.5, 1.0) if spec.mean_correction == "sample" else VALIDITY["elw"]
    return VALIDITY[spec.method]


def range_notes(spec: EstimatorSpec, result: EstimateResult) -> list[str]:
    """Notes for an estimate lying outside its method's validity range."""
    lo, hi = validity_range(spec)
    d = result.d_hat
    notes = []
    if not lo < d < hi:
        notes.append(f"{result.method}: estimate {d:.3f} lies outside the range ({lo:g}, {hi:g}) "
                     f"where this estimator is consistent")
    if spec.method == "lw" and d > 0.9:
        notes.append("lw: estimates near or above 1 are biased toward the unit root; "
                     "compare with elw or 2elw")
    if spec.method == "elw" and spec.mean_correction == "none":
        notes.append("elw assumes a known zero mean and no trend; use 2elw or a mean correction "
                     "for data with a level or trend")
    return notes


def disagreement_note(results: Sequence[EstimateResult], factor: float = 2.0) -> str | None:
    """Note when the spread of estimates exceeds ``factor`` times the largest SE."""
    results = [r for r in results if r is not None and math.isfinite(r.d_hat)]
    if len(results) < 2:
        return None
    ds = [r.d_hat for r in results]
    spread = max(ds) - min(ds)
    se = max(r.se for r in results)
    if spread > factor * se:
        lo = min(results, key=lambda r: r.d_hat)
        hi = max(results, key=lambda r: r.d_hat)
        return (f"note: estimates disagree (range {spread:.3f} exceeds {factor:g} x max SE = {factor * se:.3f}; "
                f"lowest {lo.method} {lo.d_hat:.3f}, highest {hi.method} {hi.d_hat:.3f}); "
                f"check short-run dynamics, deterministic terms and breaks")
    return None


def antipersistence_note(elw: EstimateResult | None, velasco: EstimateResult | None) -> str | None:
    """For antipersistent estimates, ELW well above Velasco hints at a deterministic term."""
    if elw is None or velasco is None:
        return None
    if min(elw.d_hat, velasco.d_hat) < 0 and elw.d_hat - velasco.d_hat > 2 * velasco.se:
        return ("note: elw exceeds velasco for an antipersistent series; an unmodelled mean "
                "or trend may be inflating elw")
    return None
