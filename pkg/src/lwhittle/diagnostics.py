"""Diagnostics for spurious long memory.

qu_test               sup-type score statistic of Qu for true fractional
                      integration against breaks / smooth trends
detect_mean_breaks    exact least-squares mean-shift segmentation (dynamic
                      programming) with BIC choice of the number of breaks
subsample_estimates   re-estimation of d within each regime
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bandwidth import BandwidthRule, resolve_with_note
from .errors import DataError, DegenerateSeriesError, SpecError
from .estimators import EstimateResult, EstimatorSpec, estimate
from .series import as_series
from .spectrum import periodogram

__all__ = [
    "QU_CRITICAL_10PCT",
    "QuResult",
    "BreakModel",
    "SubsampleRow",
    "qu_test",
    "detect_mean_breaks",
    "segment_ssr",
    "subsample_estimates",
]

# 10% critical value at trimming epsilon = 0.02
QU_CRITICAL_10PCT = 1.022
MAX_BREAKS = 5


@dataclass(frozen=True)
class QuResult:
    W: float
    epsilon: float
    critical_10pct: float
    reject_10pct: bool
    d_hat: float
    m: int


def qu_test(x, m: int, epsilon: float = 0.02, critical: float = QU_CRITICAL_10PCT,
            bounds=(-1.0, 2.0)) -> QuResult:
    """Qu's W statistic at bandwidth m.

    With d and G from an LW fit at m and v_j = log j - mean(log k),

        W = max_{eps <= r <= 1} |sum_{j <= floor(r m)} v_j (I_j lam_j^{2d} / G - 1)|
            / sqrt(sum_{j <= m} v_j^2).

    ``critical`` defaults to the 10% value for epsilon = 0.02; supply
    another value when using a different trimming.
    """
    if not 0 < epsilon < 1:
        raise SpecError(f"trimming epsilon must lie in (0, 1), got {epsilon}")
    x = as_series(x)
    if x.n < 2 * m:
        raise SpecError(f"Qu test needs n >= 2m (n={x.n}, m={m})")
    res: EstimateResult = estimate(x, EstimatorSpec("lw", m=m, bounds=bounds))
    I = periodogram(x, "none", m)
    scaled = I.ords * I.freqs ** (2.0 * res.d_hat)
    G = scaled.mean()
    if not G > 0:
        raise DegenerateSeriesError("degenerate periodogram in Qu test")
    logj = np.log(np.arange(1, m + 1))
    nu = logj - logj.mean()
    partial = np.cumsum(nu * (scaled / G - 1.0))
    k0 = max(1, int(math.floor(epsilon * m)))
    W = float(np.max(np.abs(partial[k0 - 1:])) / math.sqrt(np.sum(nu * nu)))
    return QuResult(W, float(epsilon), float(critical), W > critical, res.d_hat, m)


@dataclass(frozen=True)
class BreakModel:
    """Mean-shift segmentation.

    ``break_indices`` are 1-based positions of the last observation of each
    segment except the final one.
    """

    n: int
    break_indices: tuple[int, ...]
    segment_means: tuple[float, ...]
    ssr: float
    criterion: float
    min_len: int
    bic_by_count: tuple[float, ...] = field(default=())

    @property
    def n_breaks(self) -> int:
        return len(self.break_indices)

    @property
    def segments(self) -> list[tuple[int, int]]:
        """1-based inclusive (start, end) of each segment."""
        ends = list(self.break_indices) + [self.n]
        starts = [1] + [b + 1 for b in self.break_indices]
        return list(zip(starts, ends))


def segment_ssr(v: np.ndarray, breaks) -> float:
    """Within-segment sum of squared deviations for given break positions."""
    edges = [0, *breaks, v.size]
    return float(sum(np.sum((v[a:b] - v[a:b].mean()) ** 2) for a, b in zip(edges[:-1], edges[1:])))


def _bic(n: int, ssr: float, k: int) -> float:
    with np.errstate(divide="ignore"):
        fit = n * np.log(ssr / n) if ssr > 0 else -np.inf
    return float(fit + (2 * k + 1) * math.log(n))


def detect_mean_breaks(x, max_breaks: int = 5, min_len_frac: float = 0.15) -> BreakModel:
    """Least-squares mean-shift breaks with the count chosen by BIC.

    For each k = 0..max_breaks the global minimum of the within-segment
    sum of squares over all placements with segments of at least
    ceil(min_len_frac n) observations is found by dynamic programming;
    the k minimizing n log(ssr/n) + (2k + 1) log n wins, ties going to
    fewer breaks.
    """
    x = as_series(x)
    v = x.values
    n = v.size
    if not 0 < min_len_frac < 1:
        raise SpecError(f"min_len_frac must lie in (0, 1), got {min_len_frac}")
    if not 0 <= max_breaks <= MAX_BREAKS:
        raise SpecError(f"max_breaks must lie in [0, {MAX_BREAKS}], got {max_breaks}")
    h = max(1, int(math.ceil(min_len_frac * n - 1e-9)))
    if n < 2 * h:
        raise DataError(f"series of length {n} too short for minimum segment length {h}")
    K = min(max_breaks, n // h - 1)

    # centring first keeps the cumulative sums well conditioned
    c = v - v.mean()
    S = np.concatenate([[0.0], np.cumsum(c)])
    Q = np.concatenate([[0.0], np.cumsum(c * c)])

    def cost(i, j):
        # ssr of observations i+1..j (0-based half-open [i, j)), vectorized in i
        L = j - i
        s = S[j] - S[i]
        return np.maximum(Q[j] - Q[i] - s * s / L, 0.0)

    idx = np.arange(n + 1)
    # F[k][j]: best ssr of the first j observations split into k + 1 segments
    F = np.full((K + 1, n + 1), np.inf)
    arg = np.zeros((K + 1, n + 1), dtype=int)
    F[0, h:] = cost(np.zeros(n + 1 - h, dtype=int), idx[h:])
    for k in range(1, K + 1):
        for j in range((k + 1) * h, n + 1):
            i = np.arange(k * h, j - h + 1)
            cand = F[k - 1, i] + cost(i, j)
            t = int(np.argmin(cand))
            F[k, j] = cand[t]
            arg[k, j] = i[t]

    bics = []
    for k in range(K + 1):
        bics.append(_bic(n, float(F[k, n]), k))
    best = int(np.argmin(bics))

    breaks = []
    j = n
    for k in range(best, 0, -1):
        j = int(arg[k, j])
        breaks.append(j)
    breaks = tuple(sorted(breaks))
    edges = [0, *breaks, n]
    means = tuple(float(v[a:b].mean()) for a, b in zip(edges[:-1], edges[1:]))
    return BreakModel(n=n, break_indices=breaks, segment_means=means,
                      ssr=segment_ssr(v, breaks), criterion=bics[best], min_len=h,
                      bic_by_count=tuple(bics))


class SubsampleRow(NamedTuple):
    segment: str
    start: int
    end: int
    n: int
    m: int | None
    result: EstimateResult | None
    error: str | None = None


def subsample_estimates(x, breaks: BreakModel | None, spec: EstimatorSpec | str = "lw",
                        rule: BandwidthRule | None = None) -> list[SubsampleRow]:
    """Estimate d within each regime and on the full sample.

    Rows come in segment order, then the full sample (labelled "full").
    With no breaks only the full-sample row is returned.  The bandwidth of
    every row comes from ``rule`` applied to that row's length; a failure
    in one row is recorded in its ``error`` field.
    """
    if isinstance(spec, str):
        spec = EstimatorSpec(spec)
    rule = BandwidthRule() if rule is None else rule
    x = as_series(x)
    segs = [] if breaks is None or breaks.n_breaks == 0 else breaks.segments
    if breaks is not None and breaks.n != x.n:
        raise SpecError("break model length does not match the series")
    pieces = [(str(i + 1), a, b) for i, (a, b) in enumerate(segs)] + [("full", 1, x.n)]
    rows = []
    for label, a, b in pieces:
        sub = x.segment(a, b) if label != "full" else x
        m = None
        try:
            m, _ = resolve_with_note(rule, sub.n, sub)
            r = estimate(sub, spec.replace(m=m))
        except (ValueError, ArithmeticError) as exc:
            rows.append(SubsampleRow(label, a, b, sub.n, m, None, str(exc)))
            continue
        rows.append(SubsampleRow(label, a, b, sub.n, m, r))
    return rows
