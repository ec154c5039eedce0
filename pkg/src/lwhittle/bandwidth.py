"""Bandwidth rules, bandwidth scans and bootstrap-MSE bandwidth choice."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError, DegenerateSeriesError, SpecError
from .estimators import EstimateResult, EstimatorSpec, estimate
from .optimize import minimize_scalar
from .series import as_series
from .simulate import rng_for

__all__ = [
    "BandwidthRule",
    "BandwidthWarning",
    "BootstrapMseCurve",
    "ScanRow",
    "resolve",
    "resolve_with_note",
    "scan",
    "bootstrap_select",
    "default_grid",
    "default_k",
    "PILOT_ALPHA",
]

RULE_KINDS = ("power_floor", "power_round", "fixed", "bootstrap")
PILOT_ALPHA = 0.7
MIN_B = 50


class BandwidthWarning(UserWarning):
    """A bandwidth rule produced a value that had to be clamped."""


@dataclass(frozen=True)
class BandwidthRule:
    """How to pick m for a series of length n.

    kind        power_floor (floor(n^alpha)), power_round (round(n^alpha)),
                fixed (m) or bootstrap (Arteche-Orbe style MSE minimization
                with ``B`` replications, local width ``k_n`` and candidate
                ``grid``; None means the defaults of ``bootstrap_select``).
    """

    kind: str = "power_floor"
    alpha: float = 0.65
    m: int | None = None
    B: int = 200
    k_n: int | None = None
    grid: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise SpecError(f"unknown bandwidth rule {self.kind!r}; expected one of {', '.join(RULE_KINDS)}")
        if self.kind in ("power_floor", "power_round") and not 0 < self.alpha < 1:
            raise SpecError(f"bandwidth exponent must lie in (0, 1), got {self.alpha}")
        if self.kind == "fixed" and (self.m is None or self.m < 2):
            raise SpecError(f"fixed bandwidth must be >= 2, got {self.m}")
        if self.kind == "bootstrap":
            if self.B < MIN_B:
                raise SpecError(f"bootstrap needs B >= {MIN_B} replications, got {self.B}")
            if self.k_n is not None and self.k_n < 3:
                raise SpecError(f"bootstrap local width must be >= 3, got {self.k_n}")
            if self.grid is not None:
                object.__setattr__(self, "grid", tuple(int(g) for g in self.grid))

    @classmethod
    def power_floor(cls, alpha: float = 0.65) -> "BandwidthRule":
        return cls("power_floor", alpha=alpha)

    @classmethod
    def power_round(cls, alpha: float = 0.65) -> "BandwidthRule":
        return cls("power_round", alpha=alpha)

    @classmethod
    def fixed(cls, m: int) -> "BandwidthRule":
        return cls("fixed", m=int(m))

    @classmethod
    def bootstrap(cls, B: int = 200, k_n: int | None = None, grid=None, seed: int = 0) -> "BandwidthRule":
        return cls("bootstrap", B=B, k_n=k_n, grid=None if grid is None else tuple(grid), seed=seed)

    @property
    def label(self) -> str:
        if self.kind == "power_floor":
            return f"floor(n^{self.alpha:g})"
        if self.kind == "power_round":
            return f"round(n^{self.alpha:g})"
        if self.kind == "fixed":
            return f"m={self.m}"
        return f"bootstrap(B={self.B})"


def _power(n: int, alpha: float, rounding: str) -> int:
    v = n ** alpha
    # n^alpha can land a hair below an integer that it equals exactly
    if rounding == "floor":
        return int(math.floor(v + 1e-9))
    return int(math.floor(v + 0.5))


def resolve_with_note(rule: BandwidthRule, n: int, x=None) -> tuple[int, str | None]:
    """Bandwidth from ``rule`` plus a note when the raw value was clamped.

    The bootstrap rule needs the series itself, passed as ``x``.
    """
    if n < 16:
        raise DataError(f"bandwidth rules need n >= 16, got n={n}")
    if rule.kind == "power_floor":
        m = _power(n, rule.alpha, "floor")
    elif rule.kind == "power_round":
        m = _power(n, rule.alpha, "round")
    elif rule.kind == "fixed":
        m = int(rule.m)
    else:
        if x is None:
            raise SpecError("the bootstrap bandwidth rule needs the series")
        if len(as_series(x)) != n:
            raise SpecError("series length does not match n")
        m = bootstrap_select(x, B=rule.B, k_n=rule.k_n, grid=rule.grid, seed=rule.seed).m_star
    hi = n // 2
    clamped = min(max(m, 2), hi)
    note = None
    if clamped != m:
        note = f"bandwidth {m} from rule {rule.label} clamped to {clamped} (valid range [2, {hi}])"
    return clamped, note


def resolve(rule: BandwidthRule, n: int, x=None) -> int:
    """Bandwidth m from ``rule`` for length n, clamped to [2, n // 2].

    Clamping issues a ``BandwidthWarning``.
    """
    m, note = resolve_with_note(rule, n, x)
    if note:
        warnings.warn(note, BandwidthWarning, stacklevel=2)
    return m


class ScanRow(NamedTuple):
    m: int
    d_hat: float
    se: float
    error: str | None = None


def scan(x, spec: EstimatorSpec | str, m_range: tuple[int, int, int]) -> list[ScanRow]:
    """Estimate d at every m in range(lo, hi + 1, step).

    A failure at a single m is recorded as a row with NaN estimate and the
    error message instead of aborting the scan.
    """
    if isinstance(spec, str):
        spec = EstimatorSpec(spec)
    x = as_series(x)
    lo, hi, step = (int(v) for v in m_range)
    if step < 1:
        raise SpecError("scan step must be >= 1")
    ms = list(range(lo, hi + 1, step))
    if not ms:
        raise SpecError(f"empty bandwidth range ({lo}, {hi}, {step})")
    if hi > x.n // 2:
        raise SpecError(f"scan upper bandwidth {hi} exceeds n/2 = {x.n // 2}")
    rows = []
    for m in ms:
        try:
            r = estimate(x, spec.replace(m=m))
        except (ValueError, ArithmeticError) as exc:
            rows.append(ScanRow(m, math.nan, math.nan, str(exc)))
            continue
        rows.append(ScanRow(m, r.d_hat, r.se))
    return rows


@dataclass(frozen=True)
class BootstrapMseCurve:
    candidates: np.ndarray
    mse: np.ndarray
    m_star: int
    d_pilot: float
    m_pilot: int
    B: int
    k_n: int

    def __post_init__(self):
        if self.candidates.shape != self.mse.shape:
            raise ValueError("candidates and mse must have equal length")

    def rows(self):
        return list(zip(self.candidates.tolist(), self.mse.tolist()))


def default_grid(n: int, size: int = 20) -> np.ndarray:
    """Up to ``size`` log-spaced integers from floor(sqrt(n)) to n // 2."""
    lo = max(2, int(math.floor(math.sqrt(n))))
    hi = n // 2
    return np.unique(np.round(np.geomspace(lo, hi, size)).astype(int))


def default_k(n: int) -> int:
    """Local resampling width max(11, round(n/33)), made odd."""
    k = max(11, int(math.floor(n / 33 + 0.5)))
    return k if k % 2 else k - 1


def _lw_on(I: np.ndarray, lam: np.ndarray, bounds) -> float:
    loglam = np.log(lam)
    c = loglam - loglam.mean()
    return minimize_scalar(lambda d: math.log(np.mean(np.exp(2.0 * d * c) * I)), bounds).x


def bootstrap_select(x, B: int = 200, k_n: int | None = None, grid: Sequence[int] | None = None,
                     seed: int = 0, bounds=(-1.0, 2.0)) -> BootstrapMseCurve:
    """Bootstrap-MSE choice of the LW bandwidth.

    A pilot LW fit at m0 = floor(n^0.7) gives d0 and G0.  The periodogram
    standardized by G0 lambda^(-2 d0) is resampled locally: the draw at
    frequency j comes uniformly from the ordinates within (k_n - 1) / 2 of
    j.  Each bootstrap periodogram is refitted by LW at every candidate m,
    and MSE(m) is the mean squared deviation from d0 over the B draws.
    The smallest minimizing candidate is returned as ``m_star``.

    Draws for replication b come from a stream keyed by (seed, b), one
    uniform per frequency j in order, so results do not depend on the
    order in which replications are evaluated.
    """
    x = as_series(x)
    v = x.values
    n = v.size
    N = n // 2
    if B < 1:
        raise SpecError("B must be >= 1")
    k_n = default_k(n) if k_n is None else int(k_n)
    if k_n % 2 == 0:
        k_n -= 1
    if k_n < 1 or k_n >= n / 2:
        raise SpecError(f"local width k_n={k_n} must be below n/2 = {n / 2:g}")
    cand = default_grid(n) if grid is None else np.unique(np.asarray(grid, dtype=int))
    if cand.size == 0:
        raise SpecError("empty candidate grid")
    if cand[0] < 2 or cand[-1] > N:
        raise SpecError(f"candidate bandwidths must lie in [2, {N}]")

    if np.ptp(v) == 0:
        raise DegenerateSeriesError("degenerate periodogram: input series is constant")
    I = np.abs(np.fft.fft(v)[1:N + 1]) ** 2 / (2.0 * np.pi * n)
    if np.any(I <= 0):
        raise DegenerateSeriesError("degenerate periodogram: zero ordinate")
    lam = 2.0 * np.pi * np.arange(1, N + 1) / n
    m0 = min(int(math.floor(n ** PILOT_ALPHA + 1e-9)), N)
    try:
        pilot: EstimateResult = estimate(x, EstimatorSpec("lw", m=m0, bounds=bounds))
    except (ValueError, ArithmeticError) as exc:
        raise DegenerateSeriesError(f"bootstrap pilot estimate failed: {exc}") from exc
    d0 = pilot.d_hat
    G0 = float(np.mean(lam[:m0] ** (2.0 * d0) * I[:m0]))
    shape = G0 * lam ** (-2.0 * d0)
    s = I / shape

    half = (k_n - 1) // 2
    j = np.arange(N)
    lo = np.maximum(0, j - half)
    width = np.minimum(N - 1, j + half) - lo + 1

    dev = np.empty((B, cand.size))
    for b in range(B):
        u = rng_for(seed, b).random(N)
        idx = lo + np.minimum((u * width).astype(int), width - 1)
        Ib = shape * s[idx]
        for i, m in enumerate(cand):
            dev[b, i] = _lw_on(Ib[:m], lam[:m], bounds) - d0
    mse = np.mean(dev ** 2, axis=0)
    m_star = int(cand[int(np.argmin(mse))])
    return BootstrapMseCurve(cand, mse, m_star, float(d0), m0, int(B), k_n)
