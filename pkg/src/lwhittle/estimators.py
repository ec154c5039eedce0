"""Local Whittle estimators of the memory parameter d.

Five methods share one concentrated Whittle criterion

    R(d) = log( N^-1 sum_j lambda_j^{2d} I_j ) - 2d N^-1 sum_j log lambda_j

(N is the number of frequencies, or m / p for a Velasco taper of order
p) and differ in the periodogram they feed it:

lw        raw periodogram, j = 1..m
velasco   tapered periodogram (Bartlett, cosine bell or Kolmogorov), j = p, 2p, ..
hc        complex-tapered periodogram of the first difference at shifted
          frequencies; one is added back to the minimizer
elw       periodogram of the fractionally differenced series (exact LW)
2elw      adaptive-mean ELW, one Newton step from a tapered first stage
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import fracdiff as fd
from .errors import DataError, DegenerateSeriesError, SpecError
from .optimize import GRID_STEP, XTOL, minimize_scalar
from .series import TimeSeries, as_series, detrend_ols
from .spectrum import VELASCO_TAPERS, Periodogram, periodogram, taper_order

__all__ = [
    "METHODS",
    "EstimatorSpec",
    "EstimateResult",
    "ObjectiveProfile",
    "PHI",
    "lw_objective",
    "adaptive_weight",
    "elw_objective",
    "standard_error",
    "default_bandwidth",
    "estimate",
    "two_step_elw",
    "profile",
]

METHODS = ("lw", "velasco", "hc", "elw", "2elw")
_ALIASES = {"two_step_elw": "2elw", "exact": "elw", "local_whittle": "lw"}

# variance inflation constants of Velasco tapers, by order
PHI = {2: 1.05000, 3: 1.00354}
HC_VARIANCE = 1.5

ELW_MAX_WIDTH = 4.5
DEFAULT_BOUNDS = {"lw": (-1.0, 2.0), "velasco": (-1.0, 2.0), "hc": (-1.0, 2.0),
                  "elw": (-1.0, 3.0), "2elw": (-1.0, 3.0)}
DEFAULT_ALPHA = 0.65
FD_STEP = 1e-3
NEWTON_HESSIAN_FLOOR = 2.0
# the Newton step of 2ELW stays within d_T +/- this many first-step SEs
NEWTON_TRUST_Z = 2.576
MEAN_CORRECTIONS = ("none", "sample", "first")

# n*m above which the ELW objective falls back to per-evaluation FFTs
_KERNEL_MAX_CELLS = 4_000_000


def default_bandwidth(n: int, alpha: float = DEFAULT_ALPHA) -> int:
    return int(math.floor(n ** alpha))


@dataclass(frozen=True)
class EstimatorSpec:
    """Everything needed to run one estimator on a series.

    ``m=None`` means floor(n^0.65) at run time and ``bounds=None`` the
    method default ([-1, 2] for LW-type methods, [-1, 3] for ELW/2ELW).
    ``taper`` applies to velasco and to a velasco first step of 2elw.
    ``mean_correction`` is used by elw only; ``trend`` (None for adaptive
    mean only, or a polynomial order k) and ``first_step`` by 2elw only.
    """

    method: str = "lw"
    m: int | None = None
    bounds: tuple[float, float] | None = None
    taper: str = "kolmogorov"
    mean_correction: str = "none"
    trend: int | None = None
    first_step: str = "hc"

    def __post_init__(self):
        method = _ALIASES.get(self.method, self.method)
        if method not in METHODS:
            raise SpecError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        object.__setattr__(self, "method", method)
        if self.taper not in VELASCO_TAPERS:
            raise SpecError(f"unknown Velasco taper {self.taper!r}; expected one of {', '.join(VELASCO_TAPERS)}")
        if self.mean_correction not in MEAN_CORRECTIONS:
            raise SpecError(f"mean_correction must be one of {', '.join(MEAN_CORRECTIONS)}")
        if self.first_step not in ("hc", "velasco"):
            raise SpecError("first_step must be 'hc' or 'velasco'")
        if self.trend is not None and (int(self.trend) != self.trend or self.trend < 0):
            raise SpecError(f"trend order must be a nonnegative integer, got {self.trend!r}")
        if self.m is not None and self.m < 2:
            raise SpecError(f"bandwidth m must be >= 2, got {self.m}")
        if self.bounds is not None:
            lo, hi = (float(b) for b in self.bounds)
            object.__setattr__(self, "bounds", (lo, hi))
        lo, hi = self.resolved_bounds
        if not lo < hi:
            raise SpecError(f"bounds must satisfy lo < hi, got [{lo}, {hi}]")
        if method in ("elw", "2elw") and hi - lo >= ELW_MAX_WIDTH:
            raise SpecError(
                f"ELW search interval [{lo}, {hi}] has width {hi - lo:g}; "
                f"the exact local Whittle estimator requires width < {ELW_MAX_WIDTH}")

    @property
    def resolved_bounds(self) -> tuple[float, float]:
        return self.bounds if self.bounds is not None else DEFAULT_BOUNDS[self.method]

    @property
    def label(self) -> str:
        if self.method == "velasco":
            return f"velasco({self.taper})"
        if self.method == "elw" and self.mean_correction != "none":
            return f"elw(mean={self.mean_correction})"
        if self.method == "2elw" and self.trend is not None:
            return f"2elw(trend={self.trend})"
        return self.method

    def bandwidth(self, n: int) -> int:
        m = self.m if self.m is not None else default_bandwidth(n)
        n_eff = n - 1 if self.method == "hc" or (self.method == "2elw" and self.first_step == "hc") else n
        if m < 2 or 2 * m > n_eff:
            raise SpecError(f"bandwidth m={m} outside [2, {n_eff // 2}] for n={n} ({self.method})")
        if self.method == "velasco" and m < taper_order(self.taper):
            raise SpecError(f"bandwidth m={m} smaller than the taper order")
        return m

    def replace(self, **changes) -> "EstimatorSpec":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class EstimateResult:
    d_hat: float
    se: float
    m: int
    n: int
    method: str
    objective_at_min: float
    converged: bool
    bounds: tuple[float, float]
    mean_estimate: float | None = None
    first_step_d: float | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def ci(self, z: float = 1.959963984540054) -> tuple[float, float]:
        return self.d_hat - z * self.se, self.d_hat + z * self.se

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["bounds"] = list(self.bounds)
        out["notes"] = list(self.notes)
        return out


@dataclass(frozen=True)
class ObjectiveProfile:
    method: str
    d: np.ndarray
    value: np.ndarray
    minima: tuple[int, ...]

    @property
    def grid(self):
        return list(zip(self.d.tolist(), self.value.tolist()))


# ---------------------------------------------------------------------------
# objectives

def _check_ordinates(I: Periodogram) -> None:
    if np.any(~np.isfinite(I.ords)) or np.any(I.ords <= 0):
        raise DegenerateSeriesError("degenerate periodogram: zero ordinate (constant input series?)")


def lw_objective(I: Periodogram, d):
    """Concentrated local Whittle criterion on the frequencies held in ``I``.

    ``d`` may be a scalar or an array.
    """
    _check_ordinates(I)
    return _lw_terms(I)(d)


def _lw_terms(I: Periodogram):
    # log((1/N) sum lam^2d I) - (2d/N) sum log lam with N = I.norm, written
    # around the centred log frequencies so large |d| cannot overflow
    loglam = np.log(I.freqs)
    mean_log = loglam.mean()
    centred = loglam - mean_log
    ords = I.ords
    slope = 2.0 * mean_log * (1.0 - I.m / I.norm)
    offset = math.log(I.m / I.norm)

    def R(d):
        if np.ndim(d) == 0:
            return float(np.log(np.mean(np.exp(2.0 * d * centred) * ords)) + offset + slope * d)
        d = np.asarray(d, dtype=float)[:, None]
        return np.log(np.mean(np.exp(2.0 * d * centred) * ords, axis=1)) + offset + slope * d[:, 0]

    return R


def adaptive_weight(d):
    """Weight on the sample mean in the adaptive mean estimate.

    1 for d <= 1/2, (1 + cos(4 pi d)) / 2 on (1/2, 3/4), 0 for d >= 3/4.
    """
    d_arr = np.asarray(d, dtype=float)
    w = np.where(d_arr <= 0.5, 1.0, np.where(d_arr >= 0.75, 0.0, 0.5 * (1.0 + np.cos(4.0 * np.pi * d_arr))))
    return float(w) if np.ndim(d) == 0 else w


def _mean_value(x: np.ndarray, d, mu: str):
    if mu == "none":
        return 0.0
    if mu == "sample":
        return x.mean()
    if mu == "first":
        return x[0]
    if mu == "adaptive":
        w = adaptive_weight(d)
        return w * x.mean() + (1.0 - w) * x[0]
    raise SpecError(f"unknown mean treatment {mu!r}")


def elw_objective(x, d: float, m: int, mu: str = "none") -> float:
    """Exact local Whittle criterion at ``d``.

    Subtracts the mean estimate selected by ``mu`` (none, sample, first or
    adaptive), fractionally differences at ``d`` and evaluates the
    criterion on the raw periodogram at j = 1..m.
    """
    v = x.values if isinstance(x, TimeSeries) else np.asarray(x, dtype=float)
    n = v.size
    if 2 * m > n or m < 1:
        raise SpecError(f"bandwidth m={m} too large for n={n}")
    y = fd.fracdiff_fast(v - _mean_value(v, d, mu), d)
    j = np.arange(1, m + 1)
    lam = 2.0 * np.pi * j / n
    I = np.abs(np.fft.fft(y)[1:m + 1]) ** 2 / (2.0 * np.pi * n)
    s = I.mean()
    if not s > 0:
        raise DegenerateSeriesError("degenerate periodogram: fractionally differenced series is zero")
    return float(np.log(s) - 2.0 * d * np.mean(np.log(lam)))


@functools.lru_cache(maxsize=8)
def _grid_coeffs(lo: float, hi: float, step: float, n: int):
    k = int(np.floor((hi - lo) / step + 1e-9))
    grid = lo + step * np.arange(k + 1)
    if grid[-1] < hi - 1e-12:
        grid = np.append(grid, hi)
    P = fd.coeff_matrix(grid, n)
    grid.setflags(write=False)
    P.setflags(write=False)
    return grid, P


@functools.lru_cache(maxsize=4)
def _kernel_basis(n: int, m: int):
    # data-free parts of the kernel: exp(i t lambda_j), the exp(i k lambda_j)
    # shift, and A_1 for the constant series
    lam = 2.0 * np.pi * np.arange(1, m + 1) / n
    t = np.arange(1, n + 1, dtype=float)[:, None]
    E = np.exp(1j * t * lam)
    shift = np.vstack([np.ones((1, m)), E[:-1]])
    A1 = shift * np.cumsum(E, axis=0)[::-1]
    A1 = (np.ascontiguousarray(A1.real), np.ascontiguousarray(A1.imag))
    for a in (E, shift, *A1):
        a.setflags(write=False)
    return E, shift, A1, float(np.mean(np.log(lam)))


class _ELWKernel:
    """Exact local Whittle criterion with the data-dependent work done once.

    The DFT of Delta^d (x - mu) at lambda_j is linear in the coefficients:

        sum_k pi_k(d) [A_x(k, j) - mu A_1(k, j)],
        A_x(k, j) = exp(i k lambda_j) sum_{s=1}^{n-k} x_s exp(i s lambda_j),

    so each evaluation costs one length-n coefficient recursion and an
    n-by-m product instead of a pair of FFTs.
    """

    def __init__(self, x: np.ndarray, m: int):
        n = x.size
        self.n, self.m = n, m
        E, shift, self.A1, self.loglam_mean = _kernel_basis(n, m)
        Ax = shift * np.cumsum(x[:, None] * E, axis=0)[::-1]
        self.Ax = (np.ascontiguousarray(Ax.real), np.ascontiguousarray(Ax.imag))
        self.xbar = float(x.mean())
        self.x1 = float(x[0])
        self.log_norm = math.log(2.0 * math.pi * n)

    def _finish(self, re, im, d):
        s = np.mean(re * re + im * im, axis=-1)
        with np.errstate(divide="ignore"):
            return np.log(s) - self.log_norm - 2.0 * d * self.loglam_mean

    def _mu(self, d, mu):
        if mu == "none":
            return 0.0
        if mu == "sample":
            return self.xbar
        if mu == "first":
            return self.x1
        w = adaptive_weight(d)
        return w * self.xbar + (1.0 - w) * self.x1

    def __call__(self, d: float, mu: str = "none") -> float:
        pi = fd.coeff_array(d, self.n)
        c = self._mu(d, mu)
        re = pi @ self.Ax[0]
        im = pi @ self.Ax[1]
        if c != 0.0:
            re = re - c * (pi @ self.A1[0])
            im = im - c * (pi @ self.A1[1])
        return float(self._finish(re, im, d))

    def grid(self, ds: np.ndarray, P: np.ndarray, mu: str = "none") -> np.ndarray:
        re = P @ self.Ax[0]
        im = P @ self.Ax[1]
        c = self._mu(ds, mu)
        if np.any(np.asarray(c) != 0.0):
            c = np.broadcast_to(np.asarray(c, dtype=float), ds.shape)[:, None]
            re = re - c * (P @ self.A1[0])
            im = im - c * (P @ self.A1[1])
        return self._finish(re, im, ds)


def _elw_callables(x: np.ndarray, m: int, mu: str, bounds, kernel: bool = True):
    """Scalar and grid evaluators of the ELW criterion for one series.

    The precomputed kernel pays off for grid scans; a handful of scalar
    evaluations (the two-step Newton update) is cheaper by direct FFTs.
    """
    if kernel and x.size * m <= _KERNEL_MAX_CELLS:
        K = _ELWKernel(x, m)

        def f(d):
            return K(d, mu)

        def f_grid(ds):
            ds_c, P = _grid_coeffs(bounds[0], bounds[1], GRID_STEP, x.size)
            if ds.shape == ds_c.shape and np.allclose(ds, ds_c, rtol=0, atol=1e-12):
                return K.grid(ds_c, P, mu)
            return K.grid(ds, fd.coeff_matrix(ds, x.size), mu)

        return f, f_grid

    def f(d):
        return elw_objective(x, d, m, mu)

    return f, None


# ---------------------------------------------------------------------------
# standard errors

def standard_error(method: str, m: int, taper: str = "kolmogorov") -> float:
    """Asymptotic standard error at bandwidth m.

    lw, elw, 2elw: (4m)^(-1/2); velasco: (p Phi_p / 4m)^(1/2);
    hc: (1.5 / 4m)^(1/2).
    """
    method = _ALIASES.get(method, method)
    if method in ("lw", "elw", "2elw"):
        return 1.0 / math.sqrt(4.0 * m)
    if method == "velasco":
        p = taper_order(taper)
        return math.sqrt(p * PHI[p] / (4.0 * m))
    if method == "hc":
        return math.sqrt(HC_VARIANCE / (4.0 * m))
    raise SpecError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# estimation

def _boundary_notes(d_hat, bounds, tol=1e-6):
    lo, hi = bounds
    if d_hat - lo <= tol:
        return (f"estimate at lower bound {lo:g}; true d may lie below the search interval",)
    if hi - d_hat <= tol:
        return (f"estimate at upper bound {hi:g}; true d may lie above the search interval",)
    return ()


def _check_series(x: TimeSeries) -> np.ndarray:
    v = x.values
    if v.size < 4:
        raise DataError(f"series too short for estimation (n={v.size})")
    if np.ptp(v) == 0:
        raise DegenerateSeriesError("degenerate periodogram: input series is constant")
    return v


def _lw_type(x: TimeSeries, spec: EstimatorSpec, m: int) -> EstimateResult:
    lo, hi = spec.resolved_bounds
    if spec.method == "lw":
        I = periodogram(x, "none", m)
        shift = 0.0
    elif spec.method == "velasco":
        I = periodogram(x, spec.taper, m)
        shift = 0.0
    else:
        I = periodogram(x, "hurvich_chen", m)
        shift = 1.0
    _check_ordinates(I)
    R = _lw_terms(I)
    res = minimize_scalar(R, (lo - shift, hi - shift), mode="convex")
    d_hat = res.x + shift
    return EstimateResult(
        d_hat=d_hat, se=standard_error(spec.method, m, spec.taper), m=m, n=x.n,
        method=spec.label, objective_at_min=res.fun, converged=res.converged,
        bounds=(lo, hi), notes=_boundary_notes(d_hat, (lo, hi)))


def _elw(x: TimeSeries, spec: EstimatorSpec, m: int) -> EstimateResult:
    v = x.values
    bounds = spec.resolved_bounds
    f, f_grid = _elw_callables(v, m, spec.mean_correction, bounds)
    res = minimize_scalar(f, bounds, mode="global", f_grid=f_grid)
    mean = float(_mean_value(v, res.x, spec.mean_correction)) if spec.mean_correction != "none" else None
    return EstimateResult(
        d_hat=res.x, se=standard_error("elw", m), m=m, n=x.n, method=spec.label,
        objective_at_min=res.fun, converged=res.converged, bounds=bounds,
        mean_estimate=mean, notes=_boundary_notes(res.x, bounds))


def two_step_elw(x, m: int | None = None, trend: int | None = None, first_step: str = "hc",
                 bounds=None, taper: str = "kolmogorov") -> EstimateResult:
    """Two-step exact local Whittle estimate.

    Optionally removes a polynomial trend of order ``trend`` by OLS, takes a
    first-stage tapered estimate d_T (Hurvich-Chen or Velasco), then makes
    one Newton step on the adaptive-mean ELW criterion,

        d = d_T - R'(d_T) / max(R''(d_T), 2),

    with derivatives by central differences of step 1e-3.  The step is
    confined to the first stage's 99% interval d_T +/- 2.576 SE(d_T): the
    adaptive mean switches from the sample mean to X_1 for d in (1/2, 3/4),
    where the criterion is far from quadratic and an unguarded step can
    overshoot by more than a unit.
    """
    spec = EstimatorSpec("2elw", m=m, bounds=bounds, trend=trend, first_step=first_step, taper=taper)
    return estimate(x, spec)


def _two_step(x: TimeSeries, spec: EstimatorSpec, m: int) -> EstimateResult:
    lo, hi = spec.resolved_bounds
    notes = []
    if spec.trend is not None:
        x = detrend_ols(x, spec.trend)
    v = x.values
    first = EstimatorSpec("hc" if spec.first_step == "hc" else "velasco", m=m,
                          bounds=(lo, hi), taper=spec.taper)
    r1 = _lw_type(x, first, m)
    d_t = r1.d_hat
    if r1.notes:
        notes.append(f"first step: {r1.notes[0]}")

    R, _ = _elw_callables(v, m, "adaptive", (lo, hi), kernel=False)
    h = FD_STEP
    c = min(max(d_t, lo + h), hi - h)
    if c != d_t:
        notes.append(f"derivative stencil clamped to bounds (centre {c:g} instead of {d_t:g})")
    r0, rp, rm = R(c), R(c + h), R(c - h)
    grad = (rp - rm) / (2.0 * h)
    hess = (rp - 2.0 * r0 + rm) / (h * h)
    d_hat = d_t - grad / max(hess, NEWTON_HESSIAN_FLOOR)
    if not np.isfinite(d_hat):
        raise DegenerateSeriesError("two-step ELW Newton step is not finite")
    t_lo, t_hi = d_t - NEWTON_TRUST_Z * r1.se, d_t + NEWTON_TRUST_Z * r1.se
    if not t_lo <= d_hat <= t_hi:
        notes.append(f"Newton step {d_hat:g} limited to the first-step interval [{t_lo:.4g}, {t_hi:.4g}]")
        d_hat = min(max(d_hat, t_lo), t_hi)
    if d_hat < lo or d_hat > hi:
        notes.append(f"Newton step {d_hat:g} clamped to bounds [{lo:g}, {hi:g}]")
        d_hat = min(max(d_hat, lo), hi)
    notes.extend(_boundary_notes(d_hat, (lo, hi)))
    mean = float(_mean_value(v, d_hat, "adaptive"))
    return EstimateResult(
        d_hat=float(d_hat), se=standard_error("2elw", m), m=m, n=x.n, method=spec.label,
        objective_at_min=R(d_hat), converged=r1.converged, bounds=(lo, hi),
        mean_estimate=mean, first_step_d=d_t, notes=tuple(notes))


def estimate(x, spec: EstimatorSpec | str = "lw") -> EstimateResult:
    """Estimate d for one series according to ``spec``.

    A method name may be passed instead of a full spec.

    Raises
    ------
    SpecError
        Bandwidth or bounds invalid for this series.
    DegenerateSeriesError
        Constant input (the criterion involves log 0).
    """
    if isinstance(spec, str):
        spec = EstimatorSpec(spec)
    x = as_series(x)
    _check_series(x)
    m = spec.bandwidth(x.n)
    if spec.method in ("lw", "velasco", "hc"):
        return _lw_type(x, spec, m)
    if spec.method == "elw":
        return _elw(x, spec, m)
    return _two_step(x, spec, m)


def _grid_points(lo, hi, step):
    if step <= 0:
        raise SpecError("profile step must be positive")
    if hi < lo:
        raise SpecError("profile grid needs lo <= hi")
    k = int(np.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(k + 1)


def profile(x, spec: EstimatorSpec | str, grid=(-1.0, 3.0, 0.01)) -> ObjectiveProfile:
    """Evaluate the criterion of ``spec`` on an evenly spaced grid of d.

    Interior grid points below both neighbours are reported as local
    minima.  For 2elw the adaptive-mean ELW criterion is profiled (after
    detrending when a trend order is set); for hc the criterion is shown
    as a function of d on the original scale.
    """
    if isinstance(spec, str):
        spec = EstimatorSpec(spec)
    x = as_series(x)
    _check_series(x)
    m = spec.bandwidth(x.n)
    ds = _grid_points(*grid)
    if spec.method in ("lw", "velasco", "hc"):
        kind = {"lw": "none", "velasco": spec.taper, "hc": "hurvich_chen"}[spec.method]
        I = periodogram(x, kind, m)
        shift = 1.0 if spec.method == "hc" else 0.0
        vals = np.atleast_1d(lw_objective(I, ds - shift))
    else:
        if spec.method == "2elw" and spec.trend is not None:
            x = detrend_ols(x, spec.trend)
        mu = "adaptive" if spec.method == "2elw" else spec.mean_correction
        f, _ = _elw_callables(x.values, m, mu, spec.resolved_bounds)
        vals = np.array([f(float(d)) for d in ds])
    interior = np.flatnonzero((vals[1:-1] < vals[:-2]) & (vals[1:-1] < vals[2:])) + 1 if ds.size > 2 else []
    return ObjectiveProfile(spec.label, ds, vals, tuple(int(i) for i in interior))
