"""Truncated (Type-II) fractional differencing.

The operator is

    (1 - L)^d x_t = sum_{k=0}^{t-1} pi_k(d) x_{t-k},   t = 1..n,

with pi_0 = 1 and pi_k = pi_{k-1} (k - 1 - d) / k.  Pre-sample values are
zero, so operators compose exactly: Delta^a Delta^b = Delta^(a+b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import TimeSeries

__all__ = [
    "FracDiffCoeffs",
    "coeffs",
    "coeff_array",
    "coeff_matrix",
    "fracdiff",
    "fracdiff_naive",
    "fracdiff_fast",
    "fft_length",
]

# below this length the direct sum beats the FFT set-up cost
NAIVE_CUTOFF = 64


@dataclass(frozen=True)
class FracDiffCoeffs:
    d: float
    pi: np.ndarray


def coeff_array(d: float, n: int) -> np.ndarray:
    """pi_0(d), ..., pi_{n-1}(d) as a float array."""
    if n < 1:
        raise ValueError("need n >= 1 coefficients")
    if not np.isfinite(d):
        raise ValueError(f"d must be finite, got {d!r}")
    k = np.arange(1, n, dtype=float)
    pi = np.empty(n)
    pi[0] = 1.0
    pi[1:] = np.cumprod((k - 1.0 - d) / k)
    return pi


def coeffs(d: float, n: int) -> FracDiffCoeffs:
    pi = coeff_array(d, n)
    pi.setflags(write=False)
    return FracDiffCoeffs(float(d), pi)


def coeff_matrix(ds, n: int) -> np.ndarray:
    """Rows of coefficients pi_0..pi_{n-1} for each d in ``ds``."""
    ds = np.asarray(ds, dtype=float).reshape(-1, 1)
    k = np.arange(1, n, dtype=float)
    out = np.empty((ds.shape[0], n))
    out[:, 0] = 1.0
    out[:, 1:] = np.cumprod((k - 1.0 - ds) / k, axis=1)
    return out


def fft_length(n: int) -> int:
    """Smallest power of two >= 2n - 1."""
    target = max(2 * n - 1, 1)
    return 1 << (target - 1).bit_length()


def _values(x):
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=float).reshape(-1)


def _wrap(x, y, d, how):
    if isinstance(x, TimeSeries):
        return x.derive(y, f"fracdiff({d:g},{how})", x.labels)
    return y


def fracdiff_naive(x, d: float):
    """Direct O(n^2) evaluation of the truncated fractional difference.

    Accepts a TimeSeries (returns a TimeSeries) or an array (returns an
    array).
    """
    v = _values(x)
    n = v.size
    pi = coeff_array(d, n)
    y = np.empty(n)
    for t in range(n):
        y[t] = np.dot(pi[:t + 1], v[t::-1])
    return _wrap(x, y, d, "naive")


def fracdiff_fast(x, d: float):
    """FFT evaluation of the truncated fractional difference, O(n log n).

    Linear convolution of x with pi(d) via zero-padded real FFTs whose
    length is the smallest power of two >= 2n - 1.  ``x`` may be 2-D, in
    which case each row is differenced separately.
    """
    v = x.values if isinstance(x, TimeSeries) else np.asarray(x, dtype=float)
    n = v.shape[-1]
    if d == 0:
        y = np.array(v, dtype=float)
        return _wrap(x, y, d, "fast")
    nfft = fft_length(n)
    pi = coeff_array(d, n)
    y = np.fft.irfft(np.fft.rfft(v, nfft) * np.fft.rfft(pi, nfft), nfft)[..., :n]
    return _wrap(x, y, d, "fast")


def fracdiff(x, d: float):
    """Fractional difference, dispatching on length."""
    v = x.values if isinstance(x, TimeSeries) else np.asarray(x)
    if v.ndim == 1 and v.size < NAIVE_CUTOFF:
        return fracdiff_naive(x, d)
    return fracdiff_fast(x, d)


def fracint(x, d: float):
    """Truncated fractional integration, the inverse of ``fracdiff(., d)``."""
    return fracdiff(x, -d)
