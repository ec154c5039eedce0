"""Fourier frequencies, taper weights and (tapered) periodograms.

DFT convention: w(lambda) = (2 pi n)^(-1/2) sum_{t=1}^n h_t x_t exp(i t lambda),
I(lambda) = |w(lambda)|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, SpecError
from .series import values_of

__all__ = [
    "TAPERS",
    "VELASCO_TAPERS",
    "Periodogram",
    "taper_order",
    "fourier_freqs",
    "taper_weights",
    "periodogram",
    "ordinates",
]

VELASCO_TAPERS = ("bartlett", "cosine", "kolmogorov")
TAPERS = ("none",) + VELASCO_TAPERS + ("hurvich_chen",)

_ORDER = {"none": 1, "bartlett": 2, "cosine": 3, "kolmogorov": 3}


def taper_order(kind: str) -> int:
    """Velasco order p; the complex Hurvich-Chen taper has none."""
    if kind == "hurvich_chen":
        raise SpecError("the hurvich_chen taper has no Velasco order")
    try:
        return _ORDER[kind]
    except KeyError:
        raise SpecError(f"unknown taper {kind!r}; expected one of {', '.join(TAPERS)}") from None


@dataclass(frozen=True)
class Periodogram:
    """Periodogram ordinates at the frequencies entering an objective.

    ``index`` holds the integer j of each frequency; for the Hurvich-Chen
    periodogram the frequency is 2 pi (j + 1/2) / n_used.  ``norm`` is the
    divisor applied to sums over frequencies in the Whittle criterion:
    m / p for the Velasco tapers (which exceeds the number of ordinates
    held when p does not divide m) and the number of ordinates otherwise.
    """

    freqs: np.ndarray
    ords: np.ndarray
    n_used: int
    taper: str
    index: np.ndarray
    norm: float | None = None

    def __post_init__(self):
        if self.norm is None:
            object.__setattr__(self, "norm", float(self.freqs.size))

    @property
    def m(self) -> int:
        return self.freqs.size


def fourier_freqs(n: int, m: int, subsample_p: int = 1):
    """Indices j in {p, 2p, ...} with j <= m and lambda_j = 2 pi j / n.

    Returns ``(j, lam)`` arrays.  When m is not a multiple of p the last
    index is the largest multiple of p not exceeding m.
    """
    if subsample_p not in (1, 2, 3):
        raise SpecError(f"subsampling order must be 1, 2 or 3, got {subsample_p}")
    if not 1 <= m < n:
        raise SpecError(f"bandwidth m={m} outside [1, {n - 1}] for n={n}")
    if m < subsample_p:
        raise SpecError(f"bandwidth m={m} is smaller than the taper order {subsample_p}")
    j = np.arange(subsample_p, m + 1, subsample_p)
    return j, 2.0 * np.pi * j / n


def _kolmogorov(n: int) -> np.ndarray:
    # 3-fold self-convolution of a uniform window, centred and zero padded
    L = n // 3
    box = np.ones(L)
    core = np.convolve(np.convolve(box, box), box)
    core = core / core.max()
    extra = n - core.size
    h = np.zeros(n)
    left = extra // 2
    h[left:left + core.size] = core
    if extra % 2:
        # odd padding cannot be split evenly; symmetrize about (n+1)/2
        h = 0.5 * (h + h[::-1])
        h /= h.max()
    return h


def taper_weights(kind: str, n: int) -> np.ndarray:
    """Taper h_1..h_n.

    none       all ones
    bartlett   1 - |2t - (n+1)| / (n+1), symmetric about (n+1)/2
    cosine     (1 - cos(2 pi t / n)) / 2
    kolmogorov 3-fold convolution of a uniform window of length n // 3,
               scaled to max 1 and zero padded at both ends
    hurvich_chen  (1 - exp(i 2 pi (t - 1/2) / n)) / 2, i.e. the complex
               exponential exp(i pi (t - 1/2) / n) times the sine envelope
               -i sin(pi (t - 1/2) / n)
    """
    if n < 4:
        raise DataError(f"taper requires n >= 4, got n={n}")
    t = np.arange(1, n + 1, dtype=float)
    if kind == "none":
        return np.ones(n)
    if kind == "bartlett":
        return 1.0 - np.abs(2.0 * t - (n + 1)) / (n + 1)
    if kind == "cosine":
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * t / n))
    if kind == "kolmogorov":
        return _kolmogorov(n)
    if kind == "hurvich_chen":
        return 0.5 * (1.0 - np.exp(2j * np.pi * (t - 0.5) / n))
    raise SpecError(f"unknown taper {kind!r}; expected one of {', '.join(TAPERS)}")


def ordinates(values, h=None) -> np.ndarray:
    """(Tapered) periodogram at every Fourier frequency j = 0..n-1."""
    v = np.asarray(values, dtype=float)
    n = v.size
    a = v if h is None else h * v
    return np.abs(np.fft.fft(a)) ** 2 / (2.0 * np.pi * n)


def periodogram(x, kind: str = "none", m: int | None = None) -> Periodogram:
    """Periodogram at the frequencies used by a local Whittle objective.

    For ``none`` and the Velasco tapers the ordinates are taken at
    j = p, 2p, ..., m with p the taper order.  For ``hurvich_chen`` the
    series is first differenced (length n' = n - 1) and the complex
    Hurvich-Chen taper is applied.  Its tapered DFT at lambda_j mixes the
    plain DFTs at j and j + 1, so the ordinates are attributed to the
    shifted frequencies 2 pi (j + 1/2) / n', j = 1..m.
    """
    v = values_of(x)
    if m is None:
        raise SpecError("bandwidth m is required")
    if kind == "hurvich_chen":
        v = np.diff(v)
        n = v.size
        if m < 1 or 2 * m > n:
            raise SpecError(f"bandwidth m={m} too large for the differenced length n'={n}")
        if n < 4:
            raise DataError("series too short for the Hurvich-Chen periodogram")
        j = np.arange(1, m + 1)
        lam = 2.0 * np.pi * (j + 0.5) / n
        # |sum h_t v_t e^{+i t lam}| = |sum conj(h_t) v_t e^{-i t lam}| for real v
        h = taper_weights(kind, n)
        w = np.fft.fft(np.conj(h) * v)[1:m + 1]
        I = np.abs(w) ** 2 / (2.0 * np.pi * n)
        return Periodogram(lam, I, n, kind, j)

    n = v.size
    if m < 1 or 2 * m > n:
        raise SpecError(f"bandwidth m={m} too large for n={n} (need n >= 2m)")
    p = taper_order(kind)
    j, lam = fourier_freqs(n, m, p)
    h = None if kind == "none" else taper_weights(kind, n)
    I = ordinates(v, h)[j]
    return Periodogram(lam, I, n, kind, j, norm=m / p)
