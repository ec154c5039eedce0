"""Type-II ARFIMA(1, d, 0) sample paths.

Innovations come from numpy's PCG64 generator seeded through
``SeedSequence``; normal deviates use numpy's ziggurat sampler
(``Generator.standard_normal``).  Golden outputs depend on both choices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import SpecError
from .fracdiff import fracdiff_fast
from .series import TimeSeries

__all__ = ["SimSpec", "arfima", "replication_seed", "rng_for"]


def replication_seed(seed: int, *keys: int) -> int:
    """Stable 64-bit seed mixed from ``seed`` and integer keys."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(
        [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)])))


@dataclass(frozen=True)
class SimSpec:
    n: int
    d: float
    rho: float = 0.0
    mu: float = 0.0
    beta: float = 0.0
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 8:
            raise SpecError(f"simulation length must be >= 8, got {self.n}")
        if not abs(self.rho) < 1:
            raise SpecError(f"AR coefficient must satisfy |rho| < 1, got {self.rho}")
        if not self.sigma > 0:
            raise SpecError(f"innovation SD must be positive, got {self.sigma}")
        for name in ("d", "rho", "mu", "beta", "sigma"):
            if not np.isfinite(getattr(self, name)):
                raise SpecError(f"{name} must be finite")


def arfima(spec: SimSpec) -> TimeSeries:
    """Simulate (1 - L)^d X_t = u_t 1{t >= 1}, u_t = rho u_{t-1} + e_t.

    u_1 is drawn from the stationary N(0, sigma^2 / (1 - rho^2)) law, the
    fractional integration is truncated at the sample start, and
    mu + beta t is added last.
    """
    rng = rng_for(spec.seed)
    e = spec.sigma * rng.standard_normal(spec.n)
    if spec.rho != 0.0:
        e[0] /= np.sqrt(1.0 - spec.rho ** 2)
        u = lfilter([1.0], [1.0, -spec.rho], e)
    else:
        u = e
    x = fracdiff_fast(u, -spec.d)
    if spec.mu != 0.0 or spec.beta != 0.0:
        t = np.arange(1, spec.n + 1, dtype=float)
        x = x + (spec.mu + spec.beta * t)
    origin = f"arfima(d={spec.d:g},rho={spec.rho:g},mu={spec.mu:g},beta={spec.beta:g},seed={spec.seed})"
    return TimeSeries(x, name="x", origin=origin)
