"""Bounded scalar minimization for local Whittle objectives."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize as _opt

from .errors import NonFiniteObjectiveError, SpecError

__all__ = ["ScalarMin", "minimize_scalar", "GRID_STEP", "XTOL"]

GRID_STEP = 0.01
XTOL = 1e-6
BOUNDARY_TOL = 1e-6


class ScalarMin(NamedTuple):
    x: float
    fun: float
    converged: bool
    at_bound: bool
    nfev: int


def _checked(f):
    count = [0]

    def g(d):
        count[0] += 1
        v = float(f(float(d)))
        if not np.isfinite(v):
            raise NonFiniteObjectiveError(float(d), v)
        return v

    return g, count


def _brent(g, lo, hi, xtol):
    res = _opt.minimize_scalar(g, bounds=(lo, hi), method="bounded",
                               options={"xatol": xtol / 2, "maxiter": 500})
    return float(res.x), float(res.fun), bool(res.success)


def minimize_scalar(f: Callable[[float], float], bounds, mode: str = "convex",
                    grid_step: float = GRID_STEP, xtol: float = XTOL,
                    f_grid: Callable[[np.ndarray], np.ndarray] | None = None) -> ScalarMin:
    """Minimize ``f`` on a closed interval.

    ``mode="convex"`` runs a single bounded Brent search (golden section
    with parabolic steps).  ``mode="global"`` first scans a grid of spacing
    ``grid_step`` over the interval and then refines inside the cell
    around the best grid point; use it for objectives that may have
    several local minima.  ``f_grid``, when given, evaluates ``f`` on an
    array of points at once and is used for the scan.

    Both endpoints are always evaluated, so a minimum on the boundary is
    returned exactly at the bound.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise SpecError(f"invalid bounds [{lo}, {hi}]")
    if mode not in ("convex", "global"):
        raise SpecError(f"unknown optimization mode {mode!r}")
    g, count = _checked(f)

    if mode == "global":
        k = int(np.floor((hi - lo) / grid_step + 1e-9))
        grid = lo + grid_step * np.arange(k + 1)
        if grid[-1] < hi - 1e-12:
            grid = np.append(grid, hi)
        if f_grid is not None:
            vals = np.asarray(f_grid(grid), dtype=float)
            count[0] += grid.size
            if not np.all(np.isfinite(vals)):
                i = int(np.flatnonzero(~np.isfinite(vals))[0])
                raise NonFiniteObjectiveError(float(grid[i]), float(vals[i]))
        else:
            vals = np.array([g(d) for d in grid])
        i = int(np.argmin(vals))
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, grid.size - 1)]
        best_x, best_f = float(grid[i]), float(vals[i])
    else:
        a, b = lo, hi
        best_x, best_f = lo, g(lo)
        fh = g(hi)
        if fh < best_f:
            best_x, best_f = hi, fh

    converged = True
    if b > a:
        x, fx, converged = _brent(g, a, b, xtol)
        if fx < best_f:
            best_x, best_f = x, fx
    at_bound = min(best_x - lo, hi - best_x) <= BOUNDARY_TOL
    return ScalarMin(best_x, best_f, converged, at_bound, count[0])
