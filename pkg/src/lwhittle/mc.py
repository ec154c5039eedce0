"""Monte Carlo harness for bias / SD / MSE tables.

Every replication draws one ARFIMA(1, d, 0) path from a stream keyed by
(seed, d index, rho index, replication) and applies every configured
estimator to that same path.  The mean and trend contamination (mu,
beta) is added to the same underlying draw, so contaminated and clean
cells are directly comparable.  Estimates are collected per replication
and reduced in replication order, which makes results independent of
the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .bandwidth import BandwidthRule, resolve
from .errors import SpecError
from .estimators import ELW_MAX_WIDTH, EstimatorSpec, estimate
from .simulate import SimSpec, arfima, replication_seed

__all__ = ["MCConfig", "MCRow", "MCSummary", "run", "table", "summary_csv", "samples_csv",
           "FAILURE_FLAG"]

FAILURE_FLAG = 0.01
BOUNDS_POLICIES = ("fixed", "centered")


@dataclass(frozen=True)
class MCConfig:
    """A Monte Carlo design.

    ``bandwidth`` applies to estimators whose spec leaves m unset.
    ``bounds_policy="centered"`` replaces each estimator's search interval
    by [d - half_width, d + half_width] around the true d of the cell;
    ``"fixed"`` keeps each estimator's own bounds.
    """

    n: int
    reps: int
    seed: int
    d_values: tuple[float, ...]
    estimators: tuple[EstimatorSpec, ...]
    rho_values: tuple[float, ...] = (0.0,)
    mu_values: tuple[float, ...] = (0.0,)
    beta_values: tuple[float, ...] = (0.0,)
    bandwidth: BandwidthRule = field(default_factory=BandwidthRule)
    bounds_policy: str = "fixed"
    half_width: float = 2.0

    def __post_init__(self):
        for name in ("d_values", "rho_values", "mu_values", "beta_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise SpecError(f"{name} must be nonempty")
            object.__setattr__(self, name, vals)
        ests = tuple(EstimatorSpec(**e) if isinstance(e, dict) else e for e in self.estimators)
        if not ests:
            raise SpecError("no estimators")
        object.__setattr__(self, "estimators", ests)
        if self.reps < 1:
            raise SpecError(f"reps must be >= 1, got {self.reps}")
        if self.bandwidth.kind == "bootstrap":
            raise SpecError("the bootstrap bandwidth rule is not supported in Monte Carlo runs")
        if self.bounds_policy not in BOUNDS_POLICIES:
            raise SpecError(f"bounds_policy must be one of {', '.join(BOUNDS_POLICIES)}")
        if self.bounds_policy == "centered" and not 0 < 2 * self.half_width < ELW_MAX_WIDTH:
            raise SpecError(f"centered bounds need 0 < 2 * half_width < {ELW_MAX_WIDTH}")
        SimSpec(self.n, self.d_values[0])  # validates n
        for rho in self.rho_values:
            SimSpec(self.n, 0.0, rho=rho)
        for spec in ests:
            self.spec_for(spec, self.d_values[0])

    @property
    def cells(self) -> list[tuple[int, int, float, float, float, float]]:
        """(d index, rho index, d, rho, mu, beta) in table order."""
        out = []
        for i, d in enumerate(self.d_values):
            for k, rho in enumerate(self.rho_values):
                for mu in self.mu_values:
                    for beta in self.beta_values:
                        out.append((i, k, d, rho, mu, beta))
        return out

    def spec_for(self, spec: EstimatorSpec, d: float) -> EstimatorSpec:
        changes = {}
        if spec.m is None:
            changes["m"] = resolve(self.bandwidth, self.n)
        if self.bounds_policy == "centered":
            changes["bounds"] = (d - self.half_width, d + self.half_width)
        out = spec.replace(**changes) if changes else spec
        out.bandwidth(self.n)
        return out

    # JSON ---------------------------------------------------------------
    def to_dict(self) -> dict:
        ests = []
        for e in self.estimators:
            d = {k: v for k, v in asdict(e).items() if v != getattr(EstimatorSpec, k, None) or k == "method"}
            if "bounds" in d and d["bounds"] is not None:
                d["bounds"] = list(d["bounds"])
            ests.append(d)
        bw = {k: v for k, v in asdict(self.bandwidth).items() if v is not None}
        return {
            "n": self.n, "reps": self.reps, "seed": self.seed,
            "d_values": list(self.d_values), "rho_values": list(self.rho_values),
            "mu_values": list(self.mu_values), "beta_values": list(self.beta_values),
            "bandwidth": bw, "bounds_policy": self.bounds_policy,
            "half_width": self.half_width, "estimators": ests,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MCConfig":
        data = dict(data)
        known = {"n", "reps", "seed", "d_values", "rho_values", "mu_values", "beta_values",
                 "bandwidth", "bounds_policy", "half_width", "estimators"}
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown MC config fields: {', '.join(sorted(unknown))}")
        for req in ("n", "reps", "d_values", "estimators"):
            if req not in data:
                raise SpecError(f"MC config is missing {req!r}")
        ests = []
        for e in data["estimators"]:
            e = {"method": e} if isinstance(e, str) else dict(e)
            if e.get("bounds") is not None:
                e["bounds"] = tuple(e["bounds"])
            try:
                ests.append(EstimatorSpec(**e))
            except TypeError as exc:
                raise SpecError(f"bad estimator entry {e}: {exc}") from None
        data["estimators"] = tuple(ests)
        if "bandwidth" in data:
            bw = dict(data["bandwidth"])
            if bw.get("grid") is not None:
                bw["grid"] = tuple(bw["grid"])
            data["bandwidth"] = BandwidthRule(**bw)
        data.setdefault("seed", 0)
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "MCConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid MC config JSON: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class MCRow:
    d: float
    rho: float
    mu: float
    beta: float
    estimator: str
    m: int
    bias: float
    sd: float
    mse: float
    reps_used: int
    failures: int

    @property
    def failure_rate(self) -> float:
        total = self.reps_used + self.failures
        return self.failures / total if total else 0.0


@dataclass(frozen=True)
class MCSummary:
    config: MCConfig
    rows: tuple[MCRow, ...]
    # raw estimates, shape (cells, estimators, reps); NaN marks a failure
    samples: np.ndarray = field(repr=False, compare=False)

    def __eq__(self, other):
        return (isinstance(other, MCSummary) and self.config == other.config
                and self.rows == other.rows
                and np.array_equal(self.samples, other.samples, equal_nan=True))

    def row(self, estimator: str, d: float, rho: float = 0.0, mu: float = 0.0, beta: float = 0.0) -> MCRow:
        for r in self.rows:
            if r.estimator == estimator and (r.d, r.rho, r.mu, r.beta) == (d, rho, mu, beta):
                return r
        raise KeyError((estimator, d, rho, mu, beta))


def _labels(config: MCConfig) -> list[str]:
    labels = [s.label for s in config.estimators]
    seen: dict[str, int] = {}
    out = []
    for lab in labels:
        seen[lab] = seen.get(lab, 0) + 1
        out.append(lab if labels.count(lab) == 1 else f"{lab}#{seen[lab]}")
    return out


def _simulate_cell_reps(config: MCConfig, cell, reps: Sequence[int]) -> np.ndarray:
    i_d, i_rho, d, rho, mu, beta = cell
    specs = [config.spec_for(s, d) for s in config.estimators]
    out = np.full((len(specs), len(reps)), np.nan)
    for c, r in enumerate(reps):
        seed = replication_seed(config.seed, i_d, i_rho, r)
        x = arfima(SimSpec(config.n, d, rho=rho, mu=mu, beta=beta, seed=seed))
        for e, spec in enumerate(specs):
            try:
                out[e, c] = estimate(x, spec).d_hat
            except (ValueError, ArithmeticError):
                pass
    return out


def _work(args):
    config, cell_index, lo, hi = args
    return cell_index, lo, _simulate_cell_reps(config, config.cells[cell_index], range(lo, hi))


def _chunks(reps: int, workers: int):
    size = max(1, math.ceil(reps / (4 * workers)))
    return [(lo, min(lo + size, reps)) for lo in range(0, reps, size)]


def _aggregate(est: np.ndarray, d: float):
    ok = est[np.isfinite(est)]
    used = ok.size
    if used == 0:
        return math.nan, math.nan, math.nan, 0
    err = ok - d
    bias = float(err.mean())
    sd = float(ok.std())
    mse = float(np.mean(err * err))
    return bias, sd, mse, used


def run(config: MCConfig, workers: int = 1) -> MCSummary:
    """Run every cell of ``config``; ``workers > 1`` uses worker processes.

    The summary is bit-identical for any worker count.
    """
    cells = config.cells
    n_est = len(config.estimators)
    samples = np.full((len(cells), n_est, config.reps), np.nan)
    if workers <= 1:
        for ci, cell in enumerate(cells):
            samples[ci] = _simulate_cell_reps(config, cell, range(config.reps))
    else:
        jobs = [(config, ci, lo, hi) for ci in range(len(cells)) for lo, hi in _chunks(config.reps, workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for ci, lo, block in pool.map(_work, jobs):
                samples[ci, :, lo:lo + block.shape[1]] = block
    labels = _labels(config)
    rows = []
    for ci, (_, _, d, rho, mu, beta) in enumerate(cells):
        for e, spec in enumerate(config.estimators):
            bias, sd, mse, used = _aggregate(samples[ci, e], d)
            m = config.spec_for(spec, d).m
            rows.append(MCRow(d, rho, mu, beta, labels[e], int(m), bias, sd, mse, used, config.reps - used))
    samples.setflags(write=False)
    return MCSummary(config, tuple(rows), samples)


def _fmt(v: float) -> str:
    return "nan" if not np.isfinite(v) else f"{v:.4f}"


def table(summary: MCSummary, shade_threshold: float = 0.05, layout: str = "wide") -> str:
    """Aligned text table of bias, SD and MSE to 4 decimals.

    Cells whose MSE exceeds ``shade_threshold`` (strictly) carry a ``*``.
    ``layout="wide"`` puts estimators side by side as in a published
    comparison table; ``"long"`` prints one line per cell and estimator.
    Estimators whose failure rate exceeds 1% in a cell are listed in a
    footer.
    """
    if not summary.rows or not summary.config.estimators:
        raise SpecError("no estimators")
    if layout not in ("wide", "long"):
        raise SpecError("layout must be 'wide' or 'long'")
    cfg = summary.config
    labels = _labels(cfg)

    def mse_cell(r: MCRow) -> str:
        return _fmt(r.mse) + ("*" if np.isfinite(r.mse) and r.mse > shade_threshold else " ")

    keys = ["d"]
    for name, vals in (("rho", cfg.rho_values), ("mu", cfg.mu_values), ("beta", cfg.beta_values)):
        if len(vals) > 1 or vals[0] != 0.0:
            keys.append(name)
    lines: list[list[str]] = []
    if layout == "long":
        header = keys + ["estimator", "m", "bias", "sd", "mse", "fail"]
        for r in summary.rows:
            lines.append([f"{getattr(r, k):g}" for k in keys]
                         + [r.estimator, str(r.m), _fmt(r.bias), _fmt(r.sd), mse_cell(r), str(r.failures)])
    else:
        header = list(keys)
        for lab in labels:
            header += [f"{lab}:bias", f"{lab}:sd", f"{lab}:mse"]
        n_est = len(labels)
        for start in range(0, len(summary.rows), n_est):
            group = summary.rows[start:start + n_est]
            line = [f"{getattr(group[0], k):g}" for k in keys]
            for r in group:
                line += [_fmt(r.bias), _fmt(r.sd), mse_cell(r)]
            lines.append(line)
    widths = [max(len(h), *(len(l[i]) for l in lines)) for i, h in enumerate(header)]
    out = ["  ".join(h.rjust(w) for h, w in zip(header, widths)),
           "  ".join("-" * w for w in widths)]
    out += ["  ".join(c.rjust(w) for c, w in zip(l, widths)) for l in lines]
    out.append(f"n={cfg.n}, reps={cfg.reps}, seed={cfg.seed}; * marks MSE > {shade_threshold:g}")
    flagged = [r for r in summary.rows if r.failure_rate > FAILURE_FLAG]
    for r in flagged:
        out.append(f"warning: {r.estimator} failed in {r.failures} of {r.failures + r.reps_used} "
                   f"replications at d={r.d:g}, rho={r.rho:g}, mu={r.mu:g}, beta={r.beta:g}")
    return "\n".join(out) + "\n"


def summary_csv(summary: MCSummary) -> str:
    """One CSV row per cell and estimator, full precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "rho", "mu", "beta", "estimator", "m", "bias", "sd", "mse", "reps_used", "failures"])
    for r in summary.rows:
        w.writerow([repr(r.d), repr(r.rho), repr(r.mu), repr(r.beta), r.estimator, r.m,
                    repr(r.bias), repr(r.sd), repr(r.mse), r.reps_used, r.failures])
    return buf.getvalue()


def samples_csv(summary: MCSummary) -> str:
    """Raw estimates in long form for density plots; failures are empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "rho", "mu", "beta", "estimator", "rep", "d_hat"])
    labels = _labels(summary.config)
    for ci, (_, _, d, rho, mu, beta) in enumerate(summary.config.cells):
        for e, lab in enumerate(labels):
            for r, val in enumerate(summary.samples[ci, e]):
                w.writerow([repr(d), repr(rho), repr(mu), repr(beta), lab, r,
                            repr(float(val)) if np.isfinite(val) else ""])
    return buf.getvalue()
