"""Evaluation quantities and ensemble statistics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import InvalidInputError, UndefinedMetricError
from .statevector import (
    DiagonalCost,
    MeasurementDistribution,
    StateVector,
    expectation_diagonal,
    index_of_bitstring,
)

Source = Union[float, int, StateVector, MeasurementDistribution]

SUMMARY_COLUMNS = [
    "instance_id",
    "iter",
    "r_init",
    "r_post",
    "R",
    "alpha_mean",
    "alpha_min",
    "p_min",
    "p_gm",
    "converged",
]


def _expectation(source: Source, cost: DiagonalCost | None) -> float:
    if isinstance(source, (float, int)):
        return float(source)
    if cost is None:
        raise InvalidInputError("a cost is required to average a state or distribution")
    if isinstance(source, StateVector):
        return expectation_diagonal(source, cost)
    if isinstance(source, MeasurementDistribution):
        acc = 0.0
        for x, c in source.counts.items():
            acc += c * cost.values[index_of_bitstring(x)]
        return acc / source.total_shots
    raise InvalidInputError(f"cannot average {type(source).__name__}")


def ratio_r(source: Source, c_max: float, cost: DiagonalCost | None = None) -> float:
    """Normalized approximation ratio r = 1 - <C>/c_max (0 is optimal)."""
    if c_max <= 0:
        raise InvalidInputError("c_max must be positive")
    return 1.0 - _expectation(source, cost) / c_max


def relative_change_R(r_init: float, r_post: float) -> float:
    """R = (r_init - r_post) / r_init; positive iff optimization improved."""
    if r_init == 0:
        raise UndefinedMetricError("R undefined: the initial state is already optimal")
    return (r_init - r_post) / r_init


def convergence_P(n_static: int, n_total: int) -> float:
    """P = (N_total - N_static) / N_total."""
    if n_total <= 0 or not (0 <= n_static <= n_total):
        raise InvalidInputError("need 0 <= n_static <= n_total with n_total > 0")
    return (n_total - n_static) / n_total


def alpha_mean(source: Source, f_min: float, f_max: float,
               cost: DiagonalCost | None = None) -> float:
    """(<C> - f_min) / (f_max - f_min), with <C> over classical string costs."""
    if f_max <= f_min:
        raise InvalidInputError("need f_max > f_min")
    return (_expectation(source, cost) - f_min) / (f_max - f_min)


@dataclass
class MinValueStats:
    alpha_min: float
    p_min: float
    p_gm: float


def alpha_min_and_pmin(
    dist: MeasurementDistribution,
    cost_fn: Callable[[str], float],
    f_min: float,
    f_max: float,
) -> MinValueStats:
    """Best-measured-string ratio, its count fraction, and the global-optimum
    count fraction (strings whose cost equals f_min exactly)."""
    if not dist.counts:
        raise InvalidInputError("empty distribution")
    if f_max <= f_min:
        raise InvalidInputError("need f_max > f_min")
    best_cost = math.inf
    best_count = 0
    gm_count = 0
    for x, c in dist.counts.items():
        cost = float(cost_fn(x))
        if cost < best_cost:
            best_cost, best_count = cost, c
        elif cost == best_cost:
            best_count += c
        if cost == f_min:
            gm_count += c
    return MinValueStats(
        alpha_min=(best_cost - f_min) / (f_max - f_min),
        p_min=best_count / dist.total_shots,
        p_gm=gm_count / dist.total_shots,
    )


@dataclass
class PowerLawFit:
    """y = a * x^b fitted by least squares in log-log space."""

    a: float
    b: float
    stderr_a: float
    stderr_b: float
    residuals: np.ndarray  # log-space residuals at the kept points
    n_dropped: int = 0

    def predict(self, xs) -> np.ndarray:
        return self.a * np.asarray(xs, dtype=float) ** self.b


def fit_power_law(xs, ys) -> PowerLawFit:
    """Fit y = a*x^b; nonpositive y points are dropped (and counted)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise InvalidInputError("xs and ys must be 1-d arrays of equal length")
    if np.any(xs <= 0):
        raise InvalidInputError("x values must be strictly positive")
    keep = ys > 0
    n_dropped = int(np.count_nonzero(~keep))
    if n_dropped:
        warnings.warn(f"dropping {n_dropped} nonpositive y point(s) from power-law fit")
    xs, ys = xs[keep], ys[keep]
    if xs.size < 3:
        raise InvalidInputError("need at least 3 strictly positive points")
    lx, ly = np.log(xs), np.log(ys)
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, _, _, _ = np.linalg.lstsq(design, ly, rcond=None)
    b, log_a = float(coef[0]), float(coef[1])
    resid = ly - design @ coef
    dof = lx.size - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(design.T @ design)
    a = math.exp(log_a)
    return PowerLawFit(
        a=a,
        b=b,
        stderr_a=a * math.sqrt(max(cov[1, 1], 0.0)),
        stderr_b=math.sqrt(max(cov[0, 0], 0.0)),
        residuals=resid,
        n_dropped=n_dropped,
    )


def nearest_rank_percentile(values, q: float) -> float:
    """Nearest-rank percentile: the ceil(q*n)-th smallest value."""
    vals = sorted(float(v) for v in values)
    if not vals:
        raise InvalidInputError("empty sample")
    rank = max(1, math.ceil(q * len(vals)))
    return vals[rank - 1]


@dataclass
class Aggregate:
    mean: float
    stderr: float
    p10: float
    p90: float
    p30: float
    p70: float
    count: int

    @classmethod
    def of(cls, values) -> "Aggregate":
        vals = np.asarray(list(values), dtype=float)
        if vals.size == 0:
            raise InvalidInputError("empty sample")
        stderr = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        return cls(
            mean=float(vals.mean()),
            stderr=stderr,
            p10=nearest_rank_percentile(vals, 0.10),
            p90=nearest_rank_percentile(vals, 0.90),
            p30=nearest_rank_percentile(vals, 0.30),
            p70=nearest_rank_percentile(vals, 0.70),
            count=int(vals.size),
        )


@dataclass
class EnsembleSummary:
    """Per-iteration value arrays and their aggregates."""

    values: dict[int, list[float]] = field(default_factory=dict)

    def add(self, iteration: int, value: float) -> None:
        self.values.setdefault(iteration, []).append(float(value))

    def aggregates(self) -> dict[int, Aggregate]:
        return {i: Aggregate.of(v) for i, v in sorted(self.values.items())}


def summary_row(instance_id: str, record: dict) -> dict:
    """One CSV row per (instance, iteration) record; R blank when undefined."""
    r_init, r_post = record["r_init"], record["r_post"]
    try:
        big_r = relative_change_R(r_init, r_post)
    except UndefinedMetricError:
        big_r = None
    is_dgmvp = record.get("alpha_min") is not None
    return {
        "instance_id": instance_id,
        "iter": record["iter"],
        "r_init": r_init,
        "r_post": r_post,
        "R": big_r,
        "alpha_mean": r_post if is_dgmvp else None,
        "alpha_min": record.get("alpha_min"),
        "p_min": record.get("p_min"),
        "p_gm": record.get("p_gm"),
        "converged": record["converged"],
    }
