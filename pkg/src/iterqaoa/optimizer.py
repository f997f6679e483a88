"""Derivative-free global optimization under a hard evaluation budget.

The search is generalized simulated annealing: candidate moves are drawn from
a distorted Cauchy-Lorentz (Tsallis) visiting distribution whose width follows
the annealing temperature, with a Tsallis acceptance rule, and a full restart
whenever the temperature hits its floor.  An optional derivative-free
coordinate-wise quadratic polish spends whatever budget remains.  Every
objective call, polish included, counts against the budget; the budget is a
hard cap, not a soft one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import InvalidInputError
from .statevector import DiagonalCost, RngLike, StateVector, as_rng, expectation_diagonal, sample_indices

VISITING_PARAM = 2.62
ACCEPTANCE_PARAM = -5.0
INITIAL_TEMP = 5230.0
RESTART_TEMP_RATIO = 2e-5
TAIL_LIMIT = 1e8
MIN_VISIT_BOUND = 1e-10


@dataclass
class ObjectiveSpec:
    """A bounded minimization problem with an evaluation budget.

    fun: objective to minimize (may be stochastic; it is never re-averaged).
    bounds: (dim, 2) array of [lower, upper] per coordinate.
    budget: maximum number of objective evaluations (hard cap).
    seed: drives every random draw; identical specs give identical results.
    x0: optional start point (evaluated first).
    polish: run the quadratic coordinate polish after annealing.
    """

    fun: Callable[[np.ndarray], float]
    bounds: np.ndarray
    budget: int
    seed: int = 0
    x0: np.ndarray | None = None
    polish: bool = True


@dataclass
class OptimizationResult:
    best_x: np.ndarray
    best_value: float
    evaluations: int
    trace: np.ndarray  # (evaluations, 2) columns: eval index, observed value
    metadata: dict = field(default_factory=dict)


class _BudgetExhausted(Exception):
    pass


class _CountedObjective:
    """Counts calls, records the trace, tracks the best observed point."""

    def __init__(self, fun, cap):
        self.fun = fun
        self.cap = cap
        self.values: list[float] = []
        self.best_x: np.ndarray | None = None
        self.best_value = math.inf

    @property
    def n_evals(self) -> int:
        return len(self.values)

    def __call__(self, x: np.ndarray) -> float:
        if self.n_evals >= self.cap:
            raise _BudgetExhausted
        value = float(self.fun(np.asarray(x, dtype=float)))
        self.values.append(value)
        if value < self.best_value:
            self.best_value = value
            self.best_x = np.array(x, dtype=float)
        return value


class _TsallisVisitor:
    """New-candidate generator from the Tsallis visiting distribution."""

    def __init__(self, lower: np.ndarray, upper: np.ndarray, rng: np.random.Generator):
        self.lower = lower
        self.upper = upper
        self.span = upper - lower
        self.rng = rng
        qv = VISITING_PARAM
        self._qv = qv
        factor2 = math.exp((4.0 - qv) * math.log(qv - 1.0))
        factor3 = math.exp((2.0 - qv) * math.log(2.0) / (qv - 1.0))
        self._factor4_p = math.sqrt(math.pi) * factor2 / (factor3 * (3.0 - qv))
        factor5 = 1.0 / (qv - 1.0) - 0.5
        d1 = 2.0 - factor5
        self._factor6 = (
            math.pi * (1.0 - factor5) / math.sin(math.pi * (1.0 - factor5)) / math.exp(gammaln(d1))
        )

    def _visit_values(self, temperature: float, dim: int) -> np.ndarray:
        qv = self._qv
        x = self.rng.standard_normal(dim)
        y = self.rng.standard_normal(dim)
        factor1 = math.exp(math.log(temperature) / (qv - 1.0))
        factor4 = self._factor4_p * factor1
        x *= math.exp(-(qv - 1.0) * math.log(self._factor6 / factor4) / (3.0 - qv))
        den = np.exp((qv - 1.0) * np.log(np.fabs(y)) / (3.0 - qv))
        return x / den

    def _wrap(self, values: np.ndarray) -> np.ndarray:
        folded = np.fmod(np.fmod(values - self.lower, self.span) + self.span, self.span)
        out = folded + self.lower
        out[np.fabs(out - self.lower) < MIN_VISIT_BOUND] += MIN_VISIT_BOUND
        return out

    def propose(self, x: np.ndarray, step: int, temperature: float) -> np.ndarray:
        dim = x.size
        if step < dim:
            visits = self._visit_values(temperature, dim)
            up, lo = self.rng.uniform(size=2)
            visits[visits > TAIL_LIMIT] = TAIL_LIMIT * up
            visits[visits < -TAIL_LIMIT] = -TAIL_LIMIT * lo
            return self._wrap(x + visits)
        visit = self._visit_values(temperature, 1)[0]
        if visit > TAIL_LIMIT:
            visit = TAIL_LIMIT * self.rng.uniform()
        elif visit < -TAIL_LIMIT:
            visit = -TAIL_LIMIT * self.rng.uniform()
        out = x.copy()
        index = step - dim
        out[index] = visit + x[index]
        folded = math.fmod(math.fmod(out[index] - self.lower[index], self.span[index]) + self.span[index], self.span[index])
        out[index] = folded + self.lower[index]
        if abs(out[index] - self.lower[index]) < MIN_VISIT_BOUND:
            out[index] += MIN_VISIT_BOUND
        return out


def _coordinate_polish(counted: _CountedObjective, x: np.ndarray, fx: float,
                       lower: np.ndarray, upper: np.ndarray) -> None:
    """Quadratic line search per coordinate, no gradient model, budget-capped."""
    x = x.copy()
    h = (upper - lower) / 16.0
    while float(h.max()) > 1e-9:
        improved = False
        for i in range(x.size):
            xp = x.copy()
            xp[i] = min(x[i] + h[i], upper[i])
            fp = counted(xp)
            xm = x.copy()
            xm[i] = max(x[i] - h[i], lower[i])
            fm = counted(xm)
            candidates = [(fp, xp), (fm, xm)]
            curvature = fp - 2.0 * fx + fm
            if curvature > 0.0:
                delta = float(np.clip(-h[i] * (fp - fm) / (2.0 * curvature), -h[i], h[i]))
                xq = x.copy()
                xq[i] = float(np.clip(x[i] + delta, lower[i], upper[i]))
                fq = counted(xq)
                candidates.append((fq, xq))
            f_new, x_new = min(candidates, key=lambda t: t[0])
            if f_new < fx:
                fx, x = f_new, x_new
                improved = True
        if not improved:
            h = h / 2.0


def dual_annealing(spec: ObjectiveSpec) -> OptimizationResult:
    """Minimize spec.fun over its box, spending at most spec.budget evaluations."""
    bounds = np.asarray(spec.bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise InvalidInputError("bounds must be a (dim, 2) array")
    dim = bounds.shape[0]
    lower, upper = bounds[:, 0].copy(), bounds[:, 1].copy()
    if not np.all(np.isfinite(bounds)) or not np.all(lower < upper):
        raise InvalidInputError("bounds must be finite with lower < upper")
    if spec.budget < dim + 1:
        raise InvalidInputError(f"budget {spec.budget} < dim+1 = {dim + 1}")

    rng = as_rng(spec.seed)
    counted = _CountedObjective(spec.fun, spec.budget)
    polish_reserve = min(spec.budget // 5, 30 * dim + 20) if spec.polish else 0
    gsa_cap = spec.budget - polish_reserve
    visitor = _TsallisVisitor(lower, upper, rng)
    restarts = 0

    qa = ACCEPTANCE_PARAM
    t1 = math.exp((VISITING_PARAM - 1.0) * math.log(2.0)) - 1.0
    temperature_floor = INITIAL_TEMP * RESTART_TEMP_RATIO

    counted.cap = gsa_cap
    try:
        if spec.x0 is not None:
            x_current = np.clip(np.asarray(spec.x0, dtype=float), lower, upper)
        else:
            x_current = rng.uniform(lower, upper)
        e_current = counted(x_current)

        while True:  # restart loop: re-seed the walker once temperature bottoms out
            for i in itertools.count():
                t2 = math.exp((VISITING_PARAM - 1.0) * math.log(float(i + 2))) - 1.0
                temperature = INITIAL_TEMP * t1 / t2
                if temperature < temperature_floor:
                    restarts += 1
                    x_current = rng.uniform(lower, upper)
                    e_current = counted(x_current)
                    break
                t_step = temperature / float(i + 1)
                for j in range(2 * dim):
                    x_visit = visitor.propose(x_current, j, temperature)
                    e_visit = counted(x_visit)
                    if e_visit < e_current:
                        x_current, e_current = x_visit, e_visit
                        continue
                    accept_arg = 1.0 - (1.0 - qa) * (e_visit - e_current) / t_step
                    if accept_arg <= 0.0:
                        continue
                    if rng.uniform() <= math.exp(math.log(accept_arg) / (1.0 - qa)):
                        x_current, e_current = x_visit, e_visit
    except _BudgetExhausted:
        pass

    if spec.polish and counted.best_x is not None:
        counted.cap = spec.budget
        try:
            _coordinate_polish(counted, counted.best_x, counted.best_value, lower, upper)
        except _BudgetExhausted:
            pass

    values = np.asarray(counted.values, dtype=float)
    trace = np.column_stack([np.arange(values.size, dtype=float), values])
    return OptimizationResult(
        best_x=counted.best_x,
        best_value=counted.best_value,
        evaluations=counted.n_evals,
        trace=trace,
        metadata={
            "visiting_param": VISITING_PARAM,
            "acceptance_param": ACCEPTANCE_PARAM,
            "initial_temp": INITIAL_TEMP,
            "restart_temp_ratio": RESTART_TEMP_RATIO,
            "polish": spec.polish,
            "restarts": restarts,
        },
    )


def estimate_expectation(
    state: StateVector, cost: DiagonalCost, shots: int, rng: RngLike = None
) -> float:
    """Shot-estimated expectation of a diagonal cost; shots=0 means exact."""
    if shots < 0:
        raise InvalidInputError("shots must be >= 0")
    if shots == 0:
        return expectation_diagonal(state, cost)
    idx = sample_indices(state, shots, rng)
    return float(cost.values[idx].mean())
