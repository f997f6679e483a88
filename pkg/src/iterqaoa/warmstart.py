"""Iterative warm-started optimization loop.

One run alternates: optimize the circuit angles from the current initial
state, measure the optimized circuit, rank the measured bitstrings by the
classical objective, superpose the best t of them (square-root empirical
amplitudes, renormalized over the selection) into the next initial state, and
repeat until the initial state stops moving or the iteration budget runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ansatz import (
    MixerSchedule,
    QaoaParams,
    apply_qaoa,
    build_dgmvp_cost,
    build_nn_mixer,
    maxbias_state,
)
from .errors import DegenerateInputError, InvalidInputError
from .graphs import Graph, brute_force_maxcut, maxcut_cost
from .optimizer import ObjectiveSpec, dual_annealing, estimate_expectation
from .portfolio import (
    PortfolioInstance,
    brute_force_extrema,
    classical_cost,
    classical_values,
    enumerate_feasible,
    feasible_mask,
)
from .statevector import (
    DiagonalCost,
    MeasurementDistribution,
    StateVector,
    expectation_diagonal,
    index_of_bitstring,
    init_superposition,
    init_uniform,
    overlap,
    sample,
)


@dataclass
class RankedOutcomes:
    """Measured strings ordered best to worst by the problem objective.

    Ties break by count (descending), then lexicographically.
    """

    n_qubits: int
    entries: list[tuple[str, int, float]]  # (bitstring, count, cost)
    direction: str

    @property
    def total_count(self) -> int:
        return sum(c for _, c, _ in self.entries)


def rank_outcomes(
    dist: MeasurementDistribution,
    cost_fn: Callable[[str], float],
    direction: str,
    feasible_fn: Callable[[str], bool] | None = None,
) -> RankedOutcomes:
    """Order all distinct measured strings; infeasible strings are dropped."""
    if direction not in ("max", "min"):
        raise InvalidInputError("direction must be 'max' or 'min'")
    if not dist.counts:
        raise DegenerateInputError("empty measurement distribution")
    entries = []
    for x, c in dist.counts.items():
        if feasible_fn is not None and not feasible_fn(x):
            continue
        entries.append((x, c, float(cost_fn(x))))
    if not entries:
        raise DegenerateInputError("no feasible strings in the measurement")
    sign = -1.0 if direction == "max" else 1.0
    entries.sort(key=lambda e: (sign * e[2], -e[1], e[0]))
    return RankedOutcomes(dist.n_qubits, entries, direction)


def build_order_statistic_state(ranked: RankedOutcomes, t: int) -> StateVector:
    """Superpose the best min(t, available) strings, amplitudes sqrt(count/total)."""
    if t < 1:
        raise InvalidInputError("order t must be >= 1")
    if not ranked.entries:
        raise DegenerateInputError("no ranked outcomes")
    top = ranked.entries[: min(t, len(ranked.entries))]
    return init_superposition(ranked.n_qubits, [(x, float(c)) for x, c, _ in top])


def build_percentile_state(ranked: RankedOutcomes, t: float) -> StateVector:
    """Include the best strings up to a cumulative count*cost mass fraction t."""
    if not (0.0 < t <= 1.0):
        raise InvalidInputError("percentile t must lie in (0, 1]")
    if not ranked.entries:
        raise DegenerateInputError("no ranked outcomes")
    entries = ranked.entries
    masses = [c * cost for _, c, cost in entries]
    total = sum(masses)
    if t >= 1.0 or total <= 0.0:
        cut = len(entries)
    else:
        cut = len(entries)
        acc = 0.0
        for j, mass in enumerate(masses):
            acc += mass
            if acc / total >= t:
                cut = j + 1
                break
    return init_superposition(
        ranked.n_qubits, [(x, float(c)) for x, c, _ in entries[:cut]]
    )


def state_distance(a: StateVector, b: StateVector) -> float:
    """Frobenius distance of the pure-state density matrices: sqrt(2(1-|<a|b>|^2))."""
    ov = abs(overlap(a, b)) ** 2
    return math.sqrt(max(0.0, 2.0 * (1.0 - min(1.0, ov))))


# ---------------------------------------------------------------------------
# Problem adapters
# ---------------------------------------------------------------------------


@dataclass
class IterativeProblem:
    """Everything run_iterative needs to know about one instance."""

    kind: str                       # "maxcut" | "dgmvp"
    n_qubits: int
    phase_cost: DiagonalCost        # drives the phase separator
    objective_cost: DiagonalCost    # classical objective per basis state
    direction: str                  # "max" | "min"
    mixer: object                   # "x" or MixerSchedule
    initial: StateVector
    feasible: np.ndarray | None     # bool mask over basis states, or None
    meta: dict = field(default_factory=dict)

    def objective_of(self, bits: str) -> float:
        return float(self.objective_cost.values[index_of_bitstring(bits)])

    def feasible_fn(self) -> Callable[[str], bool] | None:
        if self.feasible is None:
            return None
        mask = self.feasible
        return lambda bits: bool(mask[index_of_bitstring(bits)])

    def normalized_badness(self, expectation: float) -> float:
        """0 at the optimum, 1 at the reference worst value.

        MaxCut: 1 - <C>/c_max.  Portfolio: (<C> - f_min)/(f_max - f_min).
        """
        if self.kind == "maxcut":
            return 1.0 - expectation / self.meta["c_max"]
        f_min, f_max = self.meta["f_min"], self.meta["f_max"]
        return (expectation - f_min) / (f_max - f_min)


def maxcut_problem(graph: Graph) -> IterativeProblem:
    """Standard stack: cut-count phase, transverse-field mixer, uniform start."""
    cost = maxcut_cost(graph)
    c_max, maximizers = brute_force_maxcut(graph)
    optimal = frozenset(index_of_bitstring(s) for s in maximizers)
    return IterativeProblem(
        kind="maxcut",
        n_qubits=graph.n_vertices,
        phase_cost=cost,
        objective_cost=cost,
        direction="max",
        mixer="x",
        initial=init_uniform(graph.n_vertices),
        feasible=None,
        meta={"c_max": float(c_max), "n": graph.n_vertices, "optimal_indices": optimal},
    )


def dgmvp_problem(instance: PortfolioInstance, bias_asset: int | None = None) -> IterativeProblem:
    """Portfolio stack: risk phase, ring hard mixer, single-asset start.

    bias_asset defaults to the asset with minimal variance (the best feasible
    single-asset holding).
    """
    if bias_asset is None:
        bias_asset = int(np.argmin(np.diag(instance.covariance)))
    values = classical_values(instance)
    # keep feasible entries numerically identical to the brute-force oracle
    for w in enumerate_feasible(instance):
        values[w.basis_index(instance)] = classical_cost(instance, w)
    f_min, f_max, minimizers = brute_force_extrema(instance)
    optimal = frozenset(w.basis_index(instance) for w in minimizers)
    return IterativeProblem(
        kind="dgmvp",
        n_qubits=instance.n_qubits,
        phase_cost=build_dgmvp_cost(instance),
        objective_cost=DiagonalCost(values),
        direction="min",
        mixer=build_nn_mixer(instance),
        initial=maxbias_state(instance, bias_asset),
        feasible=feasible_mask(instance),
        meta={
            "n": instance.n_assets,
            "l": instance.bits_per_asset,
            "f_min": f_min,
            "f_max": f_max,
            "optimal_indices": optimal,
            "bias_asset": bias_asset,
        },
    )


# ---------------------------------------------------------------------------
# The outer loop
# ---------------------------------------------------------------------------


@dataclass
class AnsatzSpec:
    """Circuit depth; the mixer kind is fixed by the problem pairing."""

    p: int = 1

    def __post_init__(self):
        if self.p < 1:
            raise InvalidInputError("need p >= 1 layers")


@dataclass
class WarmStartConfig:
    order_t: int | None = 20
    percentile_t: float | None = None
    epsilon: float = 1e-6
    max_iterations: int = 4
    theta_init: str = "zeros"       # zeros | random | carry
    shots_optimize: int = 8000      # m; 0 means exact expectations
    shots_measure: int = 8000       # M
    optimizer_budget: int = 5000    # I
    polish: bool = True

    def __post_init__(self):
        if (self.order_t is None) == (self.percentile_t is None):
            raise InvalidInputError("set exactly one of order_t / percentile_t")
        if self.epsilon <= 0:
            raise InvalidInputError("epsilon must be positive")
        if self.max_iterations < 0 or self.shots_measure < 1 or self.shots_optimize < 0:
            raise InvalidInputError("counts must be positive")
        if self.theta_init not in ("zeros", "random", "carry"):
            raise InvalidInputError(f"unknown theta_init {self.theta_init!r}")


@dataclass
class IterationRecord:
    iteration: int
    theta: np.ndarray
    r_init: float
    r_post: float
    selected: list[tuple[str, int]]
    distance: float | None
    converged: bool
    expectation_init: float
    expectation_post: float
    delta_c: float | None
    evaluations: int
    alpha_min: float | None = None
    p_min: float | None = None
    p_gm: float | None = None

    def to_dict(self) -> dict:
        return {
            "iter": self.iteration,
            "theta": [float(v) for v in self.theta],
            "r_init": self.r_init,
            "r_post": self.r_post,
            "selected": [{"x": x, "count": c} for x, c in self.selected],
            "distance": self.distance,
            "converged": self.converged,
            "e_init": self.expectation_init,
            "e_post": self.expectation_post,
            "delta_c": self.delta_c,
            "evaluations": self.evaluations,
            "alpha_min": self.alpha_min,
            "p_min": self.p_min,
            "p_gm": self.p_gm,
        }


class IterativeRunError(RuntimeError):
    """Optimizer failure mid-run; carries the records completed so far."""

    def __init__(self, message: str, records: list[IterationRecord]):
        super().__init__(message)
        self.records = records


def measured_expectation(dist: MeasurementDistribution, values: np.ndarray) -> float:
    acc = 0.0
    for x, c in dist.counts.items():
        acc += c * values[index_of_bitstring(x)]
    return acc / dist.total_shots


def _distribution_metrics(problem: IterativeProblem, dist: MeasurementDistribution) -> dict:
    """alpha_min / p_min / p_gm of a measured distribution (portfolio only)."""
    if problem.kind != "dgmvp":
        return {"alpha_min": None, "p_min": None, "p_gm": None}
    values = problem.objective_cost.values
    f_min, f_max = problem.meta["f_min"], problem.meta["f_max"]
    optimal = problem.meta["optimal_indices"]
    best_cost = math.inf
    best_count = 0
    gm_count = 0
    for x, c in dist.counts.items():
        idx = index_of_bitstring(x)
        cost = values[idx]
        if cost < best_cost:
            best_cost, best_count = cost, c
        elif cost == best_cost:
            best_count += c
        if idx in optimal:
            gm_count += c
    return {
        "alpha_min": (best_cost - f_min) / (f_max - f_min),
        "p_min": best_count / dist.total_shots,
        "p_gm": gm_count / dist.total_shots,
    }


def run_iterative(
    problem: IterativeProblem,
    ansatz: AnsatzSpec,
    config: WarmStartConfig,
    rng_seed: int,
) -> list[IterationRecord]:
    """Execute the warm-started loop; returns one record per iteration.

    Iteration 0 starts from the problem's default initial state.  Each later
    iteration rebuilds the initial state from the best measured strings of the
    previous one and re-optimizes.  The loop stops after the iteration whose
    freshly built initial state moved less than epsilon from the previous one,
    or once max_iterations warm-started iterations have run.  Deterministic
    for a fixed seed.
    """
    if problem.kind == "dgmvp" and not isinstance(problem.mixer, MixerSchedule):
        raise InvalidInputError("portfolio problems require the ring mixer")
    if problem.kind == "maxcut" and problem.mixer != "x":
        raise InvalidInputError("maxcut uses the transverse-field mixer")

    p = ansatz.p
    bounds = np.array([[0.0, 2.0 * math.pi]] * (2 * p))
    master = np.random.SeedSequence(rng_seed)
    iter_seeds = master.spawn(config.max_iterations + 1)

    records: list[IterationRecord] = []
    rho = problem.initial
    prev_dist: MeasurementDistribution | None = None
    prev_theta: np.ndarray | None = None
    prev_e_post: float | None = None

    for i in range(config.max_iterations + 1):
        obj_ss, opt_ss, meas_ss, theta_ss = iter_seeds[i].spawn(4)
        selected: list[tuple[str, int]] = []
        distance = None
        if i > 0:
            ranked = rank_outcomes(
                prev_dist,
                problem.objective_of,
                problem.direction,
                problem.feasible_fn(),
            )
            if config.order_t is not None:
                new_rho = build_order_statistic_state(ranked, config.order_t)
                n_sel = min(config.order_t, len(ranked.entries))
            else:
                new_rho = build_percentile_state(ranked, config.percentile_t)
                n_sel = int(np.count_nonzero(new_rho.amplitudes))
            selected = [(x, c) for x, c, _ in ranked.entries[:n_sel]]
            distance = state_distance(new_rho, rho)
            rho = new_rho
        converged = distance is not None and distance < config.epsilon

        if config.theta_init == "zeros":
            theta0 = np.zeros(2 * p)
        elif config.theta_init == "random":
            theta0 = np.random.default_rng(theta_ss).uniform(0.0, 2.0 * math.pi, 2 * p)
        else:  # carry
            theta0 = prev_theta if prev_theta is not None else np.zeros(2 * p)

        sign = -1.0 if problem.direction == "max" else 1.0
        obj_rng = np.random.default_rng(obj_ss)
        initial_state = rho

        def objective(theta: np.ndarray) -> float:
            psi = apply_qaoa(
                initial_state, problem.phase_cost, problem.mixer, QaoaParams.from_flat(theta)
            )
            return sign * estimate_expectation(
                psi, problem.objective_cost, config.shots_optimize, obj_rng
            )

        try:
            result = dual_annealing(
                ObjectiveSpec(
                    fun=objective,
                    bounds=bounds,
                    budget=config.optimizer_budget,
                    seed=np.random.default_rng(opt_ss),
                    x0=theta0,
                    polish=config.polish,
                )
            )
        except Exception as exc:
            raise IterativeRunError(f"optimizer failed at iteration {i}: {exc}", records) from exc

        theta_star = result.best_x
        psi_out = apply_qaoa(
            rho, problem.phase_cost, problem.mixer, QaoaParams.from_flat(theta_star)
        )
        dist_out = sample(psi_out, config.shots_measure, np.random.default_rng(meas_ss))

        e_init = expectation_diagonal(rho, problem.objective_cost)
        e_post = measured_expectation(dist_out, problem.objective_cost.values)
        extra = _distribution_metrics(problem, dist_out)
        records.append(
            IterationRecord(
                iteration=i,
                theta=np.asarray(theta_star, dtype=float),
                r_init=problem.normalized_badness(e_init),
                r_post=problem.normalized_badness(e_post),
                selected=selected,
                distance=distance,
                converged=converged,
                expectation_init=e_init,
                expectation_post=e_post,
                delta_c=None if prev_e_post is None else e_post - prev_e_post,
                evaluations=result.evaluations,
                **extra,
            )
        )
        prev_dist = dist_out
        prev_theta = theta_star
        prev_e_post = e_post
        if converged:
            break
    return records
