import math

import numpy as np
import pytest

from iterqaoa.errors import InvalidInputError
from iterqaoa.optimizer import ObjectiveSpec, dual_annealing, estimate_expectation
from iterqaoa.statevector import DiagonalCost, StateVector, expectation_diagonal, init_basis_state

BOUNDS_1D = np.array([[0.0, 2.0 * math.pi]])


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


class TestEstimateExpectation:
    def test_zero_shots_is_exact(self):
        state = random_state(4, 0)
        cost = DiagonalCost(np.random.default_rng(1).standard_normal(16))
        assert estimate_expectation(state, cost, 0) == expectation_diagonal(state, cost)

    def test_basis_state_exact_at_any_shots(self):
        cost = DiagonalCost(np.arange(8.0))
        state = init_basis_state(3, "110")
        for shots in (1, 7, 100):
            assert estimate_expectation(state, cost, shots, 0) == pytest.approx(3.0)

    def test_large_m_within_clt_bound(self):
        state = random_state(3, 2)
        cost = DiagonalCost(np.random.default_rng(3).standard_normal(8))
        exact = expectation_diagonal(state, cost)
        second = expectation_diagonal(state, DiagonalCost(cost.values**2))
        sigma = math.sqrt(second - exact**2)
        m = 10**6
        est = estimate_expectation(state, cost, m, 42)
        assert abs(est - exact) < 3.0 * sigma / math.sqrt(m) + 1e-12


class TestDualAnnealing:
    def test_1d_quadratic_within_tolerance(self):
        target = 2.5
        spec = ObjectiveSpec(
            fun=lambda x: (x[0] - target) ** 2, bounds=BOUNDS_1D, budget=500, seed=7
        )
        res = dual_annealing(spec)
        assert abs(res.best_x[0] - target) < 1e-2

    def test_budget_hard_cap(self):
        calls = [0]

        def noisy(x):
            calls[0] += 1
            return math.sin(3 * x[0]) + 0.1 * x[0]

        for budget in (3, 17, 250):
            calls[0] = 0
            res = dual_annealing(
                ObjectiveSpec(fun=noisy, bounds=BOUNDS_1D, budget=budget, seed=1)
            )
            assert calls[0] <= budget
            assert res.evaluations == calls[0]

    def test_seeded_determinism(self):
        def f(x):
            return (x[0] - 1.0) ** 2 + (x[1] - 4.0) ** 2

        bounds = np.array([[0.0, 2 * math.pi]] * 2)
        a = dual_annealing(ObjectiveSpec(fun=f, bounds=bounds, budget=400, seed=11))
        b = dual_annealing(ObjectiveSpec(fun=f, bounds=bounds, budget=400, seed=11))
        assert np.array_equal(a.best_x, b.best_x)
        assert a.best_value == b.best_value
        assert np.array_equal(a.trace, b.trace)

    def test_best_is_min_over_trace(self):
        res = dual_annealing(
            ObjectiveSpec(fun=lambda x: math.cos(x[0]) * x[0], bounds=BOUNDS_1D, budget=300, seed=3)
        )
        assert res.best_value == res.trace[:, 1].min()
        running = np.minimum.accumulate(res.trace[:, 1])
        assert np.all(np.diff(running) <= 0)

    def test_budget_too_small(self):
        with pytest.raises(InvalidInputError):
            dual_annealing(ObjectiveSpec(fun=lambda x: 0.0, bounds=BOUNDS_1D, budget=1, seed=0))

    def test_x0_is_evaluated_first(self):
        seen = []

        def f(x):
            seen.append(float(x[0]))
            return (x[0] - 3.0) ** 2

        dual_annealing(
            ObjectiveSpec(fun=f, bounds=BOUNDS_1D, budget=50, seed=0, x0=np.array([1.25]))
        )
        assert seen[0] == pytest.approx(1.25)

    def test_polish_off_still_respects_budget(self):
        res = dual_annealing(
            ObjectiveSpec(
                fun=lambda x: (x[0] - 2.0) ** 2,
                bounds=BOUNDS_1D,
                budget=200,
                seed=5,
                polish=False,
            )
        )
        assert res.evaluations <= 200
        assert res.metadata["polish"] is False

    def test_multimodal_finds_global_basin(self):
        # global minimum of sin(3x) + 0.2(x-4)^2 on [0, 2pi]
        def f(x):
            return math.sin(3 * x[0]) + 0.2 * (x[0] - 4.0) ** 2

        xs = np.linspace(0, 2 * math.pi, 200_001)
        truth = float(np.min(np.sin(3 * xs) + 0.2 * (xs - 4.0) ** 2))
        res = dual_annealing(ObjectiveSpec(fun=f, bounds=BOUNDS_1D, budget=2000, seed=9))
        assert res.best_value <= truth + 1e-6
