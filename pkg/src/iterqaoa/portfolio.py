"""Discrete minimum-variance portfolio instances.

Each of n assets carries an l-bit unit count u_t; the lot size is
a = 1/(2^l - 1) so the all-ones single-asset holding has weight exactly 1.
A holding is feasible iff sum_t u_t = 2^l - 1 (full budget, Eq-free integer
check).  Qubit layout: qubit t*l + (k-1) is bit k (value 2^(k-1)) of asset t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, ResourceLimitError
from .statevector import RngLike, as_rng

MAX_QUBITS = 24


@dataclass
class PortfolioInstance:
    n_assets: int
    bits_per_asset: int
    covariance: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if self.n_assets < 1 or self.bits_per_asset < 1:
            raise InvalidInputError("need n_assets >= 1 and bits_per_asset >= 1")
        if self.n_qubits > MAX_QUBITS:
            raise ResourceLimitError(f"{self.n_qubits} qubits exceeds limit {MAX_QUBITS}")
        self.covariance = np.asarray(self.covariance, dtype=float)
        if self.covariance.shape != (self.n_assets, self.n_assets):
            raise InvalidInputError("covariance shape does not match n_assets")
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-12):
            raise InvalidInputError("covariance must be symmetric within 1e-12")
        min_eig = float(np.linalg.eigvalsh(self.covariance).min())
        if min_eig < -1e-10:
            raise InvalidInputError(f"covariance not PSD (min eigenvalue {min_eig})")

    @property
    def n_qubits(self) -> int:
        return self.n_assets * self.bits_per_asset

    @property
    def max_units(self) -> int:
        """Budget in integer units: 2^l - 1."""
        return (1 << self.bits_per_asset) - 1

    @property
    def lot(self) -> float:
        return 1.0 / self.max_units

    def to_dict(self) -> dict:
        return {
            "n": self.n_assets,
            "l": self.bits_per_asset,
            "sigma": self.covariance.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PortfolioInstance":
        return cls(int(d["n"]), int(d["l"]), np.array(d["sigma"]), d.get("seed"))


@dataclass(frozen=True)
class WeightVector:
    """Integer units per asset; implied weight w_t = lot * units_t."""

    units: tuple[int, ...]

    def weights(self, instance: PortfolioInstance) -> np.ndarray:
        return instance.lot * np.array(self.units, dtype=float)

    def is_feasible(self, instance: PortfolioInstance) -> bool:
        return sum(self.units) == instance.max_units

    def basis_index(self, instance: PortfolioInstance) -> int:
        l = instance.bits_per_asset
        idx = 0
        for t, u in enumerate(self.units):
            idx |= u << (t * l)
        return idx

    @classmethod
    def from_basis_index(cls, index: int, instance: PortfolioInstance) -> "WeightVector":
        l = instance.bits_per_asset
        mask = (1 << l) - 1
        return cls(tuple((index >> (t * l)) & mask for t in range(instance.n_assets)))


def gen_instance(n: int, l: int, rng: RngLike = None) -> PortfolioInstance:
    """Random instance: factor-model covariance F F^T + diag(U(0.1, 0.5))."""
    if n < 2 or l < 1:
        raise InvalidInputError("need n >= 2 and l >= 1")
    if n * l > MAX_QUBITS:
        raise ResourceLimitError(f"{n * l} qubits exceeds limit {MAX_QUBITS}")
    seed = rng if isinstance(rng, int) else None
    gen = as_rng(rng)
    rank = max(1, n // 2)
    factors = gen.standard_normal((n, rank))
    diag = gen.uniform(0.1, 0.5, size=n)
    sigma = factors @ factors.T + np.diag(diag)
    sigma = 0.5 * (sigma + sigma.T)
    return PortfolioInstance(n, l, sigma, seed=seed)


def classical_cost(instance: PortfolioInstance, w: WeightVector) -> float:
    """w^T Sigma w with w_t = lot * units_t."""
    if len(w.units) != instance.n_assets:
        raise InvalidInputError("weight vector dimension mismatch")
    vec = w.weights(instance)
    return float(vec @ instance.covariance @ vec)


def enumerate_feasible(instance: PortfolioInstance) -> list[WeightVector]:
    """All unit vectors with sum_t u_t = 2^l - 1 (each u_t < 2^l)."""
    budget = instance.max_units
    n = instance.n_assets
    out: list[WeightVector] = []

    def rec(prefix: tuple[int, ...], remaining: int):
        pos = len(prefix)
        if pos == n - 1:
            if remaining <= budget:
                out.append(WeightVector(prefix + (remaining,)))
            return
        for u in range(min(budget, remaining) + 1):
            rec(prefix + (u,), remaining - u)

    rec((), budget)
    return out


def feasible_count(n: int, l: int) -> int:
    """B(n, l) = C(2^l + n - 2, n - 1)."""
    return math.comb((1 << l) + n - 2, n - 1)


def classical_sampler_prob(n: int, l: int) -> Fraction:
    """Success probability of uniform sampling over the feasible set: 1 / B(n, l)."""
    if n < 1 or l < 1:
        raise InvalidInputError("need n >= 1 and l >= 1")
    return Fraction(1, feasible_count(n, l))


def brute_force_extrema(
    instance: PortfolioInstance,
) -> tuple[float, float, list[WeightVector]]:
    """Exact (f_min, f_max, global minimizers) over the feasible set."""
    feasible = enumerate_feasible(instance)
    costs = [classical_cost(instance, w) for w in feasible]
    f_min = min(costs)
    f_max = max(costs)
    minimizers = [w for w, c in zip(feasible, costs) if c == f_min]
    return f_min, f_max, minimizers


def feasible_mask(instance: PortfolioInstance) -> np.ndarray:
    """Boolean mask over all 2^(n*l) basis states marking the budget subspace."""
    mask = np.zeros(1 << instance.n_qubits, dtype=bool)
    for w in enumerate_feasible(instance):
        mask[w.basis_index(instance)] = True
    return mask


def classical_values(instance: PortfolioInstance) -> np.ndarray:
    """w^T Sigma w per basis index (defined on all states, feasible or not)."""
    n, l = instance.n_assets, instance.bits_per_asset
    idx = np.arange(1 << instance.n_qubits, dtype=np.int64)
    unit_mask = (1 << l) - 1
    units = np.empty((idx.size, n), dtype=float)
    for t in range(n):
        units[:, t] = (idx >> (t * l)) & unit_mask
    weights = instance.lot * units
    return np.einsum("zi,ij,zj->z", weights, instance.covariance, weights)
