"""QAOA circuit layers.

Two ansatz families are built here: the standard MaxCut stack (diagonal cut
phase + transverse-field mixer) and the portfolio stack (diagonal risk phase +
a nearest-neighbour hard mixer assembled from number-conserving Givens
rotations, which keeps all amplitude inside the budget subspace).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError
from .graphs import Graph, maxcut_cost
from .portfolio import PortfolioInstance
from .statevector import (
    DiagonalCost,
    StateVector,
    apply_diagonal_phase,
    apply_givens_batch,
    apply_x_mixer,
    bitstring_of_index,
    init_basis_state,
)


@dataclass
class QaoaParams:
    """p phase angles (gammas) and p mixing angles (betas)."""

    gammas: list[float]
    betas: list[float]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise InvalidInputError("gammas and betas must have equal length p >= 1")

    @property
    def p(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_flat(cls, theta: Sequence[float]) -> "QaoaParams":
        """Interleaved layout (gamma_1, beta_1, ..., gamma_p, beta_p)."""
        theta = list(theta)
        if len(theta) % 2 != 0:
            raise InvalidInputError("flat parameter vector must have even length")
        return cls(theta[0::2], theta[1::2])

    def to_flat(self) -> np.ndarray:
        out = np.empty(2 * self.p)
        out[0::2] = self.gammas
        out[1::2] = self.betas
        return out


@dataclass
class GivensGenerator:
    """One excitation term: a disjoint family of two-level rotations.

    At angle beta each (source, target) amplitude pair rotates as
    (a_s, a_t) -> (a_s cos + a_t sin, -a_s sin + a_t cos).
    """

    label: str
    source_indices: np.ndarray
    target_indices: np.ndarray

    def apply_inplace(self, amps: np.ndarray, beta: float) -> None:
        apply_givens_batch(amps, self.source_indices, self.target_indices, beta)


@dataclass
class MixerSchedule:
    """Ordered generator list implementing one mixing layer U(B, beta)."""

    n_qubits: int
    generators: list[GivensGenerator]
    metadata: dict = field(default_factory=dict)

    def apply(self, state: StateVector, beta: float) -> StateVector:
        amps = state.amplitudes.copy()
        for gen in self.generators:
            gen.apply_inplace(amps, beta)
        return StateVector(state.n_qubits, amps)


def build_maxcut_cost(graph: Graph) -> DiagonalCost:
    """Cut-count diagonal; the Pauli form (sum over edges of (1 - ZZ)/2) is
    diagonal with exactly this spectrum."""
    return maxcut_cost(graph)


def build_dgmvp_cost(instance: PortfolioInstance) -> DiagonalCost:
    """Risk cost as a diagonal operator, by expanding w^T Sigma w over
    per-qubit variables x = (1 - Z)/2 and dropping the identity coefficient.

    The expansion fixes the linear coefficient to -(b_k / 2) * rowsum(Sigma)_i
    per qubit (asset i, bit k); pair terms get (sigma_ij / 2) * b_k1 * b_k2.
    Eigenvalue differences equal classical cost differences.
    """
    n, l = instance.n_assets, instance.bits_per_asset
    n_qubits = instance.n_qubits
    sigma = instance.covariance
    lot = instance.lot
    bit_value = [lot * (1 << (k - 1)) for k in range(1, l + 1)]

    idx = np.arange(1 << n_qubits, dtype=np.int64)
    # exact +-1 signs; int8 keeps the cache small at the 24-qubit limit
    z_sign = [(1 - 2 * ((idx >> q) & 1)).astype(np.int8) for q in range(n_qubits)]

    values = np.zeros(1 << n_qubits, dtype=float)
    row_sums = sigma.sum(axis=1)
    for i in range(n):
        for k in range(1, l + 1):
            q = i * l + (k - 1)
            values += (-0.5 * bit_value[k - 1] * row_sums[i]) * z_sign[q]
    for q1 in range(n_qubits):
        i, k1 = divmod(q1, l)
        zq1 = z_sign[q1]
        for q2 in range(q1 + 1, n_qubits):
            j, k2 = divmod(q2, l)
            coeff = 0.5 * sigma[i, j] * bit_value[k1] * bit_value[k2]
            values += coeff * (zq1 * z_sign[q2])
    return DiagonalCost(values)


def _qubit(instance: PortfolioInstance, asset: int, k: int) -> int:
    """Qubit carrying bit k (value 2^(k-1)) of the given asset."""
    return asset * instance.bits_per_asset + (k - 1)


def _pattern_indices(n_qubits: int, ones: list[int], zeros: list[int]) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    sel = np.ones(idx.size, dtype=bool)
    for q in ones:
        sel &= ((idx >> q) & 1) == 1
    for q in zeros:
        sel &= ((idx >> q) & 1) == 0
    return idx[sel]


def _unit_delta(instance: PortfolioInstance, raised: list[tuple[int, int]],
                lowered: list[tuple[int, int]]) -> int:
    """Net integer-unit change from flipping the given (asset, k) bits up/down."""
    up = sum(1 << (k - 1) for _, k in raised)
    down = sum(1 << (k - 1) for _, k in lowered)
    return up - down


def build_nn_mixer(instance: PortfolioInstance) -> MixerSchedule:
    """Nearest-neighbour hard mixer over the asset ring.

    For each ring pair (t, t') with t - t' = 1 mod n, the blocks are applied
    in the order S, P_odd, P_even, S.  S^k terms move one unit of bit k
    between the paired assets; P^k terms trade two units of bit k (one from
    each asset) for one unit of bit k+1 on asset t.  Only carries with
    k+1 <= l are included, so every generator conserves the unit sum and the
    layer never leaks amplitude out of the budget subspace.
    """
    n, l = instance.n_assets, instance.bits_per_asset
    if n < 2:
        raise InvalidInputError("the ring mixer needs at least two assets")
    n_qubits = instance.n_qubits

    k_even = [k for k in range(2, l + 1, 2) if k + 1 <= l]
    k_odd = [k for k in range(1, l + 1, 2) if k + 1 <= l]

    def s_generator(t: int, t2: int, k: int) -> GivensGenerator:
        q_t = _qubit(instance, t, k)
        q_t2 = _qubit(instance, t2, k)
        # source raises bit k of t and lowers bit k of t'
        assert _unit_delta(instance, [(t, k)], [(t2, k)]) == 0
        src = _pattern_indices(n_qubits, ones=[q_t], zeros=[q_t2])
        tgt = src ^ ((1 << q_t) | (1 << q_t2))
        return GivensGenerator(f"S[k={k},t={t},t'={t2}]", src, tgt)

    def p_generator(t: int, t2: int, k: int) -> GivensGenerator:
        # two units of b_k (one per asset) <-> one unit of b_{k+1} on asset t
        assert 2 * (1 << (k - 1)) == (1 << k)
        assert _unit_delta(instance, [(t, k + 1)], [(t, k), (t2, k)]) == 0
        q_hi = _qubit(instance, t, k + 1)
        q_t = _qubit(instance, t, k)
        q_t2 = _qubit(instance, t2, k)
        src = _pattern_indices(n_qubits, ones=[q_hi], zeros=[q_t, q_t2])
        tgt = src ^ ((1 << q_hi) | (1 << q_t) | (1 << q_t2))
        return GivensGenerator(f"P[k={k},t={t},t'={t2}]", src, tgt)

    generators: list[GivensGenerator] = []
    pairs = [((t2 + 1) % n, t2) for t2 in range(n)]
    if n == 2:
        # the 2-ring degenerates to one unordered pair; keeping both ordered
        # pairs makes the S rotations cancel exactly at l = 1
        pairs = pairs[:1]
    for t, t2 in pairs:
        s_block = [s_generator(t, t2, k) for k in range(1, l + 1)]
        generators.extend(s_block)
        generators.extend(p_generator(t, t2, k) for k in k_odd)
        generators.extend(p_generator(t, t2, k) for k in k_even)
        generators.extend(s_block)
    return MixerSchedule(
        n_qubits,
        generators,
        metadata={
            "pair_order": pairs,
            "block_order": ["S", "P_odd", "P_even", "S"],
            "carry_terms": "k+1 <= l only (unit-sum conserving subset)",
        },
    )


Mixer = Union[str, MixerSchedule]


def apply_qaoa(
    initial: StateVector, cost: DiagonalCost, mixer: Mixer, params: QaoaParams
) -> StateVector:
    """Alternate diagonal phase and mixing layers, layer 1 first."""
    if cost.dim != initial.dim:
        raise InvalidInputError("cost dimension does not match state")
    if isinstance(mixer, MixerSchedule) and mixer.n_qubits != initial.n_qubits:
        raise InvalidInputError("mixer dimension does not match state")
    state = initial
    for gamma, beta in zip(params.gammas, params.betas):
        state = apply_diagonal_phase(state, cost, gamma)
        if mixer == "x":
            state = apply_x_mixer(state, beta)
        elif isinstance(mixer, MixerSchedule):
            state = mixer.apply(state, beta)
        else:
            raise InvalidInputError(f"unknown mixer {mixer!r}")
    return state


def maxbias_state(instance: PortfolioInstance, asset_t: int) -> StateVector:
    """Feasible basis state with the full budget on one asset (all l bits set)."""
    if not (0 <= asset_t < instance.n_assets):
        raise InvalidInputError(f"asset index {asset_t} out of range")
    index = instance.max_units << (asset_t * instance.bits_per_asset)
    return init_basis_state(instance.n_qubits, bitstring_of_index(index, instance.n_qubits))


# ---------------------------------------------------------------------------
# Exact p=1 analysis of the tree-like (all-G6) edge environment.
# ---------------------------------------------------------------------------

_G6_EDGES = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)]
_G6_CENTER = (2, 3)


def _zz_values(n_qubits: int, pairs: list[tuple[int, int]]) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    vals = np.zeros(idx.size, dtype=float)
    for u, v in pairs:
        vals += 1.0 - 2.0 * (((idx >> u) ^ (idx >> v)) & 1)
    return vals


def _g6_center_cut(gamma: float, beta: float, zz_env: np.ndarray, zz_center: np.ndarray) -> float:
    """Expected cut of the centre edge of the 6-vertex tree environment."""
    amps = np.exp(-1j * gamma * zz_env) * (1.0 / 8.0)
    c, s = math.cos(beta), -1j * math.sin(beta)
    for q in _G6_CENTER:
        view = amps.reshape(-1, 2, 1 << q)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a + s * b
        view[:, 1, :] = s * a + c * b
    probs = amps.real**2 + amps.imag**2
    return float((1.0 - probs @ zz_center) / 2.0)


def fold_g6_angles(gamma: float, beta: float) -> tuple[float, float]:
    """Canonical angles modulo the landscape's symmetries.

    The centre-edge cut is exactly periodic with gamma period pi and beta
    period pi/2, invariant under (gamma, beta) -> (pi - gamma, pi/2 - beta),
    and (gamma, beta) -> (gamma, pi/2 - beta) swaps the landscape with its
    complement (the phase-sign mirror).  Folding into gamma in [0, pi/2],
    beta in [0, pi/4] therefore identifies all equivalent reports of the
    optimal angles.
    """
    g = gamma % math.pi
    b = beta % (math.pi / 2.0)
    g = min(g, math.pi - g)
    b = min(b, math.pi / 2.0 - b)
    return g, b


def alpha_g6_landscape(grid_resolution: int = 256) -> tuple[float, float, float, np.ndarray]:
    """Scan and refine the p=1 cut ratio of the tree-like edge environment.

    The landscape is periodic with gamma period pi and beta period pi/2 for
    this observable, so the scan covers gamma in [0, pi), beta in [0, pi/2).
    Returns (max ratio, argmax gamma, argmax beta, full grid).
    """
    if grid_resolution < 256:
        raise InvalidInputError("grid resolution must be >= 256 per axis")
    zz_env = _zz_values(6, _G6_EDGES)
    zz_center = _zz_values(6, [_G6_CENTER])
    gammas = np.linspace(0.0, math.pi, grid_resolution, endpoint=False)
    betas = np.linspace(0.0, math.pi / 2.0, grid_resolution, endpoint=False)
    grid = np.empty((grid_resolution, grid_resolution))
    for gi, gamma in enumerate(gammas):
        amps0 = np.exp(-1j * gamma * zz_env) * (1.0 / 8.0)
        for bi, beta in enumerate(betas):
            amps = amps0.copy()
            c, s = math.cos(beta), -1j * math.sin(beta)
            for q in _G6_CENTER:
                view = amps.reshape(-1, 2, 1 << q)
                a = view[:, 0, :].copy()
                b = view[:, 1, :]
                view[:, 0, :] = c * a + s * b
                view[:, 1, :] = s * a + c * b
            probs = amps.real**2 + amps.imag**2
            grid[gi, bi] = (1.0 - probs @ zz_center) / 2.0

    gi, bi = np.unravel_index(int(grid.argmax()), grid.shape)
    gamma_star, beta_star = float(gammas[gi]), float(betas[bi])
    best = float(grid[gi, bi])

    # local quadratic refinement, alternating axes with shrinking steps
    step_g = float(gammas[1] - gammas[0])
    step_b = float(betas[1] - betas[0])
    fun = lambda g, b: _g6_center_cut(g, b, zz_env, zz_center)
    for _ in range(60):
        moved = False
        for axis in (0, 1):
            h = step_g if axis == 0 else step_b
            if axis == 0:
                f_p = fun(gamma_star + h, beta_star)
                f_m = fun(gamma_star - h, beta_star)
            else:
                f_p = fun(gamma_star, beta_star + h)
                f_m = fun(gamma_star, beta_star - h)
            curv = f_p - 2.0 * best + f_m
            cands = [(f_p, h), (f_m, -h)]
            if curv < 0.0:
                delta = float(np.clip(-h * (f_p - f_m) / (2.0 * curv), -h, h))
                f_q = fun(gamma_star + delta, beta_star) if axis == 0 else fun(gamma_star, beta_star + delta)
                cands.append((f_q, delta))
            f_new, d_new = max(cands, key=lambda t: t[0])
            if f_new > best:
                best = f_new
                if axis == 0:
                    gamma_star += d_new
                else:
                    beta_star += d_new
                moved = True
        if not moved:
            step_g /= 2.0
            step_b /= 2.0
            if max(step_g, step_b) < 1e-10:
                break
    return best, gamma_star, beta_star, grid
