"""Dense complex statevector simulator for up to ~20 qubits.

Bit-ordering convention (used everywhere in this package): basis index bit k
(little-endian, bit 0 = least significant) is qubit k, and character k of a
bitstring is the value of qubit k.  So ``"110"`` on three qubits sets qubits
0 and 1 and maps to basis index 0b011 = 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import InvalidInputError

NORM_ATOL = 1e-10

RngLike = Union[int, np.random.Generator, None]


def as_rng(seed: RngLike) -> np.random.Generator:
    """Normalize an int seed or Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def index_of_bitstring(bits: str) -> int:
    """Basis index of a bitstring (character k = qubit k = index bit k)."""
    idx = 0
    for q, ch in enumerate(bits):
        if ch == "1":
            idx |= 1 << q
        elif ch != "0":
            raise InvalidInputError(f"bitstring may only contain 0/1, got {bits!r}")
    return idx


def bitstring_of_index(index: int, n_qubits: int) -> str:
    """Inverse of :func:`index_of_bitstring`."""
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


@dataclass
class StateVector:
    """A pure state on ``n_qubits`` qubits as 2**n complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise InvalidInputError(
                f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        p = self.amplitudes.real**2 + self.amplitudes.imag**2
        return p

    def check_normalized(self, atol: float = NORM_ATOL) -> None:
        total = float(self.probabilities().sum())
        if abs(total - 1.0) > atol:
            raise InvalidInputError(f"state norm^2 = {total}, expected 1 within {atol}")


@dataclass
class DiagonalCost:
    """A diagonal observable: one real cost per computational basis state."""

    values: np.ndarray
    # phase cache for integer-like spectra: (unique values, inverse index)
    _phase_table: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or (self.values.size & (self.values.size - 1)) != 0:
            raise InvalidInputError("cost length must be a power of 2")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("cost values must be finite")

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def n_qubits(self) -> int:
        return int(self.dim.bit_length() - 1)

    def phase_factors(self, gamma: float) -> np.ndarray:
        """exp(-i*gamma*values), using a unique-value table for small spectra."""
        if self._phase_table is None:
            uniq, inv = np.unique(self.values, return_inverse=True)
            if uniq.size <= 64:
                self._phase_table = (uniq, inv)
            else:
                self._phase_table = ()
        if self._phase_table:
            uniq, inv = self._phase_table
            return np.exp(-1j * gamma * uniq)[inv]
        return np.exp(-1j * gamma * self.values)


@dataclass
class TwoLevelRotation:
    """Givens rotation between two basis states.

    Generated by ``|source><target| - |target><source|``: at angle theta the
    amplitudes map to ``(a_s, a_t) -> (a_s cos + a_t sin, -a_s sin + a_t cos)``.
    """

    source_index: int
    target_index: int
    angle: float


@dataclass
class MeasurementDistribution:
    """Counts of measured bitstrings; sum of counts equals total_shots."""

    n_qubits: int
    counts: dict[str, int]
    total_shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_shots:
            raise InvalidInputError("counts do not sum to total_shots")
        for key in self.counts:
            if len(key) != self.n_qubits:
                raise InvalidInputError(f"key {key!r} is not {self.n_qubits} bits")

    def frequencies(self) -> dict[str, float]:
        return {k: c / self.total_shots for k, c in self.counts.items()}

    def expectation(self, cost_fn) -> float:
        """Count-weighted mean of cost_fn over measured strings."""
        acc = 0.0
        for key, c in self.counts.items():
            acc += c * float(cost_fn(key))
        return acc / self.total_shots


def init_basis_state(n_qubits: int, bitstring: str) -> StateVector:
    """Computational basis state |bitstring>."""
    if n_qubits < 1:
        raise InvalidInputError("need at least one qubit")
    if len(bitstring) != n_qubits:
        raise InvalidInputError(
            f"bitstring length {len(bitstring)} does not match n_qubits={n_qubits}"
        )
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[index_of_bitstring(bitstring)] = 1.0
    return StateVector(n_qubits, amps)


def init_uniform(n_qubits: int) -> StateVector:
    """|+>^n: every amplitude 2**(-n/2)."""
    if n_qubits < 1:
        raise InvalidInputError("need at least one qubit")
    dim = 1 << n_qubits
    amps = np.full(dim, dim**-0.5, dtype=complex)
    return StateVector(n_qubits, amps)


def init_superposition(
    n_qubits: int, weighted_strings: Iterable[tuple[str, float]]
) -> StateVector:
    """Normalized superposition with amplitude sqrt(w_j / sum w) on string j."""
    pairs = list(weighted_strings)
    if not pairs:
        raise InvalidInputError("need at least one weighted string")
    seen = set()
    total = 0.0
    for s, w in pairs:
        if len(s) != n_qubits:
            raise InvalidInputError(f"string {s!r} is not {n_qubits} bits")
        if s in seen:
            raise InvalidInputError(f"duplicate string {s!r}")
        seen.add(s)
        if w < 0:
            raise InvalidInputError("weights must be nonnegative")
        total += w
    if total <= 0:
        raise InvalidInputError("at least one weight must be positive")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    for s, w in pairs:
        amps[index_of_bitstring(s)] = np.sqrt(w / total)
    return StateVector(n_qubits, amps)


def apply_diagonal_phase(state: StateVector, cost: DiagonalCost, gamma: float) -> StateVector:
    """amplitude_z *= exp(-i*gamma*cost_z)."""
    if cost.dim != state.dim:
        raise InvalidInputError("cost dimension does not match state")
    return StateVector(state.n_qubits, state.amplitudes * cost.phase_factors(gamma))


def apply_x_mixer(state: StateVector, beta: float) -> StateVector:
    """Apply exp(-i*beta*X) = Rx(2*beta) to every qubit."""
    c = np.cos(beta)
    s = -1j * np.sin(beta)
    amps = state.amplitudes.copy()
    for q in range(state.n_qubits):
        view = amps.reshape(-1, 2, 1 << q)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a + s * b
        view[:, 1, :] = s * a + c * b
    return StateVector(state.n_qubits, amps)


def apply_two_level_rotation(state: StateVector, rot: TwoLevelRotation) -> StateVector:
    """Rotate the (source, target) amplitude pair, leaving the rest untouched."""
    dim = state.dim
    if not (0 <= rot.source_index < dim and 0 <= rot.target_index < dim):
        raise InvalidInputError("rotation index out of range")
    if rot.source_index == rot.target_index:
        raise InvalidInputError("source and target must differ")
    amps = state.amplitudes.copy()
    a = amps[rot.source_index]
    b = amps[rot.target_index]
    c, s = np.cos(rot.angle), np.sin(rot.angle)
    amps[rot.source_index] = c * a + s * b
    amps[rot.target_index] = -s * a + c * b
    return StateVector(state.n_qubits, amps)


def apply_givens_batch(
    amps: np.ndarray, source_idx: np.ndarray, target_idx: np.ndarray, angle: float
) -> None:
    """In-place batch of disjoint two-level rotations (all with one angle).

    Pairs must be disjoint; used by mixer schedules where the pairing by
    construction partitions the basis.
    """
    c, s = np.cos(angle), np.sin(angle)
    a = amps[source_idx]
    b = amps[target_idx]
    amps[source_idx] = c * a + s * b
    amps[target_idx] = -s * a + c * b


def expectation_diagonal(state: StateVector, cost: DiagonalCost) -> float:
    """<state| cost |state> = sum_z |amp_z|^2 cost_z."""
    if cost.dim != state.dim:
        raise InvalidInputError("cost dimension does not match state")
    return float(np.dot(state.probabilities(), cost.values))


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.dim != b.dim:
        raise InvalidInputError("dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def sample_indices(state: StateVector, shots: int, rng: RngLike) -> np.ndarray:
    """Draw ``shots`` basis indices by inverse-CDF over |amplitude|^2."""
    if shots < 1:
        raise InvalidInputError("shots must be >= 1")
    probs = state.probabilities()
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    u = as_rng(rng).random(shots)
    return np.searchsorted(cdf, u, side="right")


def sample(state: StateVector, shots: int, rng: RngLike) -> MeasurementDistribution:
    """Multinomial measurement: deterministic given the seed."""
    idx = sample_indices(state, shots, rng)
    uniq, cnt = np.unique(idx, return_counts=True)
    counts = {
        bitstring_of_index(int(z), state.n_qubits): int(c) for z, c in zip(uniq, cnt)
    }
    return MeasurementDistribution(state.n_qubits, counts, shots)
