import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iterqaoa.errors import InvalidInputError
from iterqaoa.statevector import (
    DiagonalCost,
    StateVector,
    TwoLevelRotation,
    apply_diagonal_phase,
    apply_two_level_rotation,
    apply_x_mixer,
    bitstring_of_index,
    expectation_diagonal,
    index_of_bitstring,
    init_basis_state,
    init_superposition,
    init_uniform,
    sample,
)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


class TestBitOrder:
    def test_roundtrip(self):
        for n in (1, 3, 5):
            for idx in range(1 << n):
                assert index_of_bitstring(bitstring_of_index(idx, n)) == idx

    def test_char_k_is_qubit_k(self):
        # "110" sets qubits 0 and 1 -> index 0b011
        assert index_of_bitstring("110") == 3


class TestInit:
    def test_basis_state_two_qubits(self):
        st = init_basis_state(2, "00")
        assert np.allclose(st.amplitudes, [1, 0, 0, 0])

    def test_basis_state_101(self):
        st = init_basis_state(3, "101")
        expected = np.zeros(8)
        expected[index_of_bitstring("101")] = 1
        assert np.allclose(st.amplitudes, expected)

    def test_basis_state_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            init_basis_state(1, "0110")

    def test_uniform_single_qubit(self):
        assert np.allclose(init_uniform(1).amplitudes, [2**-0.5, 2**-0.5])

    def test_uniform_two_qubits(self):
        assert np.allclose(init_uniform(2).amplitudes, [0.5] * 4)

    def test_uniform_normalized_ten_qubits(self):
        st = init_uniform(10)
        assert abs(st.probabilities().sum() - 1.0) < 1e-12

    def test_superposition_single_string(self):
        st = init_superposition(2, [("01", 1.0)])
        assert np.allclose(st.amplitudes, init_basis_state(2, "01").amplitudes)

    def test_superposition_weights(self):
        st = init_superposition(2, [("00", 3.0), ("11", 1.0)])
        assert st.amplitudes[index_of_bitstring("00")] == pytest.approx(math.sqrt(0.75))
        assert st.amplitudes[index_of_bitstring("11")] == pytest.approx(math.sqrt(0.25))

    def test_superposition_duplicate_strings(self):
        with pytest.raises(InvalidInputError):
            init_superposition(2, [("00", 1.0), ("00", 1.0)])

    def test_superposition_zero_weights(self):
        with pytest.raises(InvalidInputError):
            init_superposition(2, [("00", 0.0), ("11", 0.0)])


class TestDiagonalPhase:
    def test_gamma_zero_is_identity(self):
        st = random_state(3, 0)
        out = apply_diagonal_phase(st, DiagonalCost(np.arange(8.0)), 0.0)
        assert np.allclose(out.amplitudes, st.amplitudes)

    def test_constant_cost_is_global_phase(self):
        st = random_state(3, 1)
        cost = DiagonalCost(np.full(8, 2.5))
        out = apply_diagonal_phase(st, cost, 0.7)
        assert np.allclose(out.amplitudes, st.amplitudes * np.exp(-1j * 0.7 * 2.5))
        assert expectation_diagonal(out, DiagonalCost(np.arange(8.0))) == pytest.approx(
            expectation_diagonal(st, DiagonalCost(np.arange(8.0)))
        )

    def test_single_qubit_pi_phase(self):
        # 2x2 check: [1/sqrt2, 1/sqrt2] with cost [0, 1] and gamma = pi
        st = init_uniform(1)
        out = apply_diagonal_phase(st, DiagonalCost([0.0, 1.0]), math.pi)
        assert np.allclose(out.amplitudes, [2**-0.5, -(2**-0.5)], atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            apply_diagonal_phase(init_uniform(2), DiagonalCost([0.0, 1.0]), 1.0)

    def test_phases_compose_additively(self):
        st = random_state(4, 2)
        cost = DiagonalCost(np.random.default_rng(3).standard_normal(16))
        one = apply_diagonal_phase(apply_diagonal_phase(st, cost, 0.4), cost, 1.1)
        two = apply_diagonal_phase(st, cost, 1.5)
        assert np.allclose(one.amplitudes, two.amplitudes, atol=1e-12)


class TestXMixer:
    def test_beta_zero_identity(self):
        st = random_state(3, 4)
        assert np.allclose(apply_x_mixer(st, 0.0).amplitudes, st.amplitudes)

    def test_half_pi_flips_all(self):
        st = init_basis_state(4, "0000")
        out = apply_x_mixer(st, math.pi / 2)
        probs = out.probabilities()
        assert probs[index_of_bitstring("1111")] == pytest.approx(1.0)

    def test_single_qubit_quarter_pi(self):
        out = apply_x_mixer(init_basis_state(1, "0"), math.pi / 4)
        assert np.allclose(
            out.amplitudes, [math.cos(math.pi / 4), -1j * math.sin(math.pi / 4)]
        )


class TestTwoLevelRotation:
    def test_angle_zero_identity(self):
        st = random_state(3, 5)
        out = apply_two_level_rotation(st, TwoLevelRotation(1, 6, 0.0))
        assert np.allclose(out.amplitudes, st.amplitudes)

    def test_half_pi_full_transfer(self):
        st = init_basis_state(2, "10")
        src = index_of_bitstring("10")
        tgt = index_of_bitstring("01")
        out = apply_two_level_rotation(st, TwoLevelRotation(src, tgt, math.pi / 2))
        assert abs(out.amplitudes[tgt]) == pytest.approx(1.0)

    def test_quarter_pi_equal_split(self):
        st = init_basis_state(2, "10")
        src = index_of_bitstring("10")
        tgt = index_of_bitstring("01")
        out = apply_two_level_rotation(st, TwoLevelRotation(src, tgt, math.pi / 4))
        assert abs(out.amplitudes[src]) == pytest.approx(2**-0.5)
        assert abs(out.amplitudes[tgt]) == pytest.approx(2**-0.5)

    def test_rotation_inverse(self):
        st = random_state(4, 6)
        rot = TwoLevelRotation(3, 11, 0.83)
        back = apply_two_level_rotation(
            apply_two_level_rotation(st, rot), TwoLevelRotation(3, 11, -0.83)
        )
        assert np.allclose(back.amplitudes, st.amplitudes, atol=1e-10)

    def test_index_out_of_range(self):
        with pytest.raises(InvalidInputError):
            apply_two_level_rotation(init_uniform(2), TwoLevelRotation(0, 4, 0.1))


class TestExpectation:
    def test_basis_state_exact(self):
        cost = DiagonalCost(np.arange(8.0))
        st = init_basis_state(3, "011")
        assert expectation_diagonal(st, cost) == pytest.approx(
            float(index_of_bitstring("011"))
        )

    def test_uniform_edge_graph(self):
        # K2 cut costs {0,1,1,0}: uniform average 0.5
        cost = DiagonalCost([0.0, 1.0, 1.0, 0.0])
        assert expectation_diagonal(init_uniform(2), cost) == pytest.approx(0.5)

    def test_constant_cost(self):
        st = random_state(4, 7)
        assert expectation_diagonal(st, DiagonalCost(np.full(16, 7.0))) == pytest.approx(
            7.0, abs=1e-12
        )


class TestSample:
    def test_basis_state_single_key(self):
        dist = sample(init_basis_state(3, "101"), 50, 0)
        assert dist.counts == {"101": 50}

    def test_uniform_single_qubit_balance(self):
        dist = sample(init_uniform(1), 10**6, 123)
        frac = dist.counts["0"] / 10**6
        assert abs(frac - 0.5) < 0.002  # 3-sigma binomial bound is ~0.0015

    def test_same_seed_same_distribution(self):
        st = random_state(4, 8)
        assert sample(st, 500, 42).counts == sample(st, 500, 42).counts

    def test_counts_sum_to_shots(self):
        dist = sample(random_state(5, 9), 777, 1)
        assert sum(dist.counts.values()) == 777 == dist.total_shots


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**31),
    gamma=st.floats(min_value=-10, max_value=10, allow_nan=False),
    beta=st.floats(min_value=-10, max_value=10, allow_nan=False),
)
def test_operations_preserve_norm(n, seed, gamma, beta):
    state = random_state(n, seed)
    cost = DiagonalCost(np.random.default_rng(seed + 1).standard_normal(1 << n))
    out = apply_x_mixer(apply_diagonal_phase(state, cost, gamma), beta)
    if n >= 2:
        out = apply_two_level_rotation(out, TwoLevelRotation(0, 1, beta))
    assert abs(out.probabilities().sum() - 1.0) < 1e-10


def test_sampled_expectation_converges_like_sqrt_shots():
    # standard error of the shot estimate shrinks ~1/sqrt(m)
    state = random_state(4, 10)
    cost = DiagonalCost(np.random.default_rng(11).standard_normal(16))
    exact = expectation_diagonal(state, cost)
    var = expectation_diagonal(state, DiagonalCost(cost.values**2)) - exact**2
    rng = np.random.default_rng(12)
    for shots in (400, 40_000):
        errs = []
        for _ in range(30):
            dist = sample(state, shots, rng)
            est = sum(
                c * cost.values[index_of_bitstring(x)] for x, c in dist.counts.items()
            ) / shots
            errs.append((est - exact) ** 2)
        rmse = math.sqrt(np.mean(errs))
        assert rmse < 4.0 * math.sqrt(var / shots)
