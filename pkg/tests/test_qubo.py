"""QUBO core: canonical form, evaluation, Ising conversion, brute force, files."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qals.qubo import (
    IsingWeights,
    QuboProblem,
    as_qubo,
    brute_force_qubo,
    evaluate_ising,
    evaluate_qubo,
    load_qubo,
    qubo_to_ising,
    save_qubo,
)


def square_matrices(max_n=6, elements=None):
    if elements is None:
        elements = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=32)
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(
            st.lists(elements, min_size=n, max_size=n), min_size=n, max_size=n
        ).map(np.array)
    )


def upper_problems(max_n=6):
    return square_matrices(max_n).map(QuboProblem.from_dense)


def bits_for(n, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=n)


def energy_by_hand(q: QuboProblem, x) -> float:
    """Independent oracle: explicit double loop over the canonical form."""
    total = 0.0
    for i in range(q.n):
        total += q.coeffs[i, i] * x[i]
        for j in range(i + 1, q.n):
            total += q.coeffs[i, j] * x[i] * x[j]
    return total


class TestQuboProblem:
    def test_rejects_lower_triangular_entries(self):
        with pytest.raises(ValueError, match="upper-triangular"):
            QuboProblem(np.array([[1.0, 0.0], [2.0, 1.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            QuboProblem(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            QuboProblem(np.array([[np.inf]]))

    @given(square_matrices())
    def test_from_dense_preserves_energy(self, m):
        q = QuboProblem.from_dense(m)
        for seed in range(4):
            x = bits_for(m.shape[0], seed)
            assert evaluate_qubo(q, x) == pytest.approx(float(x @ m @ x), abs=1e-9)

    def test_from_dense_folds_mirror_entries(self):
        q = QuboProblem.from_dense(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert q.coeffs[0, 1] == 5.0
        assert q.coeffs[1, 0] == 0.0

    def test_as_qubo_passes_through_and_coerces(self):
        q = QuboProblem(np.array([[1.0]]))
        assert as_qubo(q) is q
        coerced = as_qubo([[1.0, 2.0], [3.0, 0.0]])
        assert coerced.coeffs[0, 1] == 5.0


class TestEvaluate:
    @given(upper_problems(), st.integers(0, 2**20))
    def test_matches_hand_expansion(self, q, seed):
        x = bits_for(q.n, seed)
        assert evaluate_qubo(q, x) == pytest.approx(energy_by_hand(q, x), abs=1e-9)

    def test_rejects_wrong_length(self):
        q = QuboProblem(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            evaluate_qubo(q, [0, 1])

    def test_rejects_non_binary(self):
        q = QuboProblem(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            evaluate_qubo(q, [0, 2])


class TestIsingConversion:
    @given(upper_problems())
    def test_round_trip_energy_identity(self, q):
        weights, offset = qubo_to_ising(q)
        for seed in range(4):
            x = bits_for(q.n, seed)
            z = 2 * x - 1
            assert evaluate_qubo(q, x) == pytest.approx(
                evaluate_ising(weights, z) + offset, abs=1e-9
            )

    def test_sparse_by_default_complete_on_request(self):
        q = QuboProblem(np.array([[1.0, 0.0], [0.0, -2.0]]))
        sparse, _ = qubo_to_ising(q)
        assert sparse.quadratic == {}
        complete, _ = qubo_to_ising(q, complete=True)
        assert complete.quadratic == {(0, 1): 0.0}

    def test_known_single_coupler(self):
        # f(x) = x0 x1 becomes (z0 z1 + z0 + z1 + 1) / 4.
        q = QuboProblem(np.array([[0.0, 1.0], [0.0, 0.0]]))
        weights, offset = qubo_to_ising(q)
        assert weights.linear == {0: 0.25, 1: 0.25}
        assert weights.quadratic == {(0, 1): 0.25}
        assert offset == 0.25

    def test_quadratic_keys_must_be_ordered(self):
        with pytest.raises(ValueError, match="i < j"):
            IsingWeights(linear={}, quadratic={(1, 0): 1.0})


class TestBruteForce:
    @given(upper_problems(max_n=5))
    @settings(max_examples=40)
    def test_matches_enumeration_oracle(self, q):
        best_energy = min(
            energy_by_hand(q, x) for x in itertools.product((0, 1), repeat=q.n)
        )
        bits, energy = brute_force_qubo(q)
        assert energy == pytest.approx(best_energy, abs=1e-9)
        assert evaluate_qubo(q, bits) == pytest.approx(energy, abs=1e-9)

    def test_ties_break_to_lexicographically_smallest(self):
        # Energies: 00 -> 0, 01 -> -1, 10 -> 0, 11 -> -1; both optima tie.
        q = QuboProblem(np.array([[0.0, 0.0], [0.0, -1.0]]))
        bits, energy = brute_force_qubo(q)
        assert energy == -1.0
        assert bits.tolist() == [0, 1]

    def test_zero_matrix_returns_all_zeros(self):
        bits, energy = brute_force_qubo(QuboProblem(np.zeros((7, 7))))
        assert energy == 0.0
        assert bits.tolist() == [0] * 7

    def test_cap_is_enforced(self):
        with pytest.raises(ValueError, match="25"):
            brute_force_qubo(QuboProblem(np.zeros((25, 25))))

    def test_crosses_chunk_boundary(self):
        # More than 2^16 assignments exercises the chunked enumeration.
        rng = np.random.default_rng(11)
        q = QuboProblem.from_dense(rng.normal(size=(18, 18)))
        bits, energy = brute_force_qubo(q)
        assert evaluate_qubo(q, bits) == pytest.approx(energy, abs=1e-9)
        # Greedy single-flip check: the optimum admits no improving flip.
        for i in range(q.n):
            flipped = bits.copy()
            flipped[i] ^= 1
            assert evaluate_qubo(q, flipped) >= energy - 1e-9


class TestQuboFiles:
    def test_round_trip(self, tmp_path):
        q = QuboProblem.from_dense(np.random.default_rng(0).normal(size=(5, 5)))
        path = tmp_path / "q.txt"
        save_qubo(q, path)
        loaded = load_qubo(path)
        np.testing.assert_allclose(loaded.coeffs, q.coeffs, atol=0)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "q.txt"
        path.write_text("# header\n2\n\n0 0 1.5  # diag\n0 1 -2.0\n")
        q = load_qubo(path)
        assert q.coeffs[0, 0] == 1.5
        assert q.coeffs[0, 1] == -2.0

    @pytest.mark.parametrize(
        "content, message",
        [
            ("2\n1 0 3.0\n", "line 2"),
            ("2\n0 0 1.0\n0 0 2.0\n", "line 3"),
            ("2\n0 5 1.0\n", "line 2"),
            ("2\n0 1 nan\n", "line 2"),
            ("", "empty"),
        ],
    )
    def test_malformed_files_name_the_line(self, tmp_path, content, message):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        with pytest.raises(ValueError, match=message):
            load_qubo(path)
