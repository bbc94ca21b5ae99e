"""Sampling backends: contract checks, statistics, and the bridge transport."""

import numpy as np
import pytest
from scipy import stats

from qals.qubo import QuboProblem, brute_force_qubo
from qals.samplers import (
    BridgeSampler,
    ExhaustiveSampler,
    RandomSampler,
    SamplerRequest,
    SaSchedule,
    SimulatedAnnealingSampler,
    TransportError,
    qubo_energy,
    random_bits,
)

ALPHA = 1e-3


def random_request(n, seed, reads=1):
    rng = np.random.default_rng(seed)
    weights = {}
    for i in range(n):
        weights[(i, i)] = float(rng.normal())
        for j in range(i + 1, n):
            weights[(i, j)] = float(rng.normal())
    return SamplerRequest(weights=weights, reads=reads)


def optimum_of(request):
    coeffs = np.zeros((len(request.nodes()),) * 2)
    index = {u: i for i, u in enumerate(request.nodes())}
    for (u, v), w in request.weights.items():
        coeffs[index[u], index[v]] += w
    return brute_force_qubo(QuboProblem.from_dense(coeffs))


class TestSamplerRequest:
    def test_rejects_empty_weights(self):
        with pytest.raises(ValueError, match="no weights"):
            SamplerRequest(weights={})

    def test_rejects_descending_keys(self):
        with pytest.raises(ValueError, match="u <= v"):
            SamplerRequest(weights={(2, 1): 1.0})

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SamplerRequest(weights={(0, 0): float("nan")})

    def test_rejects_non_positive_reads(self):
        with pytest.raises(ValueError, match="reads"):
            SamplerRequest(weights={(0, 0): 1.0}, reads=0)

    def test_nodes_are_sorted_union_of_endpoints(self):
        request = SamplerRequest(weights={(5, 9): 1.0, (2, 2): 0.0})
        assert request.nodes() == [2, 5, 9]


class TestQuboEnergy:
    def test_counts_diagonal_and_coupler_terms(self):
        weights = {(0, 0): 2.0, (0, 1): -3.0, (1, 1): 1.0}
        assert qubo_energy(weights, {0: 1, 1: 1}) == 0.0
        assert qubo_energy(weights, {0: 1, 1: 0}) == 2.0
        assert qubo_energy(weights, {0: 0, 1: 0}) == 0.0


class TestExhaustiveSampler:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, seed):
        request = random_request(6, seed)
        result = ExhaustiveSampler().sample(request)
        _, best = optimum_of(request)
        assert result.energy == pytest.approx(best, abs=1e-12)
        assert qubo_energy(request.weights, result.assignment) == pytest.approx(
            result.energy, abs=1e-12
        )

    def test_independent_of_reads(self):
        request = random_request(4, 0, reads=1)
        more_reads = SamplerRequest(weights=request.weights, reads=50)
        assert ExhaustiveSampler().sample(request) == ExhaustiveSampler().sample(more_reads)

    def test_respects_cap(self):
        weights = {(i, i): 1.0 for i in range(5)}
        with pytest.raises(ValueError):
            ExhaustiveSampler(cap=4).sample(SamplerRequest(weights=weights))


class TestSimulatedAnnealingSampler:
    def test_finds_optimum_on_small_problems(self):
        for seed in range(5):
            request = random_request(6, seed, reads=8)
            result = SimulatedAnnealingSampler(seed=seed).sample(request)
            _, best = optimum_of(request)
            assert result.energy == pytest.approx(best, abs=1e-9)

    def test_deterministic_per_seed_and_sequence(self):
        requests = [random_request(5, s, reads=3) for s in range(3)]
        first = [SimulatedAnnealingSampler(seed=42).sample(r) for r in requests]
        second = [SimulatedAnnealingSampler(seed=42).sample(r) for r in requests]
        assert first == second

    def test_energy_is_recomputed_from_assignment(self):
        request = random_request(7, 3, reads=2)
        result = SimulatedAnnealingSampler(seed=0).sample(request)
        assert result.energy == pytest.approx(
            qubo_energy(request.weights, result.assignment), abs=1e-12
        )

    def test_explicit_ladder_overrides_geometric(self):
        schedule = SaSchedule(temperatures=(5.0, 1.0, 0.5))
        assert schedule.ladder(100.0).tolist() == [5.0, 1.0, 0.5]

    def test_geometric_ladder_endpoints(self):
        schedule = SaSchedule(sweeps=50, start_factor=10.0, t_min=0.1)
        ladder = schedule.ladder(3.0)
        assert len(ladder) == 50
        assert ladder[0] == pytest.approx(30.0)
        assert ladder[-1] == pytest.approx(0.1)
        assert all(a >= b for a, b in zip(ladder, ladder[1:]))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"sweeps": 0},
            {"start_factor": 0.0},
            {"t_min": -1.0},
            {"temperatures": ()},
            {"temperatures": (1.0, 2.0)},
            {"temperatures": (1.0, 0.0)},
        ],
    )
    def test_schedule_validation(self, kwargs):
        with pytest.raises(ValueError):
            SaSchedule(**kwargs)


class TestRandomSampler:
    def test_deterministic_per_seed(self):
        request = random_request(6, 1, reads=4)
        assert RandomSampler(seed=9).sample(request) == RandomSampler(seed=9).sample(request)

    def test_keeps_best_of_reads(self):
        request = random_request(5, 2, reads=200)
        result = RandomSampler(seed=0).sample(request)
        _, best = optimum_of(request)
        # 200 uniform draws over 32 assignments almost surely hit the optimum.
        assert result.energy == pytest.approx(best, abs=1e-9)

    def test_bits_are_uniform(self):
        # Fixed seed, so this is a frozen draw, not a flaky statistical test.
        backend = RandomSampler(seed=0)
        values = []
        for _ in range(50):
            values.extend(random_bits(backend, 7000, 7))
        counts = np.bincount(values, minlength=128)
        assert len(values) == 50 * 1000
        assert stats.chisquare(counts).pvalue > ALPHA


class TestRandomBits:
    def test_group_count_and_range(self):
        values = random_bits(RandomSampler(seed=5), 5000, 7)
        assert len(values) == 714
        assert all(0 <= v < 128 for v in values)

    def test_bits_pack_most_significant_first(self):
        class ConstantBackend:
            def sample(self, request):
                nodes = request.nodes()
                # 1 on the first node of each group of three, 0 elsewhere.
                assignment = {u: 1 if i % 3 == 0 else 0 for i, u in enumerate(nodes)}
                return type("R", (), {"assignment": assignment, "energy": 0.0})()

        assert random_bits(ConstantBackend(), 6, 3) == [0b100, 0b100]

    def test_rejects_bad_group_size(self):
        with pytest.raises(ValueError):
            random_bits(RandomSampler(seed=0), 5, 0)
        with pytest.raises(ValueError):
            random_bits(RandomSampler(seed=0), 5, 6)


class TestBridgeSampler:
    def test_round_trip_matches_local_exhaustive(self, loopback_command):
        with BridgeSampler(loopback_command()) as sampler:
            for seed in range(6):
                request = random_request(5, seed)
                result = sampler.sample(request)
                bits, best = optimum_of(request)
                assert result.energy == pytest.approx(best, abs=1e-12)
                assert [result.assignment[u] for u in request.nodes()] == bits.tolist()

    def test_process_persists_across_requests(self, loopback_command):
        with BridgeSampler(loopback_command()) as sampler:
            sampler.sample(random_request(3, 0))
            pid = sampler._proc.pid
            sampler.sample(random_request(4, 1))
            assert sampler._proc.pid == pid
            assert sampler._proc.poll() is None

    def test_full_float_precision_crosses_the_wire(self, loopback_command):
        # A coefficient this small only survives repr-level serialization;
        # any rounding would flip the optimal assignment to 0.
        request = SamplerRequest(weights={(0, 0): -1e-17})
        with BridgeSampler(loopback_command()) as sampler:
            assert sampler.sample(request).assignment == {0: 1}

    def test_timeout_raises_transport_error(self, loopback_command):
        with BridgeSampler(loopback_command("--hang"), timeout=0.5) as sampler:
            with pytest.raises(TransportError, match="lines"):
                sampler.sample(random_request(3, 0))

    def test_child_exit_raises_transport_error(self, loopback_command):
        with BridgeSampler(loopback_command("--die"), timeout=5.0) as sampler:
            with pytest.raises(TransportError, match="exit"):
                sampler.sample(random_request(3, 0))

    def test_malformed_line_raises_transport_error(self, loopback_command):
        with BridgeSampler(loopback_command("--garbage"), timeout=5.0) as sampler:
            with pytest.raises(TransportError, match="malformed"):
                sampler.sample(random_request(3, 0))

    def test_short_answer_raises_transport_error(self, loopback_command):
        with BridgeSampler(loopback_command("--short"), timeout=5.0) as sampler:
            with pytest.raises(TransportError):
                sampler.sample(random_request(3, 0))

    def test_unspawnable_command_raises_transport_error(self):
        sampler = BridgeSampler(["/nonexistent-bridge-binary"])
        with pytest.raises(TransportError):
            sampler.sample(SamplerRequest(weights={(0, 0): 1.0}))
        sampler.close()

    def test_close_is_idempotent(self, loopback_command):
        sampler = BridgeSampler(loopback_command())
        sampler.sample(random_request(3, 0))
        sampler.close()
        sampler.close()

    def test_energy_is_recomputed_locally(self, loopback_command):
        request = random_request(4, 7)
        with BridgeSampler(loopback_command()) as sampler:
            result = sampler.sample(request)
        assert result.energy == pytest.approx(
            qubo_energy(request.weights, result.assignment), abs=1e-12
        )
