"""Tabu-guided annealing search over permuted projections of a QUBO.

The solver repeatedly projects a penalized copy of the problem onto the
available hardware graph through a random permutation, samples the projection
with a pluggable backend, maps the sample back to problem variables, and
keeps the best assignment seen. A tabu matrix accumulates penalties against
demoted incumbents so the projections drift away from already-explored
regions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qubo import QuboProblem, evaluate_qubo
from .samplers import SamplerRequest, TransportError
from .topology import Topology
from .validation import check_bits, check_permutation, make_rng


@dataclass(eq=False)
class PermutationState:
    """A permutation of 0..n-1 together with its precomputed inverse.

    ``perm`` represents the row-permutation matrix P with P[i, perm[i]] = 1;
    ``inverse`` satisfies inverse[perm[i]] = i, i.e. inverse[v] is the
    position of value v.
    """

    perm: np.ndarray
    inverse: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "PermutationState":
        idx = np.arange(n, dtype=np.intp)
        return cls(idx.copy(), idx.copy())

    @classmethod
    def from_perm(cls, perm) -> "PermutationState":
        p = check_permutation(perm)
        inv = np.empty_like(p)
        inv[p] = np.arange(p.size, dtype=np.intp)
        return cls(p, inv)

    def inverted(self) -> "PermutationState":
        """The inverse permutation as a state (perm and inverse swapped)."""
        return PermutationState(self.inverse.copy(), self.perm.copy())

    @property
    def n(self) -> int:
        return self.perm.size


def perturb_permutation(state: PermutationState, p: float, rng) -> PermutationState:
    """Shuffle each position's value with independent selection probability p.

    Every index is selected with probability p; the values at the selected
    positions are rearranged among themselves by an unbiased Fisher-Yates
    shuffle, unselected positions stay put. With p = 1 the result is a
    uniformly random permutation.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"selection probability must be in [0, 1], got {p}")
    rng = make_rng(rng)
    perm = state.perm.copy()
    selected = np.flatnonzero(rng.random(perm.size) < p)
    values = perm[selected]
    rng.shuffle(values)
    perm[selected] = values
    return PermutationState.from_perm(perm)


def permuted_entry(matrix: np.ndarray, state: PermutationState, i: int, j: int) -> float:
    """Entry (i, j) of P^T M P looked up without materializing the product."""
    return float(matrix[state.inverse[i], state.inverse[j]])


def project_weights(
    qprime: QuboProblem, t: Topology, state: PermutationState
) -> dict[tuple[int, int], float]:
    """Project a (penalized) QUBO onto a topology through a permutation.

    The first qprime.n topology nodes in ascending order act as the
    permutation's slots. Every selected node gets an explicit diagonal
    weight; each topology edge between selected nodes gets the folded
    coefficient of the permuted matrix. Runs in O(|edges| + n) without
    building P^T Q' P.
    """
    n = qprime.n
    if state.n != n:
        raise ValueError(f"permutation over {state.n} slots, problem has {n} variables")
    if t.n < n:
        raise ValueError(f"need {n} nodes, topology has {t.n}")
    selected = t.nodes[:n]
    slot = {u: s for s, u in enumerate(selected)}
    inv = state.inverse
    coeffs = qprime.coeffs
    weights: dict[tuple[int, int], float] = {}
    for u in selected:
        a = inv[slot[u]]
        weights[(u, u)] = float(coeffs[a, a])
    for u, v in t.edges:
        su = slot.get(u)
        sv = slot.get(v)
        if su is None or sv is None:
            continue
        a, b = inv[su], inv[sv]
        if a > b:
            a, b = b, a
        weights[(u, v)] = float(coeffs[a, b])
    return weights


def map_back(assignment: dict[int, int], state: PermutationState) -> np.ndarray:
    """Undo a permutation on a node-keyed sample.

    The assignment's keys, in ascending order, are the permutation's slots;
    the result is z_back[i] = z[inverse[i]] expressed in variable order.
    """
    if len(assignment) != state.n:
        raise ValueError(
            f"assignment covers {len(assignment)} nodes, permutation has {state.n} slots"
        )
    nodes = sorted(assignment)
    slot_bits = np.fromiter((assignment[u] for u in nodes), dtype=np.int8, count=len(nodes))
    return check_bits(slot_bits[state.inverse])


@dataclass
class TabuState:
    """Accumulated penalty matrix over demoted incumbents.

    ``matrix`` is the symmetric sum of ``count`` rank-one terms
    z z^T - I + diag(z); ``lam`` is the current penalty scale.
    """

    matrix: np.ndarray
    lam: float
    count: int = 0

    @classmethod
    def empty(cls, n: int, lam: float) -> "TabuState":
        return cls(np.zeros((n, n)), lam, 0)


def tabu_update(tabu: TabuState, z, spin_form: bool = False) -> TabuState:
    """Add one penalty term for assignment z: S += z z^T - I + diag(z).

    With ``spin_form`` the assignment is recast to -1/+1 before the outer
    product, which penalizes agreement in either value instead of only
    co-activation.
    """
    bits = check_bits(z, tabu.matrix.shape[0]).astype(float)
    v = 2.0 * bits - 1.0 if spin_form else bits
    term = np.outer(v, v) - np.eye(v.size) + np.diag(v)
    return TabuState(tabu.matrix + term, tabu.lam, tabu.count + 1)


def perturb_candidate(z, p: float, rng) -> np.ndarray:
    """Flip each bit of z independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"flip probability must be in [0, 1], got {p}")
    rng = make_rng(rng)
    bits = check_bits(z)
    mask = rng.random(bits.size) < p
    return np.where(mask, 1 - bits, bits).astype(np.int8)


@dataclass
class QalsParams:
    """Search parameters.

    ``i_max`` (iteration budget) has no sensible default and must be given.
    The remaining defaults follow the reference configuration for number
    partitioning.
    """

    i_max: int
    p_delta: float = 0.1
    eta: float = 0.01
    q: float = 0.2
    p_update_every: int = 10
    lambda0: float = 1.5
    reads: int = 10
    n_max: int = 100
    d_min: int = 70
    energy_scale: float = 1.0
    tabu_spin_form: bool = False

    def __post_init__(self):
        if self.i_max < 0:
            raise ValueError("i_max must be >= 0")
        if not 0.0 < self.p_delta < 1.0:
            raise ValueError("p_delta must be in (0, 1)")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must be in [0, 1]")
        if self.p_update_every < 1:
            raise ValueError("p_update_every must be >= 1")
        if self.lambda0 <= 0.0:
            raise ValueError("lambda0 must be > 0")
        if self.reads < 1:
            raise ValueError("reads must be >= 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.d_min < 0:
            raise ValueError("d_min must be >= 0")
        if self.energy_scale <= 0.0:
            raise ValueError("energy_scale must be > 0")


@dataclass
class TraceRecord:
    """One iteration of the search loop.

    ``p`` and ``lam`` are the values used to build this iteration's
    projection; ``f_prime`` is the candidate's objective (None when the
    candidate equals the incumbent and is not re-evaluated); ``f_star``,
    ``e`` and ``d`` are the post-iteration best value and counters.
    """

    i: int
    p: float
    lam: float
    f_prime: float | None
    f_star: float
    accepted: bool
    e: int
    d: int


@dataclass
class QalsTrace:
    """Full per-iteration history of a run.

    ``initial_best`` is the objective after initialization, so schedule and
    counter laws can be replayed from the trace alone.
    """

    records: list[TraceRecord]
    initial_best: float

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for r in self.records:
                fh.write(
                    json.dumps(
                        {
                            "i": r.i,
                            "p": r.p,
                            "lambda": r.lam,
                            "f_prime": r.f_prime,
                            "f_star": r.f_star,
                            "accepted": r.accepted,
                            "e": r.e,
                            "d": r.d,
                        }
                    )
                    + "\n"
                )


def load_trace(path) -> list[dict]:
    """Read a JSON-lines trace file back into a list of records."""
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _canonical_penalized(q: QuboProblem, tabu: TabuState) -> QuboProblem:
    # Fold Q + lam * S back into upper-triangular form; S is symmetric so the
    # fold doubles its off-diagonal contribution, preserving x^T (Q + lam S) x.
    m = q.coeffs + tabu.lam * tabu.matrix
    return QuboProblem(np.triu(m) + np.triu(m.T, 1))


def _sample_candidate(
    qprime: QuboProblem,
    t: Topology,
    state: PermutationState,
    backend,
    reads: int,
) -> np.ndarray:
    weights = project_weights(qprime, t, state)
    result = backend.sample(SamplerRequest(weights=weights, reads=reads))
    # The projection gathers coefficients through state.inverse, so the
    # energy-consistent unpermutation gathers sample bits through state.perm,
    # i.e. map_back applied to the inverted state.
    return map_back(result.assignment, state.inverted())


def run_qals(
    q: QuboProblem,
    t: Topology,
    params: QalsParams,
    backend,
    rng=None,
) -> tuple[np.ndarray, float, QalsTrace]:
    """Run the tabu-guided annealing search.

    Returns ``(z_star, f_star, trace)`` where z_star is the best assignment
    found, f_star its objective, and trace the per-iteration history.

    Randomness is drawn from a single generator in a fixed order: two
    initialization shuffles; then per iteration (1) the permutation
    perturbation, (2) one uniform gating the candidate bit-flip pass,
    (3) the n flip uniforms when gated, (4) one uniform for the acceptance
    draw when a differing candidate is not strictly better. Backend
    randomness is owned by the backend. Identical problem, topology,
    parameters, seed, and a deterministic backend give identical output.
    """
    rng = make_rng(rng)
    n = q.n
    if t.n < n:
        raise ValueError(f"need {n} nodes, topology has {t.n}")

    identity = PermutationState.identity(n)
    tabu = TabuState.empty(n, params.lambda0)
    records: list[TraceRecord] = []
    initial_best = float("nan")

    try:
        state_1 = perturb_permutation(identity, 1.0, rng)
        state_2 = perturb_permutation(identity, 1.0, rng)
        z1 = _sample_candidate(q, t, state_1, backend, params.reads)
        z2 = _sample_candidate(q, t, state_2, backend, params.reads)
        f1 = evaluate_qubo(q, z1)
        f2 = evaluate_qubo(q, z2)
        if f1 < f2:
            z_star, f_star, base_state = z1, f1, state_1
            z_worse = z2
        else:
            z_star, f_star, base_state = z2, f2, state_2
            z_worse = z1
        if f1 != f2:
            tabu = tabu_update(tabu, z_worse, params.tabu_spin_form)
        initial_best = f_star

        p = 1.0
        e = d = 0
        penalized = None
        penalized_key = None
        for i in range(params.i_max):
            lam_used = tabu.lam
            key = (tabu.lam, tabu.count)
            if penalized_key != key:
                penalized = _canonical_penalized(q, tabu)
                penalized_key = key
            if i % params.p_update_every == 0:
                p = p - params.eta * (p - params.p_delta)
            state = perturb_permutation(base_state, p, rng)
            candidate = _sample_candidate(penalized, t, state, backend, params.reads)
            if rng.random() < params.q:
                candidate = perturb_candidate(candidate, p, rng)

            if not np.array_equal(candidate, z_star):
                f_prime = evaluate_qubo(q, candidate)
                if f_prime < f_star:
                    demoted = z_star
                    z_star, f_star, base_state = candidate, f_prime, state
                    e = 0
                    d = 0
                    tabu = tabu_update(tabu, demoted, params.tabu_spin_form)
                    accepted = True
                else:
                    d += 1
                    base_prob = max(p - params.p_delta, 0.0)
                    exponent = (f_prime - f_star) / params.energy_scale
                    prob = 1.0 if exponent == 0.0 else base_prob**exponent
                    prob = min(max(prob, 0.0), 1.0)
                    if rng.random() < prob:
                        # Suboptimal acceptance moves the perturbation base and
                        # resets the repeat counter; the best-found assignment
                        # is never replaced by a worse candidate.
                        base_state = state
                        e = 0
                        accepted = True
                    else:
                        accepted = False
                tabu.lam = min(params.lambda0, params.lambda0 / (2 + i - e))
            else:
                e += 1
                f_prime = None
                accepted = False

            records.append(TraceRecord(i, p, lam_used, f_prime, f_star, accepted, e, d))
            if e + d >= params.n_max and d < params.d_min:
                break
    except TransportError as exc:
        exc.trace = QalsTrace(records, initial_best)
        raise

    return z_star, f_star, QalsTrace(records, initial_best)
