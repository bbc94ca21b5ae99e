"""Scikit-learn style wrappers around the solver entry points.

Each estimator stores its constructor arguments verbatim (so ``get_params``
/ ``set_params`` / ``clone`` behave as usual), coerces the problem passed
to ``fit`` via :func:`qals.qubo.as_qubo`, and exposes results through
``solution_`` and ``objective_`` attributes. These wrappers are a
convenience layer; the functional API underneath is the primary interface.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .qubo import as_qubo, brute_force_qubo, evaluate_qubo
from .samplers import (
    ExhaustiveSampler,
    RandomSampler,
    SamplerRequest,
    SaSchedule,
    SimulatedAnnealingSampler,
)
from .search import QalsParams, run_qals
from .topology import Topology, generate_complete
from .validation import make_rng

_BACKEND_NAMES = ("sa", "exhaustive", "random")


def _resolve_backend(backend, seed):
    """Turn a backend spec (name or sampler object) into a sampler."""
    if hasattr(backend, "sample"):
        return backend
    if backend == "sa":
        return SimulatedAnnealingSampler(seed=seed)
    if backend == "exhaustive":
        return ExhaustiveSampler()
    if backend == "random":
        return RandomSampler(seed=seed)
    raise ValueError(f"unknown backend {backend!r}; expected one of {_BACKEND_NAMES} or a sampler")


class QalsSolver(BaseEstimator):
    """Tabu-guided annealing search as an estimator.

    Parameters mirror :class:`qals.search.QalsParams`; ``backend`` selects
    the sampler ("sa", "exhaustive", "random", or any object with a
    ``sample`` method) and ``topology`` the target graph (defaults to the
    complete graph on the problem's variables). When ``random_state`` is an
    integer seed, the search draws from seed and a named backend from
    seed + 1, so the two streams never alias.

    Attributes set by ``fit``: ``solution_`` (0/1 vector), ``objective_``,
    ``trace_``, ``n_iter_``.
    """

    def __init__(
        self,
        i_max: int = 500,
        p_delta: float = 0.1,
        eta: float = 0.01,
        q: float = 0.2,
        p_update_every: int = 10,
        lambda0: float = 1.5,
        reads: int = 10,
        n_max: int = 100,
        d_min: int = 70,
        energy_scale: float = 1.0,
        tabu_spin_form: bool = False,
        backend="sa",
        topology: Topology | None = None,
        random_state=None,
    ):
        self.i_max = i_max
        self.p_delta = p_delta
        self.eta = eta
        self.q = q
        self.p_update_every = p_update_every
        self.lambda0 = lambda0
        self.reads = reads
        self.n_max = n_max
        self.d_min = d_min
        self.energy_scale = energy_scale
        self.tabu_spin_form = tabu_spin_form
        self.backend = backend
        self.topology = topology
        self.random_state = random_state

    def fit(self, problem, y=None):
        """Solve a QUBO (``QuboProblem`` or square array-like)."""
        q = as_qubo(problem)
        params = QalsParams(
            i_max=self.i_max,
            p_delta=self.p_delta,
            eta=self.eta,
            q=self.q,
            p_update_every=self.p_update_every,
            lambda0=self.lambda0,
            reads=self.reads,
            n_max=self.n_max,
            d_min=self.d_min,
            energy_scale=self.energy_scale,
            tabu_spin_form=self.tabu_spin_form,
        )
        topology = self.topology if self.topology is not None else generate_complete(q.n)
        backend_seed = None if self.random_state is None else int(self.random_state) + 1
        backend = _resolve_backend(self.backend, backend_seed)
        rng = make_rng(self.random_state)
        solution, objective, trace = run_qals(q, topology, params, backend, rng=rng)
        self.solution_ = solution
        self.objective_ = objective
        self.trace_ = trace
        self.n_iter_ = len(trace)
        return self


class SimulatedAnnealingSolver(BaseEstimator):
    """One simulated-annealing sample call as an estimator."""

    def __init__(self, reads: int = 10, sweeps: int = 1000, random_state=None):
        self.reads = reads
        self.sweeps = sweeps
        self.random_state = random_state

    def fit(self, problem, y=None):
        q = as_qubo(problem)
        sampler = SimulatedAnnealingSampler(
            schedule=SaSchedule(sweeps=self.sweeps), seed=self.random_state
        )
        weights = {
            (i, j): float(q.coeffs[i, j])
            for i in range(q.n)
            for j in range(i, q.n)
            if q.coeffs[i, j] != 0.0 or i == j
        }
        result = sampler.sample(SamplerRequest(weights=weights, reads=self.reads))
        solution = np.array([result.assignment[i] for i in range(q.n)], dtype=np.int8)
        self.solution_ = solution
        self.objective_ = evaluate_qubo(q, solution)
        self.n_iter_ = self.reads
        return self


class ExhaustiveSolver(BaseEstimator):
    """Exact enumeration as an estimator (small problems only)."""

    def __init__(self, cap: int = 24):
        self.cap = cap

    def fit(self, problem, y=None):
        q = as_qubo(problem)
        solution, objective = brute_force_qubo(q, cap=self.cap)
        self.solution_ = solution
        self.objective_ = objective
        self.n_iter_ = 1
        return self
