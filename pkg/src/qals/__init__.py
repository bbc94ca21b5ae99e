"""Tabu-guided annealing search over QUBO problems.

The package splits into a QUBO core (:mod:`qals.qubo`), target-graph
handling (:mod:`qals.topology`), sampling backends (:mod:`qals.samplers`),
the search itself (:mod:`qals.search`), problem translators
(:mod:`qals.problems`), scikit-learn style wrappers
(:mod:`qals.estimators`), and a benchmark CLI (:mod:`qals.bench`,
:mod:`qals.cli`).
"""

from .qubo import (
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
from .samplers import (
    BridgeSampler,
    ExhaustiveSampler,
    RandomSampler,
    SamplerRequest,
    SampleResult,
    SaSchedule,
    SimulatedAnnealingSampler,
    TransportError,
    random_bits,
)
from .search import (
    PermutationState,
    QalsParams,
    QalsTrace,
    TabuState,
    TraceRecord,
    load_trace,
    map_back,
    perturb_candidate,
    perturb_permutation,
    project_weights,
    run_qals,
    tabu_update,
)
from .topology import (
    EmbeddedProblem,
    Topology,
    embed_naive,
    generate_chimera,
    generate_complete,
    load_topology,
    save_topology,
)
from .estimators import ExhaustiveSolver, QalsSolver, SimulatedAnnealingSolver
from .validation import make_rng

__version__ = "0.1.0"

__all__ = [
    "BridgeSampler",
    "EmbeddedProblem",
    "ExhaustiveSampler",
    "ExhaustiveSolver",
    "IsingWeights",
    "PermutationState",
    "QalsParams",
    "QalsSolver",
    "QalsTrace",
    "QuboProblem",
    "RandomSampler",
    "SaSchedule",
    "SampleResult",
    "SamplerRequest",
    "SimulatedAnnealingSampler",
    "SimulatedAnnealingSolver",
    "TabuState",
    "Topology",
    "TraceRecord",
    "TransportError",
    "as_qubo",
    "brute_force_qubo",
    "embed_naive",
    "evaluate_ising",
    "evaluate_qubo",
    "generate_chimera",
    "generate_complete",
    "load_qubo",
    "load_topology",
    "load_trace",
    "make_rng",
    "map_back",
    "perturb_candidate",
    "perturb_permutation",
    "project_weights",
    "qubo_to_ising",
    "random_bits",
    "run_qals",
    "save_qubo",
    "save_topology",
    "tabu_update",
    "__version__",
]
