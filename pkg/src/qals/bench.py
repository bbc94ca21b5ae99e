"""Benchmark harness: run configs, solver dispatch, reports, verification.

A run config is a flat ``key = value`` file (a TOML subset: one scalar per
line, ``#`` comments). Solving executes the configured solver
``repetitions`` times with per-run seeds ``seed + run_index``, records one
JSON line per run, and aggregates mean / sample standard deviation per
group. Every record stores the solution itself so reported objectives can
be re-verified from the instance file alone.

Number-partitioning objectives are exact integer set differences
recomputed from the partition bits; tour objectives are the cost of the
refined tour. Wall time covers the solver call only, measured with a
monotonic clock.
"""

from __future__ import annotations

import json
import math
import shlex
import statistics
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .problems import npp as npp_mod
from .problems import tsp as tsp_mod
from .qubo import QuboProblem, brute_force_qubo, evaluate_qubo
from .samplers import (
    BridgeSampler,
    ExhaustiveSampler,
    RandomSampler,
    SamplerRequest,
    SaSchedule,
    SimulatedAnnealingSampler,
)
from .search import QalsParams, run_qals
from .topology import Topology, generate_chimera, generate_complete, load_topology
from .validation import make_rng

NPP_SOLVERS = ("qals", "sa", "exhaustive", "random", "greedy", "kk", "ckk", "race")
TSP_SOLVERS = ("qals", "sa", "exhaustive", "random", "brute", "race")

RECORD_FIELDS = (
    "solver",
    "kind",
    "instance",
    "n",
    "run_index",
    "seed",
    "objective",
    "time_s",
    "iterations",
    "valid",
    "solution",
    "error",
)


class ConfigError(ValueError):
    """A malformed or inconsistent run configuration."""


def parse_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` file into a string mapping.

    Lines are ``key = value`` with ``#`` starting a comment; values may be
    double-quoted. Duplicate keys are rejected.
    """
    mapping: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if len(value) >= 2 and value[0] == '"' and value[-1] == '"':
                value = value[1:-1]
            if not key:
                raise ConfigError(f"line {lineno}: empty key")
            if key in mapping:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            mapping[key] = value
    return mapping


@dataclass
class RunConfig:
    """Everything one ``solve`` invocation needs.

    Seeds are explicit: there is no wall-clock fallback, and a missing
    ``seed`` is a config error.
    """

    kind: str
    instance: str
    solver: str
    seed: int
    repetitions: int = 1
    output: str | None = None
    csv: str | None = None
    trace: str | None = None
    backend: str = "sa"
    reads: int = 10
    sweeps: int = 1000
    topology: str = "complete"
    i_max: int = 500
    p_delta: float = 0.1
    eta: float = 0.01
    q: float = 0.2
    p_update_every: int = 10
    lambda0: float = 1.5
    n_max: int = 100
    d_min: int = 70
    energy_scale: float = 1.0
    tabu_spin_form: bool = False
    node_budget: int | None = None
    tabu_iterations: int = 1000
    tabu_tenure: int = 10

    def __post_init__(self):
        if self.kind not in ("npp", "tsp"):
            raise ConfigError(f"kind must be 'npp' or 'tsp', got {self.kind!r}")
        allowed = NPP_SOLVERS if self.kind == "npp" else TSP_SOLVERS
        if self.solver not in allowed:
            raise ConfigError(
                f"solver {self.solver!r} not available for kind {self.kind!r}; "
                f"expected one of {allowed}"
            )
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.reads < 1:
            raise ConfigError("reads must be >= 1")
        if not Path(self.instance).is_file():
            raise ConfigError(f"instance file not found: {self.instance}")
        if self.topology not in ("complete",) and not self.topology.startswith("chimera:"):
            if not Path(self.topology).is_file():
                raise ConfigError(f"topology file not found: {self.topology}")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str], base_dir=None) -> "RunConfig":
        """Build a config from parsed key/value strings.

        Relative paths are resolved against ``base_dir`` (normally the
        config file's directory) so configs stay relocatable.
        """
        field_types = {f.name: f.type for f in fields(cls)}
        unknown = set(mapping) - set(field_types)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for required in ("kind", "instance", "solver", "seed"):
            if required not in mapping:
                raise ConfigError(f"missing required key {required!r}")
        kwargs: dict = {}
        for key, raw in mapping.items():
            kwargs[key] = _coerce(key, raw, field_types[key])
        if base_dir is not None:
            for key in ("instance", "output", "csv", "trace"):
                if kwargs.get(key) is not None:
                    kwargs[key] = str(Path(base_dir) / kwargs[key])
            topo = kwargs.get("topology")
            if topo is not None and topo != "complete" and not topo.startswith("chimera:"):
                kwargs["topology"] = str(Path(base_dir) / topo)
        return cls(**kwargs)


def _coerce(key: str, raw: str, annotation: str):
    """Parse a raw config value according to the field's annotation."""
    if annotation in ("int", "int | None"):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: expected integer, got {raw!r}")
    if annotation == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"key {key!r}: expected number, got {raw!r}")
    if annotation == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key {key!r}: expected true/false, got {raw!r}")
    return raw


def load_config(path) -> RunConfig:
    """Parse and validate a config file."""
    return RunConfig.from_mapping(parse_config_file(path), base_dir=Path(path).parent)


@dataclass
class RunRecord:
    """One solver execution, JSON-serializable via ``to_json``."""

    solver: str
    kind: str
    instance: str
    n: int
    run_index: int
    seed: int
    objective: float | int | None
    time_s: float
    iterations: int
    valid: bool
    solution: str | None
    error: str | None = None

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in RECORD_FIELDS}

    @classmethod
    def from_json(cls, data: dict) -> "RunRecord":
        missing = [name for name in RECORD_FIELDS if name not in data]
        if missing:
            raise ValueError(f"record missing fields {missing}")
        return cls(**{name: data[name] for name in RECORD_FIELDS})


@dataclass
class RunReport:
    """Per-run records plus aggregates recomputable from them."""

    records: list[RunRecord] = field(default_factory=list)

    def aggregates(self) -> list[dict]:
        """Group records by (kind, n, solver, instance) and summarize.

        ``mean`` / ``std`` cover valid runs only; ``std`` is the sample
        standard deviation and 0.0 for a single run.
        """
        groups: dict[tuple, list[RunRecord]] = {}
        for record in self.records:
            groups.setdefault((record.kind, record.n, record.solver, record.instance), []).append(
                record
            )
        rows = []
        for (kind, n, solver, instance), members in sorted(groups.items()):
            objectives = [r.objective for r in members if r.valid and r.objective is not None]
            rows.append(
                {
                    "kind": kind,
                    "n": n,
                    "solver": solver,
                    "instance": instance,
                    "runs": len(members),
                    "failures": sum(1 for r in members if not r.valid),
                    "mean": statistics.mean(objectives) if objectives else None,
                    "std": statistics.stdev(objectives) if len(objectives) > 1 else 0.0,
                    "mean_time_s": statistics.mean(r.time_s for r in members),
                }
            )
        return rows

    def save_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for record in self.records:
                fh.write(json.dumps(record.to_json()))
                fh.write("\n")

    def save_csv(self, path) -> None:
        _write_csv(self.aggregates(), path)


def load_records(path) -> list[RunRecord]:
    """Read a JSON-lines record file, validating the schema per line."""
    records = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}, line {lineno}: invalid JSON ({exc})") from exc
            try:
                records.append(RunRecord.from_json(data))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}, line {lineno}: {exc}") from exc
    return records


_CSV_COLUMNS = ("kind", "n", "solver", "instance", "runs", "failures", "mean", "std", "mean_time_s")


def _write_csv(rows: list[dict], path) -> None:
    import csv as csv_mod

    with open(path, "w", newline="") as fh:
        writer = csv_mod.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in _CSV_COLUMNS})


def format_table(rows: list[dict]) -> str:
    """Render aggregate rows as a fixed-width text table."""
    headers = _CSV_COLUMNS
    cells = [
        [_format_cell(row[h]) for h in headers]
        for row in rows
    ]
    widths = [max(len(h), *(len(line[i]) for line in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for line in cells:
        out.append("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip())
    return "\n".join(out)


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def tabu_search(q: QuboProblem, iterations: int, tenure: int, rng) -> tuple[np.ndarray, float]:
    """Classical single-flip tabu search over a QUBO.

    Starts from a uniform random assignment; each step flips the best
    non-tabu variable (aspiration: a tabu flip that beats the incumbent is
    allowed) and locks it for ``tenure`` steps. Returns the best assignment
    seen and its objective.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if tenure < 1:
        raise ValueError("tenure must be >= 1")
    rng = make_rng(rng)
    n = q.n
    sym = q.coeffs + q.coeffs.T
    np.fill_diagonal(sym, 0.0)
    diag = np.diag(q.coeffs).copy()
    x = rng.integers(0, 2, size=n).astype(np.int8)
    energy = evaluate_qubo(q, x)
    best = x.copy()
    best_energy = energy
    tabu_until = np.zeros(n, dtype=np.int64)
    for step in range(iterations):
        deltas = (1 - 2 * x) * (diag + sym @ x)
        allowed = tabu_until <= step
        aspiring = energy + deltas < best_energy
        mask = allowed | aspiring
        if not mask.any():
            mask = np.ones(n, dtype=bool)
        candidate_deltas = np.where(mask, deltas, np.inf)
        i = int(np.argmin(candidate_deltas))
        x[i] ^= 1
        energy += float(deltas[i])
        tabu_until[i] = step + 1 + tenure
        if energy < best_energy:
            best_energy = energy
            best = x.copy()
    return best, float(best_energy)


def _qubo_weights(q: QuboProblem) -> dict[tuple[int, int], float]:
    """Canonical coefficients as a sampler weight dict (zero diagonals kept)."""
    weights: dict[tuple[int, int], float] = {}
    for i in range(q.n):
        weights[(i, i)] = float(q.coeffs[i, i])
        for j in range(i + 1, q.n):
            if q.coeffs[i, j] != 0.0:
                weights[(i, j)] = float(q.coeffs[i, j])
    return weights


def _sample_qubo(q: QuboProblem, sampler, reads: int) -> np.ndarray:
    result = sampler.sample(SamplerRequest(weights=_qubo_weights(q), reads=reads))
    return np.array([result.assignment[i] for i in range(q.n)], dtype=np.int8)


def _resolve_topology(spec: str, needed: int) -> Topology:
    if spec == "complete":
        return generate_complete(needed)
    if spec.startswith("chimera:"):
        try:
            m = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"malformed topology spec {spec!r}")
        return generate_chimera(m)
    return load_topology(spec)


def _make_backend(config: RunConfig, run_seed: int, shared_bridge):
    """Sampler for one run. Named backends get stream ``run_seed + 1``."""
    name = config.backend
    if name == "exhaustive":
        return ExhaustiveSampler()
    if name == "sa":
        return SimulatedAnnealingSampler(
            schedule=SaSchedule(sweeps=config.sweeps), seed=run_seed + 1
        )
    if name == "random":
        return RandomSampler(seed=run_seed + 1)
    if name.startswith("bridge:"):
        return shared_bridge
    raise ConfigError(
        f"unknown backend {name!r}; expected exhaustive, sa, random, or bridge:<command>"
    )


def _trace_path(base: str, run_index: int, repetitions: int) -> str:
    if repetitions == 1:
        return base
    p = Path(base)
    return str(p.with_name(f"{p.stem}.run{run_index}{p.suffix}"))


@dataclass
class _Outcome:
    objective: float | int | None
    solution: str | None
    iterations: int
    valid: bool
    error: str | None = None


def _solve_npp(config: RunConfig, inst, q, topology, run_seed, run_index, bridge) -> _Outcome:
    solver = config.solver
    if solver == "greedy":
        bits = npp_mod.greedy_partition(inst)
        return _npp_outcome(inst, bits, iterations=1)
    if solver == "kk":
        bits, _ = npp_mod.kk_partition(inst)
        return _npp_outcome(inst, bits, iterations=1)
    if solver == "ckk":
        result = npp_mod.ckk_solve(inst, node_budget=config.node_budget)
        return _npp_outcome(inst, result.solution, iterations=result.nodes_explored)
    if solver == "exhaustive":
        bits, _ = brute_force_qubo(q)
        return _npp_outcome(inst, bits, iterations=1)
    if solver in ("sa", "random"):
        sampler = (
            SimulatedAnnealingSampler(schedule=SaSchedule(sweeps=config.sweeps), seed=run_seed)
            if solver == "sa"
            else RandomSampler(seed=run_seed)
        )
        bits = _sample_qubo(q, sampler, config.reads)
        return _npp_outcome(inst, bits, iterations=config.reads)
    if solver == "race":
        bits = _race(q, config, run_seed)
        return _npp_outcome(inst, bits, iterations=config.tabu_iterations)
    if solver == "qals":
        bits, trace = _run_qals_once(config, q, topology, run_seed, run_index, bridge)
        return _npp_outcome(inst, bits, iterations=len(trace))
    raise ConfigError(f"unhandled solver {solver!r}")


def _npp_outcome(inst, bits, iterations: int) -> _Outcome:
    difference = npp_mod.npp_diff(inst, bits)
    solution = "".join(str(int(b)) for b in np.asarray(bits, dtype=np.int8))
    return _Outcome(objective=difference, solution=solution, iterations=iterations, valid=True)


def _solve_tsp(config: RunConfig, inst, q, topology, run_seed, run_index, bridge) -> _Outcome:
    solver = config.solver
    if solver == "brute":
        tour, cost = tsp_mod.tsp_brute_force(inst)
        return _Outcome(
            objective=cost,
            solution=tsp_mod.format_tour(tour),
            iterations=1,
            valid=True,
        )
    if solver == "exhaustive":
        bits, _ = brute_force_qubo(q)
        iterations = 1
    elif solver in ("sa", "random"):
        sampler = (
            SimulatedAnnealingSampler(schedule=SaSchedule(sweeps=config.sweeps), seed=run_seed)
            if solver == "sa"
            else RandomSampler(seed=run_seed)
        )
        bits = _sample_qubo(q, sampler, config.reads)
        iterations = config.reads
    elif solver == "race":
        bits = _race(q, config, run_seed)
        iterations = config.tabu_iterations
    elif solver == "qals":
        bits, trace = _run_qals_once(config, q, topology, run_seed, run_index, bridge)
        iterations = len(trace)
    else:
        raise ConfigError(f"unhandled solver {solver!r}")
    tour = tsp_mod.refine_tsp_solution(bits, rng=run_seed)
    try:
        cost = tsp_mod.tsp_cost(inst, tour)
    except ValueError as exc:
        return _Outcome(
            objective=None,
            solution=tsp_mod.format_tour(tour),
            iterations=iterations,
            valid=False,
            error=str(exc),
        )
    return _Outcome(
        objective=cost, solution=tsp_mod.format_tour(tour), iterations=iterations, valid=True
    )


def _race(q: QuboProblem, config: RunConfig, run_seed: int) -> np.ndarray:
    """Best of classical tabu search and simulated annealing.

    A stand-in comparison point, not equivalent to any vendor hybrid
    solver; the two legs run sequentially with independent seeded streams,
    which yields the same result a parallel race would.
    """
    tabu_bits, tabu_energy = tabu_search(
        q, config.tabu_iterations, config.tabu_tenure, rng=run_seed
    )
    sampler = SimulatedAnnealingSampler(
        schedule=SaSchedule(sweeps=config.sweeps), seed=run_seed + 1
    )
    sa_bits = _sample_qubo(q, sampler, config.reads)
    sa_energy = evaluate_qubo(q, sa_bits)
    return tabu_bits if tabu_energy <= sa_energy else sa_bits


def _run_qals_once(config, q, topology, run_seed, run_index, bridge):
    params = QalsParams(
        i_max=config.i_max,
        p_delta=config.p_delta,
        eta=config.eta,
        q=config.q,
        p_update_every=config.p_update_every,
        lambda0=config.lambda0,
        reads=config.reads,
        n_max=config.n_max,
        d_min=config.d_min,
        energy_scale=config.energy_scale,
        tabu_spin_form=config.tabu_spin_form,
    )
    backend = _make_backend(config, run_seed, bridge)
    bits, _, trace = run_qals(q, topology, params, backend, rng=run_seed)
    if config.trace is not None:
        trace.to_jsonl(_trace_path(config.trace, run_index, config.repetitions))
    return bits, trace


def cmd_solve(config: RunConfig) -> RunReport:
    """Execute a run config and return its report.

    Per-run failures (solver or transport errors, invalid tours) are
    recorded with ``valid = false`` and the report is produced regardless.
    """
    if config.kind == "npp":
        inst = npp_mod.load_npp(config.instance)
        q = npp_mod.npp_to_qubo(inst) if config.solver not in ("greedy", "kk", "ckk") else None
        solve_once = _solve_npp
    else:
        inst = tsp_mod.load_tsp(config.instance)
        q = tsp_mod.tsp_to_qubo(inst) if config.solver != "brute" else None
        solve_once = _solve_tsp
    topology = _resolve_topology(config.topology, q.n) if (
        config.solver == "qals" and q is not None
    ) else None

    bridge = None
    if config.solver == "qals" and config.backend.startswith("bridge:"):
        command = shlex.split(config.backend.split(":", 1)[1])
        if not command:
            raise ConfigError("empty bridge command")
        bridge = BridgeSampler(command)

    report = RunReport()
    try:
        for run_index in range(config.repetitions):
            run_seed = config.seed + run_index
            start = time.perf_counter()
            try:
                outcome = solve_once(config, inst, q, topology, run_seed, run_index, bridge)
            except (ValueError, RuntimeError, OSError) as exc:
                outcome = _Outcome(
                    objective=None, solution=None, iterations=0, valid=False, error=str(exc)
                )
            elapsed = time.perf_counter() - start
            report.records.append(
                RunRecord(
                    solver=config.solver,
                    kind=config.kind,
                    instance=config.instance,
                    n=inst.n,
                    run_index=run_index,
                    seed=run_seed,
                    objective=outcome.objective,
                    time_s=elapsed,
                    iterations=outcome.iterations,
                    valid=outcome.valid,
                    solution=outcome.solution,
                    error=outcome.error,
                )
            )
    finally:
        if bridge is not None:
            bridge.close()

    if config.output is not None:
        report.save_jsonl(config.output)
    if config.csv is not None:
        report.save_csv(config.csv)
    return report


def cmd_gen(kind: str, size: int, value_range: float, seed: int, out) -> None:
    """Generate a deterministic instance file."""
    if kind == "npp":
        inst = npp_mod.generate_npp(size, int(value_range), rng=seed)
        npp_mod.save_npp(inst, out)
    elif kind == "tsp":
        inst = tsp_mod.generate_tsp(size, float(value_range), rng=seed)
        tsp_mod.save_tsp(inst, out)
    else:
        raise ConfigError(f"kind must be 'npp' or 'tsp', got {kind!r}")


def cmd_report(paths, csv_out=None) -> str:
    """Merge record files into one comparison table.

    Aggregates are recomputed from the raw records, so merging a single
    report reproduces its own aggregates.
    """
    if not paths:
        raise ConfigError("need at least one record file")
    merged = RunReport()
    for path in paths:
        merged.records.extend(load_records(path))
    rows = merged.aggregates()
    if csv_out is not None:
        _write_csv(rows, csv_out)
    return format_table(rows)


def cmd_verify(paths) -> tuple[int, list[str]]:
    """Re-check every valid record's objective from its stored solution.

    Returns ``(checked, problems)``: how many rows were re-checked and a
    list of human-readable mismatches (empty means all rows check out).
    Number-partitioning differences must match exactly; tour costs to
    1e-9. Invalid rows are skipped (they claim nothing).
    """
    checked = 0
    problems: list[str] = []
    instances: dict[tuple[str, str], object] = {}
    for path in paths:
        for idx, record in enumerate(load_records(path)):
            where = f"{path}, record {idx}"
            if not record.valid:
                continue
            checked += 1
            if record.solution is None or record.objective is None:
                problems.append(f"{where}: valid record lacks solution or objective")
                continue
            try:
                inst = instances.setdefault(
                    (record.kind, record.instance), _load_instance(record.kind, record.instance)
                )
            except (OSError, ValueError) as exc:
                problems.append(f"{where}: cannot load instance ({exc})")
                continue
            try:
                recomputed = _recompute(record, inst)
            except ValueError as exc:
                problems.append(f"{where}: solution invalid ({exc})")
                continue
            if record.kind == "npp":
                if int(record.objective) != recomputed:
                    problems.append(
                        f"{where}: stored difference {record.objective} != "
                        f"recomputed {recomputed}"
                    )
            elif not math.isclose(record.objective, recomputed, rel_tol=0.0, abs_tol=1e-9):
                problems.append(
                    f"{where}: stored cost {record.objective} != recomputed {recomputed}"
                )
    return checked, problems


def _load_instance(kind: str, path: str):
    return npp_mod.load_npp(path) if kind == "npp" else tsp_mod.load_tsp(path)


def _recompute(record: RunRecord, inst):
    if record.kind == "npp":
        bits = [int(c) for c in record.solution]
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"malformed partition bits {record.solution!r}")
        return npp_mod.npp_diff(inst, bits)
    return tsp_mod.tsp_cost(inst, tsp_mod.parse_tour(record.solution))
