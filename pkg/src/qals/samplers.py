"""Sampling backends behind a single request/response contract.

A request carries a sparse QUBO weight map over topology nodes plus a read
count k; every backend returns one lowest-energy assignment among its k
draws, with the energy recomputed locally so transport bugs cannot smuggle
in a wrong value. Energies use the QUBO convention

    E(x) = sum_{(u, v)} weights[(u, v)] * x_u * x_v

with (u, u) keys acting as linear terms.
"""

from __future__ import annotations

import os
import select
import shlex
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from .qubo import MAX_BRUTE_FORCE_VARS, QuboProblem, brute_force_qubo
from .validation import make_rng


class TransportError(RuntimeError):
    """A bridge subprocess died, timed out, or spoke the protocol wrong."""


@dataclass
class SamplerRequest:
    """A sparse weight map plus the number of reads to draw."""

    weights: dict[tuple[int, int], float]
    reads: int = 1

    def __post_init__(self):
        if not self.weights:
            raise ValueError("request carries no weights")
        if self.reads < 1:
            raise ValueError("reads must be >= 1")
        for (u, v), w in self.weights.items():
            if u > v:
                raise ValueError(f"weight key ({u}, {v}) must satisfy u <= v")
            if not np.isfinite(w):
                raise ValueError(f"non-finite weight on ({u}, {v})")

    def nodes(self) -> list[int]:
        """All node ids appearing in the weight map, ascending."""
        seen = set()
        for u, v in self.weights:
            seen.add(u)
            seen.add(v)
        return sorted(seen)


@dataclass
class SampleResult:
    """Best assignment of one request: node -> bit, plus its energy."""

    assignment: dict[int, int]
    energy: float


def qubo_energy(weights: dict[tuple[int, int], float], assignment: dict[int, int]) -> float:
    """Evaluate the request energy convention on a node-keyed assignment."""
    total = 0.0
    for (u, v), w in weights.items():
        total += w * assignment[u] * assignment[v]
    return float(total)


def _to_dense(request: SamplerRequest) -> tuple[list[int], np.ndarray]:
    """Lay the sparse weights out as an upper-triangular matrix over node ranks."""
    nodes = request.nodes()
    rank = {u: i for i, u in enumerate(nodes)}
    u_mat = np.zeros((len(nodes), len(nodes)))
    for (u, v), w in request.weights.items():
        i, j = rank[u], rank[v]
        if i > j:
            i, j = j, i
        u_mat[i, j] += w
    return nodes, u_mat


def _batch_energies(x: np.ndarray, u_mat: np.ndarray) -> np.ndarray:
    return np.einsum("ki,ij,kj->k", x, u_mat, x)


@dataclass(frozen=True)
class SaSchedule:
    """Temperature plan for the simulated-annealing backend.

    By default a geometric ladder from ``start_factor * max |weight|`` down
    to ``t_min`` over ``sweeps`` steps. An explicit non-increasing
    ``temperatures`` tuple overrides the geometric plan.
    """

    sweeps: int = 1000
    start_factor: float = 10.0
    t_min: float = 0.1
    temperatures: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.temperatures is not None:
            temps = tuple(float(t) for t in self.temperatures)
            if not temps:
                raise ValueError("explicit temperature ladder is empty")
            if any(t <= 0 for t in temps):
                raise ValueError("temperatures must be positive")
            if any(a < b for a, b in zip(temps, temps[1:])):
                raise ValueError("temperature ladder must be non-increasing")
            object.__setattr__(self, "temperatures", temps)
            return
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.start_factor <= 0 or self.t_min <= 0:
            raise ValueError("start_factor and t_min must be positive")

    def ladder(self, max_abs_weight: float) -> np.ndarray:
        if self.temperatures is not None:
            return np.asarray(self.temperatures)
        t_start = max(self.start_factor * max_abs_weight, self.t_min)
        if self.sweeps == 1:
            return np.array([t_start])
        return np.geomspace(t_start, self.t_min, self.sweeps)


class ExhaustiveSampler:
    """Enumerates every assignment; k is irrelevant to the result."""

    def __init__(self, cap: int = MAX_BRUTE_FORCE_VARS):
        self.cap = cap

    def sample(self, request: SamplerRequest) -> SampleResult:
        nodes, u_mat = _to_dense(request)
        bits, energy = brute_force_qubo(QuboProblem(u_mat), cap=self.cap)
        assignment = {u: int(b) for u, b in zip(nodes, bits)}
        return SampleResult(assignment=assignment, energy=energy)


class SimulatedAnnealingSampler:
    """Metropolis single-spin-flip annealer over the request's weights.

    The k reads run as independent chains from uniform random starts, one
    batched sweep schedule for all of them; the best final state wins, with
    ties keeping the earliest read. Deterministic for a fixed seed and call
    sequence.
    """

    def __init__(self, schedule: SaSchedule | None = None, seed=None):
        self.schedule = schedule or SaSchedule()
        self._rng = make_rng(seed)

    def sample(self, request: SamplerRequest) -> SampleResult:
        nodes, u_mat = _to_dense(request)
        n = len(nodes)
        k = request.reads
        rng = self._rng
        sym = u_mat + u_mat.T
        np.fill_diagonal(sym, 0.0)
        diag = np.diag(u_mat).copy()
        ladder = self.schedule.ladder(float(np.abs(u_mat).max()))

        x = (rng.random((k, n)) < 0.5).astype(float)
        for temp in ladder:
            for v in range(n):
                local = diag[v] + x @ sym[:, v]
                delta = (1.0 - 2.0 * x[:, v]) * local
                draws = rng.random(k)
                accept = (delta <= 0.0) | (draws < np.exp(np.minimum(-delta / temp, 0.0)))
                x[accept, v] = 1.0 - x[accept, v]
        energies = _batch_energies(x, u_mat)
        best = int(np.argmin(energies))
        assignment = {u: int(b) for u, b in zip(nodes, x[best])}
        return SampleResult(assignment=assignment, energy=float(energies[best]))


class RandomSampler:
    """k uniform random assignments; the first lowest-energy draw wins.

    On an all-zero-weight request every draw ties at zero energy, so the
    returned assignment is the first draw and stays uniformly distributed.
    """

    def __init__(self, seed=None):
        self._rng = make_rng(seed)

    def sample(self, request: SamplerRequest) -> SampleResult:
        nodes, u_mat = _to_dense(request)
        x = (self._rng.random((request.reads, len(nodes))) < 0.5).astype(float)
        energies = _batch_energies(x, u_mat)
        best = int(np.argmin(energies))
        assignment = {u: int(b) for u, b in zip(nodes, x[best])}
        return SampleResult(assignment=assignment, energy=float(energies[best]))


class BridgeSampler:
    """Forwards requests to a subprocess over a line-oriented pipe protocol.

    Per request the parent writes one ``row``, ``col``, ``value`` line per
    weight entry followed by a ``#`` terminator, then reads back one 0/1
    line per distinct node, ordered by ascending node id. The child stays
    alive across requests; closing the sampler closes its stdin. Energies
    are recomputed locally from the request weights.
    """

    def __init__(self, command: str | list[str], timeout: float = 60.0):
        if isinstance(command, str):
            command = shlex.split(command)
        if not command:
            raise ValueError("empty bridge command")
        self.command = list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._buffer = b""

    def _ensure_process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    bufsize=0,
                )
            except OSError as exc:
                raise TransportError(f"cannot start bridge {self.command[0]!r}: {exc}") from exc
            self._buffer = b""
        return self._proc

    def sample(self, request: SamplerRequest) -> SampleResult:
        proc = self._ensure_process()
        nodes = request.nodes()
        payload_lines = []
        for (u, v), w in request.weights.items():
            payload_lines.append(f"{u}\n{v}\n{float(w)!r}\n")
        payload_lines.append("#\n")
        try:
            proc.stdin.write("".join(payload_lines).encode("ascii"))
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(
                f"bridge process rejected the request (exit code {proc.poll()})"
            ) from exc

        lines = self._read_lines(proc, len(nodes))
        assignment = {}
        for u, line in zip(nodes, lines):
            if line not in (b"0", b"1"):
                raise TransportError(f"malformed bridge response line {line!r}")
            assignment[u] = int(line)
        return SampleResult(assignment=assignment, energy=qubo_energy(request.weights, assignment))

    def _read_lines(self, proc: subprocess.Popen, count: int) -> list[bytes]:
        deadline = time.monotonic() + self.timeout
        fd = proc.stdout.fileno()
        lines: list[bytes] = []
        while len(lines) < count:
            while b"\n" in self._buffer and len(lines) < count:
                line, self._buffer = self._buffer.split(b"\n", 1)
                lines.append(line.strip())
            if len(lines) >= count:
                break
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TransportError(
                    f"bridge timed out after {self.timeout}s with {len(lines)}/{count} lines"
                )
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                raise TransportError(
                    f"bridge closed its stream after {len(lines)}/{count} lines "
                    f"(exit code {proc.poll()})"
                )
            self._buffer += chunk
        return lines

    def close(self) -> None:
        if self._proc is None:
            return
        proc, self._proc = self._proc, None
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    def __enter__(self) -> "BridgeSampler":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def random_bits(backend, n: int, k: int) -> list[int]:
    """Draw floor(n / k) k-bit integers from an annealing backend.

    Submits an all-zero-weight problem on n nodes, so any backend that
    samples degenerate ground states uniformly acts as an entropy source.
    Bits are consumed in ascending node order, most significant first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least k={k} nodes, got {n}")
    weights = {(i, i): 0.0 for i in range(n)}
    result = backend.sample(SamplerRequest(weights=weights, reads=1))
    bits = [result.assignment[i] for i in range(n)]
    values = []
    for g in range(n // k):
        value = 0
        for b in bits[g * k : (g + 1) * k]:
            value = (value << 1) | b
        values.append(value)
    return values
