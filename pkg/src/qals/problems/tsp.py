"""Traveling salesman: QUBO encoding, refinement, and a brute-force baseline.

A tour over n cities is encoded in n^2 binary variables laid out
position-major: variable t * n + i is 1 when cycle position t holds city i.
The translated objective stacks a travel-cost term (coupling consecutive
positions, wrapping at the end) on top of one-hot penalties for every
position row and every city column. Missing edges contribute the penalty
weight instead of a distance, which prices tours through them out of the
optimum whenever a real tour exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np

from ..qubo import QuboProblem
from ..validation import check_bits, make_rng


@dataclass(frozen=True)
class TspInstance:
    """A distance matrix; ``inf`` marks an absent edge."""

    distances: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got {d.shape}")
        if d.shape[0] < 2:
            raise ValueError("need at least two cities")
        if np.any(np.diag(d) != 0.0):
            raise ValueError("diagonal must be zero")
        if np.any(np.isnan(d)) or np.any(d < 0):
            raise ValueError("distances must be non-negative (inf for missing edges)")
        object.__setattr__(self, "distances", d)

    @property
    def n(self) -> int:
        return self.distances.shape[0]


@dataclass(frozen=True)
class Tour:
    """A cyclic visiting order: order[t] is the city at position t."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        n = len(order)
        if n == 0 or sorted(order) != list(range(n)):
            raise ValueError(f"order must be a permutation of 0..n-1, got {order}")
        object.__setattr__(self, "order", order)

    @property
    def n(self) -> int:
        return len(self.order)


def generate_tsp(n: int, max_distance: float = 10.0, rng=None) -> TspInstance:
    """A random symmetric instance with distances uniform in [0, max_distance]."""
    if n < 2:
        raise ValueError("need at least two cities")
    if max_distance <= 0:
        raise ValueError("max_distance must be positive")
    rng = make_rng(rng)
    upper = np.triu(rng.uniform(0.0, max_distance, size=(n, n)), 1)
    return TspInstance(upper + upper.T)


def penalty_scale(inst: TspInstance) -> float:
    """Constraint weight: n times the largest finite distance."""
    finite = inst.distances[np.isfinite(inst.distances)]
    off_diag_max = float(finite.max())
    if off_diag_max <= 0.0:
        raise ValueError("penalty scale undefined: no positive finite distance")
    return inst.n * off_diag_max


def tsp_to_qubo(inst: TspInstance) -> QuboProblem:
    """Encode an instance as an n^2-variable QUBO.

    Travel cost couples (position t, city i) to (position (t+1) mod n,
    city j) with weight distance(i, j), or the penalty weight when the edge
    is missing. Each one-hot constraint puts -A on its variables' diagonal
    and 2A on each ordered conflicting pair, so every variable carries -2A
    and a valid assignment's energy is the tour length minus 2 A n.
    """
    n = inst.n
    a = penalty_scale(inst)
    w = inst.distances
    f = np.zeros((n * n, n * n))

    for t in range(n):
        row_block = t * n
        col_block = ((t + 1) % n) * n
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                d = w[i, j]
                f[row_block + i, col_block + j] += d if math.isfinite(d) else a

    for t in range(n):
        block = t * n
        for i in range(n):
            r = block + i
            f[r, r] -= a
            for j in range(n):
                if j != i:
                    f[r, block + j] += 2.0 * a

    for i in range(n):
        for t1 in range(n):
            r = t1 * n + i
            f[r, r] -= a
            for t2 in range(n):
                if t2 != t1:
                    f[r, t2 * n + i] += 2.0 * a

    return QuboProblem.from_dense(f)


def tsp_cost(inst: TspInstance, tour: Tour) -> float:
    """Cyclic tour length; raises if the route uses a missing edge."""
    if tour.n != inst.n:
        raise ValueError(f"tour over {tour.n} cities, instance has {inst.n}")
    total = 0.0
    for t in range(tour.n):
        d = inst.distances[tour.order[t], tour.order[(t + 1) % tour.n]]
        if not math.isfinite(d):
            raise ValueError(
                f"tour uses missing edge ({tour.order[t]}, {tour.order[(t + 1) % tour.n]})"
            )
        total += d
    return float(total)


def tour_bits(tour: Tour) -> np.ndarray:
    """The n^2 position-major encoding of a tour."""
    n = tour.n
    bits = np.zeros(n * n, dtype=np.int8)
    for t, city in enumerate(tour.order):
        bits[t * n + city] = 1
    return bits


def tsp_brute_force(inst: TspInstance, cap: int = 12) -> tuple[Tour, float]:
    """Exact optimum by exhausting tours anchored at city 0.

    Candidates are visited in lexicographic order of the remaining cities
    with partial-cost pruning (weights are non-negative, so a prefix already
    at the incumbent cost cannot improve); the first strict improvement
    wins, which makes the returned tour the lexicographically smallest
    optimum. Raises when no complete tour exists.
    """
    n = inst.n
    if n > cap:
        raise ValueError(f"brute force capped at {cap} cities, got {n}")
    w = inst.distances
    best_cost = math.inf
    best_order: tuple[int, ...] | None = None
    prefix = [0]
    used = [False] * n
    used[0] = True

    def descend(cost_so_far: float):
        nonlocal best_cost, best_order
        if cost_so_far >= best_cost:
            return
        if len(prefix) == n:
            closing = w[prefix[-1], 0]
            total = cost_so_far + closing
            if math.isfinite(closing) and total < best_cost:
                best_cost = total
                best_order = tuple(prefix)
            return
        last = prefix[-1]
        for city in range(1, n):
            if used[city]:
                continue
            hop = w[last, city]
            if not math.isfinite(hop):
                continue
            used[city] = True
            prefix.append(city)
            descend(cost_so_far + hop)
            prefix.pop()
            used[city] = False

    descend(0.0)
    if best_order is None:
        raise ValueError("instance admits no complete tour")
    return Tour(best_order), float(best_cost)


def refine_tsp_solution(x, rng=None) -> Tour:
    """Repair an arbitrary n^2 bit string into a valid tour.

    Reading the bits position-major, each position's candidate set is the
    cities its row activates. Rows with a single candidate are fixed first;
    rows with several take a random not-yet-used candidate; duplicated
    cities keep one randomly chosen position; remaining positions draw from
    the unused cities. A bit string that already encodes a valid tour is
    returned unchanged, so the repair is idempotent.

    Randomness order for a given generator: one draw per multi-candidate row
    (ascending position) whose unused-candidate set is non-empty, one
    shuffle per duplicated city (ascending city id), one draw per unfilled
    position (ascending).
    """
    bits = check_bits(x)
    n = math.isqrt(bits.size)
    if n * n != bits.size:
        raise ValueError(f"bit string length {bits.size} is not a perfect square")
    rng = make_rng(rng)
    rows = bits.reshape(n, n)
    candidates = [np.flatnonzero(rows[t]).tolist() for t in range(n)]

    order = [-1] * n
    used: set[int] = set()
    for t in range(n):
        if len(candidates[t]) == 1:
            order[t] = candidates[t][0]
            used.add(order[t])
    for t in range(n):
        if len(candidates[t]) > 1:
            free = [c for c in candidates[t] if c not in used]
            if free:
                pick = free[int(rng.integers(len(free)))]
                order[t] = pick
                used.add(pick)

    for city in range(n):
        positions = [t for t in range(n) if order[t] == city]
        if len(positions) > 1:
            rng.shuffle(positions)
            for t in positions[1:]:
                order[t] = -1

    unused = sorted(set(range(n)) - {c for c in order if c != -1})
    for t in range(n):
        if order[t] == -1:
            pick = unused.pop(int(rng.integers(len(unused))))
            order[t] = pick
    return Tour(tuple(order))


def save_tsp(inst: TspInstance, path) -> None:
    """Write an instance: first line n, then n rows of distances (inf allowed)."""
    with open(path, "w") as fh:
        fh.write(f"{inst.n}\n")
        for row in inst.distances:
            fh.write(" ".join("inf" if not math.isfinite(v) else repr(float(v)) for v in row))
            fh.write("\n")


def load_tsp(source) -> TspInstance:
    """Read an instance from a path or text stream in the ``save_tsp`` format."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return _parse_tsp(fh)
    return _parse_tsp(source)


def _parse_tsp(fh: TextIO) -> TspInstance:
    n = None
    rows: list[list[float]] = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ValueError(f"line {lineno}: expected city count, got {line!r}")
            if n < 2:
                raise ValueError(f"line {lineno}: need at least two cities")
            continue
        parts = line.split()
        if len(parts) != n:
            raise ValueError(f"line {lineno}: expected {n} distances, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed distance row {line!r}")
        if len(rows) > n:
            raise ValueError(f"line {lineno}: more rows than declared")
    if n is None:
        raise ValueError("empty instance file")
    if len(rows) != n:
        raise ValueError(f"expected {n} distance rows, got {len(rows)}")
    try:
        return TspInstance(np.array(rows))
    except ValueError as exc:
        raise ValueError(f"invalid instance: {exc}") from exc


def format_tour(tour: Tour) -> str:
    return " ".join(str(c) for c in tour.order)


def parse_tour(text: str) -> Tour:
    try:
        return Tour(tuple(int(p) for p in text.split()))
    except ValueError as exc:
        raise ValueError(f"malformed tour {text!r}: {exc}") from exc
