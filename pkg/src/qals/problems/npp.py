"""Number partitioning: QUBO translation and classical baselines.

An instance is a list of positive integers to split into two subsets with
minimal sum difference. With c the total sum and x_i = 1 marking subset
membership, the translated objective y = x^T Q x satisfies

    diff^2 = c^2 + 4 y,

so minimizing the QUBO minimizes the squared difference. Set differences are
always recomputed from the partition in exact integer arithmetic; instance
values can be large enough that squared sums lose integer precision in
floats.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, TextIO

import numpy as np

from ..qubo import QuboProblem
from ..validation import check_bits, make_rng


@dataclass(frozen=True)
class NppInstance:
    """A multiset of positive integers to partition."""

    numbers: tuple[int, ...]

    def __post_init__(self):
        if len(self.numbers) == 0:
            raise ValueError("instance needs at least one number")
        norm = tuple(int(v) for v in self.numbers)
        if any(v < 1 for v in norm):
            raise ValueError("all numbers must be >= 1")
        object.__setattr__(self, "numbers", norm)

    @property
    def n(self) -> int:
        return len(self.numbers)

    @property
    def total(self) -> int:
        return sum(self.numbers)


def generate_npp(n: int, value_range: int, rng=None) -> NppInstance:
    """Draw n integers uniformly from [1, value_range]."""
    if n < 1 or value_range < 1:
        raise ValueError("n and value_range must be >= 1")
    rng = make_rng(rng)
    values = rng.integers(1, value_range + 1, size=n)
    return NppInstance(tuple(int(v) for v in values))


def npp_to_qubo(inst: NppInstance) -> QuboProblem:
    """Translate to canonical QUBO form.

    Diagonal entries are s_i (s_i - c); each unordered pair contributes
    2 s_i s_j above the diagonal (the symmetric s_i s_j coefficient folded
    once).
    """
    s = np.asarray(inst.numbers, dtype=np.int64)
    c = np.int64(inst.total)
    coeffs = 2 * np.triu(np.outer(s, s), 1)
    np.fill_diagonal(coeffs, s * (s - c))
    return QuboProblem(coeffs.astype(float))


def npp_diff(inst: NppInstance, x) -> int:
    """Exact set difference |c - 2 * sum(subset 1)| for a partition x."""
    bits = check_bits(x, inst.n)
    picked = sum(v for v, b in zip(inst.numbers, bits) if b)
    return abs(inst.total - 2 * picked)


def greedy_partition(inst: NppInstance) -> np.ndarray:
    """Descending-order greedy: each number joins the currently smaller subset.

    Ties (equal subset sums) go to subset 1. Returns the membership bits of
    subset 1.
    """
    order = sorted(range(inst.n), key=lambda i: (-inst.numbers[i], i))
    bits = np.zeros(inst.n, dtype=np.int8)
    sums = [0, 0]
    for idx in order:
        side = 1 if sums[1] <= sums[0] else 0
        bits[idx] = side
        sums[side] += inst.numbers[idx]
    return bits


def kk_heuristic(inst: NppInstance) -> int:
    """Karmarkar-Karp differencing residual (heuristic, value only).

    Repeatedly replaces the two largest values by their difference; the
    final survivor is the achieved set difference.
    """
    heap = [-v for v in inst.numbers]
    heapq.heapify(heap)
    while len(heap) > 1:
        a = -heapq.heappop(heap)
        b = -heapq.heappop(heap)
        heapq.heappush(heap, -(a - b))
    return -heap[0]


class _Node:
    """A value in the differencing tree; composites remember their operands."""

    __slots__ = ("value", "index", "op", "left", "right")

    def __init__(self, value, index=-1, op="", left=None, right=None):
        self.value = value
        self.index = index
        self.op = op
        self.left = left
        self.right = right


def _collect_signs(roots: list[tuple[_Node, int]], n: int) -> np.ndarray:
    """Resolve each original number's side by propagating subset signs.

    A difference node puts its operands on opposite sides, a sum node on the
    same side. Linear in the number of tree nodes.
    """
    bits = np.zeros(n, dtype=np.int8)
    stack = list(roots)
    while stack:
        node, sign = stack.pop()
        if node.index >= 0:
            bits[node.index] = 1 if sign > 0 else 0
        elif node.op == "diff":
            stack.append((node.left, sign))
            stack.append((node.right, -sign))
        else:
            stack.append((node.left, sign))
            stack.append((node.right, sign))
    return bits


class CkkResult(NamedTuple):
    solution: np.ndarray
    difference: int
    truncated: bool
    nodes_explored: int


def ckk_solve(inst: NppInstance, node_budget: int | None = None) -> CkkResult:
    """Complete Karmarkar-Karp search: exact optimal partition.

    Depth-first over the differencing tree: the left branch replaces the two
    largest values a >= b by a - b, the right branch by a + b. A subtree
    whose largest value dominates the sum of the rest is settled directly;
    with four or fewer values only the left branch is explored (differencing
    is optimal there); the search stops outright once the best difference
    reaches the parity floor (0 for even totals, 1 for odd). With a
    ``node_budget`` the search returns best-so-far and sets ``truncated``
    when the budget runs out.
    """
    n = inst.n
    items = [_Node(v, index=i) for i, v in enumerate(inst.numbers)]
    items.sort(key=lambda node: node.value)
    total = inst.total
    parity_floor = total % 2

    # The DFS visits the plain differencing result as its first leaf, so
    # seeding with it keeps best-so-far defined under any node budget.
    best_bits, best_diff = kk_partition(inst)
    if best_diff <= parity_floor:
        return CkkResult(best_bits, int(best_diff), False, 0)
    nodes_explored = 0
    truncated = False

    def consider(diff: int, roots: list[tuple[_Node, int]]):
        nonlocal best_diff, best_bits
        if diff < best_diff:
            best_diff = diff
            best_bits = _collect_signs(roots, n)

    # Explicit stack: ("expand",), ("insert", node), ("remove", node),
    # ("restore", a, b). Values stay sorted ascending, two largest at the end.
    stack: list[tuple] = [("expand",)]
    running_total = total
    while stack:
        op = stack.pop()
        kind = op[0]
        if kind == "insert":
            _insort(items, op[1])
            running_total += op[1].value
            continue
        if kind == "remove":
            _remove(items, op[1])
            running_total -= op[1].value
            continue
        if kind == "restore":
            items.append(op[2])
            items.append(op[1])
            running_total += op[1].value + op[2].value
            continue

        if node_budget is not None and nodes_explored >= node_budget:
            truncated = True
            break
        nodes_explored += 1

        if len(items) == 1:
            consider(items[0].value, [(items[0], 1)])
            if best_diff <= parity_floor:
                break
            continue
        largest = items[-1]
        rest = running_total - largest.value
        if largest.value >= rest:
            # Everything else belongs opposite the dominant value.
            consider(largest.value - rest, [(largest, 1)] + [(o, -1) for o in items[:-1]])
            if best_diff <= parity_floor:
                break
            continue

        a = items.pop()
        b = items.pop()
        running_total -= a.value + b.value
        diff_node = _Node(a.value - b.value, op="diff", left=a, right=b)
        stack.append(("restore", a, b))
        if len(items) + 2 > 4:
            sum_node = _Node(a.value + b.value, op="sum", left=a, right=b)
            stack.append(("remove", sum_node))
            stack.append(("expand",))
            stack.append(("insert", sum_node))
        stack.append(("remove", diff_node))
        stack.append(("expand",))
        stack.append(("insert", diff_node))

    return CkkResult(best_bits, int(best_diff), truncated, nodes_explored)


def _insort(items: list[_Node], node: _Node) -> None:
    lo, hi = 0, len(items)
    while lo < hi:
        mid = (lo + hi) // 2
        if items[mid].value < node.value:
            lo = mid + 1
        else:
            hi = mid
    items.insert(lo, node)


def _remove(items: list[_Node], node: _Node) -> None:
    lo, hi = 0, len(items)
    while lo < hi:
        mid = (lo + hi) // 2
        if items[mid].value < node.value:
            lo = mid + 1
        else:
            hi = mid
    while items[lo] is not node:
        lo += 1
    items.pop(lo)


def kk_partition(inst: NppInstance) -> tuple[np.ndarray, int]:
    """Karmarkar-Karp differencing with the partition recovered.

    Same residual as :func:`kk_heuristic`, plus the membership bits obtained
    by sign propagation over the differencing tree.
    """
    heap = [(-v, i, _Node(v, index=i)) for i, v in enumerate(inst.numbers)]
    counter = inst.n
    heapq.heapify(heap)
    while len(heap) > 1:
        _, _, a = heapq.heappop(heap)
        _, _, b = heapq.heappop(heap)
        node = _Node(a.value - b.value, op="diff", left=a, right=b)
        heapq.heappush(heap, (-node.value, counter, node))
        counter += 1
    root = heap[0][2]
    return _collect_signs([(root, 1)], inst.n), int(root.value)


def save_npp(inst: NppInstance, path) -> None:
    """Write an instance as one integer per line."""
    with open(path, "w") as fh:
        for v in inst.numbers:
            fh.write(f"{v}\n")


def load_npp(source) -> NppInstance:
    """Read an instance from a path or text stream, one integer per line."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return _parse_npp(fh)
    return _parse_npp(source)


def _parse_npp(fh: TextIO) -> NppInstance:
    numbers = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError:
            raise ValueError(f"line {lineno}: expected an integer, got {line!r}")
        if value < 1:
            raise ValueError(f"line {lineno}: numbers must be positive, got {value}")
        numbers.append(value)
    if not numbers:
        raise ValueError("empty instance file")
    return NppInstance(tuple(numbers))
