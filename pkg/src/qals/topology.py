"""Hardware-style connectivity graphs and the naive QUBO embedding.

A topology is an undirected graph over ordered integer node ids. Node ids may
have holes (disabled hardware sites), so positions are always resolved through
the node list rather than assumed contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .qubo import QuboProblem


@dataclass
class Topology:
    """An immutable undirected graph with integer node ids.

    Nodes are stored ascending; edges are stored as (u, v) with u < v,
    sorted. Self-loops, duplicate edges, and edges with unknown endpoints
    are rejected.
    """

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    _node_set: frozenset[int] = field(init=False, repr=False)

    def __post_init__(self):
        nodes = tuple(sorted(int(u) for u in self.nodes))
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node ids")
        node_set = frozenset(nodes)
        seen = set()
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if u > v:
                u, v = v, u
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u}, {v}) references unknown node")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            norm.append((u, v))
        self.nodes = nodes
        self.edges = tuple(sorted(norm))
        self._node_set = node_set

    @property
    def n(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: int) -> bool:
        return node in self._node_set


@dataclass
class EmbeddedProblem:
    """A QUBO projected onto a topology.

    ``weights`` maps (u, u) node keys and (u, v) edge keys (u < v) to real
    coefficients; ``node_index`` maps each used topology node to the QUBO
    variable it carries.
    """

    weights: dict[tuple[int, int], float]
    node_index: dict[int, int]


def generate_complete(n: int) -> Topology:
    """Complete graph on nodes 0..n-1."""
    if n < 1:
        raise ValueError("need at least one node")
    nodes = range(n)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Topology(tuple(nodes), tuple(edges))


def generate_chimera(m: int) -> Topology:
    """Chimera graph C_m: an m x m grid of complete bipartite K_{4,4} cells.

    Each cell holds 8 nodes (4 per shore). One shore couples to the cell
    below, the other to the cell on the right, giving 8 m^2 nodes and
    16 m^2 + 8 m (m - 1) edges.
    """
    if m < 1:
        raise ValueError("need at least one cell")
    edges = []
    for r in range(m):
        for c in range(m):
            base = 8 * (r * m + c)
            for k in range(4):
                for kk in range(4, 8):
                    edges.append((base + k, base + kk))
            if r + 1 < m:
                below = base + 8 * m
                for k in range(4):
                    edges.append((base + k, below + k))
            if c + 1 < m:
                right = base + 8
                for kk in range(4, 8):
                    edges.append((base + kk, right + kk))
    return Topology(tuple(range(8 * m * m)), tuple(edges))


def embed_naive(q: QuboProblem, t: Topology) -> EmbeddedProblem:
    """Identity embedding: variable i lands on the i-th active node.

    The first q.n nodes in ascending order carry the variables. Every
    selected node gets an explicit diagonal entry (zero or not, so the
    variable set is recoverable from the weights alone); coefficients whose
    variable pair has no topology edge are dropped.
    """
    if q.n > t.n:
        raise ValueError(f"need {q.n} nodes, topology has {t.n}")
    selected = t.nodes[: q.n]
    node_index = {u: i for i, u in enumerate(selected)}
    weights: dict[tuple[int, int], float] = {}
    for u in selected:
        i = node_index[u]
        weights[(u, u)] = float(q.coeffs[i, i])
    for u, v in t.edges:
        if u in node_index and v in node_index:
            # ranks preserve node order, so node_index[u] < node_index[v]
            weights[(u, v)] = float(q.coeffs[node_index[u], node_index[v]])
    return EmbeddedProblem(weights, node_index)


def save_topology(t: Topology, path) -> None:
    """Write a topology file: node count, node ids, ``E``, then edge lines."""
    with open(path, "w") as fh:
        fh.write(f"{t.n}\n")
        for u in t.nodes:
            fh.write(f"{u}\n")
        fh.write("E\n")
        for u, v in t.edges:
            fh.write(f"{u} {v}\n")


def load_topology(source) -> Topology:
    """Read a topology from a path or text stream in the ``save_topology`` format."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return _parse_topology(fh)
    return _parse_topology(source)


def _parse_topology(fh: TextIO) -> Topology:
    nodes: list[int] = []
    edges: list[tuple[int, int]] = []
    count = None
    in_edges = False
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if count is None:
            try:
                count = int(line)
            except ValueError:
                raise ValueError(f"line {lineno}: expected node count, got {line!r}")
            if count < 1:
                raise ValueError(f"line {lineno}: node count must be >= 1")
            continue
        if not in_edges:
            if line == "E":
                if len(nodes) != count:
                    raise ValueError(
                        f"line {lineno}: expected {count} node ids, got {len(nodes)}"
                    )
                declared = set(nodes)
                in_edges = True
                continue
            try:
                nodes.append(int(line))
            except ValueError:
                raise ValueError(f"line {lineno}: expected node id, got {line!r}")
            if len(nodes) > count:
                raise ValueError(f"line {lineno}: more node ids than declared")
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed edge {line!r}")
        if u not in declared or v not in declared:
            raise ValueError(f"line {lineno}: edge ({u}, {v}) references an undeclared node")
        edges.append((u, v))
    if count is None:
        raise ValueError("empty topology file")
    if not in_edges:
        raise ValueError("missing 'E' separator line")
    try:
        return Topology(tuple(nodes), tuple(edges))
    except ValueError as exc:
        raise ValueError(f"invalid topology: {exc}") from exc
