"""Graphs for MaxCut: random cubic generation, edge-environment classes,
worst-case catalogue, and the brute-force cut oracle."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import InvalidInputError, ResourceLimitError
from .statevector import DiagonalCost, RngLike, as_rng, bitstring_of_index

BRUTE_FORCE_MAX_VERTICES = 24


@dataclass
class Graph:
    """Simple undirected graph with vertices 0..n-1."""

    n_vertices: int
    edges: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        norm = []
        for u, v in self.edges:
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise InvalidInputError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidInputError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        self.edges = norm

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_regular(self, k: int) -> bool:
        return all(d == k for d in self.degrees())

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def to_dict(self) -> dict:
        return {"n": self.n_vertices, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        return cls(int(d["n"]), [tuple(e) for e in d["edges"]])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_edges_from(self.edges)
        return g


class EdgeSubgraphClass(enum.Enum):
    """Radius-1 environment of an edge in a cubic graph."""

    G4 = "g4"  # edge lies in a triangle
    G5 = "g5"  # edge lies in a 4-cycle but no triangle
    G6 = "g6"  # tree-like neighbourhood (locally girth >= 5)


def gen_random_cubic(n: int, rng: RngLike = None, max_restarts: int = 10_000) -> Graph:
    """Random 3-regular graph via the pairing model, restarting on collisions."""
    if n < 4 or n % 2 != 0:
        raise InvalidInputError("cubic graphs need an even vertex count >= 4")
    gen = as_rng(rng)
    stubs = np.repeat(np.arange(n), 3)
    for _ in range(max_restarts):
        perm = gen.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        edges = set()
        ok = True
        for u, v in pairs:
            u, v = int(u), int(v)
            if u == v:
                ok = False
                break
            key = (min(u, v), max(u, v))
            if key in edges:
                ok = False
                break
            edges.add(key)
        if ok:
            return Graph(n, sorted(edges))
    raise RuntimeError(f"pairing model failed after {max_restarts} restarts")


def maxcut_cost(graph: Graph) -> DiagonalCost:
    """Diagonal cost: values[z] = number of edges cut by assignment z."""
    n = graph.n_vertices
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise ResourceLimitError(f"{n} vertices exceeds the 2^24 state limit")
    idx = np.arange(1 << n, dtype=np.int64)
    vals = np.zeros(1 << n, dtype=float)
    for u, v in graph.edges:
        vals += ((idx >> u) ^ (idx >> v)) & 1
    return DiagonalCost(vals)


def cut_value(graph: Graph, bits: str) -> int:
    """Cut size of a single assignment (independent per-edge count)."""
    return sum(1 for u, v in graph.edges if bits[u] != bits[v])


def brute_force_maxcut(
    graph: Graph, cap: int | None = None, dedupe_complement: bool = False
) -> tuple[int, list[str]]:
    """Exact MaxCut by exhaustion; returns (c_max, maximizing bitstrings)."""
    n = graph.n_vertices
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise ResourceLimitError(f"{n} vertices exceeds the brute-force limit")
    idx = np.arange(1 << n, dtype=np.int64)
    cuts = np.zeros(1 << n, dtype=np.int32)
    for u, v in graph.edges:
        cuts += (((idx >> u) ^ (idx >> v)) & 1).astype(np.int32)
    c_max = int(cuts.max())
    winners = np.flatnonzero(cuts == c_max)
    if dedupe_complement:
        full = (1 << n) - 1
        winners = np.array([z for z in winners if z <= (z ^ full)])
    if cap is not None:
        winners = winners[:cap]
    strings = [bitstring_of_index(int(z), n) for z in winners]
    return c_max, strings


def classify_edge_subgraphs(graph: Graph) -> dict[tuple[int, int], EdgeSubgraphClass]:
    """Classify each edge of a cubic graph by its radius-1 environment."""
    if not graph.is_regular(3):
        raise InvalidInputError("edge classification is defined for 3-regular graphs")
    adj = graph.adjacency()
    out = {}
    for u, v in graph.edges:
        if adj[u] & adj[v]:
            out[(u, v)] = EdgeSubgraphClass.G4
            continue
        in_square = False
        for x in adj[u] - {v}:
            if (adj[x] - {u}) & (adj[v] - {u}):
                in_square = True
                break
        out[(u, v)] = EdgeSubgraphClass.G5 if in_square else EdgeSubgraphClass.G6
    return out


def is_planar(graph: Graph) -> bool:
    ok, _ = nx.check_planarity(graph.to_networkx())
    return bool(ok)


def _lcf(n: int, shifts: list[int]) -> list[tuple[int, int]]:
    """Expand LCF notation: Hamiltonian cycle plus chords i -> i+shift."""
    edges = {(i, (i + 1) % n) for i in range(n)}
    edges = {(min(e), max(e)) for e in edges}
    for i in range(n):
        j = (i + shifts[i % len(shifts)]) % n
        edges.add((min(i, j), max(i, j)))
    return sorted(edges)


_PETERSEN_EDGES = [
    (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),       # outer 5-cycle
    (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),       # spokes
    (5, 7), (7, 9), (6, 9), (6, 8), (5, 8),       # inner pentagram
]

# Cubic, girth >= 5, nonplanar instances; every edge classifies as G6.
_WORST_CASE_CATALOGUE: dict[str, tuple[int, callable]] = {
    "petersen": (10, lambda: list(_PETERSEN_EDGES)),
    "heawood": (14, lambda: _lcf(14, [5, -5])),
    "moebius_kantor": (16, lambda: _lcf(16, [5, -5])),
    "pappus": (18, lambda: _lcf(18, [5, 7, -7, 7, -7, -5])),
    "desargues": (20, lambda: _lcf(20, [5, -5, 9, -9])),
}


def worst_case_families() -> dict[str, int]:
    """Catalogued family -> vertex count."""
    return {name: n for name, (n, _) in _WORST_CASE_CATALOGUE.items()}


def gen_worst_case_graph(family_id: str, size: int) -> Graph:
    """Catalogued cubic girth->=5 nonplanar graph (every edge is G6)."""
    if family_id not in _WORST_CASE_CATALOGUE:
        raise InvalidInputError(
            f"unknown family {family_id!r}; known: {sorted(_WORST_CASE_CATALOGUE)}"
        )
    n, builder = _WORST_CASE_CATALOGUE[family_id]
    if size != n:
        raise InvalidInputError(f"family {family_id!r} is catalogued at size {n}, not {size}")
    return Graph(n, builder())
