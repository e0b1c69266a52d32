"""Labelled simple graphs on vertices 1..n.

Adjacency is stored as one Python int bitmask per vertex (bit ``i`` stands for
vertex ``i + 1``), which keeps neighbourhood intersections and degree queries
cheap for the dense graphs produced by the samplers.  Everything outside this
module talks in 1-based labels.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Graph",
    "UNREACHABLE",
    "iter_bits",
    "vertex_set",
    "induced_subgraph",
    "distance",
    "set_distance",
    "ball",
    "components",
    "relabel",
    "empty_graph",
    "complete_graph",
    "cycle_graph",
    "path_graph",
    "complete_bipartite_graph",
    "complete_multipartite_graph",
    "disjoint_union",
]


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the 0-based positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Unreachable:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return "UNREACHABLE"


#: Distance between vertices in different components.  Deliberately not an int.
UNREACHABLE = _Unreachable()


class Graph:
    """Immutable labelled simple undirected graph with vertex set ``1..n``."""

    __slots__ = ("n", "adj", "_hash")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be nonnegative, got {n}")
        adj = [0] * n
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) out of range 1..{n}")
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            adj[u - 1] |= 1 << (v - 1)
            adj[v - 1] |= 1 << (u - 1)
        self.n = n
        self.adj = tuple(adj)
        self._hash = None

    @classmethod
    def from_adjacency(cls, adj: Sequence[int]) -> "Graph":
        """Build from 0-based bitmask rows without validation (rows must be symmetric)."""
        g = cls.__new__(cls)
        g.n = len(adj)
        g.adj = tuple(adj)
        g._hash = None
        return g

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.adj))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={sorted(self.edges())})"

    def _check(self, v: int) -> None:
        if not 1 <= v <= self.n:
            raise ValueError(f"vertex {v} out of range 1..{self.n}")

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def has_edge(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return bool((self.adj[u - 1] >> (v - 1)) & 1)

    def neighbors(self, v: int) -> list[int]:
        self._check(v)
        return [i + 1 for i in iter_bits(self.adj[v - 1])]

    def degree(self, v: int) -> int:
        self._check(v)
        return self.adj[v - 1].bit_count()

    def degrees(self) -> list[int]:
        """Degrees of vertices 1..n, in order."""
        return [row.bit_count() for row in self.adj]

    def max_degree(self) -> int:
        return max((row.bit_count() for row in self.adj), default=0)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i, row in enumerate(self.adj):
            for j in iter_bits(row >> (i + 1)):
                out.append((i + 1, i + j + 2))
        return out

    def num_edges(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2


def vertex_set(members: Iterable[int]) -> tuple[int, ...]:
    """Normalise an iterable of vertices to a sorted duplicate-free tuple."""
    return tuple(sorted(set(members)))


def _mask_of(g: Graph, vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        g._check(v)
        mask |= 1 << (v - 1)
    return mask


def induced_subgraph(g: Graph, s: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Return ``(G[S], labels)`` where ``labels[i - 1]`` is the original label of new vertex ``i``.

    New labels follow the ascending order of the original ones.
    """
    labels = vertex_set(s)
    for v in labels:
        g._check(v)
    rows = []
    for v in labels:
        row = g.adj[v - 1]
        new = 0
        for j, w in enumerate(labels):
            if (row >> (w - 1)) & 1:
                new |= 1 << j
        rows.append(new)
    return Graph.from_adjacency(rows), labels


def _bfs_layers(g: Graph, source_mask: int, limit: int | None = None) -> Iterator[int]:
    """Yield successive BFS frontiers (as masks) starting with ``source_mask``."""
    seen = source_mask
    frontier = source_mask
    depth = 0
    while frontier:
        yield frontier
        if limit is not None and depth >= limit:
            return
        nxt = 0
        for i in iter_bits(frontier):
            nxt |= g.adj[i]
        frontier = nxt & ~seen
        seen |= frontier
        depth += 1


def set_distance(g: Graph, a: Iterable[int], b: Iterable[int]):
    """``min dist(v, w)`` over ``v`` in ``a`` and ``w`` in ``b``; UNREACHABLE if no path."""
    amask = _mask_of(g, a)
    bmask = _mask_of(g, b)
    if not amask or not bmask:
        raise ValueError("set distance needs two nonempty vertex sets")
    for depth, layer in enumerate(_bfs_layers(g, amask)):
        if layer & bmask:
            return depth
    return UNREACHABLE


def distance(g: Graph, u: int, v: int):
    return set_distance(g, (u,), (v,))


def ball(g: Graph, a: Iterable[int], t: int) -> tuple[int, ...]:
    """Vertices within distance ``t`` of the nonempty set ``a``."""
    if t < 0:
        raise ValueError("radius must be nonnegative")
    amask = _mask_of(g, a)
    if not amask:
        raise ValueError("ball around an empty set")
    out = 0
    for layer in _bfs_layers(g, amask, limit=t):
        out |= layer
    return tuple(i + 1 for i in iter_bits(out))


def components(g: Graph) -> list[tuple[int, ...]]:
    """Connected components as sorted vertex tuples, ordered by smallest vertex."""
    remaining = (1 << g.n) - 1
    out = []
    while remaining:
        start = remaining & -remaining
        comp = 0
        for layer in _bfs_layers(g, start):
            comp |= layer
        remaining &= ~comp
        out.append(tuple(i + 1 for i in iter_bits(comp)))
    return out


def relabel(g: Graph, perm: Sequence[int]) -> Graph:
    """Graph with vertex ``v`` renamed to ``perm[v - 1]`` (``perm`` a permutation of 1..n)."""
    if sorted(perm) != list(range(1, g.n + 1)):
        raise ValueError("perm must be a permutation of 1..n")
    return Graph(g.n, ((perm[u - 1], perm[v - 1]) for u, v in g.edges()))


def empty_graph(n: int) -> Graph:
    return Graph(n)


def complete_graph(n: int) -> Graph:
    return Graph(n, combinations(range(1, n + 1), 2))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def complete_multipartite_graph(sizes: Sequence[int]) -> Graph:
    """Complete multipartite graph; class ``i`` occupies a consecutive block of labels."""
    cls = [i for i, s in enumerate(sizes) for _ in range(s)]
    n = len(cls)
    return Graph(n, ((u + 1, v + 1) for u, v in combinations(range(n), 2) if cls[u] != cls[v]))


def complete_bipartite_graph(a: int, b: int) -> Graph:
    return complete_multipartite_graph((a, b))


def disjoint_union(*graphs: Graph) -> Graph:
    edges = []
    offset = 0
    for g in graphs:
        edges.extend((u + offset, v + offset) for u, v in g.edges())
        offset += g.n
    return Graph(offset, edges)
