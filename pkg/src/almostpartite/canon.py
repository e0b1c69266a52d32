"""Canonical labelling of small vertex-coloured graphs.

Colour refinement followed by individualisation of the first smallest
non-singleton cell, with pruning by a node invariant and by automorphisms found
at equal leaves.  Intended for the small graphs met in this package (NP-ball
unions, extension patterns, census classes); a node budget turns pathological
inputs into an error instead of a hang.
"""

from __future__ import annotations

from typing import Hashable, Optional, Sequence

from .errors import CapExceeded
from .graph import Graph, iter_bits

__all__ = [
    "canonical_form",
    "canonical_labelling",
    "certificate_graph",
    "is_isomorphic",
    "graphs_up_to_isomorphism",
]

DEFAULT_NODE_LIMIT = 200_000


def _refine(adj: Sequence[int], cells: list[list[int]]) -> list[list[int]]:
    """Split cells until every vertex of a cell sees the same number of vertices in each cell."""
    while True:
        masks = []
        for cell in cells:
            m = 0
            for v in cell:
                m |= 1 << v
            masks.append(m)
        new_cells = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            groups: dict[tuple, list[int]] = {}
            for v in cell:
                row = adj[v]
                key = tuple((row & m).bit_count() for m in masks)
                groups.setdefault(key, []).append(v)
            if len(groups) == 1:
                new_cells.append(cell)
            else:
                changed = True
                for key in sorted(groups):
                    new_cells.append(groups[key])
        cells = new_cells
        if not changed:
            return cells


def _node_invariant(adj: Sequence[int], cells: list[list[int]]) -> tuple:
    masks = []
    for cell in cells:
        m = 0
        for v in cell:
            m |= 1 << v
        masks.append(m)
    # quotient matrix of an equitable partition: first vertex is representative
    return tuple((len(c),) + tuple((adj[c[0]] & m).bit_count() for m in masks) for c in cells)


def _leaf_certificate(adj: Sequence[int], colours: Sequence, order: Sequence[int]) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    rows = []
    for v in order:
        r = 0
        for w in iter_bits(adj[v]):
            r |= 1 << pos[w]
        rows.append(r)
    return (len(order), tuple(colours[v] for v in order), tuple(rows))


class _Search:
    def __init__(self, adj, colours, node_limit):
        self.adj = adj
        self.colours = colours
        self.node_limit = node_limit
        self.nodes = 0
        self.best = None  # (trace, leaf, order)
        self.autos: list[tuple[int, ...]] = []

    def run(self, cells):
        self._visit(_refine(self.adj, cells), (), ())

    def _visit(self, cells, trace, prefix):
        self.nodes += 1
        if self.nodes > self.node_limit:
            raise CapExceeded(f"canonical labelling exceeded {self.node_limit} search nodes")
        trace = trace + (_node_invariant(self.adj, cells),)
        if self.best is not None:
            best_prefix = self.best[0][: len(trace)]
            if trace > best_prefix:
                return
        target = None
        for cell in cells:
            if len(cell) > 1 and (target is None or len(cell) < len(target)):
                target = cell
        if target is None:
            order = [c[0] for c in cells]
            leaf = _leaf_certificate(self.adj, self.colours, order)
            if self.best is None or (trace, leaf) < self.best[:2]:
                self.best = (trace, leaf, order)
            elif (trace, leaf) == self.best[:2]:
                best_order = self.best[2]
                perm = [0] * len(order)
                for a, b in zip(order, best_order):
                    perm[a] = b
                self.autos.append(tuple(perm))
            return
        idx = cells.index(target)
        explored: list[int] = []
        for v in target:
            if explored and self._same_orbit(v, explored, prefix):
                continue
            explored.append(v)
            rest = [w for w in target if w != v]
            child = cells[:idx] + [[v], rest] + cells[idx + 1:]
            self._visit(_refine(self.adj, child), trace, prefix + (v,))

    def _same_orbit(self, v, explored, prefix):
        usable = [g for g in self.autos if all(g[p] == p for p in prefix)]
        if not usable:
            return False
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        for g in usable:
            for a, b in enumerate(g):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        rv = find(v)
        return any(find(e) == rv for e in explored)


def canonical_labelling(
    g: Graph, colours: Optional[Sequence[Hashable]] = None, node_limit: int = DEFAULT_NODE_LIMIT
) -> tuple[tuple, tuple[int, ...]]:
    """Return ``(certificate, order)``.

    ``order[i]`` is the (1-based) vertex placed at canonical position ``i``.
    Two coloured graphs get the same certificate iff they are isomorphic by a
    colour-preserving map.  Colours must be mutually comparable.
    """
    n = g.n
    cols = tuple(colours) if colours is not None else (0,) * n
    if len(cols) != n:
        raise ValueError("one colour per vertex required")
    if n == 0:
        return (0, (), ()), ()
    by_colour: dict = {}
    for v in range(n):
        by_colour.setdefault(cols[v], []).append(v)
    cells = [by_colour[c] for c in sorted(by_colour)]
    search = _Search(g.adj, cols, node_limit)
    search.run(cells)
    _, leaf, order = search.best
    return leaf, tuple(v + 1 for v in order)


def canonical_form(g: Graph, colours=None, node_limit: int = DEFAULT_NODE_LIMIT) -> tuple:
    return canonical_labelling(g, colours, node_limit)[0]


def certificate_graph(cert: tuple) -> Graph:
    """Rebuild the canonical representative graph from a certificate."""
    return Graph.from_adjacency(cert[2])


def is_isomorphic(g: Graph, h: Graph, colours_g=None, colours_h=None) -> bool:
    if g.n != h.n or g.num_edges() != h.num_edges():
        return False
    return canonical_form(g, colours_g) == canonical_form(h, colours_h)


def graphs_up_to_isomorphism(n: int) -> list[Graph]:
    """One representative per isomorphism class of graphs on ``n`` vertices (vertex augmentation)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > 8:
        raise CapExceeded("isomorphism-class enumeration is capped at n <= 8")
    level = {canonical_form(Graph(0))}
    for size in range(n):
        nxt = set()
        for cert in level:
            base = cert[2]
            for nb in range(1 << size):
                rows = [r | (((nb >> i) & 1) << size) for i, r in enumerate(base)]
                rows.append(nb)
                nxt.add(canonical_form(Graph.from_adjacency(rows)))
        level = nxt
    return [certificate_graph(c) for c in sorted(level)]
