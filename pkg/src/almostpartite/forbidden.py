"""Complete multipartite forbidden subgraphs ``K_{1,s_1,...,s_l}``.

Detection works in the neighbourhood of a chosen apex: pick the classes one at
a time, each from the common neighbourhood of everything picked so far.  The
two exhaustive verifiers enumerate partitions of the pattern graph itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .census import enumerate_class
from .errors import CapExceeded
from .graph import Graph, complete_multipartite_graph, iter_bits

__all__ = [
    "MultipartitePattern",
    "contains_multipartite",
    "find_multipartite",
    "has_clique",
    "verify_cycle_lemma",
    "find_cycle_lemma_counterexample",
    "inclusion_criterion",
    "brute_inclusion_check",
    "enumerate_forb",
    "LEMMA_VERTEX_CAP",
]

LEMMA_VERTEX_CAP = 14


@dataclass(frozen=True)
class MultipartitePattern:
    """``K_{1, s_1, ..., s_l}``; ``sizes`` holds ``s_1 <= ... <= s_l``."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("class sizes must be positive and at least one class is needed")
        if list(sizes) != sorted(sizes):
            raise ValueError("class sizes must be nondecreasing")
        object.__setattr__(self, "sizes", sizes)

    @property
    def l(self) -> int:
        return len(self.sizes)

    @property
    def classes(self) -> tuple[int, ...]:
        return (1,) + self.sizes

    @property
    def order(self) -> int:
        return 1 + sum(self.sizes)

    def graph(self) -> Graph:
        """The pattern itself; vertex 1 is the apex, classes follow in consecutive blocks."""
        return complete_multipartite_graph(self.classes)


def find_multipartite(g: Graph, pat: MultipartitePattern) -> Optional[tuple[tuple[int, ...], ...]]:
    """A copy of the pattern as its classes (apex first, 1-based labels), or ``None``."""
    if pat.order > g.n:
        return None
    adj = g.adj
    # larger classes first: they constrain the remaining candidates most
    need = sorted(pat.sizes, reverse=True)
    chosen: list[list[int]] = []

    def place(ci: int, cand: int) -> bool:
        if ci == len(need):
            return True
        size = need[ci]
        rest = sum(need[ci + 1:])
        verts = list(iter_bits(cand))
        picked: list[int] = []

        def choose(start: int, joint: int) -> bool:
            if len(picked) == size:
                chosen.append(list(picked))
                if place(ci + 1, joint):
                    return True
                chosen.pop()
                return False
            for idx in range(start, len(verts)):
                if len(verts) - idx < size - len(picked):
                    return False
                w = verts[idx]
                nj = joint & adj[w]
                if nj.bit_count() < rest:
                    continue
                picked.append(w)
                if choose(idx + 1, nj):
                    return True
                picked.pop()
            return False

        return choose(0, cand)

    for a in range(g.n):
        if adj[a].bit_count() < pat.order - 1:
            continue
        chosen.clear()
        if place(0, adj[a]):
            return ((a + 1,),) + tuple(tuple(v + 1 for v in c) for c in chosen)
    return None


def contains_multipartite(g: Graph, pat: MultipartitePattern) -> bool:
    """Whether ``g`` has a (not necessarily induced) subgraph isomorphic to the pattern."""
    return find_multipartite(g, pat) is not None


def has_clique(g: Graph, r: int) -> bool:
    """Plain clique search, kept separate from the multipartite search as a cross-check."""
    if r <= 0:
        return True
    adj = g.adj

    def grow(size: int, cand: int) -> bool:
        if size == r:
            return True
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            if grow(size + 1, cand & adj[v]):
                return True
        return False

    return grow(0, (1 << g.n) - 1)


def _valid_assignments(g: Graph, l: int, d: int) -> Iterator[list[int]]:
    """Assignments of vertices to parts 0..l-1 with own-part degree <= d, vertex 0 fixed to part 0."""
    n = g.n
    adj = g.adj
    parts = [0] * l
    own = [0] * n
    assign = [0] * n

    def rec(i: int):
        if i == n:
            yield assign
            return
        nb = adj[i] & ((1 << i) - 1)
        for p in range(l if i else 1):
            inside = nb & parts[p]
            c = inside.bit_count()
            if c > d or any(own[w] >= d for w in iter_bits(inside)):
                continue
            for w in iter_bits(inside):
                own[w] += 1
            own[i] = c
            parts[p] |= 1 << i
            assign[i] = p
            yield from rec(i + 1)
            parts[p] &= ~(1 << i)
            for w in iter_bits(inside):
                own[w] -= 1

    yield from rec(0)


def _has_triangle(adj: Sequence[int], mask: int) -> bool:
    for v in iter_bits(mask):
        nb = adj[v] & mask
        for w in iter_bits(nb):
            if adj[w] & nb:
                return True
    return False


def _check_sizes(l: int, s: Sequence[int], cap: int) -> MultipartitePattern:
    if l != len(s):
        raise ValueError(f"need exactly l={l} class sizes, got {len(s)}")
    pat = MultipartitePattern(tuple(s))
    if pat.order > cap:
        raise CapExceeded(f"pattern has {pat.order} vertices, cap is {cap}")
    return pat


def find_cycle_lemma_counterexample(l: int, s: Sequence[int], cap: int = LEMMA_VERTEX_CAP) -> Optional[tuple[int, ...]]:
    """A partition of ``K_{1,s}`` into ``l`` parts, own-degree <= s_1 - 1, with no monochromatic triangle."""
    pat = _check_sizes(l, s, cap)
    g = pat.graph()
    for assign in _valid_assignments(g, l, pat.sizes[0] - 1):
        masks = [0] * l
        for v, p in enumerate(assign):
            masks[p] |= 1 << v
        if not any(_has_triangle(g.adj, m) for m in masks):
            return tuple(p + 1 for p in assign)
    return None


def verify_cycle_lemma(l: int, s: Sequence[int], cap: int = LEMMA_VERTEX_CAP) -> bool:
    """Every admissible partition of ``K_{1,s}`` has a part containing a triangle."""
    return find_cycle_lemma_counterexample(l, s, cap) is None


def inclusion_criterion(l: int, s: Sequence[int]) -> bool:
    """Closed-form test: ``s_1 <= 2`` or ``s_2 >= 2(s_1 - 1)``.

    With a single class the star ``K_{1,s_1}`` never admits a one-part
    partition of own-degree ``s_1 - 1``, so the answer is always true.
    """
    pat = MultipartitePattern(tuple(s))
    if pat.l != l:
        raise ValueError(f"need exactly l={l} class sizes")
    if l == 1:
        return True
    s1, s2 = pat.sizes[0], pat.sizes[1]
    return s1 <= 2 or s2 >= 2 * (s1 - 1)


def brute_inclusion_check(l: int, s: Sequence[int], cap: int = LEMMA_VERTEX_CAP) -> bool:
    """True iff ``K_{1,s}`` has no partition into ``l`` parts with own-degree <= s_1 - 1."""
    pat = _check_sizes(l, s, cap)
    g = pat.graph()
    return next(_valid_assignments(g, l, pat.sizes[0] - 1), None) is None


def enumerate_forb(n: int, pat: MultipartitePattern) -> Iterator[Graph]:
    """Graphs on ``n`` vertices with no copy of the pattern, in enumeration order."""
    return enumerate_class(n, lambda g: not contains_multipartite(g, pat))
