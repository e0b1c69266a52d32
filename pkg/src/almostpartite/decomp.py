"""Partitions, decompositions and the extension property.

A partition ``pi`` of the vertex set into ``l`` parts admits a decomposition
when every vertex has at most ``d`` neighbours inside its own part; the edge
set then splits uniquely into cross edges ``E1`` and own-part edges ``E2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence

from .canon import canonical_form, certificate_graph
from .errors import CapExceeded
from .graph import Graph, components, iter_bits

__all__ = [
    "MODES",
    "Partition",
    "Decomposition",
    "DecompositionFailure",
    "decomposition_from_partition",
    "count_decompositions",
    "decomposition_block_counts",
    "iter_valid_block_assignments",
    "has_decomposition",
    "is_rich",
    "ExtensionPattern",
    "extension_patterns",
    "find_extension_failure",
    "check_extension_instance",
    "find_k_extension_failure",
    "check_k_extension",
]

MODES = ("ordered-any", "ordered-nonempty", "unordered-nonempty")


@dataclass(frozen=True)
class Partition:
    """Assignment of vertices ``1..n`` to parts ``1..l``.

    ``assign[v - 1]`` is the part of vertex ``v``.  Unordered partitions are
    stored canonically: parts are numbered by increasing minimum vertex.
    """

    l: int
    assign: tuple[int, ...]
    mode: str = "ordered-any"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown partition mode {self.mode!r}")
        if self.l < 1:
            raise ValueError("a partition needs at least one part")
        assign = tuple(int(a) for a in self.assign)
        for a in assign:
            if not 1 <= a <= self.l:
                raise ValueError(f"part index {a} out of range 1..{self.l}")
        if self.mode != "ordered-any" and len(set(assign)) != self.l:
            raise ValueError(f"{self.mode} partition leaves a part empty")
        if self.mode == "unordered-nonempty":
            relabel: dict[int, int] = {}
            for a in assign:
                relabel.setdefault(a, len(relabel) + 1)
            assign = tuple(relabel[a] for a in assign)
        object.__setattr__(self, "assign", assign)

    @classmethod
    def from_parts(cls, parts: Sequence[Iterable[int]], mode: str = "ordered-any", l: Optional[int] = None) -> "Partition":
        """Build from a list of parts (part ``i`` is ``parts[i - 1]``), vertices 1..n covered once."""
        parts = [list(p) for p in parts]
        n = sum(len(p) for p in parts)
        assign = [0] * n
        for i, p in enumerate(parts, start=1):
            for v in p:
                if not 1 <= v <= n:
                    raise ValueError(f"vertex {v} out of range 1..{n}")
                if assign[v - 1]:
                    raise ValueError(f"vertex {v} listed in two parts")
                assign[v - 1] = i
        return cls(l if l is not None else len(parts), tuple(assign), mode)

    @property
    def n(self) -> int:
        return len(self.assign)

    def parts(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.l)]
        for v, a in enumerate(self.assign, start=1):
            out[a - 1].append(v)
        return tuple(tuple(p) for p in out)

    def part_of(self, v: int) -> int:
        return self.assign[v - 1]

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.parts())

    def masks(self) -> list[int]:
        """0-based bitmask of each part."""
        out = [0] * self.l
        for i, a in enumerate(self.assign):
            out[a - 1] |= 1 << i
        return out

    def blocks(self) -> frozenset:
        """The nonempty parts as an unordered set, for comparisons up to part order."""
        return frozenset(frozenset(p) for p in self.parts() if p)

    def same_blocks(self, other: "Partition") -> bool:
        return self.n == other.n and self.blocks() == other.blocks()


@dataclass(frozen=True)
class Decomposition:
    base: Partition
    e1: frozenset
    e2: frozenset

    def edges(self) -> frozenset:
        return self.e1 | self.e2


@dataclass(frozen=True)
class DecompositionFailure:
    """A vertex with too many own-part neighbours.  Falsy."""

    vertex: int
    own_neighbours: tuple[int, ...] = field(default=())

    def __bool__(self) -> bool:
        return False


def decomposition_from_partition(g: Graph, pi: Partition, d: int):
    if pi.n != g.n:
        raise ValueError("partition and graph have different vertex counts")
    masks = pi.masks()
    for v in range(g.n):
        own = g.adj[v] & masks[pi.assign[v] - 1]
        if own.bit_count() > d:
            return DecompositionFailure(v + 1, tuple(i + 1 for i in iter_bits(own)))
    e1, e2 = set(), set()
    for u, v in g.edges():
        (e2 if pi.assign[u - 1] == pi.assign[v - 1] else e1).add((u, v))
    return Decomposition(pi, frozenset(e1), frozenset(e2))


def _block_counts(adj: Sequence[int], vertices: Sequence[int], l: int, d: int, limit: Optional[int] = None) -> list[int]:
    """Count set partitions of ``vertices`` into j <= l unlabelled blocks with own-degree <= d.

    Returns ``counts[j]``.  Blocks are opened in vertex order, which removes the
    l! relabelling symmetry.  With ``limit`` the search stops once that many
    partitions were found.
    """
    counts = [0] * (l + 1)
    k = len(vertices)
    # earlier[i]: mask of neighbours of vertices[i] among vertices[0..i-1], by position
    pos = {v: i for i, v in enumerate(vertices)}
    earlier = []
    for i, v in enumerate(vertices):
        m = 0
        for w in iter_bits(adj[v]):
            j = pos.get(w)
            if j is not None and j < i:
                m |= 1 << j
        earlier.append(m)
    blocks = [0] * l
    own = [0] * k
    found = 0

    def rec(i: int, used: int) -> bool:
        nonlocal found
        if i == k:
            counts[used] += 1
            found += 1
            return limit is not None and found >= limit
        nb = earlier[i]
        top = used + 1 if used < l else used
        for b in range(top):
            inside = nb & blocks[b]
            c = inside.bit_count()
            if c > d:
                continue
            ok = True
            for w in iter_bits(inside):
                if own[w] >= d:
                    ok = False
                    break
            if not ok:
                continue
            for w in iter_bits(inside):
                own[w] += 1
            own[i] = c
            blocks[b] |= 1 << i
            stop = rec(i + 1, used + (b == used))
            blocks[b] &= ~(1 << i)
            for w in iter_bits(inside):
                own[w] -= 1
            if stop:
                return True
        return False

    rec(0, 0)
    return counts


def _falling(l: int, j: int) -> int:
    return math.perm(l, j) if j <= l else 0


def decomposition_block_counts(g: Graph, l: int, d: int) -> list[int]:
    """Ordered-any decomposition counts with ``j`` labels available, for ``j = 0..l``.

    Computed per connected component and multiplied, since labellings of
    different components are independent.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    totals = [1] * (l + 1)
    for comp in components(g):
        vs = [v - 1 for v in comp]
        bc = _block_counts(g.adj, vs, l, d)
        for j in range(l + 1):
            totals[j] *= sum(bc[b] * _falling(j, b) for b in range(1, l + 1))
    if g.n:
        totals[0] = 0
    return totals


def count_decompositions(g: Graph, l: int, d: int, mode: str = "ordered-any") -> int:
    """Number of partitions (in ``mode``) whose induced decomposition exists."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    any_j = decomposition_block_counts(g, l, d)
    if mode == "ordered-any":
        return any_j[l]
    # inclusion-exclusion over the set of labels actually used
    nonempty = sum((-1) ** (l - j) * math.comb(l, j) * any_j[j] for j in range(l + 1))
    if mode == "ordered-nonempty":
        return nonempty
    return nonempty // math.factorial(l)


def has_decomposition(g: Graph, l: int, d: int) -> bool:
    """Whether ``g`` belongs to P(l, d)."""
    for comp in components(g):
        if not any(_block_counts(g.adj, [v - 1 for v in comp], l, d, limit=1)):
            return False
    return True


def iter_valid_block_assignments(g: Graph, l: int, d: int) -> Iterator[tuple[int, ...]]:
    """Yield every valid partition into at most ``l`` blocks, blocks numbered by first vertex.

    Each yielded tuple maps vertex ``v`` (index ``v - 1``) to its block ``1..j``.
    """
    n = g.n
    adj = g.adj
    blocks = [0] * l
    own = [0] * n
    assign = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield tuple(assign)
            return
        nb = adj[i] & ((1 << i) - 1)
        top = used + 1 if used < l else used
        for b in range(top):
            inside = nb & blocks[b]
            c = inside.bit_count()
            if c > d or any(own[w] >= d for w in iter_bits(inside)):
                continue
            for w in iter_bits(inside):
                own[w] += 1
            own[i] = c
            blocks[b] |= 1 << i
            assign[i] = b + 1
            yield from rec(i + 1, used + (b == used))
            blocks[b] &= ~(1 << i)
            for w in iter_bits(inside):
                own[w] -= 1

    yield from rec(0, 0)


def is_rich(pi: Partition, alpha: float) -> bool:
    """Every part (empty ones included) has at least ``alpha`` vertices."""
    return all(s >= alpha for s in pi.sizes())


# --- extension property -----------------------------------------------------


@dataclass(frozen=True)
class ExtensionPattern:
    """A pattern ``H`` with vertex roles X1, X2, Y and a target part ``p``.

    Role sets use the 1-based labels of ``H``.
    """

    h: Graph
    x1: frozenset
    x2: frozenset
    y: frozenset
    part: int = 1

    def __post_init__(self):
        x1, x2, y = frozenset(self.x1), frozenset(self.x2), frozenset(self.y)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        object.__setattr__(self, "y", y)
        if (x1 & x2) or (x1 & y) or (x2 & y) or (x1 | x2 | y) != set(self.h.vertices):
            raise ValueError("X1, X2, Y must partition the pattern's vertices")
        for a in x1:
            for b in y:
                if self.h.has_edge(a, b):
                    raise ValueError(f"pattern edge {a}-{b} joins X1 and Y")
        if self.part < 1:
            raise ValueError("target part index must be positive")

    def with_part(self, p: int) -> "ExtensionPattern":
        return ExtensionPattern(self.h, self.x1, self.x2, self.y, p)


def _strong_embeddings(g: Graph, h: Graph, order: Sequence[int], allowed: Sequence[int], fixed: dict[int, int]) -> Iterator[dict[int, int]]:
    """Induced embeddings of ``h`` restricted to ``order`` (0-based pattern vertices).

    ``allowed[x]`` is the mask of host vertices available to pattern vertex
    ``x``; ``fixed`` holds already-placed pattern vertices (0-based to 0-based).
    """
    adj = g.adj
    hadj = h.adj
    full = (1 << g.n) - 1
    used = 0
    for w in fixed.values():
        used |= 1 << w
    phi = dict(fixed)

    def rec(i: int, used: int):
        if i == len(order):
            yield dict(phi)
            return
        x = order[i]
        cand = allowed[x] & ~used
        for y, w in phi.items():
            if (hadj[x] >> y) & 1:
                cand &= adj[w]
            else:
                cand &= full & ~adj[w]
            if not cand:
                return
        for w in iter_bits(cand):
            phi[x] = w
            yield from rec(i + 1, used | (1 << w))
            del phi[x]

    yield from rec(0, used)


def _count_copies(g: Graph, part_mask: int, h: Graph, y: Sequence[int], need: int) -> int:
    """Distinct vertex sets of induced copies of ``h[y]`` inside ``part_mask``, counted up to ``need``."""
    if need <= 0:
        return 0
    allowed = [part_mask] * h.n
    seen = set()
    for emb in _strong_embeddings(g, h, list(y), allowed, {}):
        seen.add(frozenset(emb.values()))
        if len(seen) >= need:
            break
    return len(seen)


def find_extension_failure(g: Graph, pi: Partition, pat: ExtensionPattern) -> Optional[dict[int, int]]:
    """Return a non-extendable ``h0`` (pattern label to host label) or ``None`` if condition (*) holds."""
    if pi.n != g.n:
        raise ValueError("partition and graph have different vertex counts")
    if pat.part > pi.l:
        raise ValueError(f"target part {pat.part} exceeds l={pi.l}")
    pmask = pi.masks()[pat.part - 1]
    outside = ((1 << g.n) - 1) & ~pmask
    h = pat.h
    y = sorted(v - 1 for v in pat.y)
    guard = math.isqrt(math.isqrt(g.n))
    if _count_copies(g, pmask, h, y, guard) < guard:
        return None
    allowed = [0] * h.n
    for v in pat.x1:
        allowed[v - 1] = pmask
    for v in pat.x2:
        allowed[v - 1] = outside
    for v in pat.y:
        allowed[v - 1] = pmask
    xs = sorted(v - 1 for v in pat.x1 | pat.x2)
    for h0 in _strong_embeddings(g, h, xs, allowed, {}):
        ext = next(_strong_embeddings(g, h, y, allowed, h0), None)
        if ext is None:
            return {x + 1: w + 1 for x, w in h0.items()}
    return None


def check_extension_instance(g: Graph, pi: Partition, pat: ExtensionPattern) -> bool:
    return find_extension_failure(g, pi, pat) is None


@lru_cache(maxsize=None)
def extension_patterns(k: int) -> tuple[ExtensionPattern, ...]:
    """All role-labelled patterns with ``1 <= |H| <= k``, nonempty Y, no X1-Y edge, up to isomorphism."""
    seen = set()
    out = []
    for size in range(1, k + 1):
        pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
        for roles in product((0, 1, 2), repeat=size):
            if 2 not in roles:
                continue
            for bits in range(1 << len(pairs)):
                edges = [pairs[e] for e in range(len(pairs)) if (bits >> e) & 1]
                if any({roles[a], roles[b]} == {0, 2} for a, b in edges):
                    continue
                h = Graph(size, ((a + 1, b + 1) for a, b in edges))
                cert = canonical_form(h, roles)
                if cert in seen:
                    continue
                seen.add(cert)
                rep = certificate_graph(cert)
                cols = cert[1]
                out.append(
                    ExtensionPattern(
                        rep,
                        frozenset(i + 1 for i, c in enumerate(cols) if c == 0),
                        frozenset(i + 1 for i, c in enumerate(cols) if c == 1),
                        frozenset(i + 1 for i, c in enumerate(cols) if c == 2),
                    )
                )
    return tuple(out)


def find_k_extension_failure(g: Graph, pi: Partition, k: int, max_k: int = 4, max_n: int = 64):
    """First ``(pattern, h0)`` violating the k-extension property, or ``None``."""
    if k > max_k:
        raise CapExceeded(f"k={k} exceeds the extension-check cap {max_k}")
    if g.n > max_n:
        raise CapExceeded(f"n={g.n} exceeds the extension-check cap {max_n}")
    for pat in extension_patterns(k):
        for p in range(1, pi.l + 1):
            inst = pat.with_part(p)
            h0 = find_extension_failure(g, pi, inst)
            if h0 is not None:
                return inst, h0
    return None


def check_k_extension(g: Graph, pi: Partition, k: int, max_k: int = 4, max_n: int = 64) -> bool:
    return find_k_extension_failure(g, pi, k, max_k, max_n) is None
