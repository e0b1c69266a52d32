"""Exact counting and exact-uniform sampling.

``C(m, d)`` denotes the number of labelled graphs on ``m`` vertices with
maximum degree at most ``d``.  A graph with a fixed ordered partition into
parts of sizes ``n_1..n_l`` is a free choice of every cross pair plus an
independent bounded-degree graph in each part, so

    |P_{n,pi}(l, d)| = 2^(sum_{i<j} n_i n_j) * prod_i C(n_i, d).

All sampling decisions draw integers with ``randrange`` against exact big
integer totals, so no floating point enters any acceptance decision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .decomp import Partition, count_decompositions, has_decomposition
from .errors import CapExceeded
from .graph import Graph, iter_bits

__all__ = [
    "Seed",
    "as_rng",
    "CountTable",
    "count_bounded_degree",
    "sample_bounded_degree",
    "partition_class_count",
    "SizeVectorWeight",
    "size_vector_weights",
    "sample_partitioned",
    "sample_uniform_pld",
    "sample_uniform_pld_with_partition",
    "enumerate_class",
    "pld_predicate",
    "mcmc_toggle_chain",
    "mcmc_toggle_samples",
    "CENSUS_CAPS",
    "COMPONENT_CAP",
]

#: largest m for the census DP, per degree bound (d >= 4 uses the last entry)
CENSUS_CAPS = {0: 10_000, 1: 400, 2: 120, 3: 60, 4: 30}
#: largest m for the component route (d <= 2)
COMPONENT_CAP = 2_000
SIZE_VECTOR_CAP_N = 300
SIZE_VECTOR_CAP_L = 4


# --- seeds ------------------------------------------------------------------------


@dataclass(frozen=True)
class Seed:
    """A master seed plus a derivation path; each path names an independent stream."""

    master: int
    path: tuple[int, ...] = ()

    def child(self, *idx: int) -> "Seed":
        return Seed(self.master, self.path + tuple(int(i) for i in idx))

    def rng(self) -> random.Random:
        ss = np.random.SeedSequence(self.master, spawn_key=self.path)
        state = ss.generate_state(4, dtype=np.uint64)
        return random.Random(int.from_bytes(state.tobytes(), "little"))


RngLike = Union[Seed, int, random.Random, None]


def as_rng(seed: RngLike) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    if isinstance(seed, Seed):
        return seed.rng()
    if seed is None:
        return random.Random()
    return Seed(int(seed)).rng()


# --- bounded-degree census DP -----------------------------------------------------


def _census_cap(d: int) -> int:
    return CENSUS_CAPS.get(d, CENSUS_CAPS[4])


def _profiles(state: tuple[int, ...], d: int):
    """Back-edge profiles from a new vertex into residual classes 1..d.

    ``state[r - 1]`` counts processed vertices with residual capacity ``r``.
    Yields ``(ks, multiplicity, next_state)``.
    """

    def rec(r: int, left: int, ks: list[int]):
        if r > d:
            yield tuple(ks)
            return
        for k in range(min(left, state[r - 1]) + 1):
            ks.append(k)
            yield from rec(r + 1, left - k, ks)
            ks.pop()

    for ks in rec(1, d, []):
        mult = 1
        nxt = list(state)
        for r, k in enumerate(ks, start=1):
            if k:
                mult *= math.comb(state[r - 1], k)
                nxt[r - 1] -= k
                if r >= 2:
                    nxt[r - 2] += k
        cap = d - sum(ks)
        if cap >= 1:
            nxt[cap - 1] += 1
        yield ks, mult, tuple(nxt)


class CountTable:
    """Completion counts of the vertex-addition DP for ``C(m, d)``.

    Processed vertices are summarised by how many of them have residual
    capacity ``r`` for ``r = 1..d`` (saturated vertices are not tracked; their
    number is the step index minus the sum).  ``layers[i][state]`` is the number
    of ways to add the remaining ``m - i`` vertices.
    """

    def __init__(self, m: int, d: int, cap: Optional[int] = None):
        if m < 0 or d < 0:
            raise ValueError("m and d must be nonnegative")
        limit = _census_cap(d) if cap is None else cap
        if m > limit:
            raise CapExceeded(f"census DP for d={d} is capped at m={limit}")
        self.m = m
        self.d = d
        if d == 0:
            self.layers = [{(): 1} for _ in range(m + 1)]
            return
        reach = [{(0,) * d}]
        for _ in range(m):
            nxt = set()
            for s in reach[-1]:
                nxt.update(t[2] for t in _profiles(s, d))
            reach.append(nxt)
        layers: list[dict] = [dict() for _ in range(m + 1)]
        layers[m] = {s: 1 for s in reach[m]}
        for i in range(m - 1, -1, -1):
            after = layers[i + 1]
            layers[i] = {s: sum(mult * after[t] for _, mult, t in _profiles(s, d)) for s in reach[i]}
            reach[i + 1] = None
        self.layers = layers

    @property
    def total(self) -> int:
        return self.layers[0][(0,) * self.d]


@lru_cache(maxsize=8)
def _table(m: int, d: int) -> CountTable:
    return CountTable(m, d)


# component route: a max-degree-2 graph is a disjoint union of paths and cycles


def _connected_count(k: int, d: int) -> int:
    """Connected labelled graphs on ``k`` vertices with max degree <= d (d <= 2)."""
    if k == 1:
        return 1
    if d == 0:
        return 0
    if k == 2:
        return 1
    if d == 1:
        return 0
    return math.factorial(k) // 2 + math.factorial(k - 1) // 2


class _ComponentTable:
    def __init__(self, d: int):
        self.d = d
        self.totals = [1]
        self.cumulative: list[list[int]] = [[]]

    def extend(self, m: int) -> None:
        d = self.d
        kmax = {0: 1, 1: 2}.get(d)
        while len(self.totals) <= m:
            s = len(self.totals)
            acc = 0
            cum = []
            for k in range(1, (s if kmax is None else min(s, kmax)) + 1):
                acc += math.comb(s - 1, k - 1) * _connected_count(k, d) * self.totals[s - k]
                cum.append(acc)
            self.totals.append(acc)
            self.cumulative.append(cum)


@lru_cache(maxsize=None)
def _component_table(d: int) -> _ComponentTable:
    return _ComponentTable(d)


def count_bounded_degree(m: int, d: int, method: str = "auto") -> int:
    """``C(m, d)``, the number of labelled graphs on ``m`` vertices with max degree <= d.

    ``method`` is ``"census"`` (vertex-addition DP), ``"components"`` (exact
    path/cycle decomposition, d <= 2 only) or ``"auto"``.
    """
    if m < 0 or d < 0:
        raise ValueError("m and d must be nonnegative")
    if method == "auto":
        if d >= m - 1 and m >= 1:
            return 2 ** (m * (m - 1) // 2)
        method = "components" if d <= 2 else "census"
    if method == "components":
        if d > 2:
            raise ValueError("component route needs d <= 2")
        if m > COMPONENT_CAP:
            raise CapExceeded(f"component route is capped at m={COMPONENT_CAP}")
        t = _component_table(d)
        t.extend(m)
        return t.totals[m]
    if method == "census":
        return _table(m, d).total
    raise ValueError(f"unknown method {method!r}")


def _sample_components(m: int, d: int, rng: random.Random) -> list[tuple[int, int]]:
    t = _component_table(d)
    t.extend(m)
    remaining = list(range(m))
    edges = []
    while remaining:
        s = len(remaining)
        cum = t.cumulative[s]
        x = rng.randrange(t.totals[s])
        k = next(i for i, c in enumerate(cum, start=1) if x < c)
        first = remaining[0]
        others = rng.sample(remaining[1:], k - 1)
        comp = [first] + others
        members = set(comp)
        remaining = [v for v in remaining if v not in members]
        if k == 1:
            continue
        if k == 2:
            edges.append((comp[0], comp[1]))
            continue
        # paths: k!/2 labellings, cycles: (k-1)!/2
        n_paths = math.factorial(k) // 2
        if rng.randrange(n_paths + math.factorial(k - 1) // 2) < n_paths:
            while True:
                order = rng.sample(comp, k)
                if order[0] < order[-1]:
                    break
            edges.extend(zip(order, order[1:]))
        else:
            while True:
                rest = rng.sample(comp[1:], k - 1)
                if rest[0] < rest[-1]:
                    break
            order = [comp[0]] + rest
            edges.extend(zip(order, order[1:] + order[:1]))
    return edges


def _sample_census(m: int, d: int, rng: random.Random) -> list[tuple[int, int]]:
    if d == 0:
        return []
    table = _table(m, d)
    classes: list[list[int]] = [[] for _ in range(d)]
    state = (0,) * d
    edges = []
    for i in range(m):
        after = table.layers[i + 1]
        x = rng.randrange(table.layers[i][state])
        for ks, mult, nxt in _profiles(state, d):
            w = mult * after[nxt]
            if x < w:
                break
            x -= w
        moved: list[tuple[int, int]] = []
        for r, k in enumerate(ks, start=1):
            if k:
                chosen = rng.sample(classes[r - 1], k)
                for v in chosen:
                    classes[r - 1].remove(v)
                    edges.append((v, i))
                    moved.append((r, v))
        for r, v in moved:
            if r >= 2:
                classes[r - 2].append(v)
        cap = d - sum(ks)
        if cap >= 1:
            classes[cap - 1].append(i)
        state = nxt
    return edges


def _sample_bounded_edges(m: int, d: int, rng: random.Random, method: str = "auto") -> list[tuple[int, int]]:
    """Uniform member of ``P_m(1, d)`` as 0-based edges."""
    if method == "auto" and m >= 1 and d >= m - 1:
        pairs = list(combinations(range(m), 2))
        bits = rng.getrandbits(len(pairs)) if pairs else 0
        return [p for i, p in enumerate(pairs) if (bits >> i) & 1]
    if method == "auto":
        method = "components" if d <= 2 else "census"
    if method == "components":
        if d > 2:
            raise ValueError("component route needs d <= 2")
        if m > COMPONENT_CAP:
            raise CapExceeded(f"component route is capped at m={COMPONENT_CAP}")
        return _sample_components(m, d, rng)
    if m > _census_cap(d):
        raise CapExceeded(f"census DP for d={d} is capped at m={_census_cap(d)}")
    return _sample_census(m, d, rng)


def sample_bounded_degree(m: int, d: int, seed: RngLike = None, method: str = "auto") -> Graph:
    """Exactly uniform graph on ``1..m`` with maximum degree at most ``d``."""
    if m < 0 or d < 0:
        raise ValueError("m and d must be nonnegative")
    edges = _sample_bounded_edges(m, d, as_rng(seed), method)
    return Graph(m, ((u + 1, v + 1) for u, v in edges))


# --- partitioned classes ------------------------------------------------------------


def partition_class_count(sizes: Sequence[int], d: int) -> int:
    """``|P_{n,pi}(l, d)|`` for any ordered partition with these part sizes."""
    if any(s < 0 for s in sizes) or d < 0:
        raise ValueError("sizes and d must be nonnegative")
    cross = (sum(sizes) ** 2 - sum(s * s for s in sizes)) // 2
    out = 1 << cross
    for s in sizes:
        out *= count_bounded_degree(s, d)
    return out


@dataclass(frozen=True)
class SizeVectorWeight:
    sizes: tuple[int, ...]
    weight: int  # multinomial * class count: number of (pi, G) pairs with these sizes


def _compositions(n: int, l: int) -> Iterator[tuple[int, ...]]:
    if l == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, l - 1):
            yield (first,) + rest


def _multinomial(sizes: Sequence[int]) -> int:
    out = 1
    total = 0
    for s in sizes:
        total += s
        out *= math.comb(total, s)
    return out


@lru_cache(maxsize=32)
def size_vector_weights(n: int, l: int, d: int) -> tuple[SizeVectorWeight, ...]:
    """Ordered size vectors in lexicographic order with their pair counts."""
    if l < 1:
        raise ValueError("l must be at least 1")
    if l > SIZE_VECTOR_CAP_L or (l > 1 and n > SIZE_VECTOR_CAP_N):
        raise CapExceeded(f"size-vector enumeration capped at n <= {SIZE_VECTOR_CAP_N}, l <= {SIZE_VECTOR_CAP_L}")
    return tuple(
        SizeVectorWeight(sizes, _multinomial(sizes) * partition_class_count(sizes, d)) for sizes in _compositions(n, l)
    )


@lru_cache(maxsize=32)
def _cumulative_weights(n: int, l: int, d: int) -> tuple[list[int], int]:
    acc = 0
    cum = []
    for w in size_vector_weights(n, l, d):
        acc += w.weight
        cum.append(acc)
    return cum, acc


def _sample_partitioned_raw(n: int, l: int, d: int, rng: random.Random) -> tuple[list[int], list[int]]:
    """Uniform ``(pi, G)`` pair; returns 0-based adjacency rows and part indices (1-based)."""
    vectors = size_vector_weights(n, l, d)
    cum, total = _cumulative_weights(n, l, d)
    x = rng.randrange(total)
    lo, hi = 0, len(cum) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if x < cum[mid]:
            hi = mid
        else:
            lo = mid + 1
    sizes = vectors[lo].sizes
    perm = list(range(n))
    rng.shuffle(perm)
    part = [0] * n
    members: list[list[int]] = []
    pos = 0
    for i, s in enumerate(sizes, start=1):
        block = sorted(perm[pos:pos + s])
        pos += s
        members.append(block)
        for v in block:
            part[v] = i
    masks = [0] * (l + 1)
    for v, p in enumerate(part):
        masks[p] |= 1 << v
    adj = [0] * n
    for u in range(1, n):
        other = ((1 << u) - 1) & ~masks[part[u]]
        if not other:
            continue
        row = rng.getrandbits(u) & other
        adj[u] |= row
        for w in iter_bits(row):
            adj[w] |= 1 << u
    for block in members:
        for a, b in _sample_bounded_edges(len(block), d, rng):
            u, v = block[a], block[b]
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    return adj, part


def sample_partitioned(n: int, l: int, d: int, seed: RngLike = None) -> tuple[Graph, Partition]:
    """Uniform pair ``(G, pi)`` with ``pi`` an ordered partition (parts may be empty) and ``G`` in ``P_{n,pi}(l,d)``."""
    adj, part = _sample_partitioned_raw(n, l, d, as_rng(seed))
    return Graph.from_adjacency(adj), Partition(l, tuple(part))


def sample_uniform_pld_with_partition(n: int, l: int, d: int, seed: RngLike = None, max_attempts: int = 1_000_000):
    """Rejection sampler; returns ``(G, pi, D)`` with ``G`` uniform over ``P_n(l, d)``.

    ``pi`` is the partition used to build the accepted graph and ``D`` the
    number of ordered partitions admitting a decomposition of ``G``.
    """
    rng = as_rng(seed)
    for _ in range(max_attempts):
        adj, part = _sample_partitioned_raw(n, l, d, rng)
        g = Graph.from_adjacency(adj)
        D = 1 if l == 1 else count_decompositions(g, l, d, "ordered-any")
        if D == 1 or rng.randrange(D) == 0:
            return g, Partition(l, tuple(part)), D
    raise RuntimeError(f"no sample accepted in {max_attempts} attempts")


def sample_uniform_pld(n: int, l: int, d: int, seed: RngLike = None) -> Graph:
    """Exactly uniform member of ``P_n(l, d)``."""
    return sample_uniform_pld_with_partition(n, l, d, seed)[0]


# --- enumeration oracle --------------------------------------------------------------

ENUMERATION_CAP = 8


def enumerate_class(n: int, pred: Optional[Callable[[Graph], bool]] = None) -> Iterator[Graph]:
    """All labelled graphs on ``n`` vertices accepted by ``pred``.

    Graph number ``b`` has pair ``i`` (pairs in lexicographic order) present
    iff bit ``i`` of ``b`` is set; graphs come out in increasing ``b``.
    """
    if n > ENUMERATION_CAP:
        raise CapExceeded(f"enumeration is capped at n <= {ENUMERATION_CAP}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    pairs = list(combinations(range(n), 2))
    for b in range(1 << len(pairs)):
        adj = [0] * n
        for i, (u, v) in enumerate(pairs):
            if (b >> i) & 1:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
        g = Graph.from_adjacency(adj)
        if pred is None or pred(g):
            yield g


def pld_predicate(l: int, d: int) -> Callable[[Graph], bool]:
    """Membership test for ``P(l, d)``."""
    return lambda g: has_decomposition(g, l, d)


# --- Markov chain cross-check ------------------------------------------------------------


def _toggle_steps(n: int, d: int, rng: random.Random, adj: list[int], steps: int) -> None:
    if n < 2:
        return
    for _ in range(steps):
        u = rng.randrange(n)
        v = rng.randrange(n - 1)
        if v >= u:
            v += 1
        if (adj[u] >> v) & 1:
            adj[u] &= ~(1 << v)
            adj[v] &= ~(1 << u)
        elif adj[u].bit_count() < d and adj[v].bit_count() < d:
            adj[u] |= 1 << v
            adj[v] |= 1 << u


def mcmc_toggle_chain(n: int, d: int, steps: int, seed: RngLike = None) -> Graph:
    """State after ``steps`` moves of the edge-toggle chain on ``P_n(1, d)``, started from the empty graph."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = as_rng(seed)
    adj = [0] * n
    _toggle_steps(n, d, rng, adj, steps)
    return Graph.from_adjacency(adj)


def mcmc_toggle_samples(n: int, d: int, samples: int, seed: RngLike = None, burn_in: int = 1000, thin: int = 1) -> Iterator[Graph]:
    """``samples`` states of one chain, after ``burn_in`` moves and every ``thin`` moves thereafter."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = as_rng(seed)
    adj = [0] * n
    _toggle_steps(n, d, rng, adj, burn_in)
    for _ in range(samples):
        _toggle_steps(n, d, rng, adj, thin)
        yield Graph.from_adjacency(list(adj))
