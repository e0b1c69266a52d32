"""Small Poisson objects, their neighbourhoods, and the Poisson limit law.

For a graph of maximum degree at most ``d`` and object-size bound ``t``, the
small objects are: vertices of degree ``d - 2``; cycles of length ``3..t``;
paths with ``1..t`` edges whose two endpoints have degree ``d - 1``.  A path
with ``j`` edges has ``j + 1`` vertices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .canon import canonical_form
from .census import RngLike, as_rng, sample_bounded_degree
from .decomp import Partition, decomposition_from_partition, is_rich
from .graph import Graph, _bfs_layers, components, induced_subgraph, iter_bits
from .logic import XiFailure, XiParams, xi_partition

__all__ = [
    "SmallObjectCounts",
    "count_small_objects",
    "iter_short_cycles",
    "iter_flagged_paths",
    "object_support",
    "np_ball",
    "PartReport",
    "PkReport",
    "pk_membership",
    "PoissonSignature",
    "signature",
    "signature_plus",
    "certificate_to_json",
    "PoissonParams",
    "estimate_poisson_params",
    "poisson_mass",
    "FitResult",
    "empirical_fit",
    "fit_pvalue",
]


class SmallObjectCounts(NamedTuple):
    q: int
    cycles: tuple[int, ...]  # r_3..r_t
    paths: tuple[int, ...]  # s_1..s_t


def _check_degree(g: Graph, d: int) -> None:
    for v, row in enumerate(g.adj, start=1):
        if row.bit_count() > d:
            raise ValueError(f"vertex {v} has degree {row.bit_count()} > {d}")


def iter_short_cycles(g: Graph, max_len: int) -> Iterator[tuple[int, ...]]:
    """Each cycle of length ``3..max_len`` once, as a 0-based vertex sequence starting at its minimum."""
    adj = g.adj
    for s in range(g.n):
        path = [s]
        on = 1 << s

        def rec(on: int):
            last = path[-1]
            if len(path) >= 3 and (adj[last] >> s) & 1 and path[1] < last:
                yield tuple(path)
            if len(path) == max_len:
                return
            for w in iter_bits(adj[last] & ~on & ~((1 << (s + 1)) - 1)):
                path.append(w)
                yield from rec(on | (1 << w))
                path.pop()

        yield from rec(on)


def iter_flagged_paths(g: Graph, d: int, max_edges: int) -> Iterator[tuple[int, ...]]:
    """Paths with ``1..max_edges`` edges whose endpoints have degree ``d - 1``, each once (0-based)."""
    adj = g.adj
    flagged = [row.bit_count() == d - 1 for row in adj]
    for a in range(g.n):
        if not flagged[a]:
            continue
        path = [a]

        def rec(on: int):
            last = path[-1]
            if len(path) >= 2 and flagged[last] and a < last:
                yield tuple(path)
            if len(path) == max_edges + 1:
                return
            for w in iter_bits(adj[last] & ~on):
                path.append(w)
                yield from rec(on | (1 << w))
                path.pop()

        yield from rec(1 << a)


def count_small_objects(g: Graph, d: int, t: int) -> SmallObjectCounts:
    """``(q, (r_3..r_t), (s_1..s_t))`` for a graph of maximum degree at most ``d``."""
    _check_degree(g, d)
    q = sum(1 for row in g.adj if row.bit_count() == d - 2)
    r = [0] * max(t - 2, 0)
    for cyc in iter_short_cycles(g, t):
        r[len(cyc) - 3] += 1
    s = [0] * max(t, 0)
    for p in iter_flagged_paths(g, d, t):
        s[len(p) - 2] += 1
    return SmallObjectCounts(q, tuple(r), tuple(s))


def object_support(g: Graph, d: int, size: int) -> int:
    """0-based mask of all vertices lying on some small Poisson object."""
    _check_degree(g, d)
    mask = 0
    for v, row in enumerate(g.adj):
        if row.bit_count() == d - 2:
            mask |= 1 << v
    for cyc in iter_short_cycles(g, size):
        for v in cyc:
            mask |= 1 << v
    for p in iter_flagged_paths(g, d, size):
        for v in p:
            mask |= 1 << v
    return mask


def _ball_mask(g: Graph, mask: int, t: int) -> int:
    out = 0
    for layer in _bfs_layers(g, mask, limit=t):
        out |= layer
    return out


def np_ball(g: Graph, d: int, k: int, t: int) -> tuple[int, ...]:
    """Vertices within distance ``t`` of a small Poisson object sized by ``5**k``."""
    if t < 0:
        raise ValueError("radius must be nonnegative")
    support = object_support(g, d, 5**k)
    if not support:
        return ()
    return tuple(i + 1 for i in iter_bits(_ball_mask(g, support, t)))


# --- P^k membership ------------------------------------------------------------------


@dataclass
class PartReport:
    part: int
    size: int
    verdicts: dict = field(default_factory=dict)  # property number -> bool
    witnesses: dict = field(default_factory=dict)  # property number -> witness (original labels)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())


@dataclass
class PkReport:
    k: int
    eps: float
    mu: float
    s: int
    t: int
    partition: object  # Partition or XiFailure
    xi_ok: bool
    rich: bool
    decomposition_ok: bool
    parts: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.xi_ok and self.rich and self.decomposition_ok and all(p.ok for p in self.parts)


def _check_part(h: Graph, labels: Sequence[int], d: int, s: int, t: int, eps: float, n_prime: int, report: PartReport) -> None:
    lab = lambda v: labels[v]  # noqa: E731
    degs = [row.bit_count() for row in h.adj]
    bad = [v for v in range(h.n) if degs[v] < d - 2]
    report.verdicts[1] = not bad
    if bad:
        report.witnesses[1] = lab(bad[0])

    count = sum(1 for x in degs if x == d - 1)
    lo, hi = math.sqrt((d - eps) * n_prime), math.sqrt((d + eps) * n_prime)
    report.verdicts[2] = lo <= count <= hi
    if not report.verdicts[2]:
        report.witnesses[2] = (count, lo, hi)

    cycles = list(iter_short_cycles(h, s))
    cmasks = []
    for c in cycles:
        m = 0
        for v in c:
            m |= 1 << v
        cmasks.append(m)
    balls = [_ball_mask(h, m, t) for m in cmasks]

    report.verdicts[3] = True
    for i, j in combinations(range(len(cycles)), 2):
        if balls[i] & cmasks[j]:
            report.verdicts[3] = False
            report.witnesses[3] = (tuple(map(lab, cycles[i])), tuple(map(lab, cycles[j])))
            break

    low = 0
    for v in range(h.n):
        if degs[v] < d:
            low |= 1 << v
    report.verdicts[4] = True
    for c, b in zip(cycles, balls):
        hit = b & low
        if hit:
            v = (hit & -hit).bit_length() - 1
            report.verdicts[4] = False
            report.witnesses[4] = (lab(v), tuple(map(lab, c)))
            break

    weak = [v for v in range(h.n) if degs[v] <= d - 1]
    near = {v: _ball_mask(h, 1 << v, t) for v in weak}
    report.verdicts[5] = True
    for a, b, c in combinations(weak, 3):
        if (near[a] >> b) & 1 and (near[a] >> c) & 1 and (near[b] >> c) & 1:
            report.verdicts[5] = False
            report.witnesses[5] = (lab(a), lab(b), lab(c))
            break

    report.verdicts[6] = True
    for v in weak:
        for w in iter_bits(near[v]):
            if w != v and degs[w] <= d - 2:
                report.verdicts[6] = False
                report.witnesses[6] = (lab(v), lab(w))
                break
        if not report.verdicts[6]:
            break

    if d >= 3:
        small = [c for c in components(h) if len(c) <= t]
        report.verdicts[7] = not small
        if small:
            report.witnesses[7] = tuple(labels[v - 1] for v in small[0])


def pk_membership(g: Graph, l: int, d: int, k: int, eps: float, mu: float, whole_graph_n: bool = False) -> PkReport:
    """Check the typical-graph conditions with ``s = 5**k`` and ``t = 5**(k+1)``.

    Property (2) uses the part size as ``n`` unless ``whole_graph_n`` is set.
    """
    if not 0 < eps < d:
        raise ValueError("need 0 < eps < d")
    if mu <= 0:
        raise ValueError("need mu > 0")
    if k < 0:
        raise ValueError("need k >= 0")
    s, t = 5**k, 5 ** (k + 1)
    if l < 2:
        pi = Partition(1, (1,) * g.n, "unordered-nonempty") if g.n else Partition(1, (), "ordered-any")
    else:
        pi = xi_partition(g, XiParams(l, d))
    report = PkReport(k, eps, mu, s, t, pi, bool(pi), False, False)
    if not pi:
        return report
    report.rich = is_rich(pi, mu * g.n)
    dec = decomposition_from_partition(g, pi, d)
    report.decomposition_ok = bool(dec)
    if not dec:
        return report
    for i, part in enumerate(pi.parts(), start=1):
        h, labels = induced_subgraph(g, part)
        pr = PartReport(i, len(part))
        _check_part(h, labels, d, s, t, eps, g.n if whole_graph_n else len(part), pr)
        report.parts.append(pr)
    return report


# --- signatures ---------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonSignature:
    """Per-part small-object counts, parts sorted so the value ignores part order."""

    l: int
    d: int
    k: int
    parts: tuple  # tuple of SmallObjectCounts, sorted

    @property
    def t(self) -> int:
        return 5**self.k

    def to_json(self) -> str:
        body = {
            "l": str(self.l),
            "d": str(self.d),
            "k": str(self.k),
            "parts": [
                {
                    "q": str(p.q),
                    "r": {str(j): str(c) for j, c in enumerate(p.cycles, start=3)},
                    "s": {str(j): str(c) for j, c in enumerate(p.paths, start=1)},
                }
                for p in self.parts
            ],
        }
        return json.dumps(body, sort_keys=True, separators=(",", ":"))


def _parts_or_failure(g: Graph, l: int, d: int):
    if l < 2:
        return Partition(1, (1,) * g.n)
    pi = xi_partition(g, XiParams(l, d))
    if not pi:
        return pi
    dec = decomposition_from_partition(g, pi, d)
    if not dec:
        return XiFailure("no-decomposition", (dec.vertex,))
    return pi


def signature(g: Graph, l: int, d: int, k: int):
    """The per-part object census (``t = 5**k``), or the xi failure."""
    pi = _parts_or_failure(g, l, d)
    if not pi:
        return pi
    t = 5**k
    counts = []
    for part in pi.parts():
        h, _ = induced_subgraph(g, part)
        counts.append(count_small_objects(h, d, t))
    return PoissonSignature(l, d, k, tuple(sorted(counts)))


def signature_plus(g: Graph, l: int, d: int, k: int):
    """Canonical certificate of ``G[U]`` coloured by part, ``U`` the union of per-part NP-balls of radius ``5**k``.

    Minimised over all relabellings of the part colours.
    """
    pi = _parts_or_failure(g, l, d)
    if not pi:
        return pi
    radius = 5**k
    union: list[int] = []
    for part in pi.parts():
        h, labels = induced_subgraph(g, part)
        union.extend(labels[v - 1] for v in np_ball(h, d, k, radius))
    sub, labels = induced_subgraph(g, union)
    colours = [pi.part_of(v) for v in labels]
    best = None
    for perm in permutations(range(1, pi.l + 1)):
        cert = canonical_form(sub, [perm[c - 1] for c in colours])
        if best is None or cert < best:
            best = cert
    return best


def certificate_to_json(cert: tuple) -> str:
    n, colours, rows = cert
    body = {"n": str(n), "colours": [str(c) for c in colours], "rows": [str(r) for r in rows]}
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


# --- Poisson law -------------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonParams:
    """Cycle means ``lambdas`` (lengths 3..t) and path means ``mus`` (1..t edges)."""

    d: int
    lambdas: tuple[float, ...]
    mus: tuple[float, ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.lambdas) + 2 != len(self.mus):
            raise ValueError("need lambdas for lengths 3..t and mus for 1..t")
        if any(not x > 0 for x in self.lambdas + self.mus):
            raise ValueError("all means must be positive")
        prov = self.provenance or ("user-supplied",) * (len(self.lambdas) + len(self.mus))
        if len(prov) != len(self.lambdas) + len(self.mus):
            raise ValueError("one provenance tag per mean")
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "mus", tuple(float(x) for x in self.mus))
        object.__setattr__(self, "provenance", tuple(prov))

    @property
    def t(self) -> int:
        return len(self.mus)


def estimate_poisson_params(n: int, d: int, k: int, samples: int, seed: RngLike = None) -> PoissonParams:
    """Means of the cycle and flagged-path counts over uniform draws from ``P_n(1, d)``."""
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = as_rng(seed)
    t = 5**k
    r = np.zeros(max(t - 2, 0))
    s = np.zeros(t)
    for _ in range(samples):
        c = count_small_objects(sample_bounded_degree(n, d, rng), d, t)
        r += c.cycles
        s += c.paths
    r /= samples
    s /= samples
    if (r <= 0).any() or (s <= 0).any():
        raise ValueError("some object never appeared; increase the sample count or n")
    tags = ("empirically-estimated",) * (len(r) + len(s))
    return PoissonParams(d, tuple(r.tolist()), tuple(s.tolist()), tags)


def _pmf(x: int, mean: float) -> float:
    if mean == 0:
        return 1.0 if x == 0 else 0.0
    return math.exp(x * math.log(mean) - mean - math.lgamma(x + 1))


def poisson_mass(sig: PoissonSignature, params: PoissonParams) -> float:
    """Limit probability of the signature's class under independent Poisson counts."""
    t = sig.t
    if params.t != t:
        raise ValueError(f"parameters cover t={params.t}, signature needs t={t}")
    if params.d != sig.d:
        raise ValueError("degree bound mismatch")
    base = max(sig.d - 1, 0)
    out = 1.0
    for part in sig.parts:
        out *= _pmf(part.q, base)
        for c, lam in zip(part.cycles, params.lambdas):
            out *= _pmf(c, lam)
        for c, m in zip(part.paths, params.mus):
            out *= _pmf(c, m)
    return out


class FitResult(NamedTuple):
    tv: float
    chisq: float


def _fit_bins(samples: Sequence[int], mean: float):
    arr = np.asarray(samples, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("no samples")
    if (arr < 0).any():
        raise ValueError("counts must be nonnegative")
    if mean < 0:
        raise ValueError("mean must be nonnegative")
    top = int(arr.max())
    emp = np.bincount(arr, minlength=top + 1) / arr.size
    if mean == 0:
        pois = np.zeros(top + 1)
        pois[0] = 1.0
        tail = 0.0
    else:
        pois = stats.poisson.pmf(np.arange(top + 1), mean)
        tail = float(stats.poisson.sf(top, mean))
    return arr.size, emp, pois, tail


def empirical_fit(samples: Sequence[int], mean: float) -> FitResult:
    """Total variation and Pearson statistic of the sample law against Poisson(``mean``).

    The Poisson mass above the largest observation is lumped into one bin;
    bins are pooled left to right until each expects at least 5 observations.
    """
    size, emp, pois, tail = _fit_bins(samples, mean)
    tv = 0.5 * (float(np.abs(emp - pois).sum()) + tail)
    chisq, _ = _pearson(size, emp, pois, tail)
    return FitResult(tv, chisq)


def _pearson(size: int, emp, pois, tail) -> tuple[float, int]:
    observed = list(emp * size) + [0.0]
    expected = list(pois * size) + [tail * size]
    bins: list[list[float]] = []
    cur_o = cur_e = 0.0
    for o, e in zip(observed, expected):
        cur_o += o
        cur_e += e
        if cur_e >= 5:
            bins.append([cur_o, cur_e])
            cur_o = cur_e = 0.0
    if cur_e > 0 or cur_o > 0:
        if bins:
            bins[-1][0] += cur_o
            bins[-1][1] += cur_e
        else:
            bins.append([cur_o, cur_e])
    chisq = sum((o - e) ** 2 / e for o, e in bins if e > 0)
    return float(chisq), len(bins)


def fit_pvalue(samples: Sequence[int], mean: float) -> float:
    """Upper-tail chi-square p-value of :func:`empirical_fit`'s statistic (bins - 1 degrees of freedom)."""
    size, emp, pois, tail = _fit_bins(samples, mean)
    chisq, nbins = _pearson(size, emp, pois, tail)
    if nbins < 2:
        return 1.0
    return float(stats.chi2.sf(chisq, nbins - 1))
