"""Reproducible experiment campaigns over growing ``n``.

Each replica ``r`` at size ``n`` draws from its own stream
``Seed(master, (n, r))``, so results do not depend on scheduling or on the
number of worker processes.  Wall-clock time is measured but left out of the
written files unless requested, keeping reruns byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from scipy import stats

from . import __version__
from .canon import canonical_form
from .census import Seed, enumerate_class, pld_predicate, sample_uniform_pld_with_partition
from .decomp import Partition, count_decompositions, iter_valid_block_assignments
from .errors import CapExceeded, ConfigError
from .forbidden import MultipartitePattern, contains_multipartite
from .graph import Graph
from .logic import XiParams, compile_formula, ef_equivalent, parse_sentence, xi_partition
from .poisson import empirical_fit, fit_pvalue

__all__ = [
    "EXPERIMENTS",
    "CampaignConfig",
    "ResultRecord",
    "run_campaign",
    "convergence_report",
    "format_report",
    "records_to_csv",
    "records_to_json",
]

EXPERIMENTS = (
    "xi-recovery",
    "unique-decomposition",
    "poisson-fit",
    "sentence-probability",
    "ef-classes",
    "forb-census",
)
EXACT_CAP = 8
FORB_ATTEMPTS = 200_000


@dataclass
class CampaignConfig:
    experiment: str
    n_grid: Sequence[int]
    replicas: int = 100
    l: int = 2
    d: int = 1
    k: int = 1
    eps: float = 1.0
    mu: float = 0.1
    seed: int = 0
    sentence: Optional[str] = None
    pattern: Optional[Sequence[int]] = None
    exact: bool = False
    workers: int = 1
    out_csv: Optional[str] = None
    out_json: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        grid = list(self.n_grid)
        if not grid:
            raise ConfigError("n-grid is empty")
        if any(not isinstance(n, int) or n < 1 for n in grid):
            raise ConfigError("n-grid entries must be positive integers")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n-grid must be strictly increasing")
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise ConfigError("replicas must be at least 1")
        if not 1 <= self.l <= 4:
            raise ConfigError("l must lie in 1..4")
        if self.d < 0 or self.k < 0:
            raise ConfigError("d and k must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.experiment == "xi-recovery" and self.l < 2:
            raise ConfigError("xi-recovery needs l >= 2")
        if self.experiment == "poisson-fit":
            if self.d < 1:
                raise ConfigError("poisson-fit needs d >= 1")
            if not 0 < self.eps < self.d:
                raise ConfigError("need 0 < eps < d")
        if self.experiment == "sentence-probability":
            if not self.sentence:
                raise ConfigError("sentence-probability needs a sentence")
            try:
                parse_sentence(self.sentence)
            except ValueError as exc:
                raise ConfigError(f"bad sentence: {exc}") from None
        if self.experiment == "ef-classes":
            if self.k > 3:
                raise ConfigError("ef-classes supports k <= 3")
            if max(grid) > 12:
                raise ConfigError("ef-classes supports n <= 12")
        if self.experiment == "forb-census":
            if not self.pattern:
                raise ConfigError("forb-census needs a pattern (class sizes s_1..s_l)")
            try:
                MultipartitePattern(tuple(self.pattern))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.exact and max(grid) > EXACT_CAP:
            raise ConfigError(f"exact mode needs n <= {EXACT_CAP}")
        if self.l > 1 and max(grid) > 300 and self.experiment != "forb-census":
            raise ConfigError("n is capped at 300 for l > 1")


@dataclass
class ResultRecord:
    experiment: str
    n: int
    replicas: int
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    seed: int
    version: str
    exact: str = ""
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0


# --- per-replica work (module level so worker processes can pickle it) -----------------


def _replica(cfg: CampaignConfig, n: int, r: int):
    seed = Seed(cfg.seed, (n, r))
    exp = cfg.experiment
    if exp == "forb-census":
        return _forb_replica(cfg, n, seed)
    g, pi, _ = sample_uniform_pld_with_partition(n, cfg.l, cfg.d, seed)
    if exp == "xi-recovery":
        x = xi_partition(g, XiParams(cfg.l, cfg.d))
        return bool(x) and x.same_blocks(pi)
    if exp == "unique-decomposition":
        return count_decompositions(g, cfg.l, cfg.d, "unordered-nonempty") == 1
    if exp == "poisson-fit":
        return _part_degree_counts(g, pi.assign, cfg.l, cfg.d)
    if exp == "sentence-probability":
        return compile_formula(parse_sentence(cfg.sentence))(g)
    if exp == "ef-classes":
        return g.adj
    raise ConfigError(f"unknown experiment {exp!r}")


def _forb_replica(cfg: CampaignConfig, n: int, seed: Seed):
    pat = MultipartitePattern(tuple(cfg.pattern))
    rng = seed.rng()
    pairs = n * (n - 1) // 2
    for _ in range(FORB_ATTEMPTS):
        bits = rng.getrandbits(pairs) if pairs else 0
        g = _graph_from_bits(n, bits)
        if not contains_multipartite(g, pat):
            return pld_predicate(pat.l, pat.sizes[0] - 1)(g)
    raise CapExceeded(f"no pattern-free graph found in {FORB_ATTEMPTS} attempts at n={n}")


def _graph_from_bits(n: int, bits: int) -> Graph:
    adj = [0] * n
    i = 0
    for u in range(n):
        for v in range(u + 1, n):
            if (bits >> i) & 1:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
            i += 1
    return Graph.from_adjacency(adj)


def _part_degree_counts(g: Graph, assign: Sequence[int], l: int, d: int) -> list[tuple[int, int, int]]:
    """Per part: (size, vertices of own-degree d-2, vertices of own-degree d-1)."""
    masks = [0] * (l + 1)
    for v, p in enumerate(assign):
        masks[p] |= 1 << v
    out = []
    for p in range(1, l + 1):
        m = masks[p]
        q = w = 0
        size = m.bit_count()
        for v in range(g.n):
            if (m >> v) & 1:
                deg = (g.adj[v] & m).bit_count()
                q += deg == d - 2
                w += deg == d - 1
        out.append((size, q, w))
    return out


# --- aggregation -----------------------------------------------------------------------------


def _proportion_record(cfg: CampaignConfig, n: int, hits: int, total: int) -> ResultRecord:
    p = hits / total
    se = math.sqrt(p * (1 - p) / total)
    lo = 0.0 if hits == 0 else float(stats.beta.ppf(0.025, hits, total - hits + 1))
    hi = 1.0 if hits == total else float(stats.beta.ppf(0.975, hits + 1, total - hits))
    return ResultRecord(cfg.experiment, n, total, p, se, lo, hi, cfg.seed, __version__, extra={"hits": str(hits)})


def _exact_record(cfg: CampaignConfig, n: int, value: Fraction, size: int, extra: Optional[dict] = None) -> ResultRecord:
    v = float(value)
    return ResultRecord(cfg.experiment, n, size, v, 0.0, v, v, cfg.seed, __version__, exact=f"{value.numerator}/{value.denominator}", extra=extra or {})


def _poisson_record(cfg: CampaignConfig, n: int, outcomes: list, weights: Optional[list] = None) -> ResultRecord:
    qs, in_window, total = [], 0, 0
    for per_part in outcomes:
        for size, q, w in per_part:
            qs.append(q)
            lo, hi = math.sqrt((cfg.d - cfg.eps) * size), math.sqrt((cfg.d + cfg.eps) * size)
            in_window += lo <= w <= hi
            total += 1
    mean = max(cfg.d - 1, 0)
    fit = empirical_fit(qs, mean)
    extra = {
        "chisq": repr(fit.chisq),
        "pvalue": repr(fit_pvalue(qs, mean)),
        "window_fraction": repr(in_window / total),
        "mean_q": repr(sum(qs) / len(qs)),
    }
    return ResultRecord(cfg.experiment, n, len(outcomes), fit.tv, 0.0, fit.tv, fit.tv, cfg.seed, __version__, extra=extra)


def _ef_classes(cfg: CampaignConfig, graphs: Iterable[tuple[Graph, Fraction]]) -> tuple[Fraction, int]:
    """Mass of the largest elementary-equivalence class and the number of classes."""
    by_iso: dict = {}
    reps: dict = {}
    for g, w in graphs:
        c = canonical_form(g)
        by_iso[c] = by_iso.get(c, 0) + w
        reps.setdefault(c, g)
    classes: list[list] = []  # [representative, mass]
    for c in sorted(by_iso):
        g = reps[c]
        for cls in classes:
            if ef_equivalent(cls[0], g, cfg.k):
                cls[1] += by_iso[c]
                break
        else:
            classes.append([g, by_iso[c]])
    total = sum(cls[1] for cls in classes)
    return Fraction(max(cls[1] for cls in classes)) / Fraction(total), len(classes)


def _sampled_record(cfg: CampaignConfig, n: int, outcomes: list) -> ResultRecord:
    exp = cfg.experiment
    if exp == "poisson-fit":
        return _poisson_record(cfg, n, outcomes)
    if exp == "ef-classes":
        share, count = _ef_classes(cfg, ((Graph.from_adjacency(adj), 1) for adj in outcomes))
        hits = share.numerator * len(outcomes) // share.denominator
        rec = _proportion_record(cfg, n, hits, len(outcomes))
        rec.extra["classes"] = str(count)
        return rec
    return _proportion_record(cfg, n, sum(bool(o) for o in outcomes), len(outcomes))


def _exact_pairs(n: int, l: int, d: int):
    """Uniform (G, pi) law of the rejection sampler: yields (G, block assignment, blocks used, weight)."""
    members = list(enumerate_class(n, pld_predicate(l, d)))
    total = len(members)
    for g in members:
        D = count_decompositions(g, l, d, "ordered-any")
        for blocks in iter_valid_block_assignments(g, l, d):
            j = max(blocks) if blocks else 0
            yield g, blocks, j, Fraction(math.perm(l, j), D * total)


def _exact_record_for(cfg: CampaignConfig, n: int) -> ResultRecord:
    exp, l, d = cfg.experiment, cfg.l, cfg.d
    if exp == "forb-census":
        pat = MultipartitePattern(tuple(cfg.pattern))
        forb = [g for g in enumerate_class(n) if not contains_multipartite(g, pat)]
        inside = sum(1 for g in forb if pld_predicate(pat.l, pat.sizes[0] - 1)(g))
        return _exact_record(cfg, n, Fraction(inside, len(forb)), len(forb))
    if exp == "xi-recovery":
        value = Fraction(0)
        p = XiParams(l, d)
        cache: dict = {}
        for g, blocks, j, w in _exact_pairs(n, l, d):
            if g not in cache:
                cache[g] = xi_partition(g, p)
            x = cache[g]
            if x and j == l and x.same_blocks(Partition(l, blocks)):
                value += w
        return _exact_record(cfg, n, value, 0)
    if exp == "poisson-fit":
        law: dict = {}
        window = Fraction(0)
        for g, blocks, j, w in _exact_pairs(n, l, d):
            counts = _part_degree_counts(g, blocks, l, d)
            # labels unused by the block assignment show up as empty parts
            for size, q, deg1 in counts:
                law[q] = law.get(q, 0) + w / l
                lo, hi = math.sqrt((d - cfg.eps) * size), math.sqrt((d + cfg.eps) * size)
                if lo <= deg1 <= hi:
                    window += w / l
        mean = max(d - 1, 0)
        top = max(law)
        pois = stats.poisson.pmf(range(top + 1), mean) if mean else [1.0] + [0.0] * top
        tail = float(stats.poisson.sf(top, mean)) if mean else 0.0
        tv = 0.5 * (sum(abs(float(law.get(q, 0)) - pois[q]) for q in range(top + 1)) + tail)
        return ResultRecord(exp, n, 0, tv, 0.0, tv, tv, cfg.seed, __version__, extra={"window_fraction": repr(float(window))})
    members = list(enumerate_class(n, pld_predicate(l, d)))
    size = len(members)
    if exp == "unique-decomposition":
        hits = sum(1 for g in members if count_decompositions(g, l, d, "unordered-nonempty") == 1)
        return _exact_record(cfg, n, Fraction(hits, size), size)
    if exp == "sentence-probability":
        f = compile_formula(parse_sentence(cfg.sentence))
        return _exact_record(cfg, n, Fraction(sum(1 for g in members if f(g)), size), size)
    if exp == "ef-classes":
        share, count = _ef_classes(cfg, ((g, 1) for g in members))
        return _exact_record(cfg, n, share, size, {"classes": str(count)})
    raise ConfigError(f"unknown experiment {exp!r}")


def run_campaign(cfg: CampaignConfig) -> list[ResultRecord]:
    """Run every grid point; results are flushed to the configured outputs after each one."""
    cfg.validate()
    records: list[ResultRecord] = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 and not cfg.exact else None
    try:
        for n in cfg.n_grid:
            start = time.perf_counter()
            if cfg.exact:
                rec = _exact_record_for(cfg, n)
            else:
                if pool is not None:
                    chunk = max(1, cfg.replicas // (4 * cfg.workers))
                    outcomes = list(pool.map(_replica, [cfg] * cfg.replicas, [n] * cfg.replicas, range(cfg.replicas), chunksize=chunk))
                else:
                    outcomes = [_replica(cfg, n, r) for r in range(cfg.replicas)]
                rec = _sampled_record(cfg, n, outcomes)
            rec.wall_time = time.perf_counter() - start
            records.append(rec)
            _flush(cfg, records)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def _flush(cfg: CampaignConfig, records: list[ResultRecord]) -> None:
    if cfg.out_csv:
        Path(cfg.out_csv).write_text(records_to_csv(records))
    if cfg.out_json:
        Path(cfg.out_json).write_text(records_to_json(records, cfg))


_RUN_ONLY_FIELDS = ("workers", "out_csv", "out_json")
_CSV_FIELDS = ("experiment", "n", "replicas", "estimate", "stderr", "ci_low", "ci_high", "exact", "seed", "version", "extra")


def records_to_csv(records: Sequence[ResultRecord], include_timing: bool = False) -> str:
    buf = io.StringIO()
    fields = _CSV_FIELDS + (("wall_time",) if include_timing else ())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        row = asdict(r)
        row["extra"] = json.dumps(r.extra, sort_keys=True)
        w.writerow([repr(row[f]) if isinstance(row[f], float) else row[f] for f in fields])
    return buf.getvalue()


def records_to_json(records: Sequence[ResultRecord], cfg: Optional[CampaignConfig] = None, include_timing: bool = False) -> str:
    rows = []
    for r in records:
        row = asdict(r)
        if not include_timing:
            row.pop("wall_time")
        rows.append(row)
    config = None
    if cfg is not None:
        # where and how wide a run executes does not change its results
        config = {k: v for k, v in asdict(cfg).items() if k not in _RUN_ONLY_FIELDS}
    body = {"config": config, "records": rows}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def convergence_report(records: Sequence[ResultRecord]) -> list[dict]:
    """One row per n (sorted): estimate, estimate +- 2 stderr, and the change from the previous row."""
    ids = {r.experiment for r in records}
    if len(ids) > 1:
        raise ValueError(f"records mix experiments: {', '.join(sorted(ids))}")
    rows = []
    prev = None
    for r in sorted(records, key=lambda r: r.n):
        rows.append(
            {
                "n": r.n,
                "replicas": r.replicas,
                "estimate": r.estimate,
                "low": r.estimate - 2 * r.stderr,
                "high": r.estimate + 2 * r.stderr,
                "diff": None if prev is None else abs(r.estimate - prev),
            }
        )
        prev = r.estimate
    return rows


def format_report(rows: Sequence[dict]) -> str:
    lines = [f"{'n':>6} {'reps':>7} {'estimate':>10} {'-2se':>9} {'+2se':>9} {'|diff|':>9}"]
    for row in rows:
        diff = "" if row["diff"] is None else f"{row['diff']:.4f}"
        lines.append(
            f"{row['n']:>6} {row['replicas']:>7} {row['estimate']:>10.4f} {row['low']:>9.4f} {row['high']:>9.4f} {diff:>9}"
        )
    return "\n".join(lines)
