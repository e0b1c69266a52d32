"""Command-line entry point.

Exit status: 0 on success, 2 for invalid arguments or configuration, 3 when a
size cap would be exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .campaign import EXPERIMENTS, CampaignConfig, convergence_report, format_report, records_to_csv, run_campaign
from .census import (
    Seed,
    count_bounded_degree,
    enumerate_class,
    partition_class_count,
    pld_predicate,
    sample_partitioned,
    sample_uniform_pld_with_partition,
    size_vector_weights,
)
from .errors import CapExceeded, ConfigError
from .forbidden import MultipartitePattern, brute_inclusion_check, find_multipartite, inclusion_criterion, verify_cycle_lemma
from .graphio import GraphFormatError, format_graph_text, read_graph
from .logic import XiParams, ef_equivalent, xi_partition
from .poisson import estimate_poisson_params, pk_membership, signature

EXIT_CONFIG = 2
EXIT_CAP = 3


def _emit(obj, out: Optional[str]) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_count(args) -> None:
    if args.n is None:
        raise ConfigError("count needs --n")
    result = {"n": str(args.n), "l": str(args.l), "d": str(args.d)}
    if args.sizes:
        result["sizes"] = [str(s) for s in args.sizes]
        result["partition_class_count"] = str(partition_class_count(args.sizes, args.d))
    elif args.l == 1:
        result["bounded_degree_count"] = str(count_bounded_degree(args.n, args.d))
    else:
        result["pair_count"] = str(sum(w.weight for w in size_vector_weights(args.n, args.l, args.d)))
        if args.n <= 8:
            result["class_count"] = str(sum(1 for _ in enumerate_class(args.n, pld_predicate(args.l, args.d))))
    _emit(result, args.out)


def cmd_sample(args) -> None:
    if args.n is None:
        raise ConfigError("sample needs --n")
    seed = Seed(args.seed)
    if args.partitioned:
        g, pi = sample_partitioned(args.n, args.l, args.d, seed)
    else:
        g, pi, _ = sample_uniform_pld_with_partition(args.n, args.l, args.d, seed)
    _emit(format_graph_text(g, pi), args.out)


def cmd_enumerate(args) -> None:
    if args.n is None:
        raise ConfigError("enumerate needs --n")
    graphs = enumerate_class(args.n, pld_predicate(args.l, args.d))
    if args.count_only:
        _emit({"n": str(args.n), "l": str(args.l), "d": str(args.d), "count": str(sum(1 for _ in graphs))}, args.out)
    else:
        _emit("\n".join(format_graph_text(g) for g in graphs), args.out)


def cmd_xi(args) -> None:
    g, _ = read_graph(args.graph)
    res = xi_partition(g, XiParams(args.l, args.d))
    if res:
        _emit({"ok": True, "parts": [list(p) for p in res.parts()]}, args.out)
    else:
        _emit({"ok": False, "failure": res.kind, "witness": list(res.witness)}, args.out)


def cmd_ef(args) -> None:
    g, _ = read_graph(args.graph)
    h, _ = read_graph(args.other)
    _emit({"k": args.k, "equivalent": ef_equivalent(g, h, args.k)}, args.out)


def cmd_poisson(args) -> None:
    if args.estimate:
        if args.n is None:
            raise ConfigError("poisson --estimate needs --n")
        p = estimate_poisson_params(args.n, args.d, args.k, args.replicas, Seed(args.seed))
        _emit({"d": p.d, "lambdas": list(p.lambdas), "mus": list(p.mus), "provenance": list(p.provenance)}, args.out)
        return
    if not args.graph:
        raise ConfigError("poisson needs a graph file or --estimate")
    g, _ = read_graph(args.graph)
    sig = signature(g, args.l, args.d, args.k)
    out = {"signature": json.loads(sig.to_json()) if sig else {"failure": sig.kind, "witness": list(sig.witness)}}
    if 0 < args.eps < args.d:
        rep = pk_membership(g, args.l, args.d, args.k, args.eps, args.mu)
        out["pk"] = {
            "ok": rep.ok,
            "xi": rep.xi_ok,
            "rich": rep.rich,
            "decomposition": rep.decomposition_ok,
            "parts": [{"part": p.part, "size": p.size, "verdicts": {str(k): v for k, v in p.verdicts.items()}} for p in rep.parts],
        }
    _emit(out, args.out)


def cmd_forbid(args) -> None:
    if not args.sizes:
        raise ConfigError("forbid needs --sizes")
    sizes = sorted(args.sizes)
    pat = MultipartitePattern(tuple(sizes))
    if args.graph:
        g, _ = read_graph(args.graph)
        copy = find_multipartite(g, pat)
        _emit({"contains": copy is not None, "copy": [list(c) for c in copy] if copy else None}, args.out)
        return
    l = len(sizes)
    _emit(
        {
            "sizes": sizes,
            "cycle_lemma": verify_cycle_lemma(l, sizes),
            "inclusion_criterion": inclusion_criterion(l, sizes),
            "brute_inclusion": brute_inclusion_check(l, sizes),
        },
        args.out,
    )


def cmd_campaign(args) -> None:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = CampaignConfig.from_dict(data)
    else:
        if not args.experiment or not args.n:
            raise ConfigError("campaign needs --config or --experiment and --n")
        cfg = CampaignConfig(
            experiment=args.experiment,
            n_grid=list(args.n),
            replicas=args.replicas,
            l=args.l,
            d=args.d,
            k=args.k,
            eps=args.eps,
            mu=args.mu,
            seed=args.seed,
            sentence=args.sentence,
            pattern=args.sizes,
            exact=args.exact,
            workers=args.workers,
            out_csv=args.out,
            out_json=args.json_out,
        )
    records = run_campaign(cfg)
    if not cfg.out_csv:
        sys.stdout.write(records_to_csv(records))
    sys.stdout.write(format_report(convergence_report(records)) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--l", type=int, default=2, help="number of parts")
    common.add_argument("--d", type=int, default=1, help="own-part degree bound")
    common.add_argument("--k", type=int, default=1, help="quantifier rank / object-size exponent")
    common.add_argument("--eps", type=float, default=1.0)
    common.add_argument("--mu", type=float, default=0.1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--replicas", type=int, default=100)
    common.add_argument("--out", help="output path (default: stdout)")

    p = argparse.ArgumentParser(prog="almostpartite", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("count", parents=[common], help="exact class sizes")
    s.add_argument("--n", type=int)
    s.add_argument("--sizes", type=int, nargs="+", help="part sizes for a fixed partition")
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("sample", parents=[common], help="exact uniform sample in graph-file format")
    s.add_argument("--n", type=int)
    s.add_argument("--partitioned", action="store_true", help="sample a (graph, partition) pair instead")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("enumerate", parents=[common], help="all members of P_n(l,d) for n <= 8")
    s.add_argument("--n", type=int)
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("xi", parents=[common], help="partition defined by the xi formula")
    s.add_argument("graph")
    s.set_defaults(func=cmd_xi)

    s = sub.add_parser("ef", parents=[common], help="k-round Ehrenfeucht-Fraisse equivalence")
    s.add_argument("graph")
    s.add_argument("other")
    s.set_defaults(func=cmd_ef)

    s = sub.add_parser("poisson", parents=[common], help="object signature and typicality report")
    s.add_argument("graph", nargs="?")
    s.add_argument("--n", type=int)
    s.add_argument("--estimate", action="store_true", help="estimate cycle/path means from samples")
    s.set_defaults(func=cmd_poisson)

    s = sub.add_parser("forbid", parents=[common], help="complete multipartite pattern tools")
    s.add_argument("graph", nargs="?")
    s.add_argument("--sizes", type=int, nargs="+")
    s.set_defaults(func=cmd_forbid)

    s = sub.add_parser("campaign", parents=[common], help="run a convergence experiment")
    s.add_argument("--config", help="JSON file with CampaignConfig fields")
    s.add_argument("--experiment", choices=EXPERIMENTS)
    s.add_argument("--n", type=int, nargs="+", help="n-grid")
    s.add_argument("--sentence")
    s.add_argument("--sizes", type=int, nargs="+", help="pattern class sizes for forb-census")
    s.add_argument("--exact", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--json-out")
    s.set_defaults(func=cmd_campaign)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, GraphFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
