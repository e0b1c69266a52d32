"""Which complete multipartite patterns K_{1,s_1,...,s_l} force a triangle in some part?

Usage:
    python3 04_forbidden_patterns.py [--max-size S]

For each size vector the table shows the closed-form inclusion test next to
the exhaustive search, plus whether every admissible partition of the pattern
has a part containing a triangle.
"""

from __future__ import annotations

import argparse
import itertools

from almostpartite.forbidden import (
    LEMMA_VERTEX_CAP,
    brute_inclusion_check,
    find_cycle_lemma_counterexample,
    inclusion_criterion,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-size", type=int, default=4)
    args = ap.parse_args()

    print(f"{'sizes':<12} {'formula':>8} {'search':>8} {'triangle forced':>16}")
    for l in (1, 2, 3):
        for sizes in itertools.combinations_with_replacement(range(1, args.max_size + 1), l):
            if 1 + sum(sizes) > LEMMA_VERTEX_CAP:
                continue
            forced = find_cycle_lemma_counterexample(l, sizes) is None
            print(f"{str(sizes):<12} {str(inclusion_criterion(l, sizes)):>8} {str(brute_inclusion_check(l, sizes)):>8} {str(forced):>16}")


if __name__ == "__main__":
    main()
