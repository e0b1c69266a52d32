"""Watch first-order sentence probabilities settle as n grows.

Usage:
    python3 03_sentence_limits.py [--replicas R] [--seed S]

Small n are computed exactly by enumeration; larger n are estimated from the
exact uniform sampler.  Every run with the same seed prints the same table.
"""

from __future__ import annotations

import argparse

from almostpartite.campaign import CampaignConfig, convergence_report, format_report, run_campaign

SENTENCES = {
    "some vertex dominates": "exists x. forall y. (E(x,y) | x = y)",
    "no isolated vertex": "forall x. exists y. E(x,y)",
    "a triangle exists": "exists x. exists y. exists z. (E(x,y) & E(y,z) & E(x,z))",
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicas", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for name, text in SENTENCES.items():
        print(f"\n{name}:  {text}")
        exact = run_campaign(CampaignConfig("sentence-probability", [4, 5, 6], l=2, d=1, sentence=text, exact=True))
        sampled = run_campaign(
            CampaignConfig("sentence-probability", [16, 32, 64], replicas=args.replicas, l=2, d=1, sentence=text, seed=args.seed)
        )
        for r in exact:
            print(f"  n={r.n:<3} exact {r.exact}")
        print(format_report(convergence_report(exact + sampled)))


if __name__ == "__main__":
    main()
