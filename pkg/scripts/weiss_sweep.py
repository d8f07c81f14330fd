#!/usr/bin/env python3
"""Run the Weiss checker over seeded instances and the known counterexamples.

For each fixture group and central subgroup N of order p, draws ``--count``
random instances (sums of R[G/K] with K ∩ N = 1, hidden by a basis change)
and tallies the resulting statuses.  Exits 1 if any instance is not
verified, any counterexample fails the wrong hypothesis, or the theorem is
ever reported violated.
"""

from __future__ import annotations

import argparse
import random
import sys
from collections import Counter

from permlat.fixtures import group, known_counterexamples, random_weiss_instance
from permlat.recognize import WeissStatus, weiss_check

DEFAULT_GROUPS = ["C2", "C4", "C2xC2", "D8", "Q8", "C3", "C9", "C3xC3", "Heis27"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("groups", nargs="*", default=DEFAULT_GROUPS)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-rank", type=int, default=32)
    args = ap.parse_args(argv)
    bad = 0
    for name in args.groups:
        g = group(name)
        for j, n in enumerate(g.central_subgroups_order_p()):
            rng = random.Random(args.seed * 1000 + j)
            tally: Counter = Counter()
            for _ in range(args.count):
                u, _ = random_weiss_instance(g, n, rng, max_rank=args.max_rank)
                tally[weiss_check(u, n).status.value] += 1
            bad += args.count - tally[WeissStatus.VERIFIED.value]
            label = g.subgroup_label(n)
            print(f"{name:8} N={label:8} instances: {dict(tally)}")
            for cname, u, hyp in known_counterexamples(g, n):
                rep = weiss_check(u, n)
                ok = rep.status is WeissStatus.HYPOTHESIS_FAILED and rep.failed == (hyp,)
                bad += not ok
                print(f"{name:8} N={label:8} {cname:22} rank {u.rank:3d}: {rep.summary()}")
    print("all as expected" if not bad else f"{bad} unexpected results")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
