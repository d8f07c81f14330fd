#!/usr/bin/env python3
"""Permutation covers of the standard lattices over the fixture groups.

For every group prints one line per lattice: rank, cover structure, cover
rank and kernel rank.  Lattices with kernel rank 0 are permutation lattices.
"""

from __future__ import annotations

import argparse
import sys
import time

from permlat.exactla import RingSpec
from permlat.fixtures import augmentation_lattice, group, sign_lattices, twisted_induced
from permlat.latmod import perm_lattice
from permlat.recognize import recognize_permutation

DEFAULT_GROUPS = ["C2", "C4", "C2xC2", "D8", "Q8", "C3", "C9", "C3xC3"]


def survey(name: str, max_rank: int):
    g = group(name)
    ring = RingSpec.integers(g.p)
    lattices = [(f"R[G/{g.subgroup_label(s)}]", perm_lattice(g, s, ring)) for s in g.class_representatives]
    lattices += [(f"sign{i}", u) for i, u in enumerate(sign_lattices(g, ring))]
    lattices += [(f"monomial{i}", u) for i, u in enumerate(twisted_induced(g, ring))]
    lattices.append(("augmentation", augmentation_lattice(g, ring)))
    for label, u in lattices:
        if u.rank > max_rank:
            continue
        rep = recognize_permutation(u)
        yield label, u.rank, rep.structure.describe(g), rep.cover.cover_module.rank, rep.kernel.rank


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("groups", nargs="*", default=DEFAULT_GROUPS)
    ap.add_argument("--max-rank", type=int, default=32)
    args = ap.parse_args(argv)
    print(f"{'group':8} {'lattice':16} {'rank':>4}  {'cover':>5} {'kernel':>6}  structure")
    for name in args.groups:
        t0 = time.perf_counter()
        for label, rank, structure, crank, krank in survey(name, args.max_rank):
            print(f"{name:8} {label:16} {rank:4d}  {crank:5d} {krank:6d}  {structure}")
        print(f"{name}: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
