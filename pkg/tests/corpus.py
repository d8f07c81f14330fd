"""Seeded lattices and maps shared by the unit and acceptance tests."""

from __future__ import annotations

import random

from permlat.exactla import ExactMatrix, RingSpec
from permlat.fixtures import (
    augmentation_lattice,
    group,
    known_counterexamples,
    random_cocycle_extension,
    random_perm_lattice,
    sign_lattices,
    twisted_induced,
)
from permlat.cover import permutation_cover
from permlat.latmod import Lattice, LatticeMap, direct_sum, hom_basis, perm_lattice

FIXTURE_GROUPS = ["C2", "C4", "C2xC2", "D8", "Q8", "C3", "C9", "C3xC3", "Heis27"]
# the order-27 group has large coset modules; keep its random lattices small
MAX_RANK = {"Heis27": 12}


def ring_for(g) -> RingSpec:
    return RingSpec.integers(g.p)


def perm_fixtures(name: str) -> list[Lattice]:
    """Every coset module plus a few fixed sums of them."""
    g = group(name)
    ring = ring_for(g)
    out = [perm_lattice(g, s, ring) for s in g.class_representatives]
    reps = g.class_representatives
    out.append(direct_sum([perm_lattice(g, reps[0], ring), perm_lattice(g, reps[-1], ring)])[0])
    if len(reps) > 2:
        out.append(direct_sum([perm_lattice(g, reps[len(reps) // 2], ring)] * 2)[0])
    return out


def non_perm_fixtures(name: str) -> list[Lattice]:
    """Sign and monomial lattices, augmentation ideals and the counterexample lattices."""
    g = group(name)
    ring = ring_for(g)
    out = sign_lattices(g, ring)
    out += [u for u in twisted_induced(g, ring) if u.rank <= MAX_RANK.get(name, 32)]
    if name != "Heis27":
        out.append(augmentation_lattice(g, ring))
    for n in g.central_subgroups_order_p():
        out += [u for _, u, _ in known_counterexamples(g, n, ring) if u.rank <= MAX_RANK.get(name, 32)]
    return out


def cocycle_extensions(name: str, count: int, seed: int) -> list[Lattice]:
    """Extensions of the trivial lattice by random small lattices of the corpus."""
    g = group(name)
    ring = ring_for(g)
    rng = random.Random(seed)
    bases = [u for u in perm_fixtures(name) + non_perm_fixtures(name) if 0 < u.rank <= MAX_RANK.get(name, 16)]
    return [random_cocycle_extension(rng.choice(bases), rng) for _ in range(count)]


def random_equivariant_map(name: str, rng: random.Random) -> LatticeMap:
    """A random equivariant map between small lattices of the corpus.

    The source is a random sum of coset modules or a corpus lattice; the map
    is a small random combination of a Hom basis, sometimes added to a
    permutation cover of the target so that both verdicts occur often.
    """
    g = group(name)
    ring = ring_for(g)
    cap = MAX_RANK.get(name, 16)
    pool = [u for u in perm_fixtures(name) + non_perm_fixtures(name) if 0 < u.rank <= cap]
    if rng.random() < 0.6:
        src = random_perm_lattice(g, ring, rng, max_summands=3, max_rank=cap)
    else:
        src = rng.choice(pool)
    tgt = rng.choice(pool)
    if rng.random() < 0.3:
        # start from the cover of the target, which is supersurjective
        theta = permutation_cover(tgt, certify=False).theta
        src, m = theta.source, theta.matrix
    else:
        m = ExactMatrix.zeros(ring, src.rank, tgt.rank)
    basis = hom_basis(src, tgt)
    for b in basis:
        c = rng.choice([0, 0, 1, 1, -1, 2, g.p])
        if c:
            m = m + b.scale(c)
    return LatticeMap(src, tgt, m)
