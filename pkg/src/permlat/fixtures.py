"""Standard small p-groups and generators of test lattices.

The groups here are the ones used throughout the tests and experiment
scripts.  Random constructions take an explicit ``random.Random`` so every
instance is reproducible from a seed.
"""

from __future__ import annotations

import random
from typing import Callable

from .exactla import ExactMatrix, RingSpec
from .latmod import Lattice, change_basis, direct_sum, induce, perm_lattice, restrict, tensor
from .pgroup import PGroup, Subgroup


def _heisenberg27() -> PGroup:
    idx = lambda i, j: 3 * (i % 3) + (j % 3)  # noqa: E731
    x = [0] * 9
    y = [0] * 9
    for i in range(3):
        for j in range(3):
            x[idx(i, j)] = idx(i + 1, j)
            y[idx(i, j)] = idx(i, j + i)
    return PGroup.from_generators([x, y], 3)


GROUP_BUILDERS: dict[str, Callable[[], PGroup]] = {
    "C2": lambda: PGroup.cyclic(2, 2),
    "C4": lambda: PGroup.cyclic(4, 2),
    "C8": lambda: PGroup.cyclic(8, 2),
    "C2xC2": lambda: PGroup.from_generators(["(1 2)", "(3 4)"], 2),
    "D8": lambda: PGroup.from_generators(["(1 2 3 4)", "(2 4)"], 2),
    "Q8": lambda: PGroup.from_generators(["(1 2 3 4)(5 6 7 8)", "(1 5 3 7)(2 8 4 6)"], 2),
    "C4xC2": lambda: PGroup.from_generators(["(1 2 3 4)", "(5 6)"], 2),
    "C2xC2xC2": lambda: PGroup.from_generators(["(1 2)", "(3 4)", "(5 6)"], 2),
    "C3": lambda: PGroup.cyclic(3, 3),
    "C9": lambda: PGroup.cyclic(9, 3),
    "C3xC3": lambda: PGroup.from_generators(["(1 2 3)", "(4 5 6)"], 3),
    "Heis27": _heisenberg27,
    "C5": lambda: PGroup.cyclic(5, 5),
}

_GROUPS: dict[str, PGroup] = {}


def group(name: str) -> PGroup:
    """A shared instance of a named fixture group."""
    if name not in _GROUPS:
        try:
            _GROUPS[name] = GROUP_BUILDERS[name]()
        except KeyError:
            raise KeyError(f"unknown fixture group {name!r}; known: {sorted(GROUP_BUILDERS)}") from None
    return _GROUPS[name]


def random_perm_lattice(
    g: PGroup, ring: RingSpec, rng: random.Random, max_summands: int = 3, max_rank: int = 24
) -> Lattice:
    """A sum of coset modules for random (not necessarily distinct) subgroups."""
    subs = g.all_subgroups
    parts = []
    total = 0
    for _ in range(rng.randint(1, max_summands)):
        s = rng.choice(subs)
        idx = g.order // s.order
        if parts and total + idx > max_rank:
            continue
        parts.append(perm_lattice(g, s, ring))
        total += idx
    return direct_sum(parts)[0]


def random_unimodular(ring: RingSpec, n: int, rng: random.Random, steps: int | None = None, bound: int = 2) -> ExactMatrix:
    """A product of random elementary matrices (determinant 1)."""
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps if steps is not None else 2 * n):
        if n < 2:
            break
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-bound, bound)
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
    if n >= 2:
        i, j = rng.sample(range(n), 2)
        rows[i], rows[j] = rows[j], rows[i]
    return ExactMatrix(ring, rows, n)


def random_basis_change(u: Lattice, rng: random.Random, **kw) -> Lattice:
    """``u`` rewritten in a random basis, forgetting any coset-module bookkeeping."""
    return change_basis(u, random_unimodular(u.ring, u.rank, rng, **kw))


def augmentation_lattice(g: PGroup, ring: RingSpec) -> Lattice:
    """The augmentation ideal ``I_G`` of ``R[G]`` in the basis ``g - 1`` (g != 1)."""
    from .latmod import Submodule, sublattice

    reg = perm_lattice(g, g.trivial_subgroup, ring)
    n = g.order
    rows = [[(1 if j == i else 0) - (1 if j == 0 else 0) for j in range(n)] for i in range(1, n)]
    return sublattice(reg, Submodule(reg, ExactMatrix(ring, rows, n)))


def inflate(q: Lattice, g: PGroup, proj: tuple[int, ...]) -> Lattice:
    """A ``G/N``-lattice viewed as a ``G``-lattice through ``proj``."""
    return Lattice(g, q.ring, [q.action[proj[x]] for x in range(g.order)], check=False)


def known_counterexamples(g: PGroup, n: Subgroup, ring: RingSpec | None = None) -> list[tuple[str, Lattice, int]]:
    """Non-permutation lattices failing exactly one hypothesis of the theorem for ``(G, N)``.

    Entries are ``(name, lattice, failing hypothesis)``.

    ``induced_augmentation``: the augmentation lattice of ``N`` induced to G.
    Its N-fixed points vanish, so they are (trivially) a permutation lattice,
    but it is not free over N.

    ``twisted_inflation``: ``R[G/K] (x) Inf I_{G/N}`` for a largest ``K != 1``
    with ``K ∩ N = 1``.  It is free over N, and its N-fixed points are
    induced from ``I_{G/N}`` restricted to ``NK/N``, which has nonzero H^1
    and so is not a permutation lattice.  For a complement K of N in C2 x C2
    this is the lattice where one generator swaps and the other acts by -1.
    """
    ring = ring or RingSpec.integers(g.p)
    out = []
    if n.order > 1:
        ng = g.subgroup_group(n)
        out.append(("induced_augmentation", induce(augmentation_lattice(ng, ring), g), 1))
    ks = [k for k in g.all_subgroups if k.order > 1 and set(k.elements) & set(n.elements) == {0}]
    if ks and n.order < g.order:
        k = max(ks)
        qg, proj = g.quotient_group(n)
        aug = inflate(augmentation_lattice(qg, ring), g, proj)
        out.append(("twisted_inflation", tensor(perm_lattice(g, k, ring), aug), 2))
    return out


def weiss_instance(g: PGroup, n: Subgroup, ks: list[Subgroup], ring: RingSpec | None = None) -> Lattice:
    """``⊕ R[G/K_i]`` with every ``K_i ∩ N = 1``; free over N with permutation N-fixed points."""
    ring = ring or RingSpec.integers(g.p)
    if not g.is_normal(n):
        raise ValueError("N must be normal")
    for k in ks:
        if set(k.elements) & set(n.elements) != {0}:
            raise ValueError(f"K = {g.subgroup_label(k)} meets N nontrivially")
    return direct_sum([perm_lattice(g, k, ring) for k in ks], group=g, ring=ring)[0]


def random_weiss_instance(
    g: PGroup, n: Subgroup, rng: random.Random, max_summands: int = 3, max_rank: int = 32
) -> tuple[Lattice, list[Subgroup]]:
    """A seeded Weiss instance, hidden behind a random basis change."""
    allowed = [k for k in g.all_subgroups if set(k.elements) & set(n.elements) == {0}]
    ks: list[Subgroup] = []
    rank = 0
    for _ in range(rng.randint(1, max_summands)):
        k = rng.choice(allowed)
        if ks and rank + g.order // k.order > max_rank:
            continue
        ks.append(k)
        rank += g.order // k.order
    u = weiss_instance(g, n, ks)
    return random_basis_change(u, rng, bound=1), ks


def cocycle_extension(a: Lattice, values: ExactMatrix | list[int]) -> Lattice:
    """The extension ``0 -> A -> E -> R -> 0`` defined by a crossed homomorphism.

    ``values`` are the cocycle's values on ``a.group.generators``,
    concatenated as returned by :func:`permlat.latmod.cocycle_basis`.  On
    ``E = A ⊕ R`` the element g sends ``(x, t)`` to ``(g.x + t f(g), t)``.
    """
    g = a.group
    r = a.rank
    vals = list(values.rows[0]) if isinstance(values, ExactMatrix) else list(values)
    mats = []
    for i, s in enumerate(g.generators):
        rows = [list(row) + [0] for row in a.row_action[s].rows]
        rows.append(vals[i * r:(i + 1) * r] + [1])
        mats.append(ExactMatrix(a.ring, rows, r + 1).transpose())
    return Lattice.from_generators(g, a.ring, mats)


def random_cocycle_extension(a: Lattice, rng: random.Random, bound: int = 3) -> Lattice:
    """Extension of R by ``a`` through a random integer combination of a cocycle basis."""
    from .latmod import cocycle_basis

    _, z = cocycle_basis(a.group.whole, a)
    coeffs = [rng.randint(-bound, bound) for _ in range(z.nrows)]
    vals = [sum(c * row[j] for c, row in zip(coeffs, z.rows)) for j in range(z.ncols)]
    return cocycle_extension(a, vals)


def sign_lattices(g: PGroup, ring: RingSpec | None = None) -> list[Lattice]:
    """Rank-one lattices of the nontrivial characters of G with values in the ring."""
    from .latmod import character_lattice, characters

    ring = ring or RingSpec.integers(g.p)
    out = []
    for chi in characters(g, g.whole, ring):
        if not chi.is_trivial:
            out.append(character_lattice(g, [chi(x) for x in range(g.order)], ring))
    return out


def twisted_induced(g: PGroup, ring: RingSpec | None = None) -> list[Lattice]:
    """Characters of subgroups induced up to G (monomial, usually not permutation)."""
    from .latmod import character_lattice, characters

    ring = ring or RingSpec.integers(g.p)
    out = []
    for h in g.class_representatives:
        if h.order == g.order:
            continue
        hg = g.subgroup_group(h)
        for chi in characters(hg, hg.whole, ring):
            if not chi.is_trivial:
                out.append(induce(character_lattice(hg, [chi(x) for x in range(hg.order)], ring), g))
    return out


def klein_counterexample(ring: RingSpec | None = None) -> tuple[Lattice, Subgroup]:
    """C2 x C2 = <a, b>, a swapping two basis vectors and b acting by -1; N = <a>."""
    ring = ring or RingSpec.integers(2)
    g = group("C2xC2")
    u = Lattice.from_generators(g, ring, [[[0, 1], [1, 0]], [[-1, 0], [0, -1]]])
    return u, g.subgroup([g.generators[0]])
