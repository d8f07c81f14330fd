"""Explicit permutation covers of lattices over p-groups.

For each subgroup class representative ``P`` let ``d_P`` be the head
dimension of ``X^<<P>>``.  Lifting a head basis to vectors ``x_1..x_d`` in
``X^P`` gives ``R[G/P]^{d_P} -> X``, ``gP (copy i) -> g.x_i``; the sum over
all ``P`` is the cover ``theta``.  Over a p-group every coset module
``R[G/P]`` is indecomposable, so no Green-correspondent step is needed.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field

from .brauer import double_quotient, head_basis_columns, head_dim, is_supersurjective
from .exactla import ExactMatrix, solve_local
from .latmod import (
    Lattice,
    LatticeError,
    LatticeMap,
    Submodule,
    direct_sum,
    fixed_points,
    is_surjective_p_locally,
    map_kernel,
    perm_lattice,
)
from .pgroup import PGroup, Subgroup


class CoverError(RuntimeError):
    pass


@dataclass(frozen=True)
class PermutationStructure:
    """Multiplicities ``d_P`` of coset modules, keyed by class representatives."""

    items: tuple[tuple[Subgroup, int], ...]

    @classmethod
    def from_counts(cls, g: PGroup, counts) -> "PermutationStructure":
        c: Counter = Counter()
        for s, d in dict(counts).items():
            if d:
                c[g.class_representative(s)] += d
        return cls(tuple(sorted(c.items())))

    def as_dict(self) -> dict[Subgroup, int]:
        return dict(self.items)

    def multiplicity(self, s: Subgroup) -> int:
        return self.as_dict().get(s, 0)

    def rank(self, g: PGroup) -> int:
        return sum(d * (g.order // s.order) for s, d in self.items)

    def describe(self, g: PGroup) -> str:
        if not self.items:
            return "0"
        return " + ".join(f"{d}*R[G/{g.subgroup_label(s)}]" if d > 1 else f"R[G/{g.subgroup_label(s)}]"
                          for s, d in self.items)


@dataclass
class CoverResult:
    structure: PermutationStructure
    cover_module: Lattice
    theta: LatticeMap
    kernel: Submodule
    lifts: dict[Subgroup, ExactMatrix] = field(default_factory=dict)

    @property
    def is_isomorphism(self) -> bool:
        return self.kernel.rank == 0 and self.cover_module.rank == self.theta.target.rank


def map_from_permutation(src: Lattice, target: Lattice, images: list[ExactMatrix | tuple[int, ...]]) -> ExactMatrix:
    """Matrix of the map sending the first coset vector of block ``i`` to ``images[i]``.

    ``images[i]`` must be fixed by that block's subgroup; coset ``r P`` goes to
    ``r . images[i]``.
    """
    if src.perm_blocks is None:
        raise LatticeError("source is not built from coset modules")
    g = src.group
    rows: list[tuple[int, ...]] = [None] * src.rank  # type: ignore[list-item]
    for (p_sub, start), img in zip(src.perm_blocks, images):
        vec = img if isinstance(img, ExactMatrix) else ExactMatrix(target.ring, [img], target.rank)
        for j, r in enumerate(g.left_transversal(p_sub)):
            rows[start + j] = target.act(r, vec).rows[0]
    return ExactMatrix(target.ring, rows, target.rank)


def choose_lifts(x: Lattice, p_sub: Subgroup, rng: random.Random | None = None) -> list[tuple[int, ...]]:
    """Vectors of ``X^P`` whose images form a basis of the head of ``X^<<P>>``.

    Without ``rng`` the lifts are generators of ``X^P`` at the non-pivot head
    columns.  With ``rng`` they are mixed unimodularly and perturbed by
    random elements that die in the head, giving another valid choice.
    """
    b = double_quotient(x, p_sub)
    cols = head_basis_columns(b)
    base = [b.basis_vectors()[c] for c in cols]
    if rng is None or not base:
        return base
    ring = x.ring
    d = len(base)
    mix = [[int(i == j) for j in range(d)] for i in range(d)]
    for _ in range(2 * d):
        if d < 2:
            break
        i, j = rng.sample(range(d), 2)
        c = rng.randint(-2, 2)
        mix[i] = [a + c * bb for a, bb in zip(mix[i], mix[j])]
    out = []
    fp = fixed_points(x, p_sub).basis.rows
    g = x.group
    over = [fixed_points(x, q).basis.rows for q in g.minimal_overgroups(p_sub)]
    for i in range(d):
        v = [sum(mix[i][k] * base[k][t] for k in range(d)) for t in range(x.rank)]
        for row in fp:
            c = x.ring.p * rng.randint(-1, 1)
            v = [a + c * bb for a, bb in zip(v, row)]
        for rows in over:
            for row in rows:
                c = rng.randint(-1, 1)
                v = [a + c * bb for a, bb in zip(v, row)]
        out.append(tuple(ring.reduce(t) for t in v))
    return out


def permutation_cover(x: Lattice, rng: random.Random | None = None, certify: bool = True) -> CoverResult:
    """Build ``theta : C -> X`` and check it is a supersurjective, minimal cover."""
    g = x.group
    counts = {}
    lifts = {}
    parts: list[Lattice] = []
    images: list[tuple[int, ...]] = []
    for p_sub in g.class_representatives:
        ls = choose_lifts(x, p_sub, rng)
        if not ls:
            continue
        counts[p_sub] = len(ls)
        lifts[p_sub] = ExactMatrix(x.ring, ls, x.rank)
        parts.extend(perm_lattice(g, p_sub, x.ring) for _ in ls)
        images.extend(ls)
    c, _, _ = direct_sum(parts, group=g, ring=x.ring)
    theta = LatticeMap(c, x, map_from_permutation(c, x, images) if parts
                       else ExactMatrix.zeros(x.ring, 0, x.rank))
    structure = PermutationStructure.from_counts(g, counts)
    result = CoverResult(structure, c, theta, map_kernel(theta), lifts)
    if certify:
        certify_cover(result)
    return result


def certify_cover(res: CoverResult):
    """Raise :class:`CoverError` unless ``theta`` is a surjective, supersurjective, minimal cover."""
    theta = res.theta
    if not is_surjective_p_locally(theta):
        raise CoverError("theta is not surjective")
    ok, wit = is_supersurjective(theta)
    if not ok:
        raise CoverError(f"theta is not supersurjective at {wit.subgroup}")
    for p_sub in res.cover_module.group.class_representatives:
        d = head_dim(double_quotient(res.cover_module, p_sub))
        if d != res.structure.multiplicity(p_sub):
            raise CoverError(f"head dimension of the cover at {p_sub} is {d}, expected {res.structure.multiplicity(p_sub)}")


def is_precover(f: LatticeMap) -> bool:
    """A map from a permutation lattice is a precover iff it is supersurjective."""
    if f.source.perm_blocks is None:
        raise LatticeError("is_precover needs a source built from coset modules")
    return is_supersurjective(f)[0]


def lift_from_permutation(f: LatticeMap, h: LatticeMap) -> tuple[LatticeMap, int] | None:
    """``k : P -> S`` with ``k then f = c * h``, for ``h : P -> T`` from a permutation lattice.

    Each coset block ``(Q, start)`` needs ``y`` in ``S^Q`` with
    ``f(y) = c * h(e_start)``; it exists when ``f^Q`` is p-locally onto.
    ``c`` is prime to p (always 1 in truncated mode).
    """
    perm = h.source
    if perm.perm_blocks is None:
        raise LatticeError("lifting needs a source built from coset modules")
    s = f.source
    sols = []
    for q, start in perm.perm_blocks:
        fq = fixed_points(s, q).basis
        want = ExactMatrix(s.ring, [h.matrix.rows[start]], h.matrix.ncols)
        if fq.nrows == 0:
            if want.is_zero():
                sols.append(((0,) * s.rank, 1))
                continue
            return None
        out = solve_local(f.apply(fq), want)
        if out is None:
            return None
        coeff, c = out
        sols.append(((coeff @ fq).rows[0], c))
    c = 1
    for _, ci in sols:
        c = c * ci // math.gcd(c, ci)
    images = [tuple((c // ci) * t for t in y) for y, ci in sols]
    k = LatticeMap(perm, s, map_from_permutation(perm, s, images) if images else ExactMatrix.zeros(s.ring, 0, s.rank))
    return k, c


def split_surjection_onto_perm(f: LatticeMap) -> tuple[LatticeMap, int] | None:
    """``s`` with ``s then f = c * id`` for ``f`` supersurjective onto a permutation lattice."""
    if f.target.perm_blocks is None:
        raise LatticeError("target must be built from coset modules")
    return lift_from_permutation(f, LatticeMap.identity(f.target))
