"""Brauer-type quotients of fixed points and the supersurjectivity tests.

For a subgroup ``P`` of ``G`` and a lattice ``X``:

    X^[P]  = X^P / (sum_{Q<P} Tr_Q^P X^Q + p X^P)
    X^<<P>> = X^P / (sum_{P<Q} X^Q + sum_{Q<P} Tr_Q^P X^Q + p X^P)

Both are modules over ``F_p[N_G(P)/P]``.  By transitivity of traces it is
enough to take ``Q`` maximal in ``P`` for the trace terms, and minimal over
``P`` for the fixed-point terms; ``exhaustive=True`` uses every subgroup
instead, which the tests compare against.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from .exactla import ExactMatrix, fp_rref, fp_reduce, kernel
from .latmod import (
    Character,
    Lattice,
    LatticeMap,
    characters,
    fixed_points,
    trace_map,
    twisted_fixed_points,
)
from .pgroup import PGroup, Subgroup


class Kind(str, Enum):
    UPPER = "upper"
    DOUBLE = "double"


def debug_enabled() -> bool:
    return os.environ.get("PERMLAT_DEBUG", "") not in ("", "0")


@dataclass
class BrauerModule:
    """A Brauer quotient as an ``F_p``-vector space with its ``W``-action.

    ``gens`` are the canonical generating rows of ``X^P``.  A coordinate
    vector over those rows is projected by reducing modulo the RREF of the
    denominator and reading the non-pivot columns ``free``.
    """

    lattice: Lattice
    base: Subgroup
    kind: Kind
    normalizer: Subgroup
    quotient: PGroup  # W = N_G(P)/P; quotient.coset_reps are indices into the normalizer's group
    gens: ExactMatrix
    denom_rref: list[list[int]]
    denom_pivots: list[int]
    free: list[int]
    action: dict[int, list[list[int]]] = field(default_factory=dict)  # W element -> column-convention matrix

    @property
    def p(self) -> int:
        return self.lattice.ring.p

    @property
    def dim(self) -> int:
        return len(self.free)

    def project_coords(self, coords) -> list[int]:
        """Image in the quotient of a vector given in ``gens`` coordinates."""
        v = fp_reduce(coords, self.denom_rref, self.denom_pivots, self.p)
        return [v[j] for j in self.free]

    def project(self, vec) -> list[int]:
        """Image of an ambient vector lying in ``X^P``."""
        return self.project_coords(self._fixed.coordinates(ExactMatrix(self.lattice.ring, [vec], self.lattice.rank)).rows[0])

    @cached_property
    def _fixed(self):
        return fixed_points(self.lattice, self.base)

    def basis_vectors(self) -> list[tuple[int, ...]]:
        """Ambient lifts of the quotient basis (rows of ``gens`` at the free columns)."""
        return [self.gens.rows[j] for j in self.free]

    @property
    def projection(self) -> list[list[int]]:
        """Matrix (rows = generators of X^P) of the projection onto the quotient."""
        m = len(self.gens.rows)
        return [self.project_coords([int(i == j) for i in range(m)]) for j in range(m)]

    def generator_actions(self) -> list[list[list[int]]]:
        return [self.action[w] for w in self.quotient.generators]


def _span_coords(x: Lattice, p_sub: Subgroup, vecs: ExactMatrix) -> list[tuple[int, ...]]:
    if vecs.nrows == 0:
        return []
    return list(fixed_points(x, p_sub).coordinates(vecs).rows)


def _denominator(x: Lattice, p_sub: Subgroup, kind: Kind, exhaustive: bool) -> list[tuple[int, ...]]:
    g = x.group
    rows: list[tuple[int, ...]] = []
    lower = g.proper_subgroups(p_sub) if exhaustive else g.maximal_subgroups(p_sub)
    for q in lower:
        rows.extend(_span_coords(x, p_sub, trace_map(x, q, p_sub).images))
    if kind is Kind.DOUBLE:
        upper = g.proper_overgroups(p_sub) if exhaustive else g.minimal_overgroups(p_sub)
        for q in upper:
            rows.extend(_span_coords(x, p_sub, fixed_points(x, q).basis))
    gens = fixed_points(x, p_sub).basis
    if not x.ring.is_integers and gens.nrows:
        # relations among the Howell generators of X^P
        rows.extend(kernel(gens).rows)
    return rows


def brauer_quotient(x: Lattice, p_sub: Subgroup, kind: Kind | str = Kind.DOUBLE, exhaustive: bool = False) -> BrauerModule:
    kind = Kind(kind)
    g = x.group
    pr = x.ring.p
    fp = fixed_points(x, p_sub)
    m = fp.rank
    rref, piv = fp_rref(_denominator(x, p_sub, kind, exhaustive), m, pr)
    pivset = set(piv)
    free = [j for j in range(m) if j not in pivset]
    n = g.normalizer(p_sub)
    ng = g.subgroup_group(n)
    w, _ = ng.quotient_group(ng.from_parent(p_sub))
    b = BrauerModule(x, p_sub, kind, n, w, fp.basis, rref, piv, free)
    # action of generators of W, then closed up by products
    lifts = ExactMatrix(x.ring, b.basis_vectors(), x.rank)
    gen_acts = []
    for wg in w.generators:
        elt = ng.embedding[w.coset_reps[wg]] if ng.parent is not None else w.coset_reps[wg]
        imgs = x.act(elt, lifts) if lifts.nrows else lifts
        coords = fp.coordinates(imgs).rows if lifts.nrows else []
        rows = [b.project_coords(c) for c in coords]  # row j = image of basis j
        gen_acts.append(_transpose(rows, b.dim))
    b.action = _close_action(w, gen_acts, b.dim, pr)
    return b


def upper_quotient(x: Lattice, p_sub: Subgroup, exhaustive: bool = False) -> BrauerModule:
    return brauer_quotient(x, p_sub, Kind.UPPER, exhaustive)


def double_quotient(x: Lattice, p_sub: Subgroup, exhaustive: bool = False) -> BrauerModule:
    return brauer_quotient(x, p_sub, Kind.DOUBLE, exhaustive)


def _transpose(rows, n):
    return [[rows[i][j] for i in range(len(rows))] for j in range(n)]


def _fp_mul(a, b, p):
    if not a:
        return []
    bt = list(zip(*b)) if b and b[0] else [()] * (len(b[0]) if b else 0)
    return [[sum(x * y for x, y in zip(r, c)) % p for c in bt] for r in a]


def _close_action(w: PGroup, gen_acts, dim, p):
    ident = [[int(i == j) for j in range(dim)] for i in range(dim)]
    act = {0: ident}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s, a in zip(w.generators, gen_acts):
                y = w.mul(s, x)
                if y not in act:
                    act[y] = _fp_mul(a, act[x], p) if dim else []
                    nxt.append(y)
        frontier = nxt
    return act


def check_action(b: BrauerModule) -> bool:
    """The W-action matrices respect W's multiplication table."""
    w = b.quotient
    for s in w.generators:
        for h in range(w.order):
            if b.dim and _fp_mul(b.action[s], b.action[h], b.p) != b.action[w.mul(s, h)]:
                return False
    return True


def head_dim(b: BrauerModule) -> int:
    """``dim`` of the coinvariants of ``b`` under its group W."""
    if b.dim == 0:
        return 0
    rows = []
    for a in b.generator_actions():
        # rows of (A - I)^T span the image of (w - 1)
        at = _transpose(a, b.dim)
        rows.extend([[(v - int(i == j)) % b.p for j, v in enumerate(r)] for i, r in enumerate(at)])
    return b.dim - len(fp_rref(rows, b.dim, b.p)[0])


def head_basis_columns(b: BrauerModule) -> list[int]:
    """Indices (in ``b``'s basis) of standard vectors that map to a basis of the head."""
    if b.dim == 0:
        return []
    rows = []
    for a in b.generator_actions():
        at = _transpose(a, b.dim)
        rows.extend([[(v - int(i == j)) % b.p for j, v in enumerate(r)] for i, r in enumerate(at)])
    _, piv = fp_rref(rows, b.dim, b.p)
    return [j for j in range(b.dim) if j not in set(piv)]


# ---------------------------------------------------------------------------
# Induced maps and supersurjectivity


@dataclass
class BrauerMap:
    source: BrauerModule
    target: BrauerModule
    matrix: list[list[int]]  # row i = image of source basis vector i

    def rank(self) -> int:
        return len(fp_rref(self.matrix, self.target.dim, self.target.p)[0]) if self.matrix else 0

    def is_surjective(self) -> bool:
        return self.rank() == self.target.dim

    def cokernel_vector(self) -> list[int] | None:
        """A standard basis vector of the target outside the image, if any."""
        rref, piv = fp_rref(self.matrix, self.target.dim, self.target.p) if self.matrix else ([], [])
        for j in range(self.target.dim):
            e = [int(i == j) for i in range(self.target.dim)]
            if any(fp_reduce(e, rref, piv, self.target.p)):
                return e
        return None


class InducedMapError(ValueError):
    pass


def induced_map(f: LatticeMap, p_sub: Subgroup, kind: Kind | str = Kind.DOUBLE,
                source: BrauerModule | None = None, target: BrauerModule | None = None) -> BrauerMap:
    """``f^[P]`` or ``f^<<P>>``, checked to be well defined."""
    kind = Kind(kind)
    bx = source or brauer_quotient(f.source, p_sub, kind)
    by = target or brauer_quotient(f.target, p_sub, kind)
    fy = fixed_points(f.target, p_sub)
    ring = f.source.ring
    if bx.gens.nrows:
        imgs = f.apply(bx.gens)
        coords = fy.coordinates(imgs).rows
    else:
        coords = []
    on_gens = [by.project_coords(c) for c in coords]
    # well defined: every denominator generator maps to zero
    for r in bx.denom_rref:
        img = [0] * by.dim
        for c, row in zip(r, on_gens):
            if c:
                img = [(a + c * b) % by.p for a, b in zip(img, row)]
        if any(img):
            raise InducedMapError("map does not descend to the Brauer quotient")
    matrix = [on_gens[j] for j in bx.free]
    return BrauerMap(bx, by, matrix)


@dataclass(frozen=True)
class SurjectivityWitness:
    subgroup: Subgroup
    vector: tuple[int, ...]
    character: Character | None = None


def fixed_point_map_surjective(f: LatticeMap, h: Subgroup, chi: Character | None = None) -> tuple[bool, tuple[int, ...] | None]:
    """Whether ``f`` maps ``X^H`` (or the chi-twisted fixed points) onto those of Y, p-locally."""
    if chi is None:
        src, tgt = fixed_points(f.source, h), fixed_points(f.target, h)
    else:
        src, tgt = twisted_fixed_points(f.source, chi), twisted_fixed_points(f.target, chi)
    m = tgt.rank
    if m == 0:
        return True, None
    p = f.source.ring.p
    rows = list(tgt.coordinates(f.apply(src.basis)).rows) if src.rank else []
    if not f.target.ring.is_integers:
        rows.extend(kernel(tgt.basis).rows)
    rref, piv = fp_rref(rows, m, p)
    if len(rref) == m:
        return True, None
    j = next(j for j in range(m) if j not in set(piv))
    return False, tgt.basis.rows[j]


def is_supersurjective(f: LatticeMap, check: bool | None = None) -> tuple[bool, SurjectivityWitness | None]:
    """Decide supersurjectivity through the maps ``f^<<P>>`` for class representatives P.

    With ``check`` (default: the ``PERMLAT_DEBUG`` environment variable) the
    direct definition, surjectivity on ``H``-fixed points for every ``H``, is
    evaluated too and must agree.
    """
    g = f.source.group
    result: tuple[bool, SurjectivityWitness | None] = (True, None)
    for p_sub in g.class_representatives:
        fm = induced_map(f, p_sub, Kind.DOUBLE)
        if not fm.is_surjective():
            result = (False, SurjectivityWitness(p_sub, tuple(fm.cokernel_vector())))
            break
    if check if check is not None else debug_enabled():
        direct = is_supersurjective_direct(f)[0]
        if direct != result[0]:
            raise AssertionError(
                f"Brauer-quotient test ({result[0]}) disagrees with fixed-point definition ({direct})"
            )
    return result


def is_supersurjective_direct(f: LatticeMap) -> tuple[bool, SurjectivityWitness | None]:
    """The definition: ``f^H`` is p-locally surjective for every subgroup H."""
    for h in f.source.group.all_subgroups:
        ok, vec = fixed_point_map_surjective(f, h)
        if not ok:
            return False, SurjectivityWitness(h, tuple(vec))
    return True, None


def is_monomial_supersurjective(f: LatticeMap) -> tuple[bool, SurjectivityWitness | None]:
    """``f`` is onto the chi-twisted fixed points for every subgroup and character."""
    g = f.source.group
    for h in g.class_representatives:
        for chi in characters(g, h, f.source.ring):
            ok, vec = fixed_point_map_surjective(f, h, chi)
            if not ok:
                return False, SurjectivityWitness(h, tuple(vec), chi)
    return True, None
