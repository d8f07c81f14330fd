"""Finite-rank RG-lattices and the functors used on them.

A lattice stores one matrix ``rho(g)`` per group element, acting on column
vectors, so ``rho(gh) = rho(g) rho(h)``.  Everything else in the package works
with row vectors: the element ``g`` sends the row ``x`` to ``x @ rho(g).T``,
submodules are given by generating rows, and a :class:`LatticeMap` with
matrix ``M`` sends ``x`` to ``x @ M``.  Equivariance of ``M`` therefore reads
``rho_src(g).T @ M == M @ rho_tgt(g).T``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import flint

from .exactla import (
    ExactMatrix,
    ModulePresentation,
    RingError,
    RingSpec,
    Solver,
    fp_rref,
    hermite_form,
    kernel,
    row_span,
    smith_invariants,
    solve,
    vstack_all,
)
from .pgroup import GroupError, PGroup, Subgroup


class LatticeError(ValueError):
    pass


class Lattice:
    """An RG-lattice of finite rank.

    ``perm_blocks`` marks lattices built as sums of coset modules: each entry
    ``(P, start)`` says the basis vectors ``start .. start+[G:P]-1`` are the
    cosets of ``P`` in canonical order.
    """

    def __init__(
        self,
        group: PGroup,
        ring: RingSpec,
        action: Sequence[ExactMatrix],
        *,
        perm_blocks: Sequence[tuple[Subgroup, int]] | None = None,
        check: bool = True,
    ):
        if ring.p != group.p:
            raise LatticeError(f"ring prime {ring.p} differs from group prime {group.p}")
        if len(action) != group.order:
            raise LatticeError("need one action matrix per group element")
        self.group = group
        self.ring = ring
        self.action = tuple(a if a.ring == ring else a.with_ring(ring) for a in action)
        self.rank = self.action[0].nrows
        for a in self.action:
            if a.shape != (self.rank, self.rank):
                raise LatticeError("action matrices must be square of the lattice rank")
        self.perm_blocks = tuple(perm_blocks) if perm_blocks is not None else None
        self._fixed: dict[Subgroup, Submodule] = {}
        self._cache: dict = {}
        if check:
            self.validate()

    # -- construction -------------------------------------------------------

    @classmethod
    def from_generators(
        cls, group: PGroup, ring: RingSpec, gen_mats: Sequence[ExactMatrix | Sequence[Sequence[int]]], **kw
    ) -> "Lattice":
        """Extend matrices given on ``group.generators`` to every element."""
        if len(gen_mats) != len(group.generators):
            raise LatticeError(f"expected {len(group.generators)} generator matrices, got {len(gen_mats)}")
        mats = [m if isinstance(m, ExactMatrix) else ExactMatrix(ring, m) for m in gen_mats]
        mats = [m.with_ring(ring) for m in mats]
        n = kw.pop("rank", None)
        if n is None:
            n = mats[0].nrows if mats else 0
        act: dict[int, ExactMatrix] = {0: ExactMatrix.identity(ring, n)}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g, m in zip(group.generators, mats):
                    y = group.mul(g, x)
                    if y not in act:
                        act[y] = m @ act[x]
                        nxt.append(y)
            frontier = nxt
        return cls(group, ring, [act[g] for g in range(group.order)], **kw)

    @classmethod
    def trivial(cls, group: PGroup, ring: RingSpec, rank: int = 1) -> "Lattice":
        ident = ExactMatrix.identity(ring, rank)
        blocks = [(group.whole, i) for i in range(rank)]
        return cls(group, ring, [ident] * group.order, perm_blocks=blocks, check=False)

    def validate(self):
        g = self.group
        ident = ExactMatrix.identity(self.ring, self.rank)
        if self.action[0] != ident:
            raise LatticeError("identity must act as the identity matrix")
        for s in g.generators:
            for h in range(g.order):
                if self.action[s] @ self.action[h] != self.action[g.mul(s, h)]:
                    raise LatticeError(
                        f"action is not a homomorphism at ({g.labels[s]}, {g.labels[h]})"
                    )

    # -- structure ----------------------------------------------------------

    def __repr__(self):
        return f"Lattice(rank={self.rank}, |G|={self.group.order}, ring={self.ring})"

    def same_as(self, other: "Lattice") -> bool:
        return self.group is other.group and self.ring == other.ring and self.action == other.action

    @cached_property
    def row_action(self) -> tuple[ExactMatrix, ...]:
        """``rho(g).T``: the matrix of ``x -> g.x`` on row vectors."""
        return tuple(a.transpose() for a in self.action)

    @cached_property
    def permutation_images(self) -> tuple[tuple[int, ...], ...] | None:
        """For each element the basis permutation it induces, if every matrix is monomial 0/1."""
        out = []
        for a in self.action:
            img = [-1] * self.rank
            for i, row in enumerate(a.rows):
                nz = [j for j, x in enumerate(row) if x]
                if len(nz) != 1 or row[nz[0]] != 1:
                    return None
                img[nz[0]] = i
            out.append(tuple(img))
        return tuple(out)

    @property
    def known_structure(self) -> Counter | None:
        """Multiplicities of class representatives when built from coset modules."""
        if self.perm_blocks is None:
            return None
        return Counter(self.group.class_representative(P) for P, _ in self.perm_blocks)

    def act(self, g: int, vecs: ExactMatrix) -> ExactMatrix:
        """Apply ``g`` to each row of ``vecs``."""
        return vecs @ self.row_action[g]

    def is_permutation_basis(self) -> bool:
        return self.permutation_images is not None


# ---------------------------------------------------------------------------
# Submodules and maps


class Submodule:
    """A G-stable submodule given by canonical generating rows."""

    def __init__(self, ambient: Lattice, basis: ExactMatrix, canonical: bool = False):
        self.ambient = ambient
        self.basis = basis if canonical else row_span(basis)

    @property
    def rank(self) -> int:
        return self.basis.nrows

    @cached_property
    def _solver(self) -> Solver:
        return Solver(self.basis)

    def coordinates(self, vecs: ExactMatrix) -> ExactMatrix:
        """Coefficients expressing each row of ``vecs`` in the generating rows."""
        rows = []
        for r in vecs.rows:
            x = self._solver.solve_row(r)
            if x is None:
                raise LatticeError("vector not in submodule")
            rows.append(x)
        return ExactMatrix(self.ambient.ring, rows, self.rank)

    def contains(self, vec: Sequence[int]) -> bool:
        return self._solver.solve_row(vec) is not None

    def is_stable(self) -> bool:
        u = self.ambient
        return all(
            all(self.contains(r) for r in u.act(g, self.basis).rows) for g in u.group.generators
        )

    def __eq__(self, other):
        return isinstance(other, Submodule) and self.basis == other.basis

    def __repr__(self):
        return f"Submodule(rank={self.rank} in {self.ambient!r})"


class LatticeMap:
    """Equivariant map ``x -> x @ matrix`` from ``source`` to ``target``."""

    def __init__(self, source: Lattice, target: Lattice, matrix: ExactMatrix, check: bool = True):
        if source.ring != target.ring:
            raise LatticeError("source and target rings differ")
        if matrix.shape != (source.rank, target.rank):
            raise LatticeError(f"map matrix has shape {matrix.shape}, expected {(source.rank, target.rank)}")
        self.source = source
        self.target = target
        self.matrix = matrix.with_ring(source.ring)
        if check and not self.is_equivariant():
            raise LatticeError("map is not equivariant")

    def is_equivariant(self) -> bool:
        if self.source.group is not self.target.group and not self.source.group.same_table(self.target.group):
            return False
        m = self.matrix
        for g in self.source.group.generators:
            if self.source.row_action[g] @ m != m @ self.target.row_action[g]:
                return False
        return True

    def then(self, other: "LatticeMap") -> "LatticeMap":
        """Composite: first ``self`` then ``other``."""
        return LatticeMap(self.source, other.target, self.matrix @ other.matrix, check=False)

    def apply(self, vecs: ExactMatrix) -> ExactMatrix:
        return vecs @ self.matrix

    @classmethod
    def identity(cls, u: Lattice) -> "LatticeMap":
        return cls(u, u, ExactMatrix.identity(u.ring, u.rank), check=False)

    @classmethod
    def zero(cls, source: Lattice, target: Lattice) -> "LatticeMap":
        return cls(source, target, ExactMatrix.zeros(source.ring, source.rank, target.rank), check=False)

    def __repr__(self):
        return f"LatticeMap({self.source.rank} -> {self.target.rank})"


def map_kernel(f: LatticeMap) -> Submodule:
    return Submodule(f.source, kernel(f.matrix), canonical=True)


def map_cokernel(f: LatticeMap) -> ModulePresentation:
    return smith_invariants(f.matrix)


def map_image(f: LatticeMap) -> Submodule:
    return Submodule(f.target, f.matrix)


def is_injective(f: LatticeMap) -> bool:
    return map_kernel(f).rank == 0


def is_surjective_p_locally(f: LatticeMap) -> bool:
    """Cokernel has no free part and no p-torsion (in truncated mode: is zero)."""
    c = map_cokernel(f)
    return c.free_rank == 0 and not c.torsion


def is_isomorphism(f: LatticeMap) -> bool:
    return f.source.rank == f.target.rank and is_injective(f) and is_surjective_p_locally(f)


# ---------------------------------------------------------------------------
# Building lattices


def perm_lattice(g: PGroup, h: Subgroup, ring: RingSpec) -> Lattice:
    """The coset module R[G/H] on the canonically ordered left cosets."""
    cosets = g.left_cosets(h)
    where = {}
    for i, c in enumerate(cosets):
        for x in c:
            where[x] = i
    n = len(cosets)
    reps = [c[0] for c in cosets]
    action = []
    for x in range(g.order):
        rows = [[0] * n for _ in range(n)]
        for i, r in enumerate(reps):
            rows[where[g.mul(x, r)]][i] = 1
        action.append(ExactMatrix(ring, rows, n))
    return Lattice(g, ring, action, perm_blocks=[(h, 0)], check=False)


def character_lattice(g: PGroup, values: Sequence[int], ring: RingSpec) -> Lattice:
    """Rank-one lattice on which element ``x`` acts by the scalar ``values[x]``."""
    return Lattice(g, ring, [ExactMatrix(ring, [[v]]) for v in values])


def direct_sum(
    us: Sequence[Lattice], group: PGroup | None = None, ring: RingSpec | None = None
) -> tuple[Lattice, list[LatticeMap], list[LatticeMap]]:
    """Block-diagonal sum with its inclusions and projections."""
    if not us:
        if group is None or ring is None:
            raise LatticeError("empty direct sum needs group and ring")
        z = Lattice(group, ring, [ExactMatrix.zeros(ring, 0, 0)] * group.order, perm_blocks=[], check=False)
        return z, [], []
    group = us[0].group
    ring = us[0].ring
    for u in us:
        if u.group is not group and not u.group.same_table(group):
            raise LatticeError("direct sum of lattices over different groups")
        if u.ring != ring:
            raise LatticeError("direct sum of lattices over different rings")
    n = sum(u.rank for u in us)
    offsets = list(itertools.accumulate([0] + [u.rank for u in us]))
    action = []
    for x in range(group.order):
        rows = [[0] * n for _ in range(n)]
        for u, off in zip(us, offsets):
            for i, r in enumerate(u.action[x].rows):
                rows[off + i][off : off + u.rank] = r
        action.append(ExactMatrix(ring, rows, n))
    blocks = None
    if all(u.perm_blocks is not None for u in us):
        blocks = [(P, s + off) for u, off in zip(us, offsets) for P, s in u.perm_blocks]
    total = Lattice(group, ring, action, perm_blocks=blocks, check=False)
    incs, projs = [], []
    for u, off in zip(us, offsets):
        inc = [[int(j == off + i) for j in range(n)] for i in range(u.rank)]
        incs.append(LatticeMap(u, total, ExactMatrix(ring, inc, n), check=False))
        projs.append(LatticeMap(total, u, ExactMatrix(ring, inc, n).transpose(), check=False))
    return total, incs, projs


def tensor(u: Lattice, v: Lattice) -> Lattice:
    """Diagonal tensor product; basis ``(i, j)`` at position ``i*rank(v) + j``."""
    if u.group is not v.group or u.ring != v.ring:
        raise LatticeError("tensor of lattices over different groups or rings")
    action = [ExactMatrix.from_flint(u.ring, _kron(a.flint, b.flint)) if u.rank and v.rank
              else ExactMatrix.zeros(u.ring, u.rank * v.rank, u.rank * v.rank)
              for a, b in zip(u.action, v.action)]
    return Lattice(u.group, u.ring, action, check=False)


def _kron(a, b):
    ra, ca, rb, cb = a.nrows(), a.ncols(), b.nrows(), b.ncols()
    out = flint.fmpz_mat(ra * rb, ca * cb)
    for i in range(ra):
        for j in range(ca):
            x = a[i, j]
            if x:
                for k in range(rb):
                    for m in range(cb):
                        out[i * rb + k, j * cb + m] = x * b[k, m]
    return out


def change_basis(u: Lattice, basis: ExactMatrix) -> Lattice:
    """The same module written in the basis given by the rows of an invertible ``basis``.

    New coordinates ``y`` correspond to old vectors ``y @ basis``.
    """
    inv = solve(basis, ExactMatrix.identity(u.ring, u.rank))
    if inv is None:
        raise LatticeError("basis change is not invertible over the ring")
    action = [(basis @ ra @ inv).transpose() for ra in u.row_action]
    return Lattice(u.group, u.ring, action, check=False)


def sublattice(u: Lattice, sub: Submodule | ExactMatrix) -> Lattice:
    """The submodule spanned by independent rows as a lattice in its own right."""
    basis = sub.basis if isinstance(sub, Submodule) else sub
    s = Submodule(u, basis, canonical=True)
    action = [s.coordinates(u.act(g, basis)).transpose() for g in range(u.group.order)]
    if basis.nrows == 0:
        action = [ExactMatrix.zeros(u.ring, 0, 0)] * u.group.order
    return Lattice(u.group, u.ring, action, check=False)


def quotient_lattice(u: Lattice, sub: Submodule) -> tuple[Lattice, LatticeMap]:
    """``u / sub`` for a pure submodule, with the projection map (Integers mode)."""
    if not u.ring.is_integers:
        raise RingError("quotient_lattice is only defined in Integers mode")
    # columns of q span the annihilator of sub, so x -> x @ q has kernel = saturation(sub)
    q = kernel(sub.basis.transpose()).transpose() if sub.rank else ExactMatrix.identity(u.ring, u.rank)
    if sub.rank and q.ncols + sub.rank != u.rank:
        raise LatticeError("submodule rank mismatch")
    left = solve(q, ExactMatrix.identity(u.ring, q.ncols))  # left @ q = I
    if left is None:
        raise LatticeError("quotient map is not split")
    row_act = [left @ ra @ q for ra in u.row_action]
    ql = Lattice(u.group, u.ring, [m.transpose() for m in row_act], check=False)
    proj = LatticeMap(u, ql, q, check=False)
    if not kernel(q) == sub.basis:
        raise LatticeError("submodule is not pure; quotient has torsion")
    return ql, proj


def reduce_mod(u: Lattice, f: int) -> Lattice:
    """``u / p^f u`` as a lattice over Z/p^f."""
    if f < 1:
        raise ValueError("exponent must be >= 1")
    if not u.ring.is_integers and f > u.ring.e:
        raise RingError(f"cannot reduce a Z/p^{u.ring.e} lattice modulo p^{f}")
    ring = RingSpec.truncated(u.ring.p, f)
    return Lattice(u.group, ring, [a.with_ring(ring) for a in u.action], perm_blocks=u.perm_blocks, check=False)


def reduce_map(f: LatticeMap, e: int) -> LatticeMap:
    return LatticeMap(reduce_mod(f.source, e), reduce_mod(f.target, e),
                      f.matrix.with_ring(RingSpec.truncated(f.source.ring.p, e)), check=False)


# ---------------------------------------------------------------------------
# Restriction and induction


def restrict(u: Lattice, h: Subgroup) -> Lattice:
    """``u`` as a module for ``h`` (re-indexed as a standalone group)."""
    hg = u.group.subgroup_group(h)
    action = [u.action[x] for x in h.elements]
    blocks = None
    if u.perm_blocks is not None:
        blocks = _restricted_blocks(u, h, hg)
    return Lattice(hg, u.ring, action, perm_blocks=blocks, check=False)


def _restricted_blocks(u: Lattice, h: Subgroup, hg: PGroup):
    """Coset blocks survive restriction only if each block stays in canonical order."""
    g = u.group
    out = []
    for P, start in u.perm_blocks:
        cosets = g.left_cosets(P)
        reps = [c[0] for c in cosets]
        # H-orbits on G/P are H-cosets of the stabilisers hPh^-1 ∩ H; keep only the trivial-orbit case
        if len(cosets) == 1:
            out.append((hg.whole, start))
        elif h.order == 1:
            out.extend((hg.trivial_subgroup, start + i) for i in range(len(reps)))
        else:
            return None
    return out


def induce(v: Lattice, g: PGroup) -> Lattice:
    """``V`` induced from the subgroup-group ``v.group`` up to ``g``.

    Basis: ``(coset i, j) -> i*rank(v) + j`` with cosets ``x_i H`` of the
    canonical transversal; ``y`` sends ``x_i (x) w`` to ``x_k (x) h.w`` where
    ``y x_i = x_k h``.
    """
    hg = v.group
    if hg is g:
        return v
    if hg.parent is not g:
        raise LatticeError("v must be a lattice over a subgroup-group of g")
    h = Subgroup.of(hg.embedding)
    pos = {x: i for i, x in enumerate(hg.embedding)}
    cosets = g.left_cosets(h)
    where = {x: i for i, c in enumerate(cosets) for x in c}
    reps = [c[0] for c in cosets]
    r = v.rank
    n = len(reps) * r
    action = []
    for y in range(g.order):
        rows = [[0] * n for _ in range(n)]
        for i, xi in enumerate(reps):
            z = g.mul(y, xi)
            k = where[z]
            hh = g.mul(g.inv(reps[k]), z)
            blk = v.action[pos[hh]].rows
            for a in range(r):
                rows[k * r + a][i * r : (i + 1) * r] = blk[a]
        action.append(ExactMatrix(v.ring, rows, n))
    trivial = r == 1 and all(m.rows == ((1,),) for m in v.action)
    blocks = [(h, 0)] if trivial else None
    return Lattice(g, v.ring, action, perm_blocks=blocks, check=False)


# ---------------------------------------------------------------------------
# Fixed points, traces, characters


def _subgroup_gens(u: Lattice, h: Subgroup) -> tuple[int, ...]:
    return u.group.subgroup_generators(h)


def fixed_points(u: Lattice, h: Subgroup) -> Submodule:
    """``u^h`` with canonical generating rows (a pure basis in Integers mode)."""
    if h in u._fixed:
        return u._fixed[h]
    gens = _subgroup_gens(u, h)
    ring = u.ring
    if not gens:
        sub = Submodule(u, ExactMatrix.identity(ring, u.rank), canonical=True)
    elif u.permutation_images is not None:
        sub = Submodule(u, _orbit_sums(u, gens), canonical=True)
    else:
        ident = ExactMatrix.identity(ring, u.rank)
        m = None
        for g in gens:
            d = u.row_action[g] - ident
            m = d if m is None else m.hstack(d)
        sub = Submodule(u, kernel(m), canonical=True)
    u._fixed[h] = sub
    return sub


def _orbit_sums(u: Lattice, gens: Sequence[int]) -> ExactMatrix:
    imgs = u.permutation_images
    n = u.rank
    seen = [False] * n
    rows = []
    for i in range(n):
        if seen[i]:
            continue
        orbit = {i}
        frontier = [i]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = imgs[g][a]
                    if b not in orbit:
                        orbit.add(b)
                        nxt.append(b)
            frontier = nxt
        for a in orbit:
            seen[a] = True
        rows.append([int(a in orbit) for a in range(n)])
    return ExactMatrix(u.ring, rows, n)


@dataclass(frozen=True)
class TraceMap:
    """``Tr_Q^P : u^Q -> u^P`` in the canonical generating rows of both."""

    source: Submodule
    target: Submodule
    matrix: ExactMatrix  # coordinates of the images in target generators
    images: ExactMatrix  # images as ambient vectors


def trace_map(u: Lattice, q: Subgroup, p: Subgroup) -> TraceMap:
    if not q.issubset(p):
        raise LatticeError("trace needs Q contained in P")
    src = fixed_points(u, q)
    tgt = fixed_points(u, p)
    imgs = _coset_sum(u, q, p, src.basis)
    coords = tgt.coordinates(imgs)  # raises if some image is not P-fixed
    return TraceMap(src, tgt, coords, imgs)


def _coset_sum(u: Lattice, q: Subgroup, p: Subgroup, vecs: ExactMatrix) -> ExactMatrix:
    g = u.group
    seen: set[int] = set()
    out = ExactMatrix.zeros(u.ring, vecs.nrows, u.rank)
    for x in p.elements:
        if x in seen:
            continue
        seen.update(g.mul(x, y) for y in q.elements)
        out = out + u.act(x, vecs)
    return out


@dataclass(frozen=True)
class Character:
    """Homomorphism from ``subgroup`` to the units of the ring, as element -> value."""

    subgroup: Subgroup
    values: tuple[tuple[int, int], ...]

    def __call__(self, x: int) -> int:
        return dict(self.values)[x]

    @property
    def is_trivial(self) -> bool:
        return all(v == 1 for _, v in self.values)

    def label(self) -> str:
        return "trivial" if self.is_trivial else "{" + ", ".join(f"{k}:{v}" for k, v in self.values) + "}"


def p_power_units(ring: RingSpec) -> list[int]:
    """Units of p-power multiplicative order (Z: only +-1, and -1 only for p = 2)."""
    p = ring.p
    if ring.is_integers:
        return [1, -1] if p == 2 else [1]
    q = ring.modulus
    return sorted(
        u for u in range(1, q) if math.gcd(u, p) == 1 and pow(u, p ** max(ring.e - 1, 0), q) == 1
    )


def characters(g: PGroup, h: Subgroup, ring: RingSpec) -> list[Character]:
    """All characters of ``h`` with values of p-power order, trivial first."""
    units = p_power_units(ring)
    gens = g.subgroup_generators(h)
    red = ring.reduce
    out = []
    for vals in itertools.product(units, repeat=len(gens)):
        table = {0: 1}
        frontier = [0]
        ok = True
        while frontier and ok:
            nxt = []
            for x in frontier:
                for s, v in zip(gens, vals):
                    y = g.mul(s, x)
                    val = red(v * table[x])
                    if y in table:
                        if table[y] != val:
                            ok = False
                            break
                    else:
                        table[y] = val
                        nxt.append(y)
                if not ok:
                    break
            frontier = nxt
        if ok:
            out.append(Character(h, tuple(sorted(table.items()))))
    out.sort(key=lambda c: (not c.is_trivial, c.values))
    return out


def twisted_fixed_points(u: Lattice, chi: Character) -> Submodule:
    """``{x : g.x = chi(g) x for g in H}``."""
    gens = _subgroup_gens(u, chi.subgroup)
    if not gens:
        return Submodule(u, ExactMatrix.identity(u.ring, u.rank), canonical=True)
    ident = ExactMatrix.identity(u.ring, u.rank)
    m = None
    for g in gens:
        d = u.row_action[g] - ident.scale(chi(g))
        m = d if m is None else m.hstack(d)
    return Submodule(u, kernel(m), canonical=True)


def sigma_mult(u: Lattice, n: Subgroup) -> LatticeMap:
    """Multiplication by ``sum_{x in N} x`` as an endomorphism of ``u``."""
    if not u.group.is_normal(n):
        raise LatticeError("Sigma_N needs N normal")
    m = ExactMatrix.zeros(u.ring, u.rank, u.rank)
    for x in n.elements:
        m = m + u.row_action[x]
    return LatticeMap(u, u, m)


# ---------------------------------------------------------------------------
# Mackey decomposition


@dataclass
class MackeyDecomposition:
    components: list[tuple[int, Subgroup, Lattice]]  # (double coset rep t, L ∩ tHt^-1 in G, lattice over L)
    total: Lattice  # direct sum of the components
    target: Lattice  # restrict(induce(v, G), L)
    isomorphism: LatticeMap  # total -> target


def conjugate_restrict(v: Lattice, g: PGroup, t: int, lg: PGroup, s: Subgroup) -> Lattice:
    """``tV`` restricted to ``s`` (a subgroup of G inside L), over a subgroup-group of ``lg``."""
    hg = v.group
    pos = {x: i for i, x in enumerate(hg.embedding)} if hg.parent is not None else {x: x for x in range(g.order)}
    s_in_l = lg.from_parent(s)
    sg = lg.subgroup_group(s_in_l)
    tinv = g.inv(t)
    action = []
    for i in range(sg.order):
        x = lg.embedding[s_in_l.elements[i]] if lg.parent is not None else s_in_l.elements[i]
        hh = g.mul(g.mul(tinv, x), t)
        action.append(v.action[pos[hh]])
    return Lattice(sg, v.ring, action, check=False)


def mackey_decompose(v: Lattice, g: PGroup, l: Subgroup) -> MackeyDecomposition:
    """``(V↑G)↓L = ⊕_{t in L\\G/H} (tV↓_{tH ∩ L})↑L`` with an explicit, verified isomorphism."""
    hg = v.group
    h = Subgroup.of(hg.embedding) if hg.parent is not None else g.whole
    if hg.parent is not g and hg is not g:
        raise LatticeError("v must live on a subgroup of g")
    pos = {x: i for i, x in enumerate(h.elements)}
    w = induce(v, g)
    lg = g.subgroup_group(l)
    target = restrict(w, l)
    cosets_h = g.left_cosets(h)
    where = {x: i for i, c in enumerate(cosets_h) for x in c}
    reps_h = [c[0] for c in cosets_h]
    r = v.rank
    comps = []
    image_rows = []
    for t in g.double_cosets(l, h):
        tht = g.conjugate_subgroup(t, h)
        s = Subgroup.of(x for x in l.elements if x in tht)
        cv = conjugate_restrict(v, g, t, lg, s)
        comp = induce(cv, lg)
        comps.append((t, s, comp))
        s_in_l = lg.from_parent(s)
        for c in lg.left_cosets(s_in_l):
            y = lg.embedding[c[0]]
            z = g.mul(y, t)
            i = where[z]
            k = g.mul(g.inv(reps_h[i]), z)
            blk = v.action[pos[k]]
            for m in range(r):
                row = [0] * w.rank
                for a in range(r):
                    row[i * r + a] = blk[a, m]
                image_rows.append(row)
    total, _, _ = direct_sum([c for _, _, c in comps])
    iso = ExactMatrix(v.ring, image_rows, w.rank)
    f = LatticeMap(total, target, iso, check=False)
    if not (f.is_equivariant() and is_isomorphism(f)):
        raise LatticeError("Mackey isomorphism failed verification")
    return MackeyDecomposition(comps, total, target, f)


# ---------------------------------------------------------------------------
# First cohomology


def cocycle_basis(h: Subgroup, u: Lattice) -> tuple[tuple[int, ...], ExactMatrix]:
    """Generators of ``h`` and a basis of crossed homomorphisms ``h -> u``.

    A crossed homomorphism is recorded by its values on the generators,
    concatenated (generator ``i`` occupies columns ``i*rank .. (i+1)*rank-1``).
    It is determined by those values; the cocycle identity is imposed on
    every pair (generator, element), which is equivalent to imposing it on
    all pairs.  For ``h = G`` the generators are ``u.group.generators``.
    """
    if not u.ring.is_integers:
        raise RingError("cocycles are computed in Integers mode")
    g = u.group
    gens = tuple(g.generators) if h.order == g.order else g.subgroup_generators(h)
    r = u.rank
    k = len(gens)
    ring = u.ring
    kr = k * r
    if kr == 0:
        return gens, ExactMatrix.zeros(ring, 0, 0)
    blocks: dict[int, flint.fmpz_mat] = {0: flint.fmpz_mat(kr, r)}
    sel = []
    for i in range(k):
        e = flint.fmpz_mat(kr, r)
        for a in range(r):
            e[i * r + a, a] = 1
        sel.append(e)
    ract = [u.row_action[s].flint for s in gens]
    constraints = []
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for i, s in enumerate(gens):
                y = g.mul(s, x)
                cand = sel[i] + blocks[x] * ract[i]
                if y in blocks:
                    d = cand - blocks[y]
                    if not d.is_zero():
                        constraints.append(d)
                else:
                    blocks[y] = cand
                    nxt.append(y)
        frontier = nxt
    if constraints:
        c = ExactMatrix(ring, [[int(x) for x in row] for row in _hcat(constraints).tolist()], len(constraints) * r)
        return gens, kernel(c)
    return gens, ExactMatrix.identity(ring, kr)


def h1(h: Subgroup, u: Lattice) -> ModulePresentation:
    """p-part of ``H^1(h, u)``: crossed homomorphisms modulo principal ones."""
    if not u.ring.is_integers:
        raise RingError("h1 needs Integers mode: cohomology of a truncation differs from that of the lattice")
    gens, z1 = cocycle_basis(h, u)
    r = u.rank
    ring = u.ring
    if not gens or r == 0:
        return ModulePresentation()
    ident = ExactMatrix.identity(ring, r)
    b1 = None
    for s in gens:
        d = u.row_action[s] - ident
        b1 = d if b1 is None else b1.hstack(d)
    coords = solve(z1, b1)
    if coords is None:
        raise LatticeError("coboundaries are not cocycles")
    return smith_invariants(coords)


def _hcat(mats):
    rows = mats[0].nrows()
    out = flint.fmpz_mat(rows, sum(m.ncols() for m in mats))
    off = 0
    for m in mats:
        for i in range(rows):
            for j in range(m.ncols()):
                v = m[i, j]
                if v:
                    out[i, off + j] = v
        off += m.ncols()
    return out


# ---------------------------------------------------------------------------
# Freeness over a normal subgroup


@dataclass(frozen=True)
class FreeBasis:
    rank: int
    basis: ExactMatrix  # rows x_i with {g.x_i} an R-basis of u


def head_rows(u: Lattice) -> tuple[list[list[int]], list[int]]:
    """RREF over F_p of the augmentation submodule ``I_G u + p u`` (mod p)."""
    ident = ExactMatrix.identity(u.ring, u.rank)
    rows = []
    for s in u.group.generators:
        rows.extend((u.row_action[s] - ident).rows)
    return fp_rref(rows, u.rank, u.ring.p)


def is_free_over(u: Lattice, n: Subgroup) -> FreeBasis | None:
    """An R[n]-basis of ``u`` if ``u`` restricted to ``n`` is free, else ``None``.

    The head of ``u↓n`` has dimension ``d``; lifting a head basis gives a map
    ``R[n]^d -> u`` that is an isomorphism exactly when ``u`` is free
    (Nakayama), which is decided by its determinant mod p.
    """
    un = restrict(u, n)
    red, piv = head_rows(un)
    d = u.rank - len(red)
    if d * n.order != u.rank:
        return None
    lifts = [j for j in range(u.rank) if j not in set(piv)]
    rows = []
    for j in lifts:
        for x in range(un.group.order):
            rows.append(un.row_action[x].rows[j])
    if len(fp_rref(rows, u.rank, u.ring.p)[0]) != u.rank:
        return None
    basis = ExactMatrix(u.ring, [[int(i == j) for i in range(u.rank)] for j in lifts], u.rank)
    return FreeBasis(d, basis)


def free_map(u: Lattice, n: Subgroup, fb: FreeBasis) -> ExactMatrix:
    """Rows ``g.x_i`` (i major, g in order of n) for a free basis."""
    rows = []
    for xi in fb.basis.rows:
        v = ExactMatrix(u.ring, [xi], u.rank)
        for g in n.elements:
            rows.extend(u.act(g, v).rows)
    return ExactMatrix(u.ring, rows, u.rank)


# ---------------------------------------------------------------------------
# Equivariant maps


def hom_basis(u: Lattice, v: Lattice) -> list[ExactMatrix]:
    """A basis of ``Hom_G(u, v)`` as matrices (Integers mode: a Z-basis)."""
    if u.group is not v.group or u.ring != v.ring:
        raise LatticeError("hom between lattices over different groups or rings")
    r, s = u.rank, v.rank
    n = r * s
    if n == 0:
        return []
    # unknown M (r x s) flattened row-major; constraint rows of A_g M - M B_g for each generator
    cols = []
    for g in u.group.generators:
        a = u.row_action[g].rows
        b = v.row_action[g].rows
        for i in range(r):
            for j in range(s):
                col = [0] * n
                for k in range(r):
                    if a[i][k]:
                        col[k * s + j] += a[i][k]
                for k in range(s):
                    if b[k][j]:
                        col[i * s + k] -= b[k][j]
                cols.append(col)
    if not cols:
        ker = ExactMatrix.identity(u.ring, n)
    else:
        ker = kernel(ExactMatrix(u.ring, cols, n).transpose())
    return [ExactMatrix(u.ring, [row[i * s:(i + 1) * s] for i in range(r)], s) for row in ker.rows]
