"""Finite p-groups stored by multiplication table, and their subgroup lattices.

Elements are integers ``0..order-1`` with ``0`` the identity.  ``mul(a, b)``
is the product ``ab`` (apply ``b`` first when elements are permutations).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .exactla import is_prime

DEFAULT_ORDER_CAP = 256


class GroupError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Subgroup:
    """A subgroup as its sorted tuple of element indices.

    Ordering is the canonical one: by order, then lexicographically.
    """

    order: int
    elements: tuple[int, ...]

    @classmethod
    def of(cls, elements: Iterable[int]) -> "Subgroup":
        els = tuple(sorted(set(elements)))
        return cls(len(els), els)

    def __contains__(self, g: int) -> bool:
        return g in self._set

    @cached_property
    def _set(self) -> frozenset[int]:
        return frozenset(self.elements)

    def issubset(self, other: "Subgroup") -> bool:
        return self._set <= other._set

    def __repr__(self):
        return f"Subgroup({list(self.elements)})"


def _perm_mul(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    # (ab)(x) = a(b(x))
    return tuple(a[i] for i in b)


def parse_cycles(text: str, degree: int | None = None) -> tuple[int, ...]:
    """Parse ``"(1 2 3)(4 5)"`` (1-based points, commas allowed) into images."""
    cycles = []
    buf = text.strip()
    if buf in ("", "()"):
        cycles = []
    else:
        for part in buf.split(")"):
            part = part.strip()
            if not part:
                continue
            if not part.startswith("("):
                raise GroupError(f"bad cycle notation: {text!r}")
            pts = [int(t) for t in part[1:].replace(",", " ").split()]
            if any(x < 1 for x in pts) or len(set(pts)) != len(pts):
                raise GroupError(f"bad cycle: ({part[1:]})")
            cycles.append(pts)
    n = max([degree or 0] + [max(c) for c in cycles if c])
    img = list(range(n))
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            img[a - 1] = b - 1
    return tuple(img)


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


class PGroup:
    """Finite p-group given by its full multiplication table."""

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        p: int,
        generators: Sequence[int] | None = None,
        labels: Sequence[str] | None = None,
        *,
        parent: "PGroup | None" = None,
        embedding: Sequence[int] | None = None,
        check: bool = True,
    ):
        if not is_prime(p):
            raise GroupError(f"p = {p} is not prime")
        self.p = p
        self.table = tuple(tuple(r) for r in table)
        self.order = len(self.table)
        if self.order == 0:
            raise GroupError("empty group")
        if not _is_p_power(self.order, p):
            raise GroupError(f"order {self.order} is not a power of {p}")
        if check:
            self._validate()
        self.identity = 0
        self.inverses = tuple(r.index(0) for r in self.table)
        self.generators = tuple(generators) if generators is not None else self._greedy_generators(range(self.order))
        self.labels = tuple(labels) if labels is not None else self._word_labels()
        self.parent = parent
        self.embedding = tuple(embedding) if embedding is not None else None
        self._sub_groups: dict[Subgroup, PGroup] = {}

    # -- construction -------------------------------------------------------

    def _validate(self):
        n = self.order
        t = self.table
        for r in t:
            if sorted(r) != list(range(n)):
                raise GroupError("table row is not a permutation")
        if list(t[0]) != list(range(n)) or [r[0] for r in t] != list(range(n)):
            raise GroupError("element 0 must be the identity")
        for j in range(n):
            if sorted(t[i][j] for i in range(n)) != list(range(n)):
                raise GroupError("table column is not a permutation")
        if n <= 64:
            triples = itertools.product(range(n), repeat=3)
        else:
            rng = random.Random(0)
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(20000))
        for a, b, c in triples:
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise GroupError(f"table is not associative at ({a}, {b}, {c})")

    @classmethod
    def from_generators(
        cls, perms: Sequence[Sequence[int] | str], p: int, cap: int = DEFAULT_ORDER_CAP
    ) -> "PGroup":
        """Close a list of permutations (image tuples, 0-based, or cycle strings)."""
        perms = [parse_cycles(x) if isinstance(x, str) else tuple(x) for x in perms]
        degree = max([len(x) for x in perms] + [1])
        perms = [x + tuple(range(len(x), degree)) for x in perms]
        for x in perms:
            if sorted(x) != list(range(degree)):
                raise GroupError(f"not a permutation: {x}")
        ident = tuple(range(degree))
        elements = [ident]
        words = [""]
        index = {ident: 0}
        gen_idx = []
        frontier = [0]
        # breadth-first so labels are shortest words
        names = _generator_names(len(perms))
        while frontier:
            nxt = []
            for i in frontier:
                for k, g in enumerate(perms):
                    h = _perm_mul(elements[i], g)
                    if h not in index:
                        index[h] = len(elements)
                        elements.append(h)
                        words.append(words[i] + names[k])
                        nxt.append(index[h])
                        if len(elements) > cap:
                            raise GroupError(f"group order exceeds cap {cap}")
            frontier = nxt
        gen_idx = [index[g] for g in perms]
        n = len(elements)
        if not _is_p_power(n, p):
            raise GroupError(f"generated group has order {n}, not a power of {p}")
        table = [[index[_perm_mul(a, b)] for b in elements] for a in elements]
        labels = [_compress_word(w) or "1" for w in words]
        g = cls(table, p, gen_idx, labels, check=n <= 64)
        g.permutations = tuple(elements)
        return g

    @classmethod
    def cyclic(cls, n: int, p: int) -> "PGroup":
        return cls.from_generators([tuple((i + 1) % n for i in range(n))] if n > 1 else [], p)

    @classmethod
    def trivial(cls, p: int) -> "PGroup":
        return cls([[0]], p, [], ["1"])

    def _greedy_generators(self, candidates: Iterable[int]) -> tuple[int, ...]:
        gens: list[int] = []
        span = {0}
        for g in candidates:
            if g not in span:
                gens.append(g)
                span = set(self.closure(gens))
        return tuple(gens)

    def _word_labels(self) -> tuple[str, ...]:
        names = _generator_names(len(self.generators))
        words = {0: ""}
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                for k, g in enumerate(self.generators):
                    h = self.table[i][g]
                    if h not in words:
                        words[h] = words[i] + names[k]
                        nxt.append(h)
            frontier = nxt
        return tuple(_compress_word(words[i]) or "1" for i in range(self.order))

    # -- element arithmetic -------------------------------------------------

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conj(self, g: int, x: int) -> int:
        """g x g^-1."""
        t = self.table
        return t[t[g][x]][self.inverses[g]]

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = self.table[x][g]
            k += 1
        return k

    def closure(self, gens: Iterable[int]) -> list[int]:
        gens = [g for g in gens if g != 0]
        seen = {0}
        out = [0]
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.table[x][g]
                    if y not in seen:
                        seen.add(y)
                        out.append(y)
                        nxt.append(y)
            frontier = nxt
        return out

    def subgroup(self, gens: Iterable[int]) -> Subgroup:
        return Subgroup.of(self.closure(gens))

    def word(self, text: str) -> int:
        """Evaluate a word such as ``"a^2b"`` or ``"1"`` in the generator names."""
        names = _generator_names(len(self.generators))
        lookup = {n: g for n, g in zip(names, self.generators)}
        text = text.strip()
        if text in ("1", "e", ""):
            return 0
        x = 0
        i = 0
        while i < len(text):
            ch = text[i]
            if ch not in lookup:
                raise GroupError(f"unknown generator {ch!r} in word {text!r}")
            i += 1
            exp = 1
            if i < len(text) and text[i] == "^":
                j = i + 1
                if j < len(text) and text[j] == "-":
                    j += 1
                k = j
                while k < len(text) and text[k].isdigit():
                    k += 1
                if k == j:
                    raise GroupError(f"bad exponent in word {text!r}")
                exp = int(text[i + 1 : k])
                i = k
            g = lookup[ch]
            if exp < 0:
                g, exp = self.inv(g), -exp
            for _ in range(exp):
                x = self.table[x][g]
        return x

    # -- subgroups ----------------------------------------------------------

    @property
    def whole(self) -> Subgroup:
        return Subgroup.of(range(self.order))

    @property
    def trivial_subgroup(self) -> Subgroup:
        return Subgroup.of([0])

    @cached_property
    def all_subgroups(self) -> tuple[Subgroup, ...]:
        """Every subgroup, built bottom-up by cyclic extension, canonically sorted."""
        found = {self.trivial_subgroup}
        layer = [self.trivial_subgroup]
        while layer:
            nxt = set()
            for h in layer:
                for g in range(self.order):
                    if g in h:
                        continue
                    k = Subgroup.of(self.closure(h.elements[1:] + (g,)))
                    # every subgroup contains a subgroup of index p, so index-p steps suffice
                    if k.order == h.order * self.p and k not in found:
                        nxt.add(k)
            found |= nxt
            layer = list(nxt)
        return tuple(sorted(found))

    def conjugate_subgroup(self, g: int, s: Subgroup) -> Subgroup:
        return Subgroup.of(self.conj(g, x) for x in s.elements)

    @cached_property
    def subgroup_classes(self) -> tuple[tuple[Subgroup, tuple[Subgroup, ...]], ...]:
        """Conjugacy classes as (least member, sorted members)."""
        seen: set[Subgroup] = set()
        out = []
        for s in self.all_subgroups:
            if s in seen:
                continue
            cls = sorted({self.conjugate_subgroup(g, s) for g in range(self.order)})
            seen.update(cls)
            out.append((cls[0], tuple(cls)))
        return tuple(out)

    @cached_property
    def _class_rep(self) -> dict[Subgroup, Subgroup]:
        return {m: rep for rep, members in self.subgroup_classes for m in members}

    def class_representative(self, s: Subgroup) -> Subgroup:
        return self._class_rep[s]

    @property
    def class_representatives(self) -> tuple[Subgroup, ...]:
        return tuple(rep for rep, _ in self.subgroup_classes)

    def are_conjugate(self, a: Subgroup, b: Subgroup) -> bool:
        return self._class_rep[a] == self._class_rep[b]

    def normalizer(self, s: Subgroup) -> Subgroup:
        return Subgroup.of(g for g in range(self.order) if self.conjugate_subgroup(g, s) == s)

    def is_normal(self, s: Subgroup) -> bool:
        return all(self.conj(g, x) in s for g in self.generators for x in s.elements)

    def is_subgroup(self, elements: Iterable[int]) -> bool:
        els = set(elements)
        return 0 in els and all(self.table[a][b] in els for a in els for b in els)

    @cached_property
    def center(self) -> Subgroup:
        return Subgroup.of(
            z for z in range(self.order) if all(self.table[z][g] == self.table[g][z] for g in range(self.order))
        )

    def central_subgroups_order_p(self) -> list[Subgroup]:
        z = self.center
        subs = {self.subgroup([x]) for x in z.elements if self.element_order(x) == self.p}
        return sorted(subs)

    def maximal_subgroups(self, s: Subgroup) -> list[Subgroup]:
        """Subgroups of ``s`` of index p (the maximal proper ones in a p-group)."""
        return [h for h in self.all_subgroups if h.order * self.p == s.order and h.issubset(s)]

    def minimal_overgroups(self, s: Subgroup) -> list[Subgroup]:
        return [h for h in self.all_subgroups if h.order == s.order * self.p and s.issubset(h)]

    def proper_subgroups(self, s: Subgroup) -> list[Subgroup]:
        return [h for h in self.all_subgroups if h.order < s.order and h.issubset(s)]

    def proper_overgroups(self, s: Subgroup) -> list[Subgroup]:
        return [h for h in self.all_subgroups if h.order > s.order and s.issubset(h)]

    def subgroup_generators(self, s: Subgroup) -> tuple[int, ...]:
        return self._greedy_generators(s.elements)

    # -- cosets -------------------------------------------------------------

    def left_cosets(self, s: Subgroup) -> list[tuple[int, ...]]:
        """Left cosets gS sorted by least element; each coset sorted."""
        seen: set[int] = set()
        out = []
        for g in range(self.order):
            if g in seen:
                continue
            c = tuple(sorted(self.table[g][h] for h in s.elements))
            seen.update(c)
            out.append(c)
        return out

    def left_transversal(self, s: Subgroup) -> list[int]:
        return [c[0] for c in self.left_cosets(s)]

    def double_cosets(self, left: Subgroup, right: Subgroup) -> list[int]:
        """Least element of each double coset ``left g right``, ascending."""
        return [min(c) for c in self.double_coset_sets(left, right)]

    def double_coset_sets(self, left: Subgroup, right: Subgroup) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for g in range(self.order):
            if g in seen:
                continue
            c = frozenset(self.table[self.table[a][g]][b] for a in left.elements for b in right.elements)
            seen |= c
            out.append(c)
        return out

    # -- derived groups -----------------------------------------------------

    def subgroup_group(self, s: Subgroup) -> "PGroup":
        """``s`` as a standalone group; its element i is ``s.elements[i]`` here."""
        if s in self._sub_groups:
            return self._sub_groups[s]
        pos = {g: i for i, g in enumerate(s.elements)}
        table = [[pos[self.table[a][b]] for b in s.elements] for a in s.elements]
        gens = [pos[g] for g in self.subgroup_generators(s)]
        labels = [self.labels[g] for g in s.elements]
        h = PGroup(table, self.p, gens, labels, parent=self, embedding=s.elements, check=False)
        self._sub_groups[s] = h
        return h

    def to_parent(self, s: Subgroup) -> Subgroup:
        """Image in the parent group of a subgroup of this subgroup-group."""
        if self.parent is None:
            return s
        return Subgroup.of(self.embedding[x] for x in s.elements)

    def from_parent(self, s: Subgroup) -> Subgroup:
        if self.parent is None:
            return s
        pos = {g: i for i, g in enumerate(self.embedding)}
        return Subgroup.of(pos[x] for x in s.elements)

    def quotient_group(self, n: Subgroup) -> tuple["PGroup", tuple[int, ...]]:
        """``G/n`` with the projection as a tuple ``element -> coset index``.

        Cosets are indexed in order of their least element, so the identity
        coset is 0 and ``G/1`` has the same table as ``G``.
        """
        if not self.is_normal(n):
            raise GroupError("quotient by a non-normal subgroup")
        cosets = self.left_cosets(n)
        proj = [0] * self.order
        for i, c in enumerate(cosets):
            for g in c:
                proj[g] = i
        reps = [c[0] for c in cosets]
        table = [[proj[self.table[a][b]] for b in reps] for a in reps]
        gens = sorted({proj[g] for g in self.generators} - {0})
        q = PGroup(table, self.p, None, [self.labels[r] for r in reps], check=False)
        q.generators = q._greedy_generators(gens)
        q.coset_reps = tuple(reps)
        return q, tuple(proj)

    # -- misc -----------------------------------------------------------------

    def subgroup_label(self, s: Subgroup) -> str:
        if s.order == 1:
            return "1"
        if s.order == self.order:
            return "G"
        gens = self._greedy_generators(sorted(s.elements, key=lambda g: (len(self.labels[g]), self.labels[g])))
        return "<" + ",".join(self.labels[g] for g in gens) + ">"

    def __repr__(self):
        return f"PGroup(order={self.order}, p={self.p})"

    def same_table(self, other: "PGroup") -> bool:
        return self.table == other.table and self.p == other.p


def _generator_names(k: int) -> list[str]:
    letters = "abcdfghjkmnpqrstuvwxyz"
    if k > len(letters):
        raise GroupError("too many generators")
    return list(letters[:k])


def _compress_word(w: str) -> str:
    out = []
    for ch, run in itertools.groupby(w):
        n = len(list(run))
        out.append(ch if n == 1 else f"{ch}^{n}")
    return "".join(out)


def direct_product_perms(*factors: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Generators of a direct product acting on the disjoint union of points."""
    total = sum(len(f[0]) for f in factors)
    out = []
    offset = 0
    for f in factors:
        n = len(f[0])
        for g in f:
            img = list(range(total))
            for i in range(n):
                img[offset + i] = offset + g[i]
            out.append(tuple(img))
        offset += n
    return out
