"""Deciding whether a lattice is a permutation lattice, and Weiss' theorem.

Recognition runs the permutation cover: ``X`` is a permutation lattice
exactly when the cover ``theta`` is injective (it is always onto), in which
case ``theta`` itself is the isomorphism.  Everything is p-local: in
Integers mode "isomorphism" means an isomorphism after inverting the
primes other than p.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from enum import Enum

from .brauer import double_quotient, head_dim
from .cover import CoverResult, lift_from_permutation, permutation_cover
from .exactla import ExactMatrix, RingError, fp_rref, smith_invariants, solve_local
from .latmod import (
    FreeBasis,
    Lattice,
    LatticeMap,
    Submodule,
    direct_sum,
    fixed_points,
    h1,
    is_free_over,
    is_surjective_p_locally,
    map_kernel,
    perm_lattice,
    quotient_lattice,
    reduce_mod,
    sigma_mult,
    sublattice,
)
from .pgroup import Subgroup

log = logging.getLogger(__name__)


@dataclass
class RecognitionReport:
    """Verdict with its certificate.

    For a permutation lattice ``isomorphism`` is the cover map, an explicit
    isomorphism from ``structure``'s coset modules; otherwise ``kernel`` is
    the nonzero kernel of the cover.
    """

    is_permutation: bool
    structure: object  # PermutationStructure of the cover
    cover: CoverResult | None
    head_dims: dict[Subgroup, int]
    method: str = "cover"
    details: dict = field(default_factory=dict)

    @property
    def isomorphism(self) -> LatticeMap | None:
        return self.cover.theta if self.is_permutation and self.cover is not None else None

    @property
    def kernel(self) -> Submodule | None:
        return self.cover.kernel if self.cover is not None else None

    @property
    def verdict(self) -> str:
        return "Permutation" if self.is_permutation else "NotPermutation"


def recognize_permutation(u: Lattice, rng: random.Random | None = None) -> RecognitionReport:
    res = permutation_cover(u, rng=rng)
    perm = res.kernel.rank == 0 and res.cover_module.rank == u.rank
    heads = {P: res.structure.multiplicity(P) for P in u.group.class_representatives}
    return RecognitionReport(perm, res.structure, res, heads)


def is_coflasque(u: Lattice) -> tuple[bool, Subgroup | None]:
    """``H^1(H, u) = 0`` for all subgroups H; otherwise the first failing H."""
    if not u.ring.is_integers:
        raise RingError("coflasqueness is only decided in Integers mode")
    for h in u.group.all_subgroups:
        if not h1(h, u).is_zero:
            return False, h
    return True, None


class CliffWeissDisagreement(AssertionError):
    pass


def cliff_weiss_recognize(u: Lattice) -> RecognitionReport:
    """Permutation iff coflasque and permutation mod p; cross-checked against the cover."""
    if not u.ring.is_integers:
        raise RingError("cliff_weiss_recognize needs Integers mode")
    cofl, witness = is_coflasque(u)
    modp = recognize_permutation(reduce_mod(u, 1))
    verdict = cofl and modp.is_permutation
    direct = recognize_permutation(u)
    agree = verdict == direct.is_permutation
    if agree and verdict:
        agree = modp.structure == direct.structure
    if not agree:
        raise CliffWeissDisagreement(
            f"coflasque={cofl} (witness {witness}), mod-p permutation={modp.is_permutation}, "
            f"cover verdict={direct.is_permutation}"
        )
    details = {
        "coflasque": cofl,
        "coflasque_witness": witness,
        "mod_p_permutation": modp.is_permutation,
        "mod_p_structure": modp.structure,
    }
    return RecognitionReport(verdict, direct.structure, direct.cover, direct.head_dims, "cliffweiss", details)


# ---------------------------------------------------------------------------
# Splitting lemmas


@dataclass
class SplitInjection:
    """R-linear ``r`` with ``f.matrix @ r = c * I`` (c prime to p)."""

    matrix: ExactMatrix
    c: int


def split_injection_mod_p(f: LatticeMap) -> SplitInjection | None:
    """If ``f`` is injective mod p it is a split injection of R-lattices."""
    if not f.source.ring.is_integers:
        raise RingError("split_injection_mod_p needs Integers mode")
    m = f.matrix
    if len(fp_rref(m.rows, m.ncols, f.source.ring.p)[0]) != m.nrows:
        return None
    out = solve_local(m.transpose(), ExactMatrix.identity(m.ring, m.nrows))
    if out is None:  # excluded by the mod-p rank
        raise AssertionError("mod-p injective map has no p-local retraction")
    x, c = out
    pres = smith_invariants(m)
    if pres.torsion:
        raise AssertionError("cokernel of a mod-p injective map has p-torsion")
    return SplitInjection(x.transpose(), c)


@dataclass
class FreeSummand:
    submodule: Submodule  # image of gamma
    gamma: LatticeMap  # R[G]^d -> l
    retraction: LatticeMap  # l -> R[G]^d, equivariant, gamma then retraction = c * id
    c: int

    def projection(self) -> ExactMatrix:
        """``c`` times the idempotent of ``l`` onto the free summand."""
        return self.retraction.matrix @ self.gamma.matrix


class NotFreeError(ValueError):
    pass


def lift_free_summand(l: Lattice, f_rows: ExactMatrix) -> FreeSummand:
    """Lift a kG-free submodule of ``l / p l`` to a free summand of ``l``."""
    if not l.ring.is_integers:
        raise RingError("lift_free_summand needs Integers mode")
    g = l.group
    p = l.ring.p
    # F and its radical I_G F, mod p
    span_rows = [r for x in range(g.order) for r in l.act(x, f_rows).rows]
    f_rref, _ = fp_rref(span_rows, l.rank, p)
    dim = len(f_rref)
    if dim % g.order:
        raise NotFreeError(f"dimension {dim} not divisible by |G| = {g.order}")
    d = dim // g.order
    rad = [[(a - b) % p for a, b in zip(l.act(s, ExactMatrix(l.ring, [r], l.rank)).rows[0], r)]
           for s in g.generators for r in f_rref]
    rad_rref, _ = fp_rref(rad, l.rank, p)
    if dim - len(rad_rref) != d:
        raise NotFreeError("submodule is not free: head too large")
    lifts = []
    cur = list(rad_rref)
    for r in f_rows.rows:
        if len(fp_rref(cur + [r], l.rank, p)[0]) > len(cur):
            lifts.append(r)
            cur.append(r)
        if len(lifts) == d:
            break
    free, _, _ = direct_sum([perm_lattice(g, g.trivial_subgroup, l.ring) for _ in range(d)], group=g, ring=l.ring)
    rows = [l.act(x, ExactMatrix(l.ring, [y], l.rank)).rows[0] for y in lifts for x in range(g.order)]
    gmat = ExactMatrix(l.ring, rows, l.rank)
    if len(fp_rref(rows, l.rank, p)[0]) != dim:
        raise NotFreeError("lifted generators do not span a free module mod p")
    gamma = LatticeMap(free, l, gmat) if rows else LatticeMap.zero(free, l)
    split = split_injection_mod_p(gamma)
    rho = split.matrix  # l -> R[G]^d, R-linear
    # average: Phi(x) = sum_g sum_i eps_i(rho(g^-1 x)) e_{i,g}
    n = g.order
    cols = [[0] * (d * n) for _ in range(l.rank)]
    for x in range(n):
        ginv = l.row_action[g.inv(x)]
        m = (ginv @ rho).rows
        for a in range(l.rank):
            for i in range(d):
                cols[a][i * n + x] = m[a][i * n]
    phi = LatticeMap(l, free, ExactMatrix(l.ring, cols, d * n))
    return FreeSummand(Submodule(l, gmat), gamma, phi, split.c)


# ---------------------------------------------------------------------------
# Weiss' theorem


class HypothesisFailed(ValueError):
    def __init__(self, which: tuple[str, ...] | str, message: str):
        super().__init__(message)
        self.which = (which,) if isinstance(which, str) else tuple(which)


def sigma_quotient_iso(l: Lattice, u: Lattice, n: Subgroup, f: LatticeMap) -> tuple[LatticeMap, int]:
    """Lift ``f : l -> u / Sigma_N u``, onto with kernel ``Sigma_N l``, to an isomorphism ``l -> u``.

    Returns ``(k, c)`` with ``k then proj = c * f`` and ``k`` an isomorphism
    (p-locally).  Preconditions are checked and reported by raising
    :class:`HypothesisFailed`.
    """
    g = u.group
    if n.order != g.p or any(g.mul(a, b) != g.mul(b, a) for a in n.elements for b in range(g.order)):
        raise HypothesisFailed("central", "N must be central of order p")
    if is_free_over(u, n) is None:
        raise HypothesisFailed("hypothesis_1", "U is not free over N")
    un = sublattice(u, fixed_points(u, n))
    if not recognize_permutation(un).is_permutation:
        raise HypothesisFailed("hypothesis_2", "U^N is not a permutation lattice")
    if l.perm_blocks is None:
        raise HypothesisFailed("source", "L must be built from coset modules")
    sig_u = Submodule(u, sigma_mult(u, n).matrix)
    q, proj = quotient_lattice(u, sig_u)
    if f.target.rank != q.rank or f.target.action != q.action:
        raise HypothesisFailed("target", "f must map to the quotient U / Sigma_N U in its standard basis")
    if not is_surjective_p_locally(f):
        raise HypothesisFailed("surjective", "f is not onto U / Sigma_N U")
    if map_kernel(f) != Submodule(l, sigma_mult(l, n).matrix):
        raise HypothesisFailed("kernel", "kernel of f is not Sigma_N L")
    lifted = lift_from_permutation(proj, f)
    if lifted is None:
        raise HypothesisFailed("lift", "f does not lift through U -> U / Sigma_N U")
    k, c = lifted
    p = g.p
    if k.source.rank != k.target.rank or len(fp_rref(k.matrix.rows, k.matrix.ncols, p)[0]) != k.source.rank:
        raise AssertionError("lift is not an isomorphism although all hypotheses hold")
    return k, c


class WeissStatus(str, Enum):
    VERIFIED = "TheoremVerified"
    HYPOTHESIS_FAILED = "HypothesisFailed"
    VIOLATED = "TheoremViolated"


@dataclass
class WeissReport:
    hypothesis_1: FreeBasis | None
    hypothesis_2: RecognitionReport
    conclusion: RecognitionReport
    status: WeissStatus
    failed: tuple[int, ...] = ()

    def summary(self) -> str:
        if self.status is WeissStatus.HYPOTHESIS_FAILED:
            msgs = {1: "hypothesis 1 failed: U not free over N", 2: "hypothesis 2 failed: U^N not permutation"}
            return "; ".join(msgs[i] for i in self.failed)
        return self.status.value


def weiss_check(u: Lattice, n: Subgroup) -> WeissReport:
    """Evaluate both hypotheses and the conclusion of Weiss' theorem for ``(u, n)``.

    ``U^N`` is recognized as a G-lattice; N acts trivially on it, so this is
    the same as recognizing it over ``G/N``.
    """
    g = u.group
    if not g.is_normal(n):
        raise ValueError("N must be normal")
    if not u.ring.is_integers:
        raise RingError("weiss_check needs Integers mode")
    hyp1 = is_free_over(u, n)
    hyp2 = recognize_permutation(sublattice(u, fixed_points(u, n)))
    concl = recognize_permutation(u)
    failed = tuple(i for i, ok in ((1, hyp1 is not None), (2, hyp2.is_permutation)) if not ok)
    if failed:
        status = WeissStatus.HYPOTHESIS_FAILED
    elif concl.is_permutation:
        status = WeissStatus.VERIFIED
    else:
        status = WeissStatus.VIOLATED
        log.error(
            "theorem violated: |G|=%d, N=%s, rank=%d, free rank=%s, U^N structure=%s, cover kernel rank=%d\n"
            "generator matrices: %s",
            g.order, list(n.elements), u.rank, hyp1.rank if hyp1 else None, hyp2.structure,
            concl.kernel.rank, [u.action[s].tolist() for s in g.generators],
        )
    return WeissReport(hyp1, hyp2, concl, status, failed)
