"""Exact linear algebra over the integers and over the chain rings Z/p^e.

Vectors are rows.  A matrix ``m`` acts on row vectors from the right, so the
row span of ``m`` is the image of ``x -> x*m`` and ``kernel(m)`` is
``{x : x*m = 0}``.

Integer-mode canonical forms are delegated to FLINT (``python-flint``); the
Howell form over Z/p^e is computed here since no mainstream package offers it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import flint


class RingMode(str, Enum):
    INTEGERS = "integers"
    TRUNCATED = "truncated"


class RingError(ValueError):
    """Operation called in a ring mode it does not support."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def valuation(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class RingSpec:
    """Coefficient ring: Z (p-localized at the configured prime) or Z/p^e."""

    mode: RingMode
    p: int
    e: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", RingMode(self.mode))
        if not is_prime(self.p):
            raise RingError(f"p = {self.p} is not prime")
        if self.mode is RingMode.TRUNCATED and self.e < 1:
            raise RingError("truncation exponent must be >= 1")
        if self.mode is RingMode.INTEGERS:
            object.__setattr__(self, "e", 0)

    @classmethod
    def integers(cls, p: int) -> "RingSpec":
        return cls(RingMode.INTEGERS, p)

    @classmethod
    def truncated(cls, p: int, e: int) -> "RingSpec":
        return cls(RingMode.TRUNCATED, p, e)

    @property
    def is_integers(self) -> bool:
        return self.mode is RingMode.INTEGERS

    @property
    def modulus(self) -> int | None:
        return None if self.is_integers else self.p**self.e

    def reduce(self, x: int) -> int:
        return x if self.is_integers else x % (self.p**self.e)

    def __str__(self):
        if self.is_integers:
            return f"Z (p={self.p})"
        return f"Z/{self.p}^{self.e}"


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    """Immutable matrix with exact entries in ``ring``."""

    ring: RingSpec
    nrows: int
    ncols: int
    rows: tuple[tuple[int, ...], ...] = field(repr=False)

    def __init__(self, ring: RingSpec, rows: Iterable[Sequence[int]], ncols: int | None = None):
        rows = tuple(tuple(ring.reduce(int(x)) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for a matrix with no rows")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "nrows", len(rows))
        object.__setattr__(self, "ncols", ncols)
        object.__setattr__(self, "rows", rows)

    # construction helpers

    @classmethod
    def zeros(cls, ring: RingSpec, nrows: int, ncols: int) -> "ExactMatrix":
        return cls(ring, [[0] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, ring: RingSpec, n: int) -> "ExactMatrix":
        return cls(ring, [[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_flint(cls, ring: RingSpec, m) -> "ExactMatrix":
        return cls(ring, [[int(x) for x in r] for r in m.tolist()], m.ncols())

    # structure

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.ring == other.ring and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.ring, self.shape, self.rows))

    def __repr__(self):
        return f"ExactMatrix({self.ring}, {[list(r) for r in self.rows]})"

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    @cached_property
    def flint(self):
        """FLINT integer matrix of the (representative) entries."""
        if self.nrows == 0 or self.ncols == 0:
            return flint.fmpz_mat(self.nrows, self.ncols)
        return flint.fmpz_mat(self.tolist())

    # arithmetic

    def _check_ring(self, other: "ExactMatrix"):
        if self.ring != other.ring:
            raise RingError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_ring(other)
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.nrows == 0 or other.ncols == 0 or self.ncols == 0:
            return ExactMatrix.zeros(self.ring, self.nrows, other.ncols)
        return ExactMatrix.from_flint(self.ring, self.flint * other.flint)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_ring(other)
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix(
            self.ring, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def __neg__(self) -> "ExactMatrix":
        return self.scale(-1)

    def scale(self, c: int) -> "ExactMatrix":
        return ExactMatrix(self.ring, [[c * x for x in r] for r in self.rows], self.ncols)

    def transpose(self) -> "ExactMatrix":
        if self.nrows == 0:
            return ExactMatrix(self.ring, [()] * self.ncols, 0)
        return ExactMatrix(self.ring, list(zip(*self.rows)), self.nrows)

    T = property(transpose)

    def vstack(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_ring(other)
        if self.ncols != other.ncols:
            raise ValueError("column mismatch in vstack")
        return ExactMatrix(self.ring, self.rows + other.rows, self.ncols)

    def hstack(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_ring(other)
        if self.nrows != other.nrows:
            raise ValueError("row mismatch in hstack")
        return ExactMatrix(
            self.ring, [r + s for r, s in zip(self.rows, other.rows)], self.ncols + other.ncols
        )

    def select_rows(self, idx: Iterable[int]) -> "ExactMatrix":
        return ExactMatrix(self.ring, [self.rows[i] for i in idx], self.ncols)

    def select_cols(self, idx: Sequence[int]) -> "ExactMatrix":
        return ExactMatrix(self.ring, [[r[j] for j in idx] for r in self.rows], len(idx))

    def with_ring(self, ring: RingSpec) -> "ExactMatrix":
        """Same integer entries read in another ring (reduced if truncated)."""
        return ExactMatrix(ring, self.rows, self.ncols)

    def nonzero_rows(self) -> "ExactMatrix":
        return ExactMatrix(self.ring, [r for r in self.rows if any(r)], self.ncols)


def vstack_all(ring: RingSpec, ncols: int, mats: Iterable[ExactMatrix]) -> ExactMatrix:
    rows: list[tuple[int, ...]] = []
    for m in mats:
        if m.ncols != ncols:
            raise ValueError("column mismatch in vstack")
        rows.extend(m.rows)
    return ExactMatrix(ring, rows, ncols)


@dataclass(frozen=True)
class ModulePresentation:
    """Finitely generated module as p-power invariant factors plus free rank.

    ``torsion`` is sorted decreasingly; prime-to-p torsion is dropped and
    ``discarded_prime_to_p`` records whether anything was dropped.
    """

    torsion: tuple[int, ...] = ()
    free_rank: int = 0
    discarded_prime_to_p: bool = False

    @property
    def is_zero(self) -> bool:
        return not self.torsion and self.free_rank == 0

    @property
    def order(self) -> int:
        return math.prod(self.torsion)


# ---------------------------------------------------------------------------
# Integer mode


def _require(m: ExactMatrix, mode: RingMode):
    if m.ring.mode is not mode:
        raise RingError(f"operation requires {mode.value} mode, got {m.ring}")


def hermite_form(m: ExactMatrix) -> tuple[ExactMatrix, ExactMatrix]:
    """Row Hermite normal form: ``(H, U)`` with ``U`` unimodular and ``U @ m == H``.

    Pivots are positive, entries above a pivot lie in ``[0, pivot)``, zero rows
    are at the bottom.
    """
    _require(m, RingMode.INTEGERS)
    if m.nrows == 0:
        return m, ExactMatrix.zeros(m.ring, 0, 0)
    if m.ncols == 0:
        return m, ExactMatrix.identity(m.ring, m.nrows)
    h, u = m.flint.hnf(transform=True)
    return ExactMatrix.from_flint(m.ring, h), ExactMatrix.from_flint(m.ring, u)


def _hnf_rows(m: ExactMatrix) -> ExactMatrix:
    if m.nrows == 0 or m.ncols == 0:
        return ExactMatrix.zeros(m.ring, 0, m.ncols)
    return ExactMatrix.from_flint(m.ring, m.flint.hnf()).nonzero_rows()


def smith_invariants(m: ExactMatrix) -> ModulePresentation:
    """p-parts of the invariant factors of ``coker(x -> x*m)``.

    In truncated mode the cokernel is computed over Z/p^e by lifting to Z and
    adjoining the relations ``p^e * I``.
    """
    p = m.ring.p
    if not m.ring.is_integers:
        m = m.with_ring(RingSpec.integers(p)).vstack(
            ExactMatrix.identity(RingSpec.integers(p), m.ncols).scale(m.ring.modulus)
        )
    if m.ncols == 0:
        return ModulePresentation()
    if m.nrows == 0:
        return ModulePresentation(free_rank=m.ncols)
    s = m.flint.snf()
    diag = [int(s[i, i]) for i in range(min(m.nrows, m.ncols))]
    nonzero = [abs(d) for d in diag if d != 0]
    free_rank = m.ncols - len(nonzero)
    torsion = []
    discarded = False
    for d in nonzero:
        v = 0
        while d % p == 0:
            d //= p
            v += 1
        if d != 1:
            discarded = True
        if v:
            torsion.append(p**v)
    return ModulePresentation(tuple(sorted(torsion, reverse=True)), free_rank, discarded)


# ---------------------------------------------------------------------------
# Truncated mode: Howell form over the chain ring Z/p^e


def _unit_part_inverse(x: int, p: int, e: int) -> tuple[int, int]:
    """For x != 0 mod p^e return (v, u^-1) with x = p^v * u, u a unit."""
    v = valuation(x, p)
    u = x // p**v
    return v, pow(u, -1, p**e)


def howell_form(m: ExactMatrix) -> ExactMatrix:
    """Canonical Howell form of the row span of ``m`` over Z/p^e.

    Rows are in echelon form with pivots ``p^v``, entries above each pivot are
    reduced into ``[0, p^v)``, and the row set is span-complete: for every
    ``k`` the rows vanishing on the first ``k`` columns span every element of
    the row span that vanishes there.
    """
    _require(m, RingMode.TRUNCATED)
    p, e = m.ring.p, m.ring.e
    q = p**e
    pool = [list(r) for r in m.rows if any(r)]
    done: list[tuple[int, list[int]]] = []  # (pivot column, row)
    for col in range(m.ncols):
        best = None
        for i, r in enumerate(pool):
            if r[col]:
                v = valuation(r[col], p)
                if best is None or v < best[0]:
                    best = (v, i)
        if best is None:
            continue
        v, i = best
        piv = pool.pop(i)
        _, uinv = _unit_part_inverse(piv[col], p, e)
        piv = [(uinv * x) % q for x in piv]
        pv = p**v
        rest = []
        for r in pool:
            if r[col]:
                c = r[col] // pv
                r = [(a - c * b) % q for a, b in zip(r, piv)]
            if any(r):
                rest.append(r)
        if v:
            ann = [(p ** (e - v) * x) % q for x in piv]
            if any(ann):
                rest.append(ann)
        pool = rest
        done.append((col, piv))
    # reduce entries above pivots
    for k in range(len(done)):
        col, piv = done[k]
        pv = piv[col]
        for j in range(k):
            _, r = done[j]
            if r[col] >= pv:
                c = r[col] // pv
                done[j] = (done[j][0], [(a - c * b) % q for a, b in zip(r, piv)])
    return ExactMatrix(m.ring, [r for _, r in done], m.ncols)


def pivots(m: ExactMatrix) -> list[int]:
    """Leading column of each nonzero row of an echelon matrix."""
    out = []
    for r in m.rows:
        for j, x in enumerate(r):
            if x:
                out.append(j)
                break
    return out


# ---------------------------------------------------------------------------
# Mode-independent operations


def row_span(m: ExactMatrix) -> ExactMatrix:
    """Canonical generating rows of the row span (Hermite or Howell form)."""
    if m.ring.is_integers:
        return _hnf_rows(m)
    return howell_form(m)


def kernel(m: ExactMatrix) -> ExactMatrix:
    """Canonical rows generating ``{x : x*m = 0}``; a basis over Z."""
    n = m.nrows
    if n == 0:
        return ExactMatrix.zeros(m.ring, 0, 0)
    if m.ring.is_integers:
        if m.ncols == 0:
            return ExactMatrix.identity(m.ring, n)
        h, u = m.flint.hnf(transform=True)
        r = h.rank()
        ker = [[int(u[i, j]) for j in range(n)] for i in range(r, n)]
        return _hnf_rows(ExactMatrix(m.ring, ker, n))
    aug = howell_form(m.hstack(ExactMatrix.identity(m.ring, n)))
    c = m.ncols
    ker = [r[c:] for r in aug.rows if not any(r[:c])]
    return howell_form(ExactMatrix(m.ring, ker, n))


def _echelon_with_transform(a: ExactMatrix) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Echelon rows of ``a`` (nonzero only) and transforms t with t*a = row."""
    n = a.nrows
    if a.ring.is_integers:
        if n == 0 or a.ncols == 0:
            return [], []
        h, u = a.flint.hnf(transform=True)
        r = h.rank()
        hs = [tuple(int(h[i, j]) for j in range(a.ncols)) for i in range(r)]
        us = [tuple(int(u[i, j]) for j in range(n)) for i in range(r)]
        return hs, us
    if n == 0:
        return [], []
    aug = howell_form(a.hstack(ExactMatrix.identity(a.ring, n)))
    c = a.ncols
    rows = [r for r in aug.rows if any(r[:c])]
    return [r[:c] for r in rows], [r[c:] for r in rows]


def _reduce_against(
    ring: RingSpec, hs, us, target: Sequence[int], local: bool
) -> tuple[list[int], int] | None:
    """Solve y*hs = c*target by pivot back-substitution; returns (x, c) or None."""
    p = ring.p
    q = ring.modulus
    rem = list(target)
    x = [0] * (len(us[0]) if us else 0)
    c = 1
    for h, u in zip(hs, us):
        col = next(j for j, v in enumerate(h) if v)
        piv = h[col]
        val = rem[col]
        if val == 0:
            continue
        if q is None:
            if val % piv:
                if not local:
                    return None
                g = math.gcd(piv, val)
                s = piv // g
                if s % p == 0:
                    return None
                rem = [s * t for t in rem]
                x = [s * t for t in x]
                c *= s
                val = rem[col]
            k = val // piv
            rem = [a - k * b for a, b in zip(rem, h)]
            x = [a + k * b for a, b in zip(x, u)]
        else:
            if val % piv:
                return None
            k = (val // piv) % q
            rem = [(a - k * b) % q for a, b in zip(rem, h)]
            x = [(a + k * b) % q for a, b in zip(x, u)]
        # columns before the next pivot that are not pivots must stay zero
    if any(rem):
        return None
    return x, c


class Solver:
    """Repeated solves of ``x*a = b`` against a fixed ``a``."""

    def __init__(self, a: ExactMatrix):
        self.a = a
        self._hs, self._us = _echelon_with_transform(a)

    def solve_row(self, b: Sequence[int]) -> list[int] | None:
        if len(b) != self.a.ncols:
            raise ValueError("shape mismatch in solve")
        b = [self.a.ring.reduce(int(t)) for t in b]
        if not any(b):
            return [0] * self.a.nrows
        if not self._hs:
            return None
        out = _reduce_against(self.a.ring, self._hs, self._us, b, local=False)
        return None if out is None else out[0]

    def solve_row_local(self, b: Sequence[int]) -> tuple[list[int], int] | None:
        """Integer mode: x, c with x*a = c*b and c prime to p (p-local solve)."""
        b = [int(t) for t in b]
        if not any(b):
            return [0] * self.a.nrows, 1
        if not self._hs:
            return None
        return _reduce_against(self.a.ring, self._hs, self._us, b, local=True)


def solve(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix | None:
    """Some ``x`` with ``x @ a == b``, or ``None`` if there is none.

    The solution is the one produced by back-substitution along the pivots of
    the Hermite (Z) or Howell (Z/p^e) form of ``a``.
    """
    a._check_ring(b)
    if a.ncols != b.ncols:
        raise ValueError(f"shape mismatch: a is {a.shape}, b is {b.shape}")
    s = Solver(a)
    rows = []
    for r in b.rows:
        x = s.solve_row(r)
        if x is None:
            return None
        rows.append(x)
    return ExactMatrix(a.ring, rows, a.nrows)


def solve_local(a: ExactMatrix, b: ExactMatrix) -> tuple[ExactMatrix, int] | None:
    """Solve ``x @ a == c*b`` with a single scalar ``c`` prime to p.

    Models solving over Z_(p) with Z-matrices: ``x / c`` is the p-local
    solution.  In truncated mode this is :func:`solve` with ``c = 1``.
    """
    if not a.ring.is_integers:
        x = solve(a, b)
        return None if x is None else (x, 1)
    s = Solver(a)
    sols = []
    for r in b.rows:
        out = s.solve_row_local(r)
        if out is None:
            return None
        sols.append(out)
    c = 1
    for _, ci in sols:
        c = c * ci // math.gcd(c, ci)
    rows = [[(c // ci) * t for t in x] for x, ci in sols]
    return ExactMatrix(a.ring, rows, a.nrows), c


def in_row_span(a: ExactMatrix, v: Sequence[int], local: bool = False) -> bool:
    s = Solver(a)
    if local and a.ring.is_integers:
        return s.solve_row_local(v) is not None
    return s.solve_row(v) is not None


def same_span(a: ExactMatrix, b: ExactMatrix) -> bool:
    return row_span(a) == row_span(b)


# ---------------------------------------------------------------------------
# Linear algebra over F_p (Brauer quotients, heads, reductions mod p)


def fp_rref(rows: Sequence[Sequence[int]], ncols: int, p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over F_p: nonzero rows and their pivot columns."""
    rows = [r for r in rows if any(x % p for x in r)]
    if not rows or ncols == 0:
        return [], []
    m = flint.nmod_mat([[int(x) % p for x in r] for r in rows], p)
    red, rank = m.rref()
    out = [[int(red[i, j]) for j in range(ncols)] for i in range(rank)]
    piv = [next(j for j, x in enumerate(r) if x) for r in out]
    return out, piv


def fp_rank(rows: Sequence[Sequence[int]], ncols: int, p: int) -> int:
    return len(fp_rref(rows, ncols, p)[0])


def fp_reduce(vec: Sequence[int], rref_rows: list[list[int]], piv: list[int], p: int) -> list[int]:
    """Reduce ``vec`` modulo the span of an RREF row set."""
    v = [x % p for x in vec]
    for r, j in zip(rref_rows, piv):
        if v[j]:
            c = v[j]
            v = [(a - c * b) % p for a, b in zip(v, r)]
    return v


def fp_det_nonzero(rows: Sequence[Sequence[int]], p: int) -> bool:
    n = len(rows)
    if n == 0:
        return True
    return fp_rank(rows, len(rows[0]), p) == n
