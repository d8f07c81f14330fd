import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permlat.exactla import (
    ExactMatrix,
    RingError,
    RingSpec,
    Solver,
    fp_rank,
    fp_rref,
    hermite_form,
    howell_form,
    in_row_span,
    kernel,
    row_span,
    same_span,
    smith_invariants,
    solve,
    solve_local,
    valuation,
)

from oracles import has_howell_property, kernel_mod, span_mod

Z2 = RingSpec.integers(2)
Z3 = RingSpec.integers(3)


def test_ring_spec_rejects_composite():
    with pytest.raises(RingError):
        RingSpec.integers(6)
    with pytest.raises(RingError):
        RingSpec.truncated(2, 0)


def test_truncated_reduces_entries():
    r = RingSpec.truncated(2, 2)
    m = ExactMatrix(r, [[5, -1]])
    assert m.tolist() == [[1, 3]]


def test_valuation():
    assert valuation(24, 2) == 3
    assert valuation(-9, 3) == 2
    assert valuation(7, 2) == 0


def test_hermite_form_transform():
    m = ExactMatrix(Z2, [[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    h, u = hermite_form(m)
    assert u @ m == h
    assert abs(int(u.flint.det())) == 1


def test_smith_diag_2_6_12():
    # [DERIVED] invariant factors 2, 6, 12 of this matrix; 2-parts 2, 2, 4
    m = ExactMatrix(Z2, [[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    pres = smith_invariants(m)
    assert pres.torsion == (4, 2, 2)
    assert pres.free_rank == 0
    assert pres.discarded_prime_to_p
    assert smith_invariants(m.with_ring(Z3)).torsion == (3, 3)


def test_smith_free_rank():
    m = ExactMatrix(Z2, [[1, 1, 0]])
    assert smith_invariants(m).free_rank == 2


def test_howell_example_z4():
    # over Z/4 the span of (2, 1) contains (0, 2); the Howell form must list it
    r = RingSpec.truncated(2, 2)
    h = howell_form(ExactMatrix(r, [[2, 1]]))
    assert h.tolist() == [[2, 1], [0, 2]]


def test_kernel_z4_example():
    r = RingSpec.truncated(2, 2)
    m = ExactMatrix(r, [[2], [2]])
    ker = kernel(m)
    assert span_mod(ker.rows, 2, 4) == kernel_mod(m.rows, 1, 4)


def test_solve_and_local_solve():
    a = ExactMatrix(Z2, [[3, 0], [0, 2]])
    b = ExactMatrix(Z2, [[1, 0]])
    assert solve(a, b) is None
    x, c = solve_local(a, b)
    assert c % 2 == 1
    assert x @ a == b.scale(c)
    assert solve_local(a, ExactMatrix(Z2, [[0, 1]])) is None


def test_solver_reuse():
    a = ExactMatrix(Z3, [[1, 2], [0, 3]])
    s = Solver(a)
    for b in ([1, 2], [0, 3], [2, 7]):
        x = s.solve_row(b)
        assert x is not None
        assert ExactMatrix(Z3, [x], 2) @ a == ExactMatrix(Z3, [b])
    assert s.solve_row([0, 1]) is None


def test_fp_rref():
    rows, piv = fp_rref([[1, 1, 0], [1, 0, 1], [0, 1, 1]], 3, 2)
    assert piv == [0, 1]
    assert rows == [[1, 0, 1], [0, 1, 1]]
    assert fp_rank([[1, 2], [2, 4]], 2, 3) == 1


def test_ring_mismatch_raises():
    with pytest.raises(RingError):
        ExactMatrix(Z2, [[1]]) @ ExactMatrix(Z3, [[1]])


small_int = st.integers(-6, 6)


def int_matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_int, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


@given(int_matrices())
@settings(max_examples=80, deadline=None)
def test_integer_kernel_is_saturated_basis(rows):
    m = ExactMatrix(Z2, rows)
    ker = kernel(m)
    assert (ker @ m).is_zero() if ker.nrows else True
    rank = int(m.flint.rank())
    assert ker.nrows == m.nrows - rank
    if ker.nrows:
        # a saturated sublattice has trivial cokernel torsion
        pres = smith_invariants(ker.with_ring(RingSpec.integers(2)))
        assert not pres.torsion
        assert not smith_invariants(ker.with_ring(RingSpec.integers(3))).torsion


@given(int_matrices(), st.lists(small_int, min_size=4, max_size=4))
@settings(max_examples=80, deadline=None)
def test_solve_is_consistent_with_span(rows, coeffs):
    a = ExactMatrix(Z2, rows)
    x = ExactMatrix(Z2, [coeffs[: a.nrows]])
    b = x @ a
    y = solve(a, b)
    assert y is not None and y @ a == b
    assert in_row_span(a, b.rows[0])


@given(int_matrices())
@settings(max_examples=60, deadline=None)
def test_row_span_canonical(rows):
    a = ExactMatrix(Z3, rows)
    doubled = ExactMatrix(Z3, rows + [[u + v for u, v in zip(rows[0], rows[-1])]])
    assert row_span(a) == row_span(doubled)
    assert same_span(a, doubled)


@st.composite
def truncated_matrices(draw):
    p, e = draw(st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (5, 1)]))
    q = p**e
    r = draw(st.integers(1, 3))
    c = draw(st.integers(1, 3))
    rows = draw(st.lists(st.lists(st.integers(0, q - 1), min_size=c, max_size=c), min_size=r, max_size=r))
    return RingSpec.truncated(p, e), rows, c


@given(truncated_matrices())
@settings(max_examples=120, deadline=None)
def test_howell_against_enumeration(data):
    ring, rows, c = data
    q = ring.modulus
    h = howell_form(ExactMatrix(ring, rows, c))
    assert span_mod(h.rows, c, q) == span_mod(rows, c, q)
    assert has_howell_property(h.rows, c, q)


@given(truncated_matrices())
@settings(max_examples=120, deadline=None)
def test_truncated_kernel_against_enumeration(data):
    ring, rows, c = data
    ker = kernel(ExactMatrix(ring, rows, c))
    assert span_mod(ker.rows, len(rows), ring.modulus) == kernel_mod(rows, c, ring.modulus)
