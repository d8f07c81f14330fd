import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permlat.fixtures import GROUP_BUILDERS, group
from permlat.pgroup import GroupError, PGroup, Subgroup, parse_cycles

from corpus import FIXTURE_GROUPS

# [DERIVED] counts of subgroups and of their conjugacy classes, by hand:
# D8 has 1 + 5 + 3 + 1 subgroups in 8 classes; the order-27 group of
# exponent 3 has 13 subgroups of order 3 (center plus 4 classes of 3)
# and 4 normal subgroups of order 9.
SUBGROUP_COUNTS = {
    "C2": (2, 2),
    "C4": (3, 3),
    "C2xC2": (5, 5),
    "D8": (10, 8),
    "Q8": (6, 6),
    "C3": (2, 2),
    "C9": (3, 3),
    "C3xC3": (6, 6),
    "Heis27": (19, 11),
}


def brute_subgroups(g: PGroup) -> set[frozenset[int]]:
    """Closures of all pairs of elements; every subgroup of a fixture group is 2-generated."""
    out = set()
    for a, b in itertools.combinations_with_replacement(range(g.order), 2):
        out.add(frozenset(g.closure([a, b])))
    return out


@pytest.mark.parametrize("name", FIXTURE_GROUPS)
def test_group_axioms(name):
    g = group(name)
    n = g.order
    for a in range(n):
        assert g.mul(a, 0) == a == g.mul(0, a)
        assert g.mul(a, g.inv(a)) == 0
    for a, b, c in itertools.islice(itertools.product(range(n), repeat=3), 2000):
        assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))


@pytest.mark.parametrize("name", FIXTURE_GROUPS)
def test_subgroup_lattice_against_brute_force(name):
    g = group(name)
    subs = {frozenset(s.elements) for s in g.all_subgroups}
    assert subs == brute_subgroups(g)
    assert (len(g.all_subgroups), len(g.class_representatives)) == SUBGROUP_COUNTS[name]


@pytest.mark.parametrize("name", FIXTURE_GROUPS)
def test_classes_partition_subgroups(name):
    g = group(name)
    seen = []
    for rep, members in g.subgroup_classes:
        assert rep in members
        for s in members:
            assert g.class_representative(s) == rep
            assert g.are_conjugate(rep, s)
        seen.extend(members)
    assert sorted(seen) == sorted(g.all_subgroups)


@pytest.mark.parametrize("name", FIXTURE_GROUPS)
def test_normalizer_and_cosets(name):
    g = group(name)
    for s in g.all_subgroups:
        nz = g.normalizer(s)
        assert all(g.conjugate_subgroup(x, s) == s for x in nz.elements)
        # class size equals the index of the normalizer
        rep = g.class_representative(s)
        size = len(dict(g.subgroup_classes)[rep])
        assert size * nz.order == g.order
        cosets = g.left_cosets(s)
        assert len(cosets) * s.order == g.order
        assert sorted(x for c in cosets for x in c) == list(range(g.order))


@pytest.mark.parametrize("name", FIXTURE_GROUPS)
def test_double_cosets_partition(name):
    g = group(name)
    reps = g.class_representatives
    for a in reps:
        for b in reps:
            parts = g.double_coset_sets(a, b)
            assert sum(len(x) for x in parts) == g.order
            assert len(parts) == len(g.double_cosets(a, b))


def test_center_and_central_subgroups():
    assert group("D8").center.order == 2
    assert group("Q8").center.order == 2
    assert group("Heis27").center.order == 3
    assert len(group("C2xC2").central_subgroups_order_p()) == 3
    assert len(group("C9").central_subgroups_order_p()) == 1


def test_maximal_and_minimal_relations():
    g = group("D8")
    for s in g.all_subgroups:
        for m in g.maximal_subgroups(s):
            assert m.order * g.p == s.order and m.issubset(s)
        for o in g.minimal_overgroups(s):
            assert o.order == s.order * g.p and s.issubset(o)


def test_quotient_group():
    g = group("D8")
    q, proj = g.quotient_group(g.center)
    assert q.order == 4
    for a in range(g.order):
        for b in range(g.order):
            assert proj[g.mul(a, b)] == q.mul(proj[a], proj[b])


def test_subgroup_group_embedding():
    g = group("Q8")
    for s in g.all_subgroups:
        h = g.subgroup_group(s)
        assert h.order == s.order
        assert h.to_parent(h.whole) == s
        assert h.from_parent(s) == h.whole


def test_word_and_labels():
    g = group("D8")
    a, b = g.generators
    assert g.word("a^2") == g.mul(a, a)
    assert g.word("ab") == g.mul(a, b)
    assert g.subgroup_label(g.whole) == "G"
    assert g.subgroup_label(g.trivial_subgroup) == "1"


def test_parse_cycles():
    assert parse_cycles("(1 2 3)", 4) == (1, 2, 0, 3)
    assert parse_cycles("()", 2) == (0, 1)


def test_non_p_group_rejected():
    with pytest.raises(GroupError):
        PGroup.from_generators(["(1 2 3)"], 2)


def test_unknown_fixture_group():
    with pytest.raises(KeyError):
        group("S3")


@given(st.sampled_from(sorted(GROUP_BUILDERS)), st.data())
@settings(max_examples=40, deadline=None)
def test_closure_is_subgroup(name, data):
    g = group(name)
    gens = data.draw(st.lists(st.integers(0, g.order - 1), max_size=3))
    s = g.subgroup(gens)
    assert g.is_subgroup(s.elements)
    assert g.order % s.order == 0
    assert all(x in s for x in gens)
    assert isinstance(s, Subgroup)
