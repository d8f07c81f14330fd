import logging
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permlat.exactla import ExactMatrix, RingError, RingSpec, solve
from permlat.fixtures import (
    augmentation_lattice,
    group,
    klein_counterexample,
    known_counterexamples,
    random_unimodular,
    random_cocycle_extension,
    random_weiss_instance,
    sign_lattices,
    weiss_instance,
)
from permlat.cover import PermutationStructure
from permlat.latmod import (
    Lattice,
    LatticeMap,
    Submodule,
    change_basis,
    direct_sum,
    is_isomorphism,
    perm_lattice,
    quotient_lattice,
    sigma_mult,
)
from permlat.recognize import (
    HypothesisFailed,
    NotFreeError,
    WeissStatus,
    cliff_weiss_recognize,
    is_coflasque,
    lift_free_summand,
    recognize_permutation,
    sigma_quotient_iso,
    split_injection_mod_p,
    weiss_check,
)

from corpus import non_perm_fixtures, perm_fixtures

Z2 = RingSpec.integers(2)
Z3 = RingSpec.integers(3)


def test_recognize_reflection_coset_module():
    g = group("D8")
    refl = [s for s in g.all_subgroups if s.order == 2 and s != g.center][0]
    rep = recognize_permutation(perm_lattice(g, refl, Z2))
    assert rep.is_permutation
    assert rep.structure.as_dict() == {g.class_representative(refl): 1}
    assert rep.verdict == "Permutation"
    assert rep.isomorphism.is_equivariant() and is_isomorphism(rep.isomorphism)


def test_recognize_sign_lattice():
    g = group("C2")
    rep = recognize_permutation(sign_lattices(g)[0])
    assert not rep.is_permutation
    assert rep.cover.cover_module.rank == 2
    assert rep.kernel.rank == 1
    assert rep.isomorphism is None


def test_recognize_rank_zero():
    g = group("Q8")
    rep = recognize_permutation(Lattice.trivial(g, Z2, 0))
    assert rep.is_permutation and rep.structure.items == ()


def test_is_coflasque():
    g = group("C2")
    assert is_coflasque(perm_lattice(g, g.trivial_subgroup, Z2)) == (True, None)
    ok, wit = is_coflasque(sign_lattices(g)[0])
    assert not ok and wit == g.whole
    t = group("C2").subgroup_group(g.trivial_subgroup)
    assert is_coflasque(Lattice.trivial(t, Z2, 2))[0]


def test_is_coflasque_needs_integers():
    g = group("C2")
    with pytest.raises(RingError):
        is_coflasque(Lattice.trivial(g, RingSpec.truncated(2, 1)))


def test_cliff_weiss_sign_lattice():
    g = group("C2")
    rep = cliff_weiss_recognize(sign_lattices(g)[0])
    assert not rep.is_permutation
    assert rep.details["mod_p_permutation"]
    assert not rep.details["coflasque"]


def test_cliff_weiss_augmentation_c3():
    g = group("C3")
    rep = cliff_weiss_recognize(augmentation_lattice(g, Z3))
    assert not rep.is_permutation
    assert not rep.details["mod_p_permutation"]


@pytest.mark.parametrize("name", ["C2", "C4", "C2xC2", "D8", "C3"])
def test_cliff_weiss_agrees_on_corpus(name):
    for u in perm_fixtures(name) + non_perm_fixtures(name):
        rep = cliff_weiss_recognize(u)
        assert rep.is_permutation == recognize_permutation(u).is_permutation


@given(st.sampled_from(["C2", "C4", "C2xC2", "C3"]), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_cliff_weiss_on_extensions(name, seed):
    rng = random.Random(seed)
    base = rng.choice(perm_fixtures(name))
    u = random_cocycle_extension(base, rng)
    assert cliff_weiss_recognize(u).is_permutation == recognize_permutation(u).is_permutation


def test_split_injection_mod_p():
    g = group("C2")
    x = Lattice.trivial(g, Z2, 2)
    s = split_injection_mod_p(LatticeMap.identity(x))
    assert s.matrix == ExactMatrix.identity(Z2, 2) and s.c == 1
    assert split_injection_mod_p(LatticeMap(x, x, ExactMatrix.identity(Z2, 2).scale(2))) is None
    one = Lattice.trivial(g, Z2, 1)
    f = LatticeMap(one, x, ExactMatrix(Z2, [[1, 1]]))
    s = split_injection_mod_p(f)
    assert (f.matrix @ s.matrix) == ExactMatrix.identity(Z2, 1).scale(s.c)


def test_lift_free_summand_regular():
    g = group("C4")
    l = perm_lattice(g, g.trivial_subgroup, Z2)
    fs = lift_free_summand(l, ExactMatrix.identity(Z2, 4))
    assert fs.submodule.rank == 4
    assert (fs.gamma.matrix @ fs.retraction.matrix) == ExactMatrix.identity(Z2, 4).scale(fs.c)


def test_lift_free_summand_with_extra_block():
    g = group("C2")
    l, incs, _ = direct_sum([perm_lattice(g, g.trivial_subgroup, Z2), Lattice.trivial(g, Z2)])
    fs = lift_free_summand(l, incs[0].matrix)
    assert fs.submodule == Submodule(l, incs[0].matrix)
    proj = fs.projection()
    assert (proj @ proj) == proj.scale(fs.c)


@pytest.mark.parametrize("seed", range(5))
def test_lift_free_summand_after_basis_change(seed):
    g = group("C2")
    base, incs, _ = direct_sum([perm_lattice(g, g.trivial_subgroup, Z2), Lattice.trivial(g, Z2)])
    basis = random_unimodular(Z2, 3, random.Random(seed), bound=1)
    l = change_basis(base, basis)
    # new coordinates y stand for y @ basis, so the free block is e_i @ basis^-1
    rows = solve(basis, incs[0].matrix)
    fs = lift_free_summand(l, rows)
    assert fs.submodule.rank == 2
    assert (fs.gamma.matrix @ fs.retraction.matrix) == ExactMatrix.identity(Z2, 2).scale(fs.c)
    proj = fs.projection()
    assert (proj @ proj) == proj.scale(fs.c)


def test_lift_free_summand_rejects_non_free():
    g = group("C2")
    l = Lattice.trivial(g, Z2, 2)
    with pytest.raises(NotFreeError):
        lift_free_summand(l, ExactMatrix.identity(Z2, 2))


def test_sigma_quotient_iso_klein():
    g = group("C2xC2")
    a, b = g.generators
    n = g.subgroup([a])
    kb = g.subgroup([b])
    u = perm_lattice(g, kb, Z2)
    q, proj = quotient_lattice(u, Submodule(u, sigma_mult(u, n).matrix))
    k, c = sigma_quotient_iso(u, u, n, proj)
    assert c % 2
    assert is_isomorphism(k)
    assert (k.matrix @ proj.matrix) == proj.matrix.scale(c)


def test_sigma_quotient_iso_preconditions():
    u, n = klein_counterexample()
    g = u.group
    l = perm_lattice(g, g.trivial_subgroup, Z2)
    q, proj = quotient_lattice(u, Submodule(u, sigma_mult(u, n).matrix))
    with pytest.raises(HypothesisFailed) as exc:
        sigma_quotient_iso(l, u, n, LatticeMap.zero(l, q))
    assert exc.value.which == ("hypothesis_2",)

    kb = g.subgroup([g.generators[1]])
    u2 = perm_lattice(g, kb, Z2)
    q2, proj2 = quotient_lattice(u2, Submodule(u2, sigma_mult(u2, n).matrix))
    with pytest.raises(HypothesisFailed) as exc:
        sigma_quotient_iso(u2, u2, n, LatticeMap(u2, q2, proj2.matrix.scale(2)))
    assert exc.value.which == ("surjective",)
    big = direct_sum([u2, perm_lattice(g, g.whole, Z2)])[0]
    f = LatticeMap(big, q2, proj2.matrix.vstack(ExactMatrix.zeros(Z2, 1, q2.rank)))
    with pytest.raises(HypothesisFailed) as exc:
        sigma_quotient_iso(big, u2, n, f)
    assert exc.value.which == ("kernel",)


def test_weiss_klein_examples():
    g = group("C2xC2")
    a, b = g.generators
    n = g.subgroup([a])
    rep = weiss_check(perm_lattice(g, g.subgroup([b]), Z2), n)
    assert rep.status is WeissStatus.VERIFIED
    assert rep.conclusion.structure.as_dict() == {g.subgroup([b]): 1}
    u, n = klein_counterexample()
    rep = weiss_check(u, n)
    assert rep.status is WeissStatus.HYPOTHESIS_FAILED
    assert rep.failed == (2,)
    assert rep.hypothesis_1 is not None
    assert not rep.conclusion.is_permutation
    assert rep.summary() == "hypothesis 2 failed: U^N not permutation"


def test_weiss_trivial_n_mirrors_recognition():
    g = group("C4")
    n = g.trivial_subgroup
    for u in perm_fixtures("C4") + non_perm_fixtures("C4"):
        rep = weiss_check(u, n)
        perm = recognize_permutation(u).is_permutation
        assert rep.status is (WeissStatus.VERIFIED if perm else WeissStatus.HYPOTHESIS_FAILED)


def test_weiss_instance_rank():
    g = group("C2xC2")
    a, b = g.generators
    u = weiss_instance(g, g.subgroup([a]), [g.subgroup([b]), g.trivial_subgroup])
    assert u.rank == 6
    assert weiss_check(u, g.subgroup([a])).status is WeissStatus.VERIFIED
    with pytest.raises(ValueError):
        weiss_instance(g, g.subgroup([a]), [g.subgroup([a])])


def test_known_counterexamples_include_klein():
    g = group("C2xC2")
    u, n = klein_counterexample()
    names = {name: (v, hyp) for name, v, hyp in known_counterexamples(g, n)}
    v, hyp = names["twisted_inflation"]
    assert hyp == 2
    assert recognize_permutation(v).is_permutation is False
    assert v.rank == u.rank


@pytest.mark.parametrize("name", ["C2xC2", "D8", "Q8", "C9", "C3xC3"])
def test_counterexamples_fail_expected_hypothesis(name):
    g = group(name)
    for n in g.central_subgroups_order_p():
        for cname, u, hyp in known_counterexamples(g, n):
            rep = weiss_check(u, n)
            assert rep.status is WeissStatus.HYPOTHESIS_FAILED, cname
            assert rep.failed == (hyp,), cname


@given(st.sampled_from(["C2xC2", "D8", "Q8", "C4", "C3xC3"]), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_random_weiss_instances_verified(name, seed):
    g = group(name)
    rng = random.Random(seed)
    n = rng.choice(g.central_subgroups_order_p())
    u, ks = random_weiss_instance(g, n, rng, max_rank=24)
    rep = weiss_check(u, n)
    assert rep.status is WeissStatus.VERIFIED
    assert rep.conclusion.structure == PermutationStructure.from_counts(g, _count(ks))


def _count(ks):
    out = {}
    for k in ks:
        out[k] = out.get(k, 0) + 1
    return out


def test_weiss_violation_is_logged(caplog, monkeypatch):
    # force a disagreement to check the diagnostic dump path
    import permlat.recognize as rec

    g = group("C2xC2")
    a, b = g.generators
    u = perm_lattice(g, g.subgroup([b]), Z2)
    real = rec.recognize_permutation
    calls = []

    def fake(x, rng=None):
        calls.append(x)
        rep = real(x, rng)
        if len(calls) == 2:
            rep.is_permutation = False
        return rep

    monkeypatch.setattr(rec, "recognize_permutation", fake)
    with caplog.at_level(logging.ERROR, logger="permlat.recognize"):
        rep = rec.weiss_check(u, g.subgroup([a]))
    assert rep.status is WeissStatus.VIOLATED
    assert "theorem violated" in caplog.text


def test_weiss_requires_normal():
    g = group("D8")
    refl = [s for s in g.all_subgroups if s.order == 2 and not g.is_normal(s)][0]
    with pytest.raises(ValueError):
        weiss_check(perm_lattice(g, g.whole, Z2), refl)
