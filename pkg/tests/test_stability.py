from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from src.density.densities import ClassSet, basechange_density, pullback_density
from src.errors import CapExceededError, InputError
from src.groups.core import Subgroup, full_subgroup, quotient, subgroup_generated, trivial_subgroup
from src.groups.presets import build_group, preset_names
from src.stability.stability import (
    StabilityAnalyzer, TowerFamily, chebotarev_preimage_family, dagger_membership, dagger_rel,
    orbit_set_scenario, persistence_verdict, persisting_witness, stability_witness,
    stabilizing_layers, star_membership, uniform_lower_bound,
)


def test_family_needs_base_field(s3, a3):
    with pytest.raises(InputError):
        TowerFamily.of(s3, [a3])


def test_family_above_top(s3, a3):
    family = TowerFamily.above(s3, a3)
    assert [L.order for L in family.layers] == [3, 6]


def test_full_set_is_stable_at_base(z2):
    S = ClassSet.full(z2)
    witness = stability_witness(S, TowerFamily.all_subgroups(z2), Fraction(2))
    assert witness is not None
    assert witness.stabilizing_layer == full_subgroup(z2)
    assert witness.bound_a == 1
    assert witness.subset == S


def test_nontrivial_class_of_z2_is_not_stable(z2):
    S = ClassSet.from_elements(z2, [1])
    family = TowerFamily.all_subgroups(z2)
    assert stability_witness(S, family, Fraction(2)) is None
    assert stabilizing_layers(S, family, Fraction(100)) == []
    assert not StabilityAnalyzer().stable_for_some_lambda(S, family)


def test_lambda_must_exceed_one(z2):
    with pytest.raises(InputError):
        stability_witness(ClassSet.full(z2), TowerFamily.all_subgroups(z2), Fraction(1))


def test_identity_class_in_z3(z3):
    S = ClassSet.from_elements(z3, [0])
    family = TowerFamily.all_subgroups(z3)
    assert uniform_lower_bound(S, family) == Fraction(1, 3)

    # 1/3 at the base and 1 at the top: the window needs lambda > 3
    assert stability_witness(S, family, Fraction(3), at_layer=full_subgroup(z3)) is None
    assert stability_witness(S, family, Fraction(4), at_layer=full_subgroup(z3)) is not None

    witness = stability_witness(S, family, Fraction(2))
    assert witness.stabilizing_layer == trivial_subgroup(z3)
    assert witness.bound_a == 1


def test_uniform_lower_bound_vanishes(s3):
    S = ClassSet.from_elements(s3, [1])
    assert uniform_lower_bound(S, TowerFamily.all_subgroups(s3)) is None


def test_dagger_fails_once_tower_reaches_the_field(z3):
    S = ClassSet.from_elements(z3, [0])
    assert not dagger_rel(S, TowerFamily.two_step(z3), 3)


def test_dagger_holds_when_tower_meets_only_the_base(s3):
    S = ClassSet.from_elements(s3, [1])
    family = TowerFamily.of(s3, [full_subgroup(s3)])
    assert all(dagger_rel(S, family, p) for p in (2, 3, 5))


def test_membership_needs_the_class_to_meet_w(s3, a3):
    # The transpositions miss A3, the 3-cycles lie in it
    assert not star_membership(s3, 1, a3)
    assert star_membership(s3, 3, a3)
    assert dagger_membership(s3, 3, a3) == star_membership(s3, 3, a3)


def test_persistence_verdict(s3, a3):
    assert not persistence_verdict(s3, 1, a3).persistent
    verdict = persistence_verdict(s3, 3, a3)
    assert verdict.persistent
    assert verdict.constant_density == Fraction(2, 3)
    assert dagger_membership(s3, 1, full_subgroup(s3))
    assert not dagger_membership(s3, 1, trivial_subgroup(s3))


def test_persisting_witness_for_union_of_preimages():
    G = build_group("Z/2 x Z/3")
    to_m1 = quotient(G, Subgroup.from_members(G, [0, 1, 2]))
    to_m2 = quotient(G, Subgroup.from_members(G, [0, 3]))
    S1 = ClassSet.preimage(to_m1, ClassSet.from_elements(to_m1.target, [1]))
    S2 = ClassSet.preimage(to_m2, ClassSet.from_elements(to_m2.target, [0]))
    S = S1.union(S2)
    witness = persisting_witness(S, TowerFamily.of(G, [full_subgroup(G)]))
    assert witness is not None
    assert witness.density == Fraction(2, 3)
    assert witness.subset == S


def test_orbit_of_three_cycles(s3, a3):
    report = orbit_set_scenario(s3, a3, 3)
    assert report.orbit_length == 2
    assert report.nontrivial_orbit
    assert report.stabilizer_order == 1
    assert report.stabilizer_index == 2


def test_orbit_in_abelian_group_is_trivial():
    G = build_group("Z/6")
    report = orbit_set_scenario(G, subgroup_generated(G, [2]), 2)
    assert report.orbit_length == 1
    assert not report.nontrivial_orbit
    assert report.stabilizer_order == 2


def test_orbit_needs_sigma_in_subgroup(s3, a3):
    with pytest.raises(InputError):
        orbit_set_scenario(s3, a3, 1)


def test_powerset_cap(s3):
    with pytest.raises(CapExceededError):
        StabilityAnalyzer(powerset_cap=2).search_space(ClassSet.of(s3, [1, 2]), powerset=True)


def test_powerset_search_space(s3):
    space = StabilityAnalyzer().search_space(ClassSet.full(s3), powerset=True)
    assert len(space) == 7


def test_preimage_family_matches_basechange(s3, a3):
    S, family, Gbar, W = chebotarev_preimage_family(s3, a3, 1)
    assert S.elements == (1, 2, 5)
    assert W.order == 1
    q = quotient(s3, a3)
    for layer in family.layers:
        assert pullback_density(S, layer) == basechange_density(Gbar, 1, q.image(layer))


@hsettings(max_examples=40, deadline=None)
@given(st.sampled_from(preset_names(12)), st.data(), st.sampled_from([Fraction(3, 2), Fraction(2), Fraction(4)]))
def test_witness_survives_reverification(name, data, lam):
    G = build_group(name)
    classes = data.draw(st.sets(st.integers(0, len(G.conjugacy_classes) - 1), min_size=1))
    S = ClassSet.of(G, classes)
    family = TowerFamily.all_subgroups(G)
    witness = stability_witness(S, family, lam)
    if witness is not None:
        assert witness.holds(family)
        assert witness.subset.issubset(S)
        assert witness.bound_a > 0


def _class_sets(data, G, min_size=1):
    classes = data.draw(st.sets(st.integers(0, len(G.conjugacy_classes) - 1), min_size=min_size))
    return ClassSet.of(G, classes)


@hsettings(max_examples=40, deadline=None)
@given(st.sampled_from(preset_names(12)), st.data(), st.sampled_from([Fraction(3, 2), Fraction(2)]))
def test_witness_holds_for_every_larger_lambda(name, data, lam):
    G = build_group(name)
    S = _class_sets(data, G)
    family = TowerFamily.all_subgroups(G)
    witness = stability_witness(S, family, lam)
    if witness is None:
        return
    for bigger in (lam, lam + Fraction(1, 7), 2 * lam, Fraction(G.order + 1)):
        assert replace(witness, lam=bigger).holds(family)
        assert stability_witness(S, family, bigger) is not None


@hsettings(max_examples=30, deadline=None)
@given(st.sampled_from(preset_names(8)), st.data(), st.sampled_from([Fraction(3, 2), Fraction(2), Fraction(4)]))
def test_witness_certifies_supersets(name, data, lam):
    G = build_group(name)
    S = _class_sets(data, G)
    extra = _class_sets(data, G)
    bigger = S.union(extra)
    family = TowerFamily.all_subgroups(G)
    witness = stability_witness(S, family, lam)
    if witness is None:
        return
    assert witness.subset.issubset(bigger)
    assert witness.holds(family)
    found = stability_witness(bigger, family, lam, powerset=True)
    assert found is not None
    assert found.bound_a >= witness.bound_a
