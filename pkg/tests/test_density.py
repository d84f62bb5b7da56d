from fractions import Fraction

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from src.density.densities import (
    ClassSet, basechange_density, class_set_density, induced_character, induced_character_oracle,
    pm_partition, pullback_density,
)
from src.groups.core import full_subgroup, quotient, subgroups, trivial_subgroup
from src.groups.presets import build_group, preset_names

PRESETS = preset_names(24)


def test_induced_character_of_transposition_subgroup(s3, transposition_subgroup):
    assert induced_character(s3, transposition_subgroup).values == (3, 1, 0)


def test_induced_from_whole_group_is_one(s3):
    assert set(induced_character(s3, full_subgroup(s3)).values) == {1}


def test_induced_from_trivial_is_regular(s3):
    assert induced_character(s3, trivial_subgroup(s3)).values == (6, 0, 0)


def test_pm_partition_s3(s3, transposition_subgroup):
    assert pm_partition(s3, transposition_subgroup) == {
        3: Fraction(1, 6), 1: Fraction(1, 2), 0: Fraction(1, 3),
    }


def test_pm_partition_whole_group(s3):
    assert pm_partition(s3, full_subgroup(s3)) == {1: Fraction(1)}


def test_class_set_density(s3):
    assert class_set_density(ClassSet.full(s3)) == 1
    assert class_set_density(ClassSet.of(s3, [0])) == Fraction(1, 6)
    assert class_set_density(ClassSet.of(s3, [])) == 0


def test_pullback_density(s3, transposition_subgroup):
    assert pullback_density(ClassSet.of(s3, [2]), transposition_subgroup) == 0
    assert pullback_density(ClassSet.of(s3, [1]), transposition_subgroup) == Fraction(1, 2)
    assert pullback_density(ClassSet.full(s3), transposition_subgroup) == 1


def test_basechange_density(s3, a3):
    assert basechange_density(s3, 0, a3) == Fraction(1, 3)
    assert basechange_density(s3, 1, full_subgroup(s3)) == Fraction(1, 2)
    assert basechange_density(s3, 1, a3) == 0


def test_preimage_class_set(s3, a3):
    q = quotient(s3, a3)
    S = ClassSet.preimage(q, ClassSet.from_elements(q.target, [1]))
    assert S.elements == (1, 2, 5)


@pytest.mark.parametrize("name", PRESETS)
def test_density_identities(name):
    G = build_group(name)
    for H in subgroups(G, "all"):
        m_H = induced_character(G, H)
        inner = sum(Fraction(v * c.size, G.order) for v, c in zip(m_H.values, G.conjugacy_classes))
        partition = pm_partition(G, H)
        assert inner == 1
        assert sum(partition.values()) == 1
        assert sum(m * d for m, d in partition.items()) == 1
        assert m_H.at(G.identity) == H.index


@pytest.mark.parametrize("name", ["S3", "D4", "Q8", "A4", "Z/2 x S3"])
def test_induced_character_matches_coset_count(name):
    G = build_group(name)
    for H in subgroups(G, "all"):
        assert induced_character(G, H).values == induced_character_oracle(G, H).values


@pytest.mark.parametrize("name", ["S3", "D4", "Q8", "Z/2 x Z/2", "A4"])
def test_basechange_matches_pullback(name):
    G = build_group(name)
    all_subgroups = subgroups(G, "all")
    for V in (H for H in all_subgroups if H.is_normal):
        q = quotient(G, V)
        for sigma in q.target.elements:
            S = ClassSet.preimage(q, ClassSet.from_elements(q.target, [sigma]))
            for U in all_subgroups:
                assert basechange_density(q.target, sigma, q.image(U)) == pullback_density(S, U)


@hsettings(max_examples=40, deadline=None)
@given(st.sampled_from(preset_names(16)), st.data())
def test_pullback_is_share_of_elements_in_subgroup(name, data):
    G = build_group(name)
    H = data.draw(st.sampled_from(subgroups(G, "all")))
    classes = data.draw(st.sets(st.integers(0, len(G.conjugacy_classes) - 1)))
    S = ClassSet.of(G, classes)
    hits = sum(1 for x in H.members if S.contains_element(x))
    assert pullback_density(S, H) == Fraction(hits, H.order)
    assert 0 <= class_set_density(S) <= 1


@hsettings(max_examples=40, deadline=None)
@given(st.sampled_from(preset_names(16)), st.data())
def test_densities_add_over_disjoint_class_sets(name, data):
    G = build_group(name)
    n = len(G.conjugacy_classes)
    left = data.draw(st.sets(st.integers(0, n - 1)))
    right = data.draw(st.sets(st.integers(0, n - 1))) - left
    S, T = ClassSet.of(G, left), ClassSet.of(G, right)
    H = data.draw(st.sampled_from(subgroups(G, "all")))
    assert class_set_density(S.union(T)) == class_set_density(S) + class_set_density(T)
    assert pullback_density(S.union(T), H) == pullback_density(S, H) + pullback_density(T, H)
