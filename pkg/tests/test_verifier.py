import json

import pytest

from src.cohomology.modules import sign_module, trivial_module
from src.density.densities import ClassSet
from src.errors import CapExceededError, InputError
from src.groups.core import subgroup_generated
from src.groups.presets import build_group, preset_names
from src.stability.stability import TowerFamily
from src.storage.schemas import ModuleRecipe
from src.verifier.claims import (
    class_sets, h1_oracle_outcomes, persistence_outcomes, verify_containment, verify_cyclic_decomposition,
    verify_induced_vanishing, verify_inflation_restriction, verify_res_cores, verify_sha_bound,
)
from src.verifier.sweep import catalog_for, default_catalog, default_recipes, descending_chain, modules_for, sweep


def test_cyclic_decomposition_is_sharp_without_witness(z2):
    report = verify_cyclic_decomposition(z2, ClassSet.from_elements(z2, [0]), 2)
    assert report.passed
    assert report.vacuous == 1
    assert len(report.sharp) == 1
    assert report.sharp[0].data["missing"] == [[0, 1]]


def test_cyclic_decomposition_holds_for_full_set(z2):
    report = verify_cyclic_decomposition(z2, ClassSet.full(z2), 2)
    assert report.checked == 1
    assert report.passed


def test_containment_is_sharp_for_identity_class(z3):
    report = verify_containment(z3, trivial_module(z3, [3]), ClassSet.from_elements(z3, [0]))
    assert report.passed
    assert report.per_claim["containment"].sharp == 1
    assert report.sharp[0].data["sha1"] == [3]


def test_sha_bound_for_full_set(z2):
    report = verify_sha_bound(z2, TowerFamily.all_subgroups(z2), ClassSet.full(z2), 2, 1)
    assert report.checked == 1
    assert report.passed


def test_res_cores_on_s3(s3, transposition_subgroup):
    report = verify_res_cores(s3, [transposition_subgroup], trivial_module(s3, [3]), 3)
    assert report.per_claim["res-cores"].checked == 2
    assert report.passed


def test_res_cores_vanishing_part_is_sharp_on_z4():
    G = build_group("Z/4")
    H = subgroup_generated(G, [2])
    report = verify_res_cores(G, [H], trivial_module(G, [2]), 2)
    summary = report.per_claim["res-cores"]
    assert summary.checked == 1
    assert summary.vacuous == 1
    assert summary.sharp == 1
    assert report.passed


def test_inflation_restriction(s3, a3):
    assert verify_inflation_restriction(trivial_module(s3, [2]), a3).passed


def test_inflation_restriction_needs_trivial_action(s3, a3):
    with pytest.raises(InputError):
        verify_inflation_restriction(sign_module(s3, [3], a3), subgroup_generated(s3, [1, 2]))


@pytest.mark.parametrize("name, p", [("Z/2", 2), ("Z/3", 2), ("S3", 3)])
def test_induced_vanishing(name, p):
    assert verify_induced_vanishing(build_group(name), p).passed


def test_class_sets(s3, q8):
    assert len(class_sets(s3)) == 7
    assert len(class_sets(q8, cap=8)) == 11


def test_descending_chain(s3):
    assert [H.order for H in descending_chain(s3)] == [6, 3, 1]


def test_modules_for_recipes(s3):
    assert len(modules_for(s3, ModuleRecipe(action="sign", orders=[3]), 16)) == 1
    assert modules_for(s3, ModuleRecipe(action="multiplication"), 16) == []
    units = build_group("(Z/8)*")
    assert [A.size for A in modules_for(units, ModuleRecipe(action="multiplication"), 16)] == [8]


def test_small_catalog_sweep_has_no_violations():
    report = sweep(catalog_for(["Z/2", "Z/3", "S3"]), jobs=1)
    assert report.passed
    assert report.violations == []
    assert report.checked > 0
    assert set(report.per_claim) == set(report.claims)


def test_sweep_is_independent_of_workers(tmp_path):
    catalog = catalog_for(["Z/2", "Z/4", "S3"], family_policy="chain")
    claims = ["containment", "sha-bound"]
    first = sweep(catalog, claims, jobs=1, out=str(tmp_path / "one.json"))
    second = sweep(catalog, claims, jobs=2, out=str(tmp_path / "two.json"))
    assert first.body() == second.body()
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
    assert json.loads((tmp_path / "one.json").read_text())["catalog_hash"] == first.catalog_hash


def test_empty_catalog():
    report = sweep(catalog_for([]), jobs=1)
    assert report.checked == 0
    assert report.passed


def test_unknown_claim():
    with pytest.raises(InputError):
        sweep(catalog_for(["Z/2"]), ["no-such-claim"], jobs=1)


def test_catalog_over_cap():
    with pytest.raises(CapExceededError):
        sweep(catalog_for(["Z/50"]), jobs=1)


@pytest.mark.slow
@pytest.mark.parametrize("name", preset_names(16))
def test_persistence_equivalence_on_every_small_preset(name):
    outcomes = persistence_outcomes(build_group(name))
    assert outcomes
    assert [o.data for o in outcomes if not o.conclusion] == []


@pytest.mark.slow
@pytest.mark.parametrize("name", preset_names(16))
def test_h1_agrees_with_oracles_on_catalog_modules(name):
    G = build_group(name)
    max_size = default_catalog().max_module_size
    for recipe in default_recipes():
        for A in modules_for(G, recipe, max_size):
            for outcome in h1_oracle_outcomes(A):
                assert outcome.conclusion, outcome.data
