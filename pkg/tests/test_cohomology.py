import pytest

from src.cohomology.cohomology import (
    CohomologyEngine, LocalFamily, coker1, h0, h1, h1_star, h2, induced_vanishing, map_h1, sha1,
    descend_module, restrict_module,
)
from src.cohomology.modules import (
    Cocycle, build_module, induced_module, module_from_payload, multiplication_module, sign_module,
    trivial_module,
)
from src.cohomology.oracles import cyclic_oracle, factors_from_torsion, h1_oracle, h1_star_oracle
from src.density.densities import ClassSet
from src.errors import CapExceededError, ModuleError
from src.groups.core import full_subgroup, quotient, subgroup_generated, trivial_subgroup
from src.groups.presets import build_group
from src.storage.cache import CohomologyCache
from src.storage.schemas import ModulePayload


def test_h0_trivial(z2):
    assert h0(trivial_module(z2, [4])).invariant_factors == (4,)


def test_h0_sign(z2):
    assert h0(sign_module(z2, [4], trivial_subgroup(z2))).invariant_factors == (2,)


def test_h1_trivial_is_hom():
    G = build_group("Z/4")
    assert h1(trivial_module(G, [2])).invariant_factors == [2]
    assert h1(trivial_module(G, [6])).invariant_factors == [2]
    assert h1(trivial_module(build_group("Z/2"), [3])).order == 1


def test_h1_sign_action(z2):
    A = sign_module(z2, [4], trivial_subgroup(z2))
    assert h1(A).invariant_factors == [2]


def test_h1_generators_are_cocycles(s3):
    A = sign_module(s3, [3], subgroup_generated(s3, [3]))
    result = h1(A)
    for gen in result.generators:
        assert gen.is_cocycle()
        assert not result.is_coboundary(gen)


def test_h1_matches_oracle_on_units_mod_8():
    A = multiplication_module(build_group("(Z/8)*"), 8)
    assert h1(A).invariant_factors == h1_oracle(A).invariant_factors


def test_h1_star_of_units_mod_8():
    A = multiplication_module(build_group("(Z/8)*"), 8)
    assert h1_star(A).order == 2
    assert h1_star_oracle(A).invariant_factors == h1_star(A).invariant_factors == [2]


@pytest.mark.parametrize("name, orders", [("Z/2 x Z/2", [2]), ("Z/4", [2]), ("S3", [3]), ("Q8", [2])])
def test_h1_star_matches_oracle_on_trivial_modules(name, orders):
    A = trivial_module(build_group(name), orders)
    assert h1_star(A).invariant_factors == h1_star_oracle(A).invariant_factors


def test_h1_star_matches_oracle_on_sign_module(s3, a3):
    A = sign_module(s3, [3], a3)
    assert h1_star(A).invariant_factors == h1_star_oracle(A).invariant_factors


@pytest.mark.parametrize("name, orders", [("Z/4", [2]), ("Z/6", [3]), ("Z/3", [3, 3])])
def test_h1_star_vanishes_for_cyclic_groups(name, orders):
    assert h1_star(trivial_module(build_group(name), orders)).order == 1


def test_h1_star_of_klein_four_trivial():
    V = build_group("Z/2 x Z/2")
    A = trivial_module(V, [2])
    assert h1(A).order == 4
    assert h1_star(A).order == 1


def test_cocycle_sums(z3):
    A = trivial_module(z3, [3])
    result = h1(A)
    gen = result.generators[0]
    base = result.coordinates(gen)
    assert result.coordinates(gen + gen) == [(2 * base[0]) % 3]
    assert result.is_coboundary(gen.scaled(3))


def test_non_cocycle_is_rejected(z2):
    A = trivial_module(z2, [2])
    f = Cocycle(module=A, values=((1,), (0,)))
    assert not f.is_cocycle()


def test_h2_trivial_cyclic(z2):
    A = trivial_module(z2, [2])
    assert h2(A).invariant_factors == (2,)
    assert cyclic_oracle(A) == {"h1": [2], "h2": [2]}


@pytest.mark.parametrize("name, orders", [("Z/4", [2]), ("Z/3", [3]), ("Z/2", [4])])
def test_h2_matches_cyclic_oracle(name, orders):
    A = trivial_module(build_group(name), orders)
    assert list(h2(A).invariant_factors) == cyclic_oracle(A)["h2"]
    assert h1(A).invariant_factors == cyclic_oracle(A)["h1"]


def test_h2_cap():
    with pytest.raises(CapExceededError):
        h2(trivial_module(build_group("Z/20"), [2]))


def test_induced_module_is_acyclic(z2):
    A = induced_module(z2, 2)
    assert h1(A).order == 1
    assert h2(A).order == 1
    assert induced_vanishing(z2, 2) == {"h1": 1, "h2": 1}


def test_induced_vanishing_skips_h2_past_cap(s3):
    assert induced_vanishing(s3, 3) == {"h1": 1, "h2": None}


def test_sha1_over_identity_class(z3):
    A = trivial_module(z3, [3])
    family = LocalFamily.from_classes(z3, ClassSet.from_elements(z3, [0]))
    assert sha1(A, family).order == 3


def test_sha1_over_all_cyclic_is_h1_star(s3):
    A = sign_module(s3, [3], subgroup_generated(s3, [3]))
    assert sha1(A, LocalFamily.all_cyclic(s3)).order == h1_star(A).order


def test_coker1_with_multiplicity(z2):
    A = trivial_module(z2, [2])
    family = LocalFamily.from_classes(z2, ClassSet.from_elements(z2, [1]), multiplicity=2)
    assert coker1(A, family).order == 2


def test_restriction_then_corestriction_is_index():
    G = build_group("Z/6")
    H = subgroup_generated(G, [2])
    A = trivial_module(G, [3])
    source = h1(A)
    gen = source.generators[0]
    restricted = map_h1("res", gen, subgroup=H)
    assert any(restricted.coordinates)
    back = map_h1("cores", restricted.cocycle, subgroup=H, module=A)
    assert back.coordinates == source.coordinates(gen.scaled(H.index))


def test_inflation_is_injective_on_h1():
    G = build_group("Z/6")
    q = quotient(G, subgroup_generated(G, [3]))
    A = trivial_module(G, [3])
    gen = h1(descend_module(A, q)).generators[0]
    image = map_h1("inf", gen, quotient_map=q, module=A)
    assert any(image.coordinates)


def test_descend_needs_trivial_kernel_action(s3, a3):
    A = sign_module(s3, [3], a3)
    with pytest.raises(ModuleError):
        A.descend(quotient(s3, full_subgroup(s3)))


def test_module_rejects_non_invertible_action(z2):
    with pytest.raises(ModuleError):
        build_module(z2, [4], {1: [[2]]})


def test_module_rejects_incompatible_action(z3):
    with pytest.raises(ModuleError):
        build_module(z3, [4], {1: [[-1]]})


def test_module_from_payload():
    payload = ModulePayload(group={"preset": "(Z/8)*"}, orders=[8], action={"kind": "multiplication"})
    A = module_from_payload(payload)
    assert A == multiplication_module(build_group("(Z/8)*"), 8)
    signed = module_from_payload(ModulePayload(group={"preset": "S3"}, orders=[3], action={"kind": "sign", "kernel": [3]}))
    assert signed.acting_kernel.order == 3


def test_factors_from_torsion():
    # Z/2 + Z/4 has 4 elements killed by 2 and 8 killed by 4
    assert factors_from_torsion(8, lambda m: {2: 4, 4: 8}[m]) == [2, 4]


def test_disk_cache_round_trip(tmp_path, z3):
    engine = CohomologyEngine(CohomologyCache(str(tmp_path)))
    A = trivial_module(z3, [3])
    first = engine.h1(A).invariant_factors
    assert any(tmp_path.iterdir())
    fresh = CohomologyEngine(CohomologyCache(str(tmp_path)))
    assert fresh.h1(A).invariant_factors == first


def test_restrict_module_keeps_action(s3, a3):
    A = sign_module(s3, [3], a3)
    B = restrict_module(A, a3)
    assert B.group.order == 3
    assert h0(B).invariant_factors == (3,)
