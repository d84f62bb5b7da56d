"""
Named scenario presets: small group-level models of stable and persistent
prime sets, with cyclotomic arithmetic attached where the fields are abelian.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from .lab import cyclotomic_lab
from ..cohomology.cohomology import LocalFamily, sha1
from ..cohomology.modules import trivial_module
from ..density.densities import ClassSet, class_set_density
from ..errors import UnknownScenarioError
from ..groups.core import FiniteGroup, Subgroup, full_subgroup, quotient, subgroup_generated
from ..groups.presets import build_group
from ..stability.stability import (
    TowerFamily, dagger_rel, orbit_set_scenario, persistence_verdict, persisting_witness,
    uniform_lower_bound,
)
from ..storage.schemas import GroupSpec, RationalPayload, ScenarioBundle

logger = logging.getLogger(__name__)

DEFAULT_BOUND = 1_000_000


def _rational(value: Optional[Fraction]) -> Optional[Dict[str, int]]:
    return None if value is None else RationalPayload.from_fraction(value).model_dump()


def _base_only(G: FiniteGroup) -> TowerFamily:
    """A tower meeting the ambient field only in the base."""
    return TowerFamily.of(G, [full_subgroup(G)])


def _cs_in_mu9(bound: int) -> Dict[str, object]:
    # K = Q(mu_3), M = Q(mu_9): cs(M/K) is the primes = 1 mod 9 among those = 1 mod 3
    share = cyclotomic_lab.relative_density(9, [1], [1, 4, 7], bound)
    return {
        "modulus": 9,
        "bound": bound,
        "base_field_residues": [1, 4, 7],
        "split_residues": [1],
        "relative_density": share,
        "expected_relative_density": _rational(Fraction(1, 3)),
        "abs_error": abs(share - 1 / 3),
    }


def completely_split_mu9(bound: Optional[int] = None) -> ScenarioBundle:
    p = 3
    G = build_group("Z/3")
    W = full_subgroup(G)
    S = ClassSet.from_elements(G, [0], label="cs(M/K)")
    verdict = persistence_verdict(G, 0, W)

    # M lies in the tower unramified outside S and p, so the tower reaches M
    star_family = TowerFamily.two_step(G)
    sha = sha1(trivial_module(G, [p]), LocalFamily.from_classes(G, S))

    return ScenarioBundle(
        name="section-5.2",
        description=(
            "K = Q(mu_3), M = Q(mu_9), S = cs(M/K): persistent with persisting field K, "
            "not p-stable for the tower unramified outside S and p, and the class cutting out M "
            "survives in the finite-level Sha^1"
        ),
        groups={"Gal(M/K)": GroupSpec(preset="Z/3")},
        sigma=0,
        witness_subgroup=list(W.members),
        class_sets={"S": list(S.classes)},
        expected={
            "persistent": True,
            "density": _rational(Fraction(1, 3)),
            "star": {str(p): False},
            "sha1_order": 3,
        },
        computed={
            "persistent": verdict.persistent,
            "density": _rational(verdict.constant_density),
            "star": {str(p): dagger_rel(S, star_family, p)},
            "sha1_order": sha.order,
            "sha1_factors": sha.invariant_factors,
        },
        assumptions=["M/K is ramified only above 3, which lies in T"],
        arithmetic=_cs_in_mu9(bound or DEFAULT_BOUND),
    )


def totally_ramified_one_prime(bound: Optional[int] = None) -> ScenarioBundle:
    d, p = 5, 3
    G = build_group(f"Z/{d}")
    W = full_subgroup(G)
    S = ClassSet.from_elements(G, [0], label="P(M/K, 1)")
    verdict = persistence_verdict(G, 0, W)

    return ScenarioBundle(
        name="example-3.8",
        description=(
            f"M/K cyclic of degree d = {d} > p = {p}, totally ramified at one prime above p, "
            "S = P(M/K, 1): persistent with density 1/d but not p-stable once the tower reaches M"
        ),
        groups={"Gal(M/K)": GroupSpec(preset=f"Z/{d}")},
        sigma=0,
        witness_subgroup=list(W.members),
        class_sets={"S": list(S.classes)},
        expected={"persistent": True, "density": _rational(Fraction(1, d)), "star": {str(p): False}},
        computed={
            "persistent": verdict.persistent,
            "density": _rational(verdict.constant_density),
            "star": {str(p): dagger_rel(S, TowerFamily.two_step(G), p)},
        },
        assumptions=[
            f"M/K is totally ramified at a prime above {p} and unramified elsewhere",
            "M is linearly disjoint from K_S",
        ],
    )


def totally_ramified_two_primes(bound: Optional[int] = None) -> ScenarioBundle:
    G = build_group("S3")
    sigma = 1
    W = full_subgroup(G)
    S = ClassSet.from_elements(G, [sigma], label="P(M/K, transposition)")
    verdict = persistence_verdict(G, sigma, W)

    return ScenarioBundle(
        name="example-3.9",
        description=(
            "M/K with group S3, totally ramified at two primes of different residue characteristic, "
            "S = P(M/K, transposition): persistent and p-stable for every p"
        ),
        groups={"Gal(M/K)": GroupSpec(preset="S3")},
        sigma=sigma,
        witness_subgroup=list(W.members),
        class_sets={"S": list(S.classes)},
        expected={
            "persistent": True,
            "density": _rational(Fraction(1, 2)),
        },
        computed={
            "persistent": verdict.persistent,
            "density": _rational(verdict.constant_density),
        },
        assumptions=[
            "M/K is totally ramified at two primes with different residue characteristics",
            "hence M meets every tower unramified outside S, p and infinity only in K",
            "so S is p-stable for every p; the group model has no tower to check this against",
        ],
    )


def two_ramified_fields(bound: Optional[int] = None) -> ScenarioBundle:
    G = build_group("Z/2 x Z/3")
    # Index i*3 + j: the Z/3 factor is the kernel onto Gal(M1/K), the Z/2 factor onto Gal(M2/K)
    to_m1 = quotient(G, Subgroup.from_members(G, [0, 1, 2]))
    to_m2 = quotient(G, Subgroup.from_members(G, [0, 3]))
    sigma1, sigma2 = 1, 0
    S1 = ClassSet.preimage(to_m1, ClassSet.from_elements(to_m1.target, [sigma1]), label="P(M1/K)")
    S2 = ClassSet.preimage(to_m2, ClassSet.from_elements(to_m2.target, [sigma2]), label="P(M2/K)")
    S = S1.union(S2, label="P(M1/K) u P(M2/K)")

    family = _base_only(G)
    witness = persisting_witness(S, family)

    return ScenarioBundle(
        name="example-3.10",
        description=(
            "S contains P(M1/K, sigma1) u P(M2/K, sigma2) with M1/K of degree 2 and M2/K of degree 3 "
            "totally ramified at primes of different residue characteristic: persistent and p-stable for every p"
        ),
        groups={
            "Gal(M1M2/K)": GroupSpec(preset="Z/2 x Z/3"),
            "Gal(M1/K)": GroupSpec(preset="Z/2"),
            "Gal(M2/K)": GroupSpec(preset="Z/3"),
        },
        sigma=sigma1,
        witness_subgroup=list(G.elements),
        class_sets={"S1": list(S1.classes), "S2": list(S2.classes), "S": list(S.classes)},
        expected={
            "persistent": True,
            "density": _rational(Fraction(2, 3)),
        },
        computed={
            "persistent": witness is not None,
            "density": _rational(class_set_density(S)),
            "uniform_lower_bound": _rational(uniform_lower_bound(S, family)),
        },
        assumptions=[
            "M1/K and M2/K are linearly disjoint",
            "M_i/K is totally ramified at a prime p_i and the residue characteristics of p_1, p_2 differ",
            "so S is p-stable for every p; the group model has no tower to check this against",
            f"sigma2 = identity of Gal(M2/K); sigma1 = element {sigma1} of Gal(M1/K)",
        ],
    )


def outer_action_orbit(bound: Optional[int] = None) -> ScenarioBundle:
    G = build_group("S3")
    N = subgroup_generated(G, [3])
    sigma = 3
    report = orbit_set_scenario(G, N, sigma)

    return ScenarioBundle(
        name="section-3.4",
        description=(
            "Gal(M/Q) = S3 with K the quadratic subfield, Gal(M/K) = A3: the outer action of Gal(K/Q) "
            "swaps the two classes of 3-cycles, so P(M/K, sigma) is not Gal(K/Q)-stable"
        ),
        groups={"Gal(M/Q)": GroupSpec(preset="S3")},
        sigma=sigma,
        witness_subgroup=list(N.members),
        class_sets={"orbit": report.orbit},
        expected={"orbit_length": 2, "nontrivial_orbit": True, "stabilizer_order": 1},
        computed=report.model_dump(),
        assumptions=["M/Q is Galois with group S3 and K is the fixed field of A3"],
    )


SCENARIOS: Dict[str, Callable[[Optional[int]], ScenarioBundle]] = {
    "section-5.2": completely_split_mu9,
    "example-3.8": totally_ramified_one_prime,
    "example-3.9": totally_ramified_two_primes,
    "example-3.10": two_ramified_fields,
    "section-3.4": outer_action_orbit,
}


def scenario_names() -> List[str]:
    return list(SCENARIOS)


def scenario_catalog(name: str, bound: Optional[int] = None) -> ScenarioBundle:
    builder = SCENARIOS.get(name)
    if builder is None:
        raise UnknownScenarioError(f"unknown scenario {name!r}; known: {scenario_names()}")
    logger.info("building scenario %s", name)
    return builder(bound)
