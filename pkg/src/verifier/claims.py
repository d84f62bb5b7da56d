"""
Finite-level checks of the stability and cohomology statements.

Every check yields Outcomes: the hypothesis is re-derived from the stability
module, the conclusion from the cohomology module. An outcome with a false
hypothesis is vacuous; if its conclusion fails too it is recorded as sharp.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, Iterable, List, Optional, Sequence

from sympy import primefactors

from ..cohomology.cohomology import (
    LocalFamily, cohomology_engine, corestrict_cocycle, h1, h1_star, in_span, inflate_cocycle,
    kernel_of, restrict_cocycle, sha1, span_order,
)
from ..cohomology.modules import GModule, trivial_module
from ..cohomology.oracles import cyclic_oracle, h1_oracle
from ..config.settings import settings
from ..density.densities import (
    ClassSet, basechange_density, induced_character, induced_character_oracle, pm_partition,
    pullback_density,
)
from ..errors import InputError, NotSubgroupError
from ..groups.core import FiniteGroup, Subgroup, full_subgroup, quotient, subgroup_generated, subgroups
from ..stability.stability import (
    TowerFamily, chebotarev_preimage_family, persistence_verdict, stability_analyzer,
    stability_witness, uniform_lower_bound,
)
from ..storage.schemas import ClaimSummary, SweepReport, Violation

logger = logging.getLogger(__name__)

DEFAULT_CLAIMS = (
    "density-identities",
    "basechange",
    "persistence-equivalence",
    "h1-oracle",
    "cyclic-decomposition",
    "containment",
    "sha-bound",
    "res-cores",
    "inflation-restriction",
)
CLAIM_IDS = DEFAULT_CLAIMS + ("induced-vanishing",)


def canonical_hash(payload: Any) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def group_key(G: FiniteGroup) -> Dict[str, Any]:
    return {"name": G.describe(), "fingerprint": G.fingerprint[:16]}


def module_key(A: GModule) -> Dict[str, Any]:
    return {"name": A.name, "orders": list(A.orders), "fingerprint": A.fingerprint[:16]}


@dataclass(frozen=True)
class Outcome:
    claim: str
    instance: Dict[str, Any]
    hypothesis: bool
    conclusion: bool
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def instance_id(self) -> str:
        return canonical_hash({"claim": self.claim, **self.instance})[:16]

    def violation(self) -> Violation:
        return Violation(instance_id=self.instance_id, claim=self.claim, data={**self.instance, **self.data})


class ReportBuilder:
    """Ordered reduction of outcomes into a SweepReport."""

    def __init__(self, claims: Sequence[str], catalog_hash: str = ""):
        self.claims = list(claims)
        self.catalog_hash = catalog_hash
        self.per_claim = {claim: ClaimSummary() for claim in self.claims}
        self.violations: List[Violation] = []
        self.sharp: List[Violation] = []

    def add(self, outcome: Outcome) -> None:
        summary = self.per_claim.setdefault(outcome.claim, ClaimSummary())
        if outcome.hypothesis:
            summary.checked += 1
            if not outcome.conclusion:
                summary.violations += 1
                self.violations.append(outcome.violation())
        else:
            summary.vacuous += 1
            if not outcome.conclusion:
                summary.sharp += 1
                self.sharp.append(outcome.violation())

    def extend(self, outcomes: Iterable[Outcome]) -> "ReportBuilder":
        for outcome in outcomes:
            self.add(outcome)
        return self

    def build(self, runtime_seconds: float = 0.0) -> SweepReport:
        return SweepReport(
            catalog_hash=self.catalog_hash,
            claims=self.claims,
            checked=sum(s.checked for s in self.per_claim.values()),
            vacuous=sum(s.vacuous for s in self.per_claim.values()),
            sharp=self.sharp,
            violations=self.violations,
            per_claim=dict(sorted(self.per_claim.items())),
            passed=not self.violations,
            runtime_seconds=runtime_seconds,
        )


def class_sets(G: FiniteGroup, cap: Optional[int] = None) -> List[ClassSet]:
    """Non-empty class subsets T: all of them when few enough, else singletons, co-singletons and the full set."""
    cap = cap or settings.MAX_CLASS_SETS
    n = len(G.conjugacy_classes)
    if 2 ** n - 1 <= cap:
        combos = [combo for k in range(1, n + 1) for combo in combinations(range(n), k)]
    else:
        singles = [(c,) for c in range(n)]
        complements = [tuple(d for d in range(n) if d != c) for c in range(n)]
        combos = singles + complements + [tuple(range(n))]
    unique = list(dict.fromkeys(combos))
    return [ClassSet.of(G, combo, label=f"T{list(combo)}") for combo in unique]


def smallest_prime(n: int) -> int:
    if n < 2:
        raise InputError("module must be non-zero to pick a prime")
    return min(primefactors(n))


def relative_subgroup(outer: Subgroup, inner: Subgroup) -> Subgroup:
    """`inner` re-indexed as a subgroup of outer.as_group."""
    if not inner.is_subgroup_of(outer):
        raise NotSubgroupError(f"{inner.label()} is not contained in {outer.label()}")
    local = outer.local_index
    return Subgroup(parent=outer.as_group, members=tuple(sorted(local[x] for x in inner.members)))


def _witness_at_full_group(T: ClassSet, lam: Fraction):
    family = TowerFamily.all_subgroups(T.ambient)
    return stability_witness(T, family, Fraction(lam), at_layer=full_subgroup(T.ambient))


# Density claims

def density_identity_outcomes(G: FiniteGroup) -> List[Outcome]:
    outcomes = []
    for H in subgroups(G, "all"):
        m_H = induced_character(G, H)
        inner = sum(Fraction(v * c.size, G.order) for v, c in zip(m_H.values, G.conjugacy_classes))
        partition = pm_partition(G, H)
        checks = {
            "inner_product_one": inner == 1,
            "partition_sums_to_one": sum(partition.values()) == 1,
            "weighted_partition_one": sum(m * d for m, d in partition.items()) == 1,
            "identity_value_is_index": m_H.at(G.identity) == H.index,
            "matches_coset_count": m_H.values == induced_character_oracle(G, H).values,
        }
        outcomes.append(Outcome(
            claim="density-identities",
            instance={"group": group_key(G), "subgroup": list(H.members)},
            hypothesis=True,
            conclusion=all(checks.values()),
            data={"failed": sorted(k for k, ok in checks.items() if not ok)},
        ))
    return outcomes


def basechange_outcomes(G: FiniteGroup) -> List[Outcome]:
    outcomes = []
    all_subgroups = subgroups(G, "all")
    for V in (H for H in all_subgroups if H.is_normal):
        q = quotient(G, V)
        Gbar = q.target
        for sigma in Gbar.elements:
            S = ClassSet.preimage(q, ClassSet.from_elements(Gbar, [sigma]))
            for U in all_subgroups:
                closed = basechange_density(Gbar, sigma, q.image(U))
                brute = pullback_density(S, U)
                outcomes.append(Outcome(
                    claim="basechange",
                    instance={"group": group_key(G), "normal": list(V.members), "sigma": sigma,
                              "subgroup": list(U.members)},
                    hypothesis=True,
                    conclusion=closed == brute,
                    data={"closed_form": str(closed), "pullback": str(brute)},
                ))
    return outcomes


def persistence_outcomes(G: FiniteGroup) -> List[Outcome]:
    outcomes = []
    normals = [H for H in subgroups(G, "all") if H.is_normal]
    for V in normals:
        Gbar = quotient(G, V).target
        for cls in Gbar.conjugacy_classes:
            sigma = cls.representative
            for top in normals:
                S, family, Gbar, W = chebotarev_preimage_family(G, V, sigma, top)
                verdict = persistence_verdict(Gbar, sigma, W).persistent
                bounded = uniform_lower_bound(S, family) is not None
                stable = stability_analyzer.stable_for_some_lambda(S, family)
                outcomes.append(Outcome(
                    claim="persistence-equivalence",
                    instance={"group": group_key(G), "normal": list(V.members), "sigma": sigma,
                              "top": list(top.members)},
                    hypothesis=True,
                    conclusion=verdict == bounded == stable,
                    data={"persistent": verdict, "lower_bound": bounded, "stable": stable},
                ))
    return outcomes


# Cohomology claims

def h1_oracle_outcomes(A: GModule) -> List[Outcome]:
    G = A.group
    outcomes = []
    computed = h1(A).invariant_factors
    if A.size ** (G.order - 1) <= settings.ORACLE_CAP:
        expected = h1_oracle(A).invariant_factors
        outcomes.append(Outcome(
            claim="h1-oracle",
            instance={"group": group_key(G), "module": module_key(A), "oracle": "enumeration"},
            hypothesis=True,
            conclusion=computed == expected,
            data={"h1": computed, "oracle": expected},
        ))
    cyclic = any(G.element_order(g) == G.order for g in G.elements)
    if cyclic and A.size <= settings.H2_MAX_MODULE and G.order <= settings.H2_MAX_GROUP:
        herbrand = cyclic_oracle(A)
        h2_factors = list(cohomology_engine.h2(A).invariant_factors)
        outcomes.append(Outcome(
            claim="h1-oracle",
            instance={"group": group_key(G), "module": module_key(A), "oracle": "cyclic"},
            hypothesis=True,
            conclusion=computed == herbrand["h1"] and h2_factors == herbrand["h2"],
            data={"h1": computed, "h2": h2_factors, "herbrand": herbrand},
        ))
    return outcomes


def cyclic_decomposition_outcome(G: FiniteGroup, T: ClassSet, p: int) -> Outcome:
    witness = _witness_at_full_group(T, Fraction(p))
    missing = []
    for C in subgroups(G, "cyclic-p", p):
        generated = any(
            T.contains_element(g) and subgroup_generated(G, [g]).members == C.members
            for g in C.members
        )
        if not generated:
            missing.append(list(C.members))
    return Outcome(
        claim="cyclic-decomposition",
        instance={"group": group_key(G), "T": list(T.classes), "p": p},
        hypothesis=witness is not None,
        conclusion=not missing,
        data={"missing": missing},
    )


def containment_outcome(G: FiniteGroup, A: GModule, T: ClassSet) -> Outcome:
    p = smallest_prime(A.size)
    witness = _witness_at_full_group(T, Fraction(p))
    sha = sha1(A, LocalFamily.from_classes(G, T))

    # H^1_* of G/N_A inflated back to G
    q = quotient(G, A.acting_kernel)
    star = h1_star(A.descend(q))
    inflated = [inflate_cocycle(gen, A, q) for gen in star.generators]
    parent = h1(A)
    contained = all(in_span(parent, inflated, x) for x in sha.generators)
    return Outcome(
        claim="containment",
        instance={"group": group_key(G), "module": module_key(A), "T": list(T.classes)},
        hypothesis=witness is not None,
        conclusion=contained,
        data={"p": p, "sha1": sha.invariant_factors, "h1_star_quotient": star.invariant_factors},
    )


def _layer_family(L: Subgroup, T: ClassSet) -> LocalFamily:
    Lg = L.as_group
    local = L.local_index
    found = {}
    for g in L.members:
        if T.contains_element(g):
            H = subgroup_generated(Lg, [local[g]])
            found.setdefault(H.members, H)
    return LocalFamily.of(Lg, [(H, 1) for H in sorted(found.values(), key=lambda H: (H.order, H.members))])


def sha_bound_outcome(family: TowerFamily, T: ClassSet, p: int, m: int) -> Outcome:
    G = family.ambient
    witnesses = stability_analyzer.stabilizing_layers(T, family, Fraction(p ** m))
    if witnesses:
        layers = {L.members: L for w in witnesses for L in family.layers_below(w.stabilizing_layer)}
    else:
        layers = {L.members: L for L in family.layers}

    too_big = []
    for L in sorted(layers.values(), key=lambda H: (H.order, H.members)):
        local = _layer_family(L, T)
        for r in (1, 2):
            order = sha1(trivial_module(L.as_group, [p ** r]), local).order
            if order >= p ** m:
                too_big.append({"layer": list(L.members), "r": r, "sha1_order": order})
    return Outcome(
        claim="sha-bound",
        instance={"group": group_key(G), "layers": [list(L.members) for L in family.layers],
                  "T": list(T.classes), "p": p, "m": m},
        hypothesis=bool(witnesses),
        conclusion=not too_big,
        data={"stabilizing_layers": [list(w.stabilizing_layer.members) for w in witnesses], "exceeded": too_big},
    )


def res_cores_outcomes(A: GModule, H: Subgroup, p: int) -> List[Outcome]:
    """cores o res = [G:H] on H^1; cores = 0 when res is an isomorphism and [G:H] kills A."""
    G = A.group
    instance = {"group": group_key(G), "module": module_key(A), "subgroup": list(H.members), "p": p}
    parent = h1(A)
    mismatched = []
    for gen in parent.generators:
        image = corestrict_cocycle(restrict_cocycle(gen, H), A, H)
        expected = [(H.index * c) % d for c, d in zip(parent.coordinates(gen), parent.invariant_factors)]
        if parent.coordinates(image) != expected:
            mismatched.append([list(v) for v in gen.values])
    outcomes = [Outcome(
        claim="res-cores",
        instance={**instance, "part": "index"},
        hypothesis=True,
        conclusion=not mismatched,
        data={"mismatched": mismatched},
    )]

    if H.index % p == 0 and A.exponent == p:
        images, target_factors = cohomology_engine.restriction_images(A, H)
        local = h1(cohomology_engine.restricted(A, H))
        iso = local.order == parent.order and kernel_of(parent, images, target_factors).order == 1
        images_back = [parent.coordinates(corestrict_cocycle(gen, A, H)) for gen in local.generators]
        nonzero = [coords for coords in images_back if any(coords)]
        outcomes.append(Outcome(
            claim="res-cores",
            instance={**instance, "part": "vanishing"},
            hypothesis=iso,
            conclusion=not nonzero,
            data={"nonzero_images": nonzero},
        ))
    return outcomes


def inflation_restriction_outcome(A: GModule, N: Subgroup) -> Outcome:
    """0 -> H^1(G/N, A) -> H^1(G, A) -> H^1(N, A) is exact at the first two places."""
    G = A.group
    q = quotient(G, N)
    source = h1(A.descend(q))
    parent = h1(A)
    inflated = [inflate_cocycle(gen, A, q) for gen in source.generators]
    images = [parent.coordinates(c) for c in inflated]
    injective = kernel_of(source, images, parent.invariant_factors).order == 1

    res_images, res_factors = cohomology_engine.restriction_images(A, N)
    kernel_res = kernel_of(parent, res_images, res_factors)
    local = h1(cohomology_engine.restricted(A, N))
    composite_zero = all(local.is_coboundary(restrict_cocycle(c, N)) for c in inflated)
    image_order = span_order(parent, inflated)
    return Outcome(
        claim="inflation-restriction",
        instance={"group": group_key(G), "module": module_key(A), "normal": list(N.members)},
        hypothesis=True,
        conclusion=injective and composite_zero and image_order == kernel_res.order,
        data={"injective": injective, "res_inf_zero": composite_zero,
              "image_order": image_order, "kernel_order": kernel_res.order},
    )


def induced_vanishing_outcome(G: FiniteGroup, p: int) -> Outcome:
    orders = cohomology_engine.induced_vanishing(G, p)
    return Outcome(
        claim="induced-vanishing",
        instance={"group": group_key(G), "p": p},
        hypothesis=True,
        conclusion=orders["h1"] == 1 and orders["h2"] in (None, 1),
        data=orders,
    )


# Single-instance verifiers

def verify_cyclic_decomposition(G: FiniteGroup, T: ClassSet, p: int) -> SweepReport:
    return ReportBuilder(["cyclic-decomposition"]).extend([cyclic_decomposition_outcome(G, T, p)]).build()


def verify_containment(G: FiniteGroup, A: GModule, T: ClassSet) -> SweepReport:
    if A.group != G or T.ambient != G:
        raise InputError("module and class set must live on the same group")
    return ReportBuilder(["containment"]).extend([containment_outcome(G, A, T)]).build()


def verify_sha_bound(G: FiniteGroup, family: TowerFamily, T: ClassSet, p: int, m: int) -> SweepReport:
    if family.ambient != G:
        raise InputError("tower family lives in a different group")
    return ReportBuilder(["sha-bound"]).extend([sha_bound_outcome(family, T, p, m)]).build()


def verify_res_cores(G: FiniteGroup, chain: Sequence[Subgroup], A: GModule, p: int) -> SweepReport:
    """Check every step of a descending chain G >= H_1 >= H_2 ..., restricting A along the way."""
    if A.group != G:
        raise InputError("module lives in a different group")
    nested = list(chain)
    if not nested or nested[0].order != G.order:
        nested = [full_subgroup(G)] + nested
    builder = ReportBuilder(["res-cores"])
    for outer, inner in zip(nested, nested[1:]):
        module = cohomology_engine.restricted(A, outer)
        builder.extend(res_cores_outcomes(module, relative_subgroup(outer, inner), p))
    return builder.build()


def verify_inflation_restriction(A: GModule, N: Subgroup) -> SweepReport:
    if not N.is_subgroup_of(A.acting_kernel):
        raise InputError("the normal subgroup must act trivially on the module")
    return ReportBuilder(["inflation-restriction"]).extend([inflation_restriction_outcome(A, N)]).build()


def verify_induced_vanishing(G: FiniteGroup, p: int) -> SweepReport:
    return ReportBuilder(["induced-vanishing"]).extend([induced_vanishing_outcome(G, p)]).build()
