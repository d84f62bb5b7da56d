"""
Stability, persistence and the exceptional-set predicates on finite towers.

A tower is modelled by a TowerFamily: a finite list of subgroups of the
ambient group, each standing for the fixed field of a finite layer.
A layer L lies "above" L0 (L0 contained in the field of L) exactly when the
subgroup of L is contained in the subgroup of L0.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

from ..config.settings import settings
from ..density.densities import ClassSet, basechange_density, pullback_density
from ..errors import CapExceededError, InputError, NotSubgroupError, StableLabError
from ..groups.core import (
    FiniteGroup, Subgroup, full_subgroup, normal_classes, outer_class_action,
    quotient, subgroups, trivial_subgroup,
)
from ..storage.schemas import OrbitReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TowerFamily:
    ambient: FiniteGroup = field(repr=False)
    layers: Tuple[Subgroup, ...]
    top: Optional[Subgroup] = None

    @classmethod
    def of(cls, G: FiniteGroup, layers: Iterable[Subgroup], top: Optional[Subgroup] = None) -> "TowerFamily":
        unique = {}
        for layer in layers:
            if layer.parent != G:
                raise NotSubgroupError(f"layer {layer.label()} is not a subgroup of {G.describe()}")
            unique[layer.members] = layer
        if tuple(G.elements) not in unique:
            raise InputError("a tower family must contain the full group (the base field)")
        ordered = tuple(sorted(unique.values(), key=lambda H: (H.order, H.members)))
        return cls(ambient=G, layers=ordered, top=top)

    @classmethod
    def all_subgroups(cls, G: FiniteGroup) -> "TowerFamily":
        return cls.of(G, subgroups(G, "all"), top=trivial_subgroup(G))

    @classmethod
    def above(cls, G: FiniteGroup, top: Subgroup) -> "TowerFamily":
        """Layers of the tower whose top field is fixed by `top`."""
        return cls.of(G, [H for H in subgroups(G, "all") if top.is_subgroup_of(H)], top=top)

    @classmethod
    def two_step(cls, G: FiniteGroup) -> "TowerFamily":
        return cls.of(G, [full_subgroup(G), trivial_subgroup(G)], top=trivial_subgroup(G))

    def layers_below(self, L0: Subgroup) -> Tuple[Subgroup, ...]:
        return tuple(L for L in self.layers if L.is_subgroup_of(L0))


@dataclass(frozen=True)
class StabilityWitness:
    subset: ClassSet
    stabilizing_layer: Subgroup
    bound_a: Fraction
    lam: Fraction

    def holds(self, family: TowerFamily) -> bool:
        if self.bound_a <= 0:
            return False
        for layer in family.layers_below(self.stabilizing_layer):
            density = pullback_density(self.subset, layer)
            if not self.bound_a <= density < self.lam * self.bound_a:
                return False
        return True


@dataclass(frozen=True)
class PersistenceVerdict:
    persistent: bool
    constant_density: Fraction
    witness_subgroup: Subgroup


@dataclass(frozen=True)
class PersistingWitness:
    subset: ClassSet
    persisting_layer: Subgroup
    density: Fraction


class StabilityAnalyzer:

    def __init__(self, powerset_cap: Optional[int] = None):
        self.powerset_cap = powerset_cap

    def search_space(self, S: ClassSet, powerset: bool = False) -> List[ClassSet]:
        """Candidate S0: S itself and its single classes, or every non-empty subset."""
        if not S.classes:
            return []
        if powerset:
            cap = self.powerset_cap or settings.POWERSET_CAP
            size = 2 ** len(S.classes) - 1
            if size > cap:
                raise CapExceededError(f"powerset search over {size} subsets exceeds cap {cap}")
            candidates = [
                ClassSet.of(S.ambient, combo, f"{S.label}{list(combo)}")
                for k in range(1, len(S.classes) + 1)
                for combo in combinations(S.classes, k)
            ]
        else:
            candidates = [S] + [c for c in S.single_classes() if c.classes != S.classes]
        return candidates

    def density_window(self, S0: ClassSet, family: TowerFamily, L0: Subgroup) -> Tuple[Fraction, Fraction]:
        densities = [pullback_density(S0, layer) for layer in family.layers_below(L0)]
        return min(densities), max(densities)

    def stabilizing_layers(
        self,
        S: ClassSet,
        family: TowerFamily,
        lam: Fraction,
        powerset: bool = False,
        candidate_layers: Optional[Sequence[Subgroup]] = None,
    ) -> List[StabilityWitness]:
        """Best witness for every layer that admits one."""
        lam = Fraction(lam)
        if lam <= 1:
            raise InputError(f"lambda must exceed 1, got {lam}")
        if S.ambient != family.ambient:
            raise InputError("class set and tower family use different ambient groups")

        layers = family.layers if candidate_layers is None else tuple(candidate_layers)
        found = []
        for L0 in layers:
            best = None
            for S0 in self.search_space(S, powerset):
                low, high = self.density_window(S0, family, L0)
                if low > 0 and high < lam * low:
                    key = (-low, S0.classes)
                    if best is None or key < best[0]:
                        best = (key, S0, low)
            if best is not None:
                _, S0, low = best
                found.append(StabilityWitness(subset=S0, stabilizing_layer=L0, bound_a=low, lam=lam))
        return found

    def stability_witness(
        self,
        S: ClassSet,
        family: TowerFamily,
        lam: Fraction,
        powerset: bool = False,
        at_layer: Optional[Subgroup] = None,
    ) -> Optional[StabilityWitness]:
        candidates = None if at_layer is None else [at_layer]
        witnesses = self.stabilizing_layers(S, family, lam, powerset, candidates)
        if not witnesses:
            return None

        # Largest a, then largest layer, then lexicographic S0
        witness = min(
            witnesses,
            key=lambda w: (-w.bound_a, -w.stabilizing_layer.order, w.stabilizing_layer.members, w.subset.classes),
        )
        if not witness.holds(family):
            raise StableLabError("stability witness failed re-verification")
        return witness

    def uniform_lower_bound(self, S: ClassSet, family: TowerFamily) -> Optional[Fraction]:
        low = min(pullback_density(S, layer) for layer in family.layers)
        return low if low > 0 else None

    def stable_for_some_lambda(self, S: ClassSet, family: TowerFamily, at_full_group: bool = False) -> bool:
        """Densities are multiples of 1/|G| and at most 1, so lambda = |G| + 1 covers every window."""
        G = family.ambient
        at_layer = full_subgroup(G) if at_full_group else None
        return self.stability_witness(S, family, Fraction(G.order + 1), at_layer=at_layer) is not None

    def persistence_verdict(self, Gbar: FiniteGroup, sigma: int, W: Subgroup) -> PersistenceVerdict:
        density = basechange_density(Gbar, sigma, W)
        return PersistenceVerdict(persistent=density > 0, constant_density=density, witness_subgroup=W)

    def persisting_witness(
        self, S: ClassSet, family: TowerFamily, powerset: bool = False
    ) -> Optional[PersistingWitness]:
        """S0 whose density is constant and positive on every layer above L0."""
        best = None
        for L0 in family.layers:
            for S0 in self.search_space(S, powerset):
                low, high = self.density_window(S0, family, L0)
                if low > 0 and low == high:
                    key = (-low, -L0.order, L0.members, S0.classes)
                    if best is None or key < best[0]:
                        best = (key, PersistingWitness(subset=S0, persisting_layer=L0, density=low))
        return None if best is None else best[1]

    def dagger_membership(self, Gbar: FiniteGroup, sigma: int, W_p: Subgroup) -> bool:
        return basechange_density(Gbar, sigma, W_p) > 0

    def star_membership(self, Gbar: FiniteGroup, sigma: int, W_star: Subgroup) -> bool:
        return basechange_density(Gbar, sigma, W_star) > 0

    def dagger_rel(self, S: ClassSet, family: TowerFamily, p: int) -> bool:
        """p-stable for the supplied tower with the base field as stabilizing layer."""
        return self.stability_witness(S, family, Fraction(p), at_layer=full_subgroup(family.ambient)) is not None

    def orbit_set_scenario(self, G: FiniteGroup, N: Subgroup, sigma: int) -> OrbitReport:
        classes = normal_classes(G, N)
        sigma = G.check_element(sigma)
        if not N.contains(sigma):
            raise InputError(f"sigma = {G.labels[sigma]} is not in the normal subgroup")

        start = next(i for i, c in enumerate(classes) if sigma in c.members)
        reps = quotient(G, N).coset_representatives
        images = [outer_class_action(G, N, g)[start] for g in reps]
        orbit = sorted(set(images))
        stabilizer = sum(1 for image in images if image == start)
        return OrbitReport(
            sigma=sigma,
            orbit=orbit,
            orbit_classes=[list(classes[i].members) for i in orbit],
            orbit_length=len(orbit),
            stabilizer_order=stabilizer,
            stabilizer_index=len(reps) // stabilizer,
            nontrivial_orbit=len(orbit) > 1,
        )


# Global instances
stability_analyzer = StabilityAnalyzer()


# Convenience functions
def persistence_verdict(Gbar: FiniteGroup, sigma: int, W: Subgroup) -> PersistenceVerdict:
    return stability_analyzer.persistence_verdict(Gbar, sigma, W)


def stability_witness(
    S: ClassSet,
    family: TowerFamily,
    lam: Fraction,
    powerset: bool = False,
    at_layer: Optional[Subgroup] = None,
) -> Optional[StabilityWitness]:
    return stability_analyzer.stability_witness(S, family, lam, powerset, at_layer)


def stabilizing_layers(S: ClassSet, family: TowerFamily, lam: Fraction) -> List[StabilityWitness]:
    return stability_analyzer.stabilizing_layers(S, family, lam)


def uniform_lower_bound(S: ClassSet, family: TowerFamily) -> Optional[Fraction]:
    return stability_analyzer.uniform_lower_bound(S, family)


def persisting_witness(S: ClassSet, family: TowerFamily) -> Optional[PersistingWitness]:
    return stability_analyzer.persisting_witness(S, family)


def dagger_membership(Gbar: FiniteGroup, sigma: int, W_p: Subgroup) -> bool:
    return stability_analyzer.dagger_membership(Gbar, sigma, W_p)


def star_membership(Gbar: FiniteGroup, sigma: int, W_star: Subgroup) -> bool:
    return stability_analyzer.star_membership(Gbar, sigma, W_star)


def dagger_rel(S: ClassSet, family: TowerFamily, p: int) -> bool:
    return stability_analyzer.dagger_rel(S, family, p)


def orbit_set_scenario(G: FiniteGroup, N: Subgroup, sigma: int) -> OrbitReport:
    return stability_analyzer.orbit_set_scenario(G, N, sigma)


def chebotarev_preimage_family(
    G: FiniteGroup, V: Subgroup, sigma_bar: int, top: Optional[Subgroup] = None
) -> Tuple[ClassSet, TowerFamily, FiniteGroup, Subgroup]:
    """
    Finite model of a Chebotarev set P_{M/K}(sigma) seen along a tower.

    G models Gal(N/K), V = Gal(N/M), `top` = Gal(N/tower) (normal in G).
    Returns (full preimage class set, family of layers above `top`,
    Gbar = G/V, W = image of `top` in Gbar).
    """
    q = quotient(G, V)
    top = top or trivial_subgroup(G)
    if not top.is_normal:
        raise InputError("the top of the tower must be normal in the ambient group")
    S_bar = ClassSet.from_elements(q.target, [sigma_bar], label="C(sigma)")
    S = ClassSet.preimage(q, S_bar)
    family = TowerFamily.above(G, top)
    return S, family, q.target, q.image(top)
