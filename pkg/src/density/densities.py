"""
Exact Chebotarev densities on the finite-level model.

A prime set is a union of conjugacy classes of one ambient group. Densities
are `Fraction`s throughout; nothing here touches floating point.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, Optional, Tuple

from ..groups.core import FiniteGroup, QuotientMap, Subgroup
from ..errors import InputError, NotSubgroupError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClassSet:
    ambient: FiniteGroup = field(repr=False)
    classes: Tuple[int, ...]
    label: str = ""

    @classmethod
    def of(cls, G: FiniteGroup, classes: Iterable[int], label: str = "") -> "ClassSet":
        classes = tuple(sorted(set(int(c) for c in classes)))
        n = len(G.conjugacy_classes)
        for c in classes:
            if not 0 <= c < n:
                raise InputError(f"class index {c} out of range (group has {n} classes)")
        return cls(ambient=G, classes=classes, label=label)

    @classmethod
    def from_elements(cls, G: FiniteGroup, elems: Iterable[int], label: str = "") -> "ClassSet":
        """The smallest class union containing the given elements."""
        return cls.of(G, {G.class_index(G.check_element(x)) for x in elems}, label)

    @classmethod
    def full(cls, G: FiniteGroup, label: str = "all") -> "ClassSet":
        return cls.of(G, range(len(G.conjugacy_classes)), label)

    @classmethod
    def preimage(cls, q: QuotientMap, S: "ClassSet", label: Optional[str] = None) -> "ClassSet":
        """Pull a class set of the quotient back through the fibers of q."""
        if S.ambient != q.target:
            raise InputError("class set does not live in the quotient group")
        wanted = set(S.classes)
        G = q.source
        classes = [
            i for i, cls_ in enumerate(G.conjugacy_classes)
            if q.target.class_index(q.projection[cls_.representative]) in wanted
        ]
        return cls.of(G, classes, S.label if label is None else label)

    def __eq__(self, other) -> bool:
        return isinstance(other, ClassSet) and self.classes == other.classes and self.ambient == other.ambient

    def __hash__(self) -> int:
        return hash((self.ambient.fingerprint, self.classes))

    @cached_property
    def elements(self) -> Tuple[int, ...]:
        members = []
        for c in self.classes:
            members.extend(self.ambient.conjugacy_classes[c].members)
        return tuple(sorted(members))

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    def contains_element(self, x: int) -> bool:
        return x in self.element_set

    def union(self, other: "ClassSet", label: str = "") -> "ClassSet":
        return ClassSet.of(self.ambient, self.classes + other.classes, label)

    def issubset(self, other: "ClassSet") -> bool:
        return set(self.classes) <= set(other.classes)

    def single_classes(self) -> Tuple["ClassSet", ...]:
        return tuple(ClassSet.of(self.ambient, (c,), f"{self.label}[{c}]") for c in self.classes)


@dataclass(frozen=True)
class ClassFunction:
    ambient: FiniteGroup = field(repr=False)
    values: Tuple[int, ...]

    def at(self, x: int) -> int:
        return self.values[self.ambient.class_index(x)]


class DensityCalculator:

    def __init__(self):
        self._induced: Dict[Tuple[str, Tuple[int, ...]], ClassFunction] = {}

    def induced_character(self, G: FiniteGroup, H: Subgroup) -> ClassFunction:
        """m_H(sigma) = #{gH : g^-1 sigma g in H} = |G| |C cap H| / (|H| |C|)."""
        _check_subgroup(G, H)
        key = (G.fingerprint, H.members)
        if key in self._induced:
            return self._induced[key]

        values = []
        for cls_ in G.conjugacy_classes:
            hits = sum(1 for x in cls_.members if H.contains(x))
            numerator = G.order * hits
            denominator = H.order * cls_.size
            if numerator % denominator:
                raise NotSubgroupError("induced character is not integral; subgroup data is inconsistent")
            values.append(numerator // denominator)

        character = ClassFunction(ambient=G, values=tuple(values))
        self._induced[key] = character
        return character

    def induced_character_oracle(self, G: FiniteGroup, H: Subgroup) -> ClassFunction:
        """Permutation character of G on G/H: cosets gH fixed by sigma."""
        _check_subgroup(G, H)
        cosets = {frozenset(G.mul(g, h) for h in H.members) for g in G.elements}
        values = []
        for cls_ in G.conjugacy_classes:
            sigma = cls_.representative
            fixed = sum(1 for coset in cosets if G.mul(sigma, min(coset)) in coset)
            values.append(fixed)
        return ClassFunction(ambient=G, values=tuple(values))

    def pm_partition(self, G: FiniteGroup, H: Subgroup) -> Dict[int, Fraction]:
        m_H = self.induced_character(G, H)
        partition = defaultdict(Fraction)
        for value, cls_ in zip(m_H.values, G.conjugacy_classes):
            partition[value] += Fraction(cls_.size, G.order)
        return dict(sorted(partition.items()))

    def class_set_density(self, S: ClassSet) -> Fraction:
        G = S.ambient
        return sum((Fraction(G.conjugacy_classes[c].size, G.order) for c in S.classes), Fraction(0))

    def pullback_density(self, S: ClassSet, H: Subgroup) -> Fraction:
        G = S.ambient
        m_H = self.induced_character(G, H)
        return sum(
            (Fraction(m_H.values[c] * G.conjugacy_classes[c].size, G.order) for c in S.classes),
            Fraction(0),
        )

    def basechange_density(self, Gbar: FiniteGroup, sigma: int, W: Subgroup) -> Fraction:
        _check_subgroup(Gbar, W)
        sigma = Gbar.check_element(sigma)
        cls_ = Gbar.conjugacy_classes[Gbar.class_index(sigma)]
        hits = sum(1 for x in cls_.members if W.contains(x))
        return Fraction(hits, W.order)


def _check_subgroup(G: FiniteGroup, H: Subgroup) -> None:
    if H.parent != G:
        raise NotSubgroupError(f"{H.label()} is not a subgroup of {G.describe()}")


# Global instances
density_calculator = DensityCalculator()


# Convenience functions
def induced_character(G: FiniteGroup, H: Subgroup) -> ClassFunction:
    return density_calculator.induced_character(G, H)


def induced_character_oracle(G: FiniteGroup, H: Subgroup) -> ClassFunction:
    return density_calculator.induced_character_oracle(G, H)


def pm_partition(G: FiniteGroup, H: Subgroup) -> Dict[int, Fraction]:
    return density_calculator.pm_partition(G, H)


def class_set_density(S: ClassSet) -> Fraction:
    return density_calculator.class_set_density(S)


def pullback_density(S: ClassSet, H: Subgroup) -> Fraction:
    return density_calculator.pullback_density(S, H)


def basechange_density(Gbar: FiniteGroup, sigma: int, W: Subgroup) -> Fraction:
    return density_calculator.basechange_density(Gbar, sigma, W)
