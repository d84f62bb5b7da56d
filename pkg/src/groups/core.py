"""
Finite groups as dense multiplication tables.

Elements are integer indices 0..order-1; labels are reporting metadata only.
Every derived structure (classes, subgroups, cosets) is listed in a
deterministic order so reports and instance hashes are reproducible.
"""

import hashlib
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import settings
from ..errors import CapExceededError, InvalidGroupError, NotNormalError, NotSubgroupError

logger = logging.getLogger(__name__)

MAX_TABLE_ORDER = 1024


@dataclass(frozen=True)
class ConjClass:
    representative: int
    members: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: Tuple[Tuple[int, ...], ...]
    identity: int
    inverses: Tuple[int, ...]
    labels: Tuple[str, ...]
    name: str = ""

    @classmethod
    def from_table(
        cls,
        rows: Sequence[Sequence[int]],
        labels: Optional[Sequence[str]] = None,
        name: str = "",
    ) -> "FiniteGroup":
        """Validate a Cayley table and build the group."""
        try:
            T = np.asarray(rows, dtype=np.int64)
        except (TypeError, ValueError) as e:
            raise InvalidGroupError(f"Cayley table is not a rectangular integer array: {e}")

        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
            raise InvalidGroupError(f"Cayley table must be square and non-empty, got shape {T.shape}")
        n = T.shape[0]
        if n > MAX_TABLE_ORDER:
            raise CapExceededError(f"group order {n} exceeds table cap {MAX_TABLE_ORDER}")
        if T.min() < 0 or T.max() >= n:
            raise InvalidGroupError("Cayley table entries must lie in 0..order-1")

        expected = np.arange(n)
        if not np.all(np.sort(T, axis=1) == expected):
            raise InvalidGroupError("Cayley table rows are not permutations")
        if not np.all(np.sort(T, axis=0) == expected[:, None]):
            raise InvalidGroupError("Cayley table columns are not permutations")

        identities = [
            e for e in range(n)
            if np.array_equal(T[e], expected) and np.array_equal(T[:, e], expected)
        ]
        if not identities:
            raise InvalidGroupError("Cayley table has no identity element")
        e = identities[0]

        # (ab)c == a(bc), one row of a at a time
        for a in range(n):
            left = T[T[a]]
            right = T[a][T]
            if not np.array_equal(left, right):
                b, c = np.argwhere(left != right)[0]
                raise InvalidGroupError(f"Cayley table is not associative at ({a}, {b}, {c})")

        inverses = tuple(int(x) for x in np.argmax(T == e, axis=1))
        if labels is None:
            labels = [str(i) for i in range(n)]
        if len(labels) != n:
            raise InvalidGroupError(f"expected {n} labels, got {len(labels)}")

        return cls(
            table=tuple(tuple(int(x) for x in row) for row in T),
            identity=int(e),
            inverses=inverses,
            labels=tuple(str(label) for label in labels),
            name=name,
        )

    # Identity and hashing go through the table fingerprint
    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteGroup) and self.fingerprint == other.fingerprint

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    @cached_property
    def fingerprint(self) -> str:
        data = np.asarray(self.table, dtype=np.int64).tobytes()
        return hashlib.sha256(data + str(self.identity).encode()).hexdigest()

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def elements(self) -> range:
        return range(self.order)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conj(self, g: int, x: int) -> int:
        """g x g^-1"""
        return self.table[self.table[g][x]][self.inverses[g]]

    def power(self, x: int, k: int) -> int:
        result = self.identity
        base = x if k >= 0 else self.inverses[x]
        for _ in range(abs(k)):
            result = self.table[result][base]
        return result

    @cached_property
    def element_orders(self) -> Tuple[int, ...]:
        orders = []
        for x in self.elements:
            k, y = 1, x
            while y != self.identity:
                y = self.table[y][x]
                k += 1
            orders.append(k)
        return tuple(orders)

    def element_order(self, x: int) -> int:
        return self.element_orders[x]

    @cached_property
    def is_abelian(self) -> bool:
        T = np.asarray(self.table)
        return bool(np.array_equal(T, T.T))

    @cached_property
    def conjugacy_classes(self) -> Tuple[ConjClass, ...]:
        return _conjugation_orbits(self, self.elements, self.elements)

    @cached_property
    def class_lookup(self) -> Tuple[int, ...]:
        lookup = [0] * self.order
        for i, cls in enumerate(self.conjugacy_classes):
            for x in cls.members:
                lookup[x] = i
        return tuple(lookup)

    def class_index(self, x: int) -> int:
        return self.class_lookup[x]

    def check_element(self, x: int) -> int:
        if not isinstance(x, (int, np.integer)) or not 0 <= int(x) < self.order:
            raise NotSubgroupError(f"{x!r} is not an element index of a group of order {self.order}")
        return int(x)

    def describe(self) -> str:
        return self.name or f"group of order {self.order}"


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup = field(repr=False)
    members: Tuple[int, ...]

    @classmethod
    def from_members(cls, parent: FiniteGroup, members: Iterable[int]) -> "Subgroup":
        """Build a subgroup from an explicit member list, checking closure."""
        members = tuple(sorted(set(parent.check_element(x) for x in members)))
        member_set = set(members)
        if parent.identity not in member_set:
            raise NotSubgroupError("subset does not contain the identity")
        for a in members:
            if parent.inv(a) not in member_set:
                raise NotSubgroupError(f"subset is not closed under inverses at {a}")
            for b in members:
                if parent.mul(a, b) not in member_set:
                    raise NotSubgroupError(f"subset is not closed under multiplication at ({a}, {b})")
        return cls(parent=parent, members=members)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subgroup)
            and self.members == other.members
            and self.parent == other.parent
        )

    def __hash__(self) -> int:
        return hash((self.parent.fingerprint, self.members))

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    @cached_property
    def member_set(self) -> frozenset:
        return frozenset(self.members)

    def contains(self, x: int) -> bool:
        return x in self.member_set

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        return self.member_set <= other.member_set

    @cached_property
    def is_normal(self) -> bool:
        G = self.parent
        return all(G.conj(g, n) in self.member_set for g in G.elements for n in self.members)

    @cached_property
    def classes(self) -> Tuple[ConjClass, ...]:
        """Conjugacy classes of the subgroup itself, in parent indices."""
        return _conjugation_orbits(self.parent, self.members, self.members)

    @cached_property
    def local_index(self) -> Dict[int, int]:
        return {x: i for i, x in enumerate(self.members)}

    @cached_property
    def as_group(self) -> FiniteGroup:
        """The subgroup as a standalone group; local index i is members[i]."""
        G = self.parent
        pos = self.local_index
        table = [[pos[G.mul(a, b)] for b in self.members] for a in self.members]
        identity = pos[G.identity]
        return FiniteGroup(
            table=tuple(tuple(row) for row in table),
            identity=identity,
            inverses=tuple(pos[G.inv(a)] for a in self.members),
            labels=tuple(G.labels[a] for a in self.members),
            name=f"subgroup of order {self.order} in {G.describe()}",
        )

    def label(self) -> str:
        return "{" + ", ".join(self.parent.labels[x] for x in self.members) + "}"


@dataclass(frozen=True, eq=False)
class QuotientMap:
    source: FiniteGroup
    kernel: Subgroup
    target: FiniteGroup
    projection: Tuple[int, ...]

    @cached_property
    def coset_representatives(self) -> Tuple[int, ...]:
        reps = [None] * self.target.order
        for g in self.source.elements:
            c = self.projection[g]
            if reps[c] is None:
                reps[c] = g
        return tuple(reps)

    def image(self, H: Subgroup) -> Subgroup:
        return Subgroup(parent=self.target, members=tuple(sorted({self.projection[h] for h in H.members})))

    def preimage(self, Hbar: Subgroup) -> Subgroup:
        if Hbar.parent != self.target:
            raise NotSubgroupError("subgroup does not live in the quotient group")
        members = tuple(g for g in self.source.elements if self.projection[g] in Hbar.member_set)
        return Subgroup(parent=self.source, members=members)


def _conjugation_orbits(
    G: FiniteGroup, elements: Iterable[int], conjugators: Iterable[int]
) -> Tuple[ConjClass, ...]:
    conjugators = list(conjugators)
    seen = set()
    classes = []
    for x in sorted(elements):
        if x in seen:
            continue
        orbit = sorted({G.conj(g, x) for g in conjugators})
        seen.update(orbit)
        classes.append(ConjClass(representative=orbit[0], members=tuple(orbit)))
    return tuple(classes)


def _closure(G: FiniteGroup, gens: Sequence[int]) -> Tuple[int, ...]:
    gens = sorted(set(gens) - {G.identity})
    found = {G.identity}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = G.mul(x, s)
            if y not in found:
                found.add(y)
                queue.append(y)
    return tuple(sorted(found))


class SubgroupEnumerator:

    def __init__(self, cap: Optional[int] = None):
        self.cap = cap
        self._all: Dict[str, List[Subgroup]] = {}

    def generated(self, G: FiniteGroup, elems: Iterable[int]) -> Subgroup:
        elems = [G.check_element(x) for x in elems]
        return Subgroup(parent=G, members=_closure(G, elems))

    def cyclic(self, G: FiniteGroup, p: Optional[int] = None) -> List[Subgroup]:
        found = {}
        for g in G.elements:
            if p is not None and not _is_power_of(G.element_order(g), p):
                continue
            members = _closure(G, [g])
            found.setdefault(members, Subgroup(parent=G, members=members))
        return _sorted_subgroups(found.values())

    def all(self, G: FiniteGroup) -> List[Subgroup]:
        cap = self.cap or settings.SUBGROUP_CAP
        if G.order > cap:
            raise CapExceededError(f"subgroup enumeration capped at order {cap}, group has order {G.order}")
        if G.fingerprint in self._all:
            return list(self._all[G.fingerprint])

        # Every subgroup is a join of cyclic subgroups
        cyclic_gens = {}
        for g in G.elements:
            cyclic_gens.setdefault(_closure(G, [g]), g)

        found: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
        queue = deque()
        for members, g in cyclic_gens.items():
            if members not in found:
                found[members] = (g,)
                queue.append(members)

        while queue:
            members = queue.popleft()
            gens = found[members]
            member_set = set(members)
            for g in cyclic_gens.values():
                if g in member_set:
                    continue
                joined = _closure(G, gens + (g,))
                if joined not in found:
                    found[joined] = gens + (g,)
                    queue.append(joined)

        logger.debug("enumerated %d subgroups of %s", len(found), G.describe())
        result = _sorted_subgroups(Subgroup(parent=G, members=m) for m in found)
        self._all[G.fingerprint] = result
        return list(result)

    def enumerate(self, G: FiniteGroup, kind: str = "all", p: Optional[int] = None) -> List[Subgroup]:
        if kind == "all":
            return self.all(G)
        if kind == "cyclic":
            return self.cyclic(G)
        if kind == "cyclic-p":
            if p is None or p < 2:
                raise NotSubgroupError("filter cyclic-p needs a prime p")
            return self.cyclic(G, p)
        raise NotSubgroupError(f"unknown subgroup filter: {kind}")


def _is_power_of(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _sorted_subgroups(subgroups: Iterable[Subgroup]) -> List[Subgroup]:
    return sorted(subgroups, key=lambda H: (H.order, H.members))


# Global instances
subgroup_enumerator = SubgroupEnumerator()


# Convenience functions
def conjugacy_classes(G: FiniteGroup) -> List[ConjClass]:
    return list(G.conjugacy_classes)


def subgroups(G: FiniteGroup, filter: str = "all", p: Optional[int] = None, cap: Optional[int] = None) -> List[Subgroup]:
    if cap is not None:
        return SubgroupEnumerator(cap).enumerate(G, filter, p)
    return subgroup_enumerator.enumerate(G, filter, p)


def subgroup_generated(G: FiniteGroup, elems: Iterable[int]) -> Subgroup:
    return subgroup_enumerator.generated(G, elems)


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(parent=G, members=(G.identity,))


def full_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(parent=G, members=tuple(G.elements))


def quotient(G: FiniteGroup, N: Subgroup) -> QuotientMap:
    if N.parent != G:
        raise NotSubgroupError("kernel is not a subgroup of the source group")
    if not N.is_normal:
        raise NotNormalError(f"{N.label()} is not normal in {G.describe()}")

    # Cosets gN labelled by their minimal element
    coset_of = {}
    reps = []
    for g in G.elements:
        if g in coset_of:
            continue
        coset = {G.mul(g, n) for n in N.members}
        idx = len(reps)
        reps.append(min(coset))
        for x in coset:
            coset_of[x] = idx
    projection = tuple(coset_of[g] for g in G.elements)
    table = [[coset_of[G.mul(a, b)] for b in reps] for a in reps]
    target = FiniteGroup.from_table(
        table,
        labels=[G.labels[r] + "N" if N.order > 1 else G.labels[r] for r in reps],
        name=f"{G.describe()} / order-{N.order} subgroup",
    )

    # Surjective homomorphism, checked on all pairs
    P = np.asarray(projection)
    T = np.asarray(G.table)
    Tbar = np.asarray(target.table)
    if not np.array_equal(P[T], Tbar[P][:, P]):
        raise NotNormalError("coset projection is not a homomorphism")
    return QuotientMap(source=G, kernel=N, target=target, projection=projection)


def normal_classes(G: FiniteGroup, N: Subgroup) -> Tuple[ConjClass, ...]:
    if not N.is_normal:
        raise NotNormalError(f"{N.label()} is not normal in {G.describe()}")
    return N.classes


def outer_class_action(G: FiniteGroup, N: Subgroup, g: int) -> Tuple[int, ...]:
    """Permutation of the N-classes of N induced by conjugation with g."""
    classes = normal_classes(G, N)
    g = G.check_element(g)
    lookup = {x: i for i, cls in enumerate(classes) for x in cls.members}
    return tuple(lookup[G.conj(g, cls.representative)] for cls in classes)


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    m = H.order
    table = [
        [G.mul(a // m, b // m) * m + H.mul(a % m, b % m) for b in range(G.order * m)]
        for a in range(G.order * m)
    ]
    labels = [f"({G.labels[a // m]},{H.labels[a % m]})" for a in range(G.order * m)]
    name = f"{G.describe()} x {H.describe()}"
    return FiniteGroup.from_table(table, labels=labels, name=name)
