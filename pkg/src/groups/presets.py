import logging
import re
from functools import lru_cache
from math import gcd
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError
from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.named_groups import AlternatingGroup, SymmetricGroup

from .core import FiniteGroup, direct_product
from ..errors import InputError, InvalidGroupError, UnknownPresetError
from ..storage.schemas import GroupSpec

logger = logging.getLogger(__name__)

_PRODUCT_SPLIT = re.compile(r"\s+x\s+|\s*×\s*")
_CYCLIC = re.compile(r"^Z/(\d+)$")
_UNITS = re.compile(r"^\(Z/(\d+)\)\*$")
_NAMED = re.compile(r"^([SAD])(\d+)$")

# Quaternion units 1, i, j, k as 0..3; product is (sign, unit)
_QUATERNION_UNITS = {
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}


class GroupFactory:

    MAX_SYMMETRIC_DEGREE = 5

    def cyclic(self, n: int) -> FiniteGroup:
        if n < 1:
            raise UnknownPresetError(f"Z/{n}: order must be positive")
        table = [[(a + b) % n for b in range(n)] for a in range(n)]
        return FiniteGroup.from_table(table, labels=[str(a) for a in range(n)], name=f"Z/{n}")

    def units(self, n: int) -> FiniteGroup:
        if n < 2:
            raise UnknownPresetError(f"(Z/{n})*: modulus must be at least 2")
        residues = [r for r in range(1, n) if gcd(r, n) == 1] if n > 2 else [1]
        pos = {r: i for i, r in enumerate(residues)}
        table = [[pos[(a * b) % n] for b in residues] for a in residues]
        return FiniteGroup.from_table(table, labels=[str(r) for r in residues], name=f"(Z/{n})*")

    def dihedral(self, n: int) -> FiniteGroup:
        """Symmetries of a regular n-gon, order 2n; element r^k s^e has index k + n*e."""
        if n < 1:
            raise UnknownPresetError(f"D{n}: n must be positive")

        def mul(a: int, b: int) -> int:
            k, e = a % n, a // n
            l, f = b % n, b // n
            rot = (k + (l if e == 0 else -l)) % n
            return rot + n * ((e + f) % 2)

        order = 2 * n
        table = [[mul(a, b) for b in range(order)] for a in range(order)]
        labels = [f"r{a % n}" if a < n else f"r{a % n}s" for a in range(order)]
        return FiniteGroup.from_table(table, labels=labels, name=f"D{n}")

    def quaternion(self) -> FiniteGroup:
        names = ["1", "i", "j", "k"]

        def mul(a: int, b: int) -> int:
            sign, unit = _QUATERNION_UNITS[(a // 2, b // 2)]
            if (a % 2) != (b % 2):
                sign = -sign
            return 2 * unit + (0 if sign > 0 else 1)

        table = [[mul(a, b) for b in range(8)] for a in range(8)]
        labels = [("-" if a % 2 else "") + names[a // 2] for a in range(8)]
        return FiniteGroup.from_table(table, labels=labels, name="Q8")

    def from_permutations(self, degree: int, gens: Sequence[Sequence[int]], name: str = "") -> FiniteGroup:
        perms = []
        for g in gens:
            if sorted(g) != list(range(degree)):
                raise InvalidGroupError(f"generator {list(g)} is not a permutation of 0..{degree - 1}")
            perms.append(Permutation(list(g)))
        if not perms:
            perms = [Permutation(list(range(degree)))]
        return self._from_permutation_group(PermutationGroup(perms), name)

    def _from_permutation_group(self, group: PermutationGroup, name: str) -> FiniteGroup:
        elements = sorted(group.generate(), key=lambda p: p.array_form)
        pos = {tuple(p.array_form): i for i, p in enumerate(elements)}
        table = [[pos[tuple((a * b).array_form)] for b in elements] for a in elements]
        labels = [str(p.cyclic_form) if p.cyclic_form else "e" for p in elements]
        return FiniteGroup.from_table(table, labels=labels, name=name)

    def named(self, family: str, n: int) -> FiniteGroup:
        if family == "D":
            return self.dihedral(n)
        if not 1 <= n <= self.MAX_SYMMETRIC_DEGREE:
            raise UnknownPresetError(f"{family}{n}: degree must be between 1 and {self.MAX_SYMMETRIC_DEGREE}")
        if n == 1:
            return self.cyclic(1)
        group = SymmetricGroup(n) if family == "S" else AlternatingGroup(n)
        return self._from_permutation_group(group, f"{family}{n}")

    def preset(self, name: str) -> FiniteGroup:
        name = name.strip()
        factors = [part.strip() for part in _PRODUCT_SPLIT.split(name) if part.strip()]
        if len(factors) > 1:
            group = self.preset(factors[0])
            for factor in factors[1:]:
                group = direct_product(group, self.preset(factor))
            return FiniteGroup(
                table=group.table, identity=group.identity, inverses=group.inverses,
                labels=group.labels, name=" x ".join(factors),
            )

        if name == "Q8":
            return self.quaternion()
        match = _CYCLIC.match(name)
        if match:
            return self.cyclic(int(match.group(1)))
        match = _UNITS.match(name)
        if match:
            return self.units(int(match.group(1)))
        match = _NAMED.match(name)
        if match:
            return self.named(match.group(1), int(match.group(2)))
        raise UnknownPresetError(f"unknown group preset: {name!r}")


# Global instances
group_factory = GroupFactory()


@lru_cache(maxsize=256)
def _cached_preset(name: str) -> FiniteGroup:
    return group_factory.preset(name)


# Convenience functions
def build_group(spec: Union[str, GroupSpec, Dict[str, Any]]) -> FiniteGroup:
    """Build a validated group from a preset name, a GroupSpec or its JSON dict."""
    if isinstance(spec, str):
        return _cached_preset(spec.strip())
    if isinstance(spec, dict):
        try:
            spec = GroupSpec(**spec)
        except ValidationError as e:
            raise InputError(f"malformed group spec: {e}")

    if spec.preset is not None:
        return _cached_preset(spec.preset.strip())
    if spec.cayley is not None:
        return FiniteGroup.from_table(spec.cayley, labels=spec.labels, name="cayley")
    return group_factory.from_permutations(spec.perm.degree, spec.perm.gens, name="perm")


def unit_modulus(G: FiniteGroup) -> Optional[int]:
    """n when G is the preset (Z/n)*, else None."""
    match = _UNITS.match(G.name)
    return int(match.group(1)) if match else None


def preset_names(max_order: int = 24) -> List[str]:
    """Catalog presets up to the given order, in a fixed order."""
    names = [f"Z/{n}" for n in range(2, 25)]
    names += [f"(Z/{n})*" for n in (5, 7, 8, 9, 12, 15, 16, 20, 21, 24)]
    names += ["S3", "D4", "Q8", "D5", "D6", "A4", "S4", "D8", "D12"]
    names += [
        "Z/2 x Z/2", "Z/2 x Z/4", "Z/2 x Z/2 x Z/2", "Z/3 x Z/3", "Z/2 x S3",
        "Z/4 x Z/4", "Z/2 x D4", "Z/2 x Q8", "Z/2 x Z/8", "Z/3 x S3", "Z/2 x A4",
    ]
    return [name for name in names if build_group(name).order <= max_order]
