"""
Cohomology of finite groups with coefficients in finite modules.

H^1 is computed from the cocycle system of a generating set: Z^1 is the kernel
of a congruence system, B^1 is spanned by the coboundaries of a basis of A, and
the quotient is read off a Smith normal form. Subgroups of H^1 (H^1_*, Sha^1,
kernels of maps) are kernels of integer matrices on H^1 coordinates.
H^2 goes through the coinduced module: H^2(G, A) = H^1(G, Map(G, A) / A).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .lattice import LatticeQuotient, kernel_mod
from .modules import Cocycle, CocycleSystem, GModule, induced_module
from ..config.settings import settings
from ..density.densities import ClassSet
from ..errors import CapExceededError, InputError, ModuleError, NotSubgroupError, StableLabError
from ..groups.core import FiniteGroup, QuotientMap, Subgroup, subgroup_generated, subgroups
from ..storage.cache import CohomologyCache, cohomology_cache
from ..storage.schemas import AbelianGroupPayload, H1Payload

logger = logging.getLogger(__name__)

Classifier = Callable[[Cocycle], Optional[List[int]]]


def _diagonal(values: Sequence[int]) -> List[List[int]]:
    n = len(values)
    return [[values[i] if j == i else 0 for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class AbelianGroup:
    invariant_factors: Tuple[int, ...]
    generators: Tuple[Tuple[int, ...], ...] = ()

    @property
    def order(self) -> int:
        result = 1
        for d in self.invariant_factors:
            result *= d
        return result

    def to_payload(self) -> AbelianGroupPayload:
        return AbelianGroupPayload(
            factors=list(self.invariant_factors),
            order=self.order,
            generators=[list(g) for g in self.generators],
        )


class H1Result:
    """
    H^1(G, A), or a subgroup of it, with cocycle generators.

    `coordinates` places a cocycle in the product of Z/d_i (None when the
    class lies outside this subgroup); `is_coboundary` is the membership test.
    """

    def __init__(
        self,
        module: GModule,
        invariant_factors: Sequence[int],
        generators: Sequence[Cocycle],
        classify: Optional[Classifier] = None,
        coboundary: Optional[Callable[[Cocycle], bool]] = None,
    ):
        self.module = module
        self.invariant_factors = list(invariant_factors)
        self.generators = list(generators)
        self._classify = classify
        self._coboundary = coboundary

    @property
    def order(self) -> int:
        result = 1
        for d in self.invariant_factors:
            result *= d
        return result

    def _check(self, cocycle: Cocycle) -> None:
        if cocycle.module != self.module:
            raise InputError("cocycle takes values in a different module")

    def coordinates(self, cocycle: Cocycle) -> Optional[List[int]]:
        self._check(cocycle)
        if self._classify is None:
            raise StableLabError("this H1 result carries no coordinate map")
        return self._classify(cocycle)

    def contains(self, cocycle: Cocycle) -> bool:
        return self.coordinates(cocycle) is not None

    def is_coboundary(self, cocycle: Cocycle) -> bool:
        self._check(cocycle)
        if self._coboundary is not None:
            return self._coboundary(cocycle)
        coords = self._classify(cocycle)
        return coords is not None and not any(coords)

    def cocycle_of(self, coords: Sequence[int]) -> Cocycle:
        A = self.module
        result = Cocycle(module=A, values=tuple(A.zero() for _ in A.group.elements))
        for c, gen in zip(coords, self.generators):
            if c:
                result = result + gen.scaled(c)
        return result

    def to_payload(self) -> H1Payload:
        return H1Payload(
            factors=self.invariant_factors,
            order=self.order,
            generators=[[list(v) for v in g.values] for g in self.generators],
        )


@dataclass(frozen=True, eq=False)
class LocalFamily:
    ambient: FiniteGroup = field(repr=False)
    members: Tuple[Tuple[Subgroup, int], ...]

    @classmethod
    def of(cls, G: FiniteGroup, members: Sequence[Tuple[Subgroup, int]]) -> "LocalFamily":
        for H, mult in members:
            if H.parent != G:
                raise NotSubgroupError(f"local subgroup {H.label()} is not a subgroup of {G.describe()}")
            if mult < 1:
                raise InputError(f"multiplicity must be positive, got {mult}")
        return cls(ambient=G, members=tuple(members))

    @classmethod
    def from_classes(cls, G: FiniteGroup, T: ClassSet, multiplicity: int = 1) -> "LocalFamily":
        """Decomposition groups at unramified primes: <g> for every g in a class of T."""
        found = {}
        for g in T.elements:
            H = subgroup_generated(G, [g])
            found.setdefault(H.members, H)
        ordered = sorted(found.values(), key=lambda H: (H.order, H.members))
        return cls.of(G, [(H, multiplicity) for H in ordered])

    @classmethod
    def all_cyclic(cls, G: FiniteGroup) -> "LocalFamily":
        return cls.of(G, [(H, 1) for H in subgroups(G, "cyclic")])

    @property
    def subgroups(self) -> List[Subgroup]:
        return [H for H, _ in self.members]


@dataclass(frozen=True)
class ClassImage:
    target: H1Result
    cocycle: Cocycle
    coordinates: List[int]


class CohomologyEngine:

    def __init__(self, cache: Optional[CohomologyCache] = None):
        self.cache = cache or CohomologyCache()
        self._systems: Dict[str, CocycleSystem] = {}
        self._h1: Dict[str, H1Result] = {}
        self._restricted: Dict[Tuple[str, Tuple[int, ...]], GModule] = {}

    def system(self, A: GModule) -> CocycleSystem:
        if A.fingerprint not in self._systems:
            self._systems[A.fingerprint] = CocycleSystem(A)
        return self._systems[A.fingerprint]

    def restricted(self, A: GModule, H: Subgroup) -> GModule:
        key = (A.fingerprint, H.members)
        if key not in self._restricted:
            self._restricted[key] = A.restrict(H)
        return self._restricted[key]

    def h0(self, A: GModule) -> AbelianGroup:
        """A^G from the fixed-point congruences of a generating set."""
        system = self.system(A)
        constraints = []
        for s in system.gens:
            M = A.action[s]
            for i in range(A.dim):
                row = [M[i][j] - (1 if i == j else 0) for j in range(A.dim)]
                constraints.append((row, A.orders[i]))
        basis, pivots = kernel_mod(constraints, A.orders)
        fixed = LatticeQuotient(basis, pivots, _diagonal(A.orders))
        return AbelianGroup(
            invariant_factors=tuple(fixed.factors),
            generators=tuple(A.reduce(g) for g in fixed.generators),
        )

    def h1(self, A: GModule) -> H1Result:
        if A.fingerprint in self._h1:
            return self._h1[A.fingerprint]
        G = A.group
        if G.order * A.dim > settings.H1_CAP:
            raise CapExceededError(f"|G| * dim A = {G.order * A.dim} exceeds H1 cap {settings.H1_CAP}")

        system = self.system(A)
        key = f"h1-{A.fingerprint}"
        cached = self.cache.get(key)
        if cached is not None:
            presentation = LatticeQuotient.from_dict(cached)
        else:
            basis, pivots = kernel_mod(system.constraints, system.moduli)
            relations = [system.coboundary_variables(e) for e in _diagonal([1] * A.dim)]
            relations += _diagonal(system.moduli)
            presentation = LatticeQuotient(basis, pivots, relations)
            self.cache.put(key, presentation.to_dict())

        generators = [Cocycle(module=A, values=system.expand(v)) for v in presentation.generators]
        for gen in generators:
            if not gen.is_cocycle():
                raise StableLabError("H1 generator fails the cocycle identity")

        def classify(cocycle: Cocycle) -> Optional[List[int]]:
            variables = system.variables_of(cocycle.values)
            if system.expand(variables) != tuple(cocycle.values):
                raise InputError("function is not a 1-cocycle")
            return presentation.coordinates(variables)

        result = H1Result(A, presentation.factors, generators, classify)
        logger.debug("H1 of %s over %s: %s", A.name or "module", G.describe(), result.invariant_factors)
        self._h1[A.fingerprint] = result
        return result

    def coinduced_quotient(self, A: GModule) -> GModule:
        """Map(G, A)/A in coordinates psi(x), x != 1, with (g.psi)(x) = psi(xg) - x.psi(g)."""
        G = A.group
        k = A.dim
        points = [x for x in G.elements if x != G.identity]
        slot = {x: i for i, x in enumerate(points)}
        orders = tuple(o for _ in points for o in A.orders)
        dim = len(orders)

        action = []
        for g in G.elements:
            M = [[0] * dim for _ in range(dim)]
            for x in points:
                row0 = slot[x] * k
                xg = G.mul(x, g)
                if xg != G.identity:
                    for i in range(k):
                        M[row0 + i][slot[xg] * k + i] += 1
                if g != G.identity:
                    Mx = A.action[x]
                    for i in range(k):
                        for j in range(k):
                            M[row0 + i][slot[g] * k + j] -= Mx[i][j]
            action.append(tuple(tuple(v % orders[r] for v in row) for r, row in enumerate(M)))
        return GModule(group=G, orders=orders, action=tuple(action), name=f"{A.name}|coind/A")

    def _check_h2_caps(self, A: GModule) -> None:
        if A.group.order > settings.H2_MAX_GROUP:
            raise CapExceededError(f"H2 needs |G| <= {settings.H2_MAX_GROUP}, got {A.group.order}")
        if A.size > settings.H2_MAX_MODULE:
            raise CapExceededError(f"H2 needs |A| <= {settings.H2_MAX_MODULE}, got {A.size}")

    def h2(self, A: GModule) -> AbelianGroup:
        """H^2 by dimension shift, H^1(G, Map(G, A)/A), instead of solving bar-resolution 2-cocycles directly."""
        self._check_h2_caps(A)
        if A.group.order == 1:
            return AbelianGroup(invariant_factors=())
        shifted = self.h1(self.coinduced_quotient(A))
        for gen in shifted.generators:
            self._check_two_cocycle(A, self.two_cocycle(A, gen))
        return AbelianGroup(invariant_factors=tuple(shifted.invariant_factors))

    def two_cocycle(self, A: GModule, shifted: Cocycle) -> Dict[Tuple[int, int], Tuple[int, ...]]:
        """Connecting image of a class in H^1(G, Map(G, A)/A): c(g, h) = f(h)(g)."""
        G = A.group
        k = A.dim
        points = [x for x in G.elements if x != G.identity]
        slot = {x: i for i, x in enumerate(points)}
        c = {}
        for g in G.elements:
            for h in G.elements:
                if g == G.identity:
                    c[(g, h)] = A.zero()
                else:
                    values = shifted.values[h]
                    c[(g, h)] = A.reduce(values[slot[g] * k:(slot[g] + 1) * k])
        return c

    def _check_two_cocycle(self, A: GModule, c: Dict[Tuple[int, int], Tuple[int, ...]]) -> None:
        G = A.group
        for g in G.elements:
            for h in G.elements:
                gh = G.mul(g, h)
                for x in G.elements:
                    total = A.add(A.act(g, c[(h, x)]), c[(g, G.mul(h, x))])
                    total = A.add(total, A.reduce([-v for v in c[(gh, x)]]))
                    total = A.add(total, A.reduce([-v for v in c[(g, h)]]))
                    if any(total):
                        raise StableLabError("H2 representative fails the 2-cocycle identity")

    # Maps on cocycles

    def restrict_cocycle(self, cocycle: Cocycle, H: Subgroup) -> Cocycle:
        A = cocycle.module
        if H.parent != A.group:
            raise NotSubgroupError(f"{H.label()} is not a subgroup of the acting group")
        image = Cocycle(module=self.restricted(A, H), values=tuple(cocycle.values[h] for h in H.members))
        return _checked(image, "restriction")

    def inflate_cocycle(self, cocycle: Cocycle, A: GModule, q: QuotientMap) -> Cocycle:
        if cocycle.module != A.descend(q):
            raise ModuleError("cocycle does not live on the descended module")
        image = Cocycle(module=A, values=tuple(cocycle.values[q.projection[g]] for g in A.group.elements))
        return _checked(image, "inflation")

    def corestrict_cocycle(self, cocycle: Cocycle, A: GModule, H: Subgroup) -> Cocycle:
        """Transfer over the minimal right-coset representatives t_i: sum of t_i^-1 . f(h_i(g))."""
        if H.parent != A.group:
            raise NotSubgroupError(f"{H.label()} is not a subgroup of the acting group")
        if cocycle.module != self.restricted(A, H):
            raise ModuleError("cocycle does not live on the restricted module")
        G = A.group
        coset_of = {}
        reps = []
        for g in G.elements:
            if g in coset_of:
                continue
            coset = {G.mul(h, g) for h in H.members}
            idx = len(reps)
            reps.append(min(coset))
            for x in coset:
                coset_of[x] = idx

        local = H.local_index
        values = []
        for g in G.elements:
            total = A.zero()
            for t in reps:
                y = G.mul(t, g)
                h = G.mul(y, G.inv(reps[coset_of[y]]))
                total = A.add(total, A.act(G.inv(t), cocycle.values[local[h]]))
            values.append(total)
        return _checked(Cocycle(module=A, values=tuple(values)), "corestriction")

    def map_h1(
        self,
        kind: str,
        cocycle: Cocycle,
        subgroup: Optional[Subgroup] = None,
        quotient_map: Optional[QuotientMap] = None,
        module: Optional[GModule] = None,
    ) -> ClassImage:
        """Image of a class under res (to `subgroup`), inf (along `quotient_map`) or cores (from `subgroup`)."""
        if kind == "res":
            if subgroup is None:
                raise InputError("res needs a subgroup")
            image = self.restrict_cocycle(cocycle, subgroup)
        elif kind == "inf":
            if quotient_map is None or module is None:
                raise InputError("inf needs a quotient map and the module on the source group")
            image = self.inflate_cocycle(cocycle, module, quotient_map)
        elif kind == "cores":
            if subgroup is None or module is None:
                raise InputError("cores needs a subgroup and the module on the ambient group")
            image = self.corestrict_cocycle(cocycle, module, subgroup)
        else:
            raise InputError(f"unknown map kind: {kind}")
        target = self.h1(image.module)
        return ClassImage(target=target, cocycle=image, coordinates=target.coordinates(image))

    # Subgroups of H^1

    def subgroup_of(self, parent: H1Result, basis: List[List[int]], pivots: List[int]) -> H1Result:
        """Subgroup of `parent` given by a lattice of coordinate vectors containing diag(d)."""
        sub = LatticeQuotient(basis, pivots, _diagonal(parent.invariant_factors))
        generators = [parent.cocycle_of(v) for v in sub.generators]

        def classify(cocycle: Cocycle) -> Optional[List[int]]:
            coords = parent.coordinates(cocycle)
            return None if coords is None else sub.coordinates(coords)

        return H1Result(parent.module, sub.factors, generators, classify)

    def kernel_of(self, source: H1Result, images: Sequence[Sequence[int]], target_factors: Sequence[int]) -> H1Result:
        """Kernel of the map sending generator i of `source` to images[i] in the product of Z/e_j."""
        constraints = [
            ([int(images[i][j]) for i in range(len(images))], int(e))
            for j, e in enumerate(target_factors)
        ]
        basis, pivots = kernel_mod(constraints, source.invariant_factors)
        return self.subgroup_of(source, basis, pivots)

    def restriction_images(self, A: GModule, H: Subgroup) -> Tuple[List[List[int]], List[int]]:
        source = self.h1(A)
        target = self.h1(self.restricted(A, H))
        images = [target.coordinates(self.restrict_cocycle(gen, H)) for gen in source.generators]
        return images, target.invariant_factors

    def sha1(self, A: GModule, T: LocalFamily) -> H1Result:
        """Classes restricting to zero on every member of T."""
        if T.ambient != A.group:
            raise InputError("local family lives in a different group")
        source = self.h1(A)
        images: List[List[int]] = [[] for _ in source.generators]
        factors: List[int] = []
        for H in {H.members: H for H in T.subgroups}.values():
            sub_images, sub_factors = self.restriction_images(A, H)
            for row, extra in zip(images, sub_images):
                row.extend(extra)
            factors.extend(sub_factors)
        return self.kernel_of(source, images, factors)

    def h1_star(self, A: GModule) -> H1Result:
        return self.sha1(A, LocalFamily.all_cyclic(A.group))

    def coker1(self, A: GModule, T: LocalFamily) -> AbelianGroup:
        """Cokernel of H^1(G, A) -> product of H^1(H, A) over T, with multiplicity."""
        if T.ambient != A.group:
            raise InputError("local family lives in a different group")
        source = self.h1(A)
        images: List[List[int]] = [[] for _ in source.generators]
        factors: List[int] = []
        for H, mult in T.members:
            sub_images, sub_factors = self.restriction_images(A, H)
            for _ in range(mult):
                for row, extra in zip(images, sub_images):
                    row.extend(extra)
                factors.extend(sub_factors)
        m = len(factors)
        if m == 0:
            return AbelianGroup(invariant_factors=())
        identity = _diagonal([1] * m)
        quotient = LatticeQuotient(identity, list(range(m)), images + _diagonal(factors))
        generators = tuple(tuple(v % e for v, e in zip(g, factors)) for g in quotient.generators)
        return AbelianGroup(invariant_factors=tuple(quotient.factors), generators=generators)

    def span_order(self, parent: H1Result, cocycles: Sequence[Cocycle]) -> int:
        """Order of the subgroup of `parent` generated by the given classes."""
        d = parent.invariant_factors
        if not d:
            return 1
        vectors = [_require(parent.coordinates(c)) for c in cocycles]
        quotient = LatticeQuotient(_diagonal([1] * len(d)), list(range(len(d))), vectors + _diagonal(d))
        return parent.order // quotient.order

    def in_span(self, parent: H1Result, cocycles: Sequence[Cocycle], x: Cocycle) -> bool:
        """Whether the class of x lies in the subgroup generated by `cocycles`."""
        d = parent.invariant_factors
        target = _require(parent.coordinates(x))
        if not d:
            return True
        vectors = [_require(parent.coordinates(c)) for c in cocycles]
        quotient = LatticeQuotient(_diagonal([1] * len(d)), list(range(len(d))), vectors + _diagonal(d))
        coords = quotient.coordinates(target)
        return coords is not None and not any(coords)

    def induced_vanishing(self, G: FiniteGroup, p: int, copies: int = 1, with_h2: bool = True) -> Dict[str, Optional[int]]:
        """Orders of H^1 and (capped) H^2 of F_p[G]^copies; both vanish."""
        A = induced_module(G, p, copies)
        result = {"h1": self.h1(A).order, "h2": None}
        if with_h2:
            try:
                result["h2"] = self.h2(A).order
            except CapExceededError as e:
                logger.info("skipping H2 of %s: %s", A.name, e)
        return result


def _checked(cocycle: Cocycle, what: str) -> Cocycle:
    if not cocycle.is_cocycle():
        raise StableLabError(f"{what} produced a function that is not a cocycle")
    return cocycle


def _require(coords: Optional[List[int]]) -> List[int]:
    if coords is None:
        raise StableLabError("class lies outside the expected subgroup")
    return coords


# Global instances
cohomology_engine = CohomologyEngine(cohomology_cache)


# Convenience functions
def h0(A: GModule) -> AbelianGroup:
    return cohomology_engine.h0(A)


def h1(A: GModule) -> H1Result:
    return cohomology_engine.h1(A)


def h2(A: GModule) -> AbelianGroup:
    return cohomology_engine.h2(A)


def map_h1(kind: str, cocycle: Cocycle, **kwargs) -> ClassImage:
    return cohomology_engine.map_h1(kind, cocycle, **kwargs)


def restrict_cocycle(cocycle: Cocycle, H: Subgroup) -> Cocycle:
    return cohomology_engine.restrict_cocycle(cocycle, H)


def inflate_cocycle(cocycle: Cocycle, A: GModule, q: QuotientMap) -> Cocycle:
    return cohomology_engine.inflate_cocycle(cocycle, A, q)


def corestrict_cocycle(cocycle: Cocycle, A: GModule, H: Subgroup) -> Cocycle:
    return cohomology_engine.corestrict_cocycle(cocycle, A, H)


def h1_star(A: GModule) -> H1Result:
    return cohomology_engine.h1_star(A)


def sha1(A: GModule, T: LocalFamily) -> H1Result:
    return cohomology_engine.sha1(A, T)


def coker1(A: GModule, T: LocalFamily) -> AbelianGroup:
    return cohomology_engine.coker1(A, T)


def kernel_of(source: H1Result, images: Sequence[Sequence[int]], target_factors: Sequence[int]) -> H1Result:
    return cohomology_engine.kernel_of(source, images, target_factors)


def span_order(parent: H1Result, cocycles: Sequence[Cocycle]) -> int:
    return cohomology_engine.span_order(parent, cocycles)


def in_span(parent: H1Result, cocycles: Sequence[Cocycle], x: Cocycle) -> bool:
    return cohomology_engine.in_span(parent, cocycles, x)


def induced_vanishing(G: FiniteGroup, p: int, copies: int = 1, with_h2: bool = True) -> Dict[str, Optional[int]]:
    return cohomology_engine.induced_vanishing(G, p, copies, with_h2)


def restrict_module(A: GModule, H: Subgroup) -> GModule:
    return cohomology_engine.restricted(A, H)


def descend_module(A: GModule, q: QuotientMap) -> GModule:
    return A.descend(q)
