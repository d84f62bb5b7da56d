import logging
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime

from .sieve import PrimeSieve, prime_sieve
from ..density.densities import ClassSet, class_set_density, induced_character, pm_partition, pullback_density
from ..errors import InputError, RamifiedPrimeError
from ..groups.core import FiniteGroup, Subgroup, subgroup_generated
from ..groups.presets import build_group
from ..storage.schemas import ComparisonReport, EmpiricalEstimate, RationalPayload

logger = logging.getLogger(__name__)

MIN_BOUND = 1000


@dataclass(frozen=True)
class CyclotomicContext:
    """Gal(Q(mu_n)/Q) as the unit group mod n; element i carries residue residues[i]."""
    modulus: int
    unit_group: FiniteGroup = field(repr=False)
    residues: Tuple[int, ...]

    @classmethod
    def of(cls, n: int) -> "CyclotomicContext":
        if n < 3:
            raise InputError(f"cyclotomic modulus must be at least 3, got {n}")
        G = build_group(f"(Z/{n})*")
        return cls(modulus=n, unit_group=G, residues=tuple(int(label) for label in G.labels))

    @cached_property
    def positions(self) -> Dict[int, int]:
        return {r: i for i, r in enumerate(self.residues)}

    def element_of(self, residue: int) -> int:
        r = residue % self.modulus
        if r not in self.positions:
            raise InputError(f"{residue} is not a unit mod {self.modulus}")
        return self.positions[r]

    def elements_of(self, residues: Iterable[int]) -> List[int]:
        return sorted({self.element_of(r) for r in residues})

    def subgroup(self, residues: Iterable[int]) -> Subgroup:
        """Subgroup generated by the residues; an empty list gives the trivial subgroup."""
        return subgroup_generated(self.unit_group, self.elements_of(residues))

    def class_set(self, residues: Iterable[int], label: str = "") -> ClassSet:
        elems = self.elements_of(residues)
        if not elems:
            raise InputError("target residue set is empty")
        return ClassSet.from_elements(self.unit_group, elems, label)

    def residues_of(self, elems: Iterable[int]) -> List[int]:
        return sorted(self.residues[x] for x in elems)


class CyclotomicLab:

    def __init__(self, sieve: Optional[PrimeSieve] = None):
        self.sieve = sieve or prime_sieve

    def frobenius_cyclotomic(self, n: int, p: int) -> int:
        """Frobenius at p in Gal(Q(mu_n)/Q) is the residue p mod n."""
        if not isprime(p):
            raise InputError(f"{p} is not prime")
        if n % p == 0:
            raise RamifiedPrimeError(f"{p} divides {n}, so it ramifies in Q(mu_{n})")
        return p % n

    def unit_counts(self, ctx: CyclotomicContext, X: int) -> np.ndarray:
        """Prime counts indexed like the unit group; primes dividing n are dropped."""
        if X < MIN_BOUND:
            raise InputError(f"sieve bound must be at least {MIN_BOUND}, got {X}")
        counts = self.sieve.residue_counts(ctx.modulus, X)
        return np.array([counts[r] for r in ctx.residues], dtype=np.int64)

    def empirical_density(
        self,
        n: int,
        target: Iterable[int],
        X: int,
        weighting: str = "uniform",
        subgroup: Optional[Sequence[int]] = None,
    ) -> EmpiricalEstimate:
        ctx = CyclotomicContext.of(n)
        S = ctx.class_set(target, label="target")
        if weighting not in ("uniform", "induced"):
            raise InputError(f"weighting must be uniform or induced, got {weighting!r}")
        if weighting == "uniform" and subgroup is not None:
            raise InputError("a subgroup only makes sense with induced weighting")

        counts = self.unit_counts(ctx, X)
        total = int(counts.sum())
        if total == 0:
            raise InputError(f"no unramified primes up to {X} for modulus {n}")

        if weighting == "induced":
            U = ctx.subgroup(subgroup or [])
            m_U = induced_character(ctx.unit_group, U)
            weights = np.array([m_U.at(x) for x in ctx.unit_group.elements], dtype=np.int64)
            theoretical = pullback_density(S, U)
            subgroup_residues = ctx.residues_of(U.members)
        else:
            weights = np.ones(len(ctx.residues), dtype=np.int64)
            theoretical = class_set_density(S)
            subgroup_residues = None

        hits = np.zeros(len(ctx.residues), dtype=bool)
        hits[list(S.elements)] = True
        weighted = int((counts * weights)[hits].sum())
        estimate = weighted / total

        logger.info("modulus %d, X = %d: %d primes, estimate %.6f vs %s", n, X, total, estimate, theoretical)
        return EmpiricalEstimate(
            modulus=n,
            bound=X,
            weighting=weighting,
            target=ctx.residues_of(S.elements),
            subgroup=subgroup_residues,
            counts={str(r): int(c) for r, c in zip(ctx.residues, counts)},
            total=total,
            frequencies={str(r): int(c) / total for r, c in zip(ctx.residues, counts)},
            estimate=estimate,
            theoretical=RationalPayload.from_fraction(theoretical),
            abs_error=abs(estimate - float(theoretical)),
        )

    def pm_frequencies(self, n: int, subgroup: Sequence[int], X: int) -> Dict[int, float]:
        """Share of unramified primes with exactly m degree-one factors in the field fixed by U."""
        ctx = CyclotomicContext.of(n)
        U = ctx.subgroup(subgroup)
        m_U = induced_character(ctx.unit_group, U)
        counts = self.unit_counts(ctx, X)
        total = int(counts.sum())

        buckets: Dict[int, int] = defaultdict(int)
        for x, c in zip(ctx.unit_group.elements, counts):
            buckets[m_U.at(x)] += int(c)
        return {m: buckets[m] / total for m in sorted(buckets)}

    def relative_density(self, n: int, target: Iterable[int], within: Iterable[int], X: int) -> float:
        """Share of primes in `target` among primes in `within`, both sets of units mod n."""
        ctx = CyclotomicContext.of(n)
        target_elems = set(ctx.elements_of(target))
        within_elems = set(ctx.elements_of(within))
        if not within_elems:
            raise InputError("the conditioning residue set is empty")
        if not target_elems <= within_elems:
            raise InputError("target residues must lie inside the conditioning set")

        counts = self.unit_counts(ctx, X)
        inside = int(sum(counts[x] for x in within_elems))
        if inside == 0:
            raise InputError(f"no primes up to {X} in the conditioning set")
        return int(sum(counts[x] for x in target_elems)) / inside

    def compare_theoretical(
        self, n: int, subgroup: Sequence[int], classes: Iterable[int], X: int
    ) -> ComparisonReport:
        ctx = CyclotomicContext.of(n)
        U = ctx.subgroup(subgroup)
        S = ctx.class_set(classes)
        estimate = self.empirical_density(n, ctx.residues_of(S.elements), X, "induced", ctx.residues_of(U.members))
        exact = pullback_density(S, U)
        return ComparisonReport(
            modulus=n,
            bound=X,
            subgroup=ctx.residues_of(U.members),
            classes=ctx.residues_of(S.elements),
            exact=RationalPayload.from_fraction(exact),
            empirical=estimate.estimate,
            abs_error=abs(estimate.estimate - float(exact)),
            pm_exact={str(m): RationalPayload.from_fraction(v) for m, v in pm_partition(ctx.unit_group, U).items()},
            pm_empirical={str(m): v for m, v in self.pm_frequencies(n, ctx.residues_of(U.members), X).items()},
        )


# Global instances
cyclotomic_lab = CyclotomicLab()


# Convenience functions
def frobenius_cyclotomic(n: int, p: int) -> int:
    return cyclotomic_lab.frobenius_cyclotomic(n, p)


def empirical_density(
    n: int,
    target: Iterable[int],
    X: int,
    weighting: str = "uniform",
    subgroup: Optional[Sequence[int]] = None,
) -> EmpiricalEstimate:
    return cyclotomic_lab.empirical_density(n, target, X, weighting, subgroup)


def pm_frequencies(n: int, subgroup: Sequence[int], X: int) -> Dict[int, float]:
    return cyclotomic_lab.pm_frequencies(n, subgroup, X)


def relative_density(n: int, target: Iterable[int], within: Iterable[int], X: int) -> float:
    return cyclotomic_lab.relative_density(n, target, within, X)


def compare_theoretical(n: int, subgroup: Sequence[int], classes: Iterable[int], X: int) -> ComparisonReport:
    return cyclotomic_lab.compare_theoretical(n, subgroup, classes, X)
