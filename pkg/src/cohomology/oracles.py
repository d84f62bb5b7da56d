"""
Enumeration oracles, independent of the lattice code path.

h1_oracle and h1_star_oracle list every cocycle; cyclic_oracle evaluates the Herbrand
quotients ker N / im(sigma - 1) and A^G / N A by walking through A.
"""

import logging
from collections import deque
from itertools import product
from typing import Callable, Dict, Iterable, List, Set, Tuple

from sympy import factorint

from .cohomology import H1Result
from .modules import Cocycle, GModule, greedy_generators
from ..config.settings import settings
from ..errors import CapExceededError, InputError

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


def factors_from_torsion(order: int, torsion_count: Callable[[int], int]) -> List[int]:
    """
    Invariant factors of a finite abelian group of the given order, where
    torsion_count(m) returns the number of elements killed by m.
    """
    if order == 1:
        return []
    per_prime: Dict[int, List[int]] = {}
    for p, e in factorint(order).items():
        # t[j] = log_p |Q[p^j]|; t[j] - t[j-1] cyclic factors have order >= p^j
        t = [0]
        j = 0
        while t[-1] < e:
            j += 1
            count = torsion_count(p ** j)
            log = 0
            while count > 1:
                count //= p
                log += 1
            t.append(log)
        at_least = [t[i] - t[i - 1] for i in range(1, len(t))]
        exponents = []
        for i, n in enumerate(at_least):
            following = at_least[i + 1] if i + 1 < len(at_least) else 0
            exponents.extend([i + 1] * (n - following))
        per_prime[p] = sorted(exponents, reverse=True)

    # Largest p-parts multiply into the largest invariant factor
    length = max(len(v) for v in per_prime.values())
    factors = []
    for i in range(length):
        d = 1
        for p, exps in per_prime.items():
            if i < len(exps):
                d *= p ** exps[i]
        factors.append(d)
    return sorted(factors)


def _quotient_factors(elements: Iterable[Vector], subgroup: Set[Vector], scale: Callable[[Vector, int], Vector]) -> List[int]:
    elements = list(elements)
    order = len(elements) // len(subgroup)
    return factors_from_torsion(order, lambda m: sum(1 for x in elements if scale(x, m) in subgroup) // len(subgroup))


def _scale_values(A: GModule) -> Callable[[Tuple[Vector, ...], int], Tuple[Vector, ...]]:
    return lambda values, m: tuple(A.reduce([m * x for x in v]) for v in values)


def _cocycles_and_coboundaries(A: GModule) -> Tuple[List[Tuple[Vector, ...]], Set[Tuple[Vector, ...]]]:
    G = A.group
    if A.size ** (G.order - 1) > settings.ORACLE_CAP:
        raise CapExceededError(f"|A|^(|G|-1) = {A.size}^{G.order - 1} exceeds oracle cap {settings.ORACLE_CAP}")

    gens = greedy_generators(G)
    points = list(A.elements())
    cocycles: List[Tuple[Vector, ...]] = []
    for choice in product(points, repeat=len(gens)):
        # Spread the values on the generators along a BFS tree, then test every pair
        values: Dict[int, Vector] = {G.identity: A.zero()}
        queue = deque([G.identity])
        while queue:
            x = queue.popleft()
            for s, fs in zip(gens, choice):
                y = G.mul(x, s)
                if y not in values:
                    values[y] = A.add(values[x], A.act(x, fs))
                    queue.append(y)
        candidate = Cocycle(module=A, values=tuple(values[g] for g in G.elements))
        if candidate.is_cocycle():
            cocycles.append(candidate.values)

    coboundaries = set()
    for a in points:
        coboundaries.add(tuple(A.add(A.act(g, a), A.reduce([-x for x in a])) for g in G.elements))
    return cocycles, coboundaries


def h1_oracle(A: GModule) -> H1Result:
    """H^1 by listing all cocycles; the result has invariant factors but no generators."""
    cocycles, coboundaries = _cocycles_and_coboundaries(A)
    factors = _quotient_factors(cocycles, coboundaries, _scale_values(A))
    logger.debug("oracle: |Z1| = %d, |B1| = %d, factors %s", len(cocycles), len(coboundaries), factors)
    return H1Result(A, factors, [], coboundary=lambda c: tuple(c.values) in coboundaries)


def h1_star_oracle(A: GModule) -> H1Result:
    """
    H^1_* by listing cocycles. On a cyclic subgroup <g> a cocycle is a
    coboundary exactly when f(g) lies in (g - 1)A, so the locally trivial
    cocycles are those with f(g) in (g - 1)A for every g.
    """
    G = A.group
    cocycles, coboundaries = _cocycles_and_coboundaries(A)
    points = list(A.elements())
    images = [
        {A.add(A.act(g, a), A.reduce([-x for x in a])) for a in points}
        for g in G.elements
    ]
    local = [values for values in cocycles if all(values[g] in images[g] for g in G.elements)]
    factors = _quotient_factors(local, coboundaries, _scale_values(A))
    logger.debug("oracle: |Z1_*| = %d, |B1| = %d, factors %s", len(local), len(coboundaries), factors)
    return H1Result(A, factors, [], coboundary=lambda c: tuple(c.values) in coboundaries)



def cyclic_oracle(A: GModule) -> Dict[str, List[int]]:
    """Invariant factors of H^1 and H^2 for a cyclic acting group, from the Herbrand quotients."""
    G = A.group
    sigma = next((g for g in G.elements if G.element_order(g) == G.order), None)
    if sigma is None:
        raise InputError(f"{G.describe()} is not cyclic")
    if A.size > settings.ORACLE_CAP:
        raise CapExceededError(f"|A| = {A.size} exceeds oracle cap {settings.ORACLE_CAP}")

    powers = [G.power(sigma, i) for i in range(G.order)]
    points = [tuple(a) for a in A.elements()]

    def norm(a: Vector) -> Vector:
        total = A.zero()
        for g in powers:
            total = A.add(total, A.act(g, a))
        return total

    def scale(a: Vector, m: int) -> Vector:
        return A.reduce([m * x for x in a])

    kernel_norm = [a for a in points if not any(norm(a))]
    augmentation = {A.add(A.act(sigma, a), scale(a, -1)) for a in points}
    fixed = [a for a in points if A.act(sigma, a) == a]
    norms = {norm(a) for a in points}
    return {
        "h1": _quotient_factors(kernel_norm, augmentation, scale),
        "h2": _quotient_factors(fixed, norms, scale),
    }
