"""
Finite G-modules in invariant-factor coordinates.

A = Z/o_1 + ... + Z/o_k; an element is a coordinate vector whose i-th entry is
read modulo o_i. The action of g is an integer k x k matrix acting on column
vectors, row i reduced modulo o_i.
"""

import hashlib
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import gcd
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .lattice import LatticeQuotient, kernel_mod
from ..errors import InputError, ModuleError
from ..groups.core import FiniteGroup, QuotientMap, Subgroup, subgroup_generated
from ..groups.presets import build_group
from ..storage.schemas import ModulePayload

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, ...], ...]


def _reduce_matrix(M: Sequence[Sequence[int]], orders: Sequence[int]) -> Matrix:
    return tuple(tuple(int(x) % orders[i] for x in row) for i, row in enumerate(M))


def _matmul(A: Matrix, B: Matrix, orders: Sequence[int]) -> Matrix:
    k = len(orders)
    return tuple(
        tuple(sum(A[i][t] * B[t][j] for t in range(k)) % orders[i] for j in range(k))
        for i in range(k)
    )


def _identity_matrix(orders: Sequence[int]) -> Matrix:
    k = len(orders)
    return tuple(tuple((1 if i == j else 0) % orders[i] for j in range(k)) for i in range(k))


@dataclass(frozen=True, eq=False)
class GModule:
    group: FiniteGroup = field(repr=False)
    orders: Tuple[int, ...]
    action: Tuple[Matrix, ...] = field(repr=False)
    name: str = ""

    @cached_property
    def fingerprint(self) -> str:
        payload = json.dumps([self.group.fingerprint, list(self.orders), self.action], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def __eq__(self, other) -> bool:
        return isinstance(other, GModule) and self.fingerprint == other.fingerprint

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    @property
    def dim(self) -> int:
        return len(self.orders)

    @property
    def size(self) -> int:
        result = 1
        for o in self.orders:
            result *= o
        return result

    @cached_property
    def exponent(self) -> int:
        result = 1
        for o in self.orders:
            result = result * o // gcd(result, o)
        return result

    def reduce(self, v: Sequence[int]) -> Tuple[int, ...]:
        return tuple(int(x) % o for x, o in zip(v, self.orders))

    def zero(self) -> Tuple[int, ...]:
        return tuple(0 for _ in self.orders)

    def add(self, u: Sequence[int], v: Sequence[int]) -> Tuple[int, ...]:
        return tuple((a + b) % o for a, b, o in zip(u, v, self.orders))

    def act(self, g: int, v: Sequence[int]) -> Tuple[int, ...]:
        M = self.action[g]
        return tuple(sum(M[i][j] * v[j] for j in range(self.dim)) % self.orders[i] for i in range(self.dim))

    def elements(self) -> Iterable[Tuple[int, ...]]:
        return product(*(range(o) for o in self.orders))

    @cached_property
    def acting_kernel(self) -> Subgroup:
        """N_A: elements acting as the identity."""
        I = _identity_matrix(self.orders)
        return Subgroup(parent=self.group, members=tuple(g for g in self.group.elements if self.action[g] == I))

    def restrict(self, H: Subgroup) -> "GModule":
        if H.parent != self.group:
            raise InputError("restriction target is not a subgroup of the acting group")
        return GModule(
            group=H.as_group,
            orders=self.orders,
            action=tuple(self.action[h] for h in H.members),
            name=f"{self.name}|res",
        )

    def descend(self, q: QuotientMap) -> "GModule":
        """The same A as a G/N-module; N must act trivially."""
        if q.source != self.group:
            raise InputError("quotient map does not start at the acting group")
        if not q.kernel.is_subgroup_of(self.acting_kernel):
            raise ModuleError("module does not descend: the kernel acts non-trivially")
        return GModule(
            group=q.target,
            orders=self.orders,
            action=tuple(self.action[r] for r in q.coset_representatives),
            name=f"{self.name}|inf",
        )


@dataclass(frozen=True, eq=False)
class Cocycle:
    module: GModule = field(repr=False)
    values: Tuple[Tuple[int, ...], ...]

    def is_cocycle(self) -> bool:
        A, G = self.module, self.module.group
        if any(self.values[G.identity]):
            return False
        for g in G.elements:
            fg = self.values[g]
            for h in G.elements:
                expected = A.add(fg, A.act(g, self.values[h]))
                if self.values[G.mul(g, h)] != expected:
                    return False
        return True

    def scaled(self, c: int) -> "Cocycle":
        A = self.module
        return Cocycle(module=A, values=tuple(A.reduce([c * x for x in v]) for v in self.values))

    def __add__(self, other: "Cocycle") -> "Cocycle":
        A = self.module
        return Cocycle(module=A, values=tuple(A.add(u, v) for u, v in zip(self.values, other.values)))


class CocycleSystem:
    """
    1-cocycles as a linear system in the values on a generating set.

    With S a generating set and a BFS spanning tree of the Cayley graph,
    f(x s) = f(x) + x.f(s) determines f from (f(s))_{s in S}; the cocycle
    identity holds exactly when every Cayley edge (x, s) satisfies it.
    """

    def __init__(self, module: GModule):
        self.module = module
        G = module.group
        k = module.dim
        self.gens = greedy_generators(G)
        self.nvars = k * len(self.gens)
        self.moduli = list(module.orders) * len(self.gens)
        orders = np.asarray(module.orders, dtype=np.int64)[:, None]

        # F[x] is the k x nvars matrix with f(x) = F[x] . vars
        F: Dict[int, np.ndarray] = {G.identity: np.zeros((k, self.nvars), dtype=np.int64)}
        queue = deque([G.identity])
        while queue:
            x = queue.popleft()
            Mx = np.asarray(module.action[x], dtype=np.int64)
            for idx, s in enumerate(self.gens):
                y = G.mul(x, s)
                if y not in F:
                    Fy = F[x].copy()
                    Fy[:, idx * k:(idx + 1) * k] += Mx
                    F[y] = Fy % orders
                    queue.append(y)
        self.F = F

        self.constraints: List[Tuple[List[int], int]] = []
        for x in G.elements:
            Mx = np.asarray(module.action[x], dtype=np.int64)
            for idx, s in enumerate(self.gens):
                R = F[G.mul(x, s)] - F[x]
                R[:, idx * k:(idx + 1) * k] -= Mx
                R %= orders
                for i in range(k):
                    if R[i].any():
                        self.constraints.append((R[i].tolist(), module.orders[i]))

    def expand(self, variables: Sequence[int]) -> Tuple[Tuple[int, ...], ...]:
        v = np.asarray([int(x) % m for x, m in zip(variables, self.moduli)], dtype=np.int64)
        A = self.module
        return tuple(A.reduce((self.F[x] @ v).tolist()) for x in A.group.elements)

    def variables_of(self, values: Sequence[Sequence[int]]) -> List[int]:
        out: List[int] = []
        for s in self.gens:
            out.extend(int(x) for x in values[s])
        return out

    def coboundary_variables(self, a: Sequence[int]) -> List[int]:
        A = self.module
        out: List[int] = []
        for s in self.gens:
            sa = A.act(s, a)
            out.extend((x - y) % o for x, y, o in zip(sa, a, A.orders))
        return out


def greedy_generators(G: FiniteGroup) -> Tuple[int, ...]:
    """A small generating set: elements of large order first, skipping redundant ones."""
    gens: List[int] = []
    covered = {G.identity}
    for g in sorted(G.elements, key=lambda x: (-G.element_order(x), x)):
        if g in covered:
            continue
        gens.append(g)
        covered = set(subgroup_generated(G, gens).members)
        if len(covered) == G.order:
            break
    return tuple(gens)


class ModuleBuilder:

    def build(
        self,
        group: FiniteGroup,
        orders: Sequence[int],
        action: Optional[Mapping[int, Sequence[Sequence[int]]]] = None,
        name: str = "",
    ) -> GModule:
        """Validate an action given on a generating set (or on every element)."""
        orders = tuple(int(o) for o in orders)
        if any(o < 1 for o in orders):
            raise ModuleError(f"cyclic factor orders must be positive, got {list(orders)}")
        identity = _identity_matrix(orders)
        if not action:
            return GModule(group=group, orders=orders, action=tuple(identity for _ in group.elements), name=name)

        given: Dict[int, Matrix] = {}
        for g, M in action.items():
            g = group.check_element(int(g))
            if len(M) != len(orders) or any(len(row) != len(orders) for row in M):
                raise ModuleError(f"action matrix of element {g} must be {len(orders)} x {len(orders)}")
            M = _reduce_matrix(M, orders)
            self._check_well_defined(M, orders, g)
            self._check_invertible(M, orders, g)
            given[g] = M

        if group.identity in given and given[group.identity] != identity:
            raise ModuleError("the identity must act as the identity matrix")
        gens = [g for g in sorted(given) if g != group.identity]
        if len(subgroup_generated(group, gens).members) != group.order:
            raise ModuleError("action must be given on a generating set of the group")

        # Propagate along right multiplication and check every Cayley edge
        table: Dict[int, Matrix] = {group.identity: identity}
        queue = deque([group.identity])
        while queue:
            x = queue.popleft()
            for s in gens:
                y = group.mul(x, s)
                Mxs = _matmul(table[x], given[s], orders)
                if y not in table:
                    table[y] = Mxs
                    queue.append(y)
                elif table[y] != Mxs:
                    raise ModuleError(
                        f"action is incompatible with the Cayley table at "
                        f"({group.labels[x]}, {group.labels[s]})"
                    )
        for g, M in given.items():
            if table[g] != M:
                raise ModuleError(f"action of element {group.labels[g]} contradicts the generators")
        return GModule(group=group, orders=orders, action=tuple(table[g] for g in group.elements), name=name)

    def _check_well_defined(self, M: Matrix, orders: Sequence[int], g: int) -> None:
        for i, row in enumerate(M):
            for j, x in enumerate(row):
                if (x * orders[j]) % orders[i]:
                    raise ModuleError(f"action matrix of element {g} is not well defined on A (entry {i},{j})")

    def _check_invertible(self, M: Matrix, orders: Sequence[int], g: int) -> None:
        # Injective on the finite group A means bijective
        constraints = [(list(row), orders[i]) for i, row in enumerate(M)]
        basis, pivots = kernel_mod(constraints, orders)
        relations = [[o if j == i else 0 for j in range(len(orders))] for i, o in enumerate(orders)]
        if LatticeQuotient(basis, pivots, relations).order != 1:
            raise ModuleError(f"action matrix of element {g} is not invertible")


# Global instances
module_builder = ModuleBuilder()


# Convenience functions
def build_module(
    group: FiniteGroup,
    orders: Sequence[int],
    action: Optional[Mapping[int, Sequence[Sequence[int]]]] = None,
    name: str = "",
) -> GModule:
    return module_builder.build(group, orders, action, name)


def trivial_module(group: FiniteGroup, orders: Sequence[int]) -> GModule:
    return module_builder.build(group, orders, None, name=f"trivial {list(orders)}")


def sign_module(group: FiniteGroup, orders: Sequence[int], kernel: Subgroup) -> GModule:
    """Elements outside an index-2 subgroup act by -1."""
    if kernel.parent != group or kernel.index != 2:
        raise ModuleError("a sign action needs an index-2 subgroup of the acting group")
    k = len(orders)
    action = {}
    for g in group.elements:
        sign = 1 if kernel.contains(g) else -1
        action[g] = [[sign if i == j else 0 for j in range(k)] for i in range(k)]
    return module_builder.build(group, orders, action, name=f"sign {list(orders)} ker={list(kernel.members)}")


def multiplication_module(group: FiniteGroup, n: int) -> GModule:
    """(Z/n)* acting on Z/n by multiplication; element labels must be the residues."""
    try:
        residues = [int(label) for label in group.labels]
    except ValueError:
        raise ModuleError("multiplication action needs a unit group labelled by residues")
    action = {g: [[residues[g] % n]] for g in group.elements}
    return module_builder.build(group, [n], action, name=f"Z/{n} multiplication")


def induced_module(group: FiniteGroup, p: int, copies: int = 1) -> GModule:
    """F_p[G]^copies with G permuting the basis e_h by left multiplication."""
    n = group.order
    dim = n * copies
    action = {}
    for g in group.elements:
        M = [[0] * dim for _ in range(dim)]
        for c in range(copies):
            for h in group.elements:
                M[c * n + group.mul(g, h)][c * n + h] = 1
        action[g] = M
    return module_builder.build(group, [p] * dim, action, name=f"F_{p}[G]^{copies}")


def module_from_payload(payload: ModulePayload) -> GModule:
    """Build a module from its JSON description."""
    group = build_group(payload.group)
    action = payload.action
    if action.kind == "trivial":
        return trivial_module(group, payload.orders)
    if action.kind == "sign":
        return sign_module(group, payload.orders, subgroup_generated(group, action.kernel))
    if action.kind == "multiplication":
        if len(payload.orders) != 1:
            raise ModuleError("a multiplication action needs a single cyclic factor Z/n")
        return multiplication_module(group, payload.orders[0])
    matrices = {int(g): M for g, M in action.gens.items()}
    return build_module(group, payload.orders, matrices, name=f"module {payload.orders}")
